//! Closed-form and quadrature values of the group constants `c_G`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{preset, StratifiedAlgebra};
use crate::error::{Error, Result};
use crate::numerics::{gamma, integrate_half_line_de, integrate_half_line_gk};

/// Where a reported number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "[PAPER-FORMULA]")]
    PaperFormula,
    #[serde(rename = "[QUADRATURE]")]
    Quadrature,
    #[serde(rename = "[FIT]")]
    Fit,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PaperFormula => "[PAPER-FORMULA]",
            Self::Quadrature => "[QUADRATURE]",
            Self::Fit => "[FIT]",
        })
    }
}

/// `Vol(S^{d−1}) / (d (2π)^d)`, the Weyl constant of `ℝ^d`.
pub fn euclidean_constant(d: u32) -> f64 {
    let d = f64::from(d);
    let sphere = 2.0 * PI.powf(d / 2.0) / gamma(d / 2.0);
    sphere / (d * (2.0 * PI).powf(d))
}

fn sinh_ratio(l: f64, n: i32) -> f64 {
    let r = if l < 1e-6 { 1.0 - l * l / 6.0 } else { l / l.sinh() };
    r.powi(n)
}

fn hn_prefactor(n: u32) -> f64 {
    let fact: f64 = (1..=n + 1).map(f64::from).product();
    1.0 / (fact * (4.0 * PI).powi(n as i32 + 1))
}

/// `1/(n+1)! · (4π)^{−n−1} ∫_0^∞ (λ / sinh λ)^n dλ` for the Heisenberg group
/// of dimension `2n+1`, by adaptive Gauss–Kronrod quadrature.
pub fn heat_constant_hn(n: u32) -> Result<f64> {
    Ok(heat_constant_hn_both(n)?.0)
}

/// The Heisenberg constant by Gauss–Kronrod and by double-exponential
/// quadrature, for cross-checking.
pub fn heat_constant_hn_both(n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("Heisenberg index n must be at least 1".into()));
    }
    let k = n as i32;
    let gk = integrate_half_line_gk(|l| sinh_ratio(l, k), 1e-13);
    let de = integrate_half_line_de(|l| sinh_ratio(l, k), 1e-13);
    let c = hn_prefactor(n);
    Ok((c * gk, c * de))
}

/// Heat-kernel constant of a preset group when a closed form is known:
/// abelian groups and the first Heisenberg group.
pub fn group_constant(alg: &StratifiedAlgebra) -> Result<(f64, Provenance)> {
    if alg.steps() == 1 {
        return Ok((euclidean_constant(alg.dimension() as u32), Provenance::PaperFormula));
    }
    if *alg == preset("h1")? {
        return Ok((heat_constant_hn(1)?, Provenance::Quadrature));
    }
    Err(Error::Input(format!(
        "no closed-form constant is known for algebra `{}`",
        alg.name()
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

/// Table of the constants used as targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub entries: Vec<ConstantEntry>,
}

impl ConstantTable {
    /// `c_{ℝ^d}` for `d ≤ 3` and `c_{ℍ^n}` for `n ≤ 2`.
    pub fn standard() -> Result<Self> {
        let mut t = Self::default();
        for d in 1..=3 {
            t.push(format!("c_R{d}"), euclidean_constant(d), Provenance::PaperFormula);
        }
        for n in 1..=2 {
            t.push(format!("c_H{n}"), heat_constant_hn(n)?, Provenance::Quadrature);
        }
        Ok(t)
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, provenance: Provenance) {
        self.entries.push(ConstantEntry {
            name: name.into(),
            value,
            provenance,
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    /// Every entry is positive and finite.
    pub fn is_valid(&self) -> bool {
        self.entries.iter().all(|e| e.value.is_finite() && e.value > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_values() {
        assert!((euclidean_constant(1) - 1.0 / PI).abs() < 1e-15);
        assert!((euclidean_constant(2) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((euclidean_constant(3) - 1.0 / (6.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn first_heisenberg_constant_is_one_over_128() {
        // ∫ λ/sinh λ = π²/4 gives (1/2)(4π)^{-2}(π²/4).
        let c = heat_constant_hn(1).unwrap();
        assert!((c / (1.0 / 128.0) - 1.0).abs() < 1e-10, "{c}");
    }

    #[test]
    fn quadratures_agree_for_second_heisenberg_group() {
        let (a, b) = heat_constant_hn_both(2).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs());
        // ∫ (λ/sinh λ)² = π²/6.
        let closed = hn_prefactor(2) * PI * PI / 6.0;
        assert!((a / closed - 1.0).abs() < 1e-10);
        assert!(matches!(heat_constant_hn(0), Err(Error::Domain(_))));
    }

    #[test]
    fn table_and_group_constants() {
        let t = ConstantTable::standard().unwrap();
        assert!(t.is_valid());
        assert_eq!(t.entries.len(), 5);
        let (c, p) = group_constant(&preset("h1").unwrap()).unwrap();
        assert!((c - 1.0 / 128.0).abs() < 1e-12);
        assert_eq!(p, Provenance::Quadrature);
        assert!(group_constant(&preset("bony2").unwrap()).is_err());
        assert_eq!(serde_json::to_string(&Provenance::Fit).unwrap(), "\"[FIT]\"");
    }
}
