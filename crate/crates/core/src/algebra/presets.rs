use serde::Serialize;

use super::StratifiedAlgebra;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub layers: Vec<usize>,
    pub d_hom: usize,
}

const NAMES: [(&str, &str); 5] = [
    ("r1", "abelian R^1"),
    ("r2", "abelian R^2"),
    ("r3", "abelian R^3"),
    ("h1", "Heisenberg algebra, [X,Y] = 4T"),
    ("bony2", "Bony fields d/dt, d/ds + t d/dx1 + t^2 d/dx2 (Engel algebra)"),
];

/// Shipped algebras, in a fixed order.
pub fn presets() -> Vec<PresetInfo> {
    NAMES
        .iter()
        .map(|&(name, description)| {
            let a = preset(name).expect("shipped preset is well formed");
            PresetInfo {
                name,
                description,
                layers: a.layer_dims().to_vec(),
                d_hom: a.homogeneous_dimension(),
            }
        })
        .collect()
}

pub fn preset(name: &str) -> Result<StratifiedAlgebra> {
    match name {
        "r1" | "r2" | "r3" => {
            let d: usize = name[1..].parse().expect("digit suffix");
            abelian(d)
        }
        "h1" => heisenberg(),
        "bony2" => bony(2),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (known: {})",
            NAMES.map(|(n, _)| n).join(", ")
        ))),
    }
}

pub fn abelian(d: usize) -> Result<StratifiedAlgebra> {
    let labels = (1..=d).map(|i| format!("x{i}")).collect();
    StratifiedAlgebra::from_brackets(vec![d], &[])?
        .with_name(format!("r{d}"))
        .with_labels(labels)
}

/// Basis `(X, Y, T)` with `[X, Y] = 4T`, so that the left-invariant fields
/// are `X = ∂x − 2y∂t` and `Y = ∂y + 2x∂t`.
pub fn heisenberg() -> Result<StratifiedAlgebra> {
    StratifiedAlgebra::from_brackets(vec![2, 1], &[(0, 1, 2, 4.0)])?
        .with_name("h1")
        .with_labels(vec!["X".into(), "Y".into(), "T".into()])
}

/// Lie algebra generated by `∂_t` and `∂_s + Σ_{k≤n} t^k ∂_{x_k}`.
///
/// With `e_1 = ∂_t`, `e_2` the second field and `e_{m+1} = [e_1, e_m]`, the
/// only nonzero brackets are `[e_1, e_m] = e_{m+1}` for `2 ≤ m ≤ n + 1`.
pub fn bony(n: usize) -> Result<StratifiedAlgebra> {
    let mut layers = vec![2];
    layers.extend(std::iter::repeat(1).take(n));
    let brackets: Vec<_> = (1..=n).map(|m| (0, m, m + 1, 1.0)).collect();
    let mut labels = vec!["T".to_string(), "S".to_string()];
    labels.extend((1..=n).map(|k| format!("Z{k}")));
    StratifiedAlgebra::from_brackets(layers, &brackets)?
        .with_name(format!("bony{n}"))
        .with_labels(labels)
}
