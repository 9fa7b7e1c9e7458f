//! Sparse real polynomials in the exponential coordinates, used for the
//! coefficients of left-invariant vector fields.

use std::collections::BTreeMap;

/// `Σ c_α x^α` keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(exps.clone()).or_insert(0.0);
        *v += c;
        // Drop cancellations so that `depends_on` reflects the true support.
        if v.abs() <= 1e-14 * c.abs() {
            self.terms.remove(&exps);
        }
    }

    pub fn add_scaled(&mut self, other: &Polynomial, s: f64) {
        for (e, c) in other.terms() {
            self.add_term(e.to_vec(), s * c);
        }
    }

    /// `x_i · p`.
    pub fn times_variable(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in self.terms() {
            let mut e = e.to_vec();
            e[i] += 1;
            out.add_term(e, c);
        }
        out
    }

    /// `∂p/∂x_i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in self.terms() {
            if e[i] > 0 {
                let mut e = e.to_vec();
                let k = e[i];
                e[i] -= 1;
                out.add_term(e, c * k as f64);
            }
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Whether `x_i` occurs in any monomial.
    pub fn depends_on(&self, i: usize) -> bool {
        self.terms().any(|(e, _)| e[i] > 0)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms().map(|(e, _)| e.iter().sum()).max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_derivative() {
        // (x + 2y)(x - y) = x² + xy - 2y²
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let mut a = x.clone();
        a.add_scaled(&y, 2.0);
        let mut b = x.clone();
        b.add_scaled(&y, -1.0);
        let p = a.mul(&b);
        assert_eq!(p.eval(&[3.0, 5.0]), 9.0 + 15.0 - 50.0);
        assert_eq!(p.derivative(1).eval(&[3.0, 5.0]), 3.0 - 20.0);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn cancellation_removes_support() {
        let x = Polynomial::variable(2, 0);
        let mut p = x.clone();
        p.add_scaled(&x, -1.0);
        assert!(p.is_zero());
        assert!(!p.depends_on(0));
    }
}
