//! One-dimensional rules and Legendre polynomials shared by the surface,
//! volume and heat discretizations.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Result, UbvpError};

/// Nodes and weights of a one-dimensional rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre rule with `n` points on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Rule1d> {
    let degree = NonZeroUsize::new(n)
        .ok_or_else(|| UbvpError::invalid("Gauss-Legendre rule needs at least one node"))?;
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(UbvpError::invalid(format!(
            "Gauss-Legendre interval [{a}, {b}] is empty or not finite"
        )));
    }
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(degree)
        .as_node_weight_pairs()
        .to_vec();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(Rule1d {
        nodes: pairs.iter().map(|&(x, _)| mid + half * x).collect(),
        weights: pairs.iter().map(|&(_, w)| half * w).collect(),
    })
}

/// `P_0(x), ..., P_lmax(x)` by the three-term recurrence.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax == 0 {
        return p;
    }
    p.push(x);
    for n in 1..lmax {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        p.push(next);
    }
    p
}

/// `sum_n coeffs[n] * P_n(x)` by Clenshaw's recurrence.
pub fn legendre_series(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for n in (0..coeffs.len()).rev() {
        let nf = n as f64;
        let alpha = (2.0 * nf + 1.0) / (nf + 1.0) * x;
        let beta = -(nf + 1.0) / (nf + 2.0);
        let b0 = coeffs[n] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Composite trapezoid weights for a strictly increasing, possibly
/// non-uniform grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = grid[i] - grid[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8, 0.0, 2.0).unwrap();
        let got = rule.integrate(|x| x.powi(15));
        assert!((got - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gauss_legendre_rejects_empty() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn clenshaw_matches_table() {
        let coeffs = [0.3, -1.2, 0.7, 2.0, -0.1];
        for &x in &[-0.9, -0.2, 0.0, 0.45, 1.0] {
            let p = legendre_table(4, x);
            let direct: f64 = coeffs.iter().zip(&p).map(|(c, v)| c * v).sum();
            assert!((legendre_series(&coeffs, x) - direct).abs() < 1e-13);
        }
        // P_3(x) = (5x^3 - 3x)/2
        let x: f64 = 0.37;
        assert!((legendre_table(3, x)[3] - 0.5 * (5.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_on_nonuniform_grid() {
        let w = trapezoid_weights(&[0.0, 0.5, 2.0]);
        assert_eq!(w, vec![0.25, 1.0, 0.75]);
    }
}
