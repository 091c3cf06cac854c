//! Product integration against `k_a(u) = u^{-1/2} e^{-a/u}`, `u = t - s`,
//! for densities that are piecewise linear plus a multiple of `s^{-1/2}`.
//! `a = x²/4` is the off-boundary shift; `a = 0` is the plain Abel kernel.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, UbvpError};

/// `∫ u^{-1/2} e^{-a/u} du`.
fn f0(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return 2.0 * u.sqrt();
    }
    2.0 * u.sqrt() * (-a / u).exp() - 2.0 * (PI * a).sqrt() * libm::erfc((a / u).sqrt())
}

/// `∫ u^{1/2} e^{-a/u} du`.
fn f1(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return 2.0 / 3.0 * u * u.sqrt();
    }
    2.0 / 3.0 * (u * u.sqrt() * (-a / u).exp() - a * f0(u, a))
}

/// `∫_p^q y(s) k_a(t - s) ds` for `y` linear from `y(p) = yp` to
/// `y(q) = yq`, `p < q ≤ t`.
fn linear_piece(p: f64, q: f64, yp: f64, yq: f64, t: f64, a: f64) -> f64 {
    let (up, uq) = (t - p, t - q);
    let i0 = f0(up, a) - f0(uq, a);
    // ∫ (s - p) k ds = ∫ (up - u) k du over [uq, up].
    let i1 = up * i0 - (f1(up, a) - f1(uq, a));
    yp * i0 + (yq - yp) / (q - p) * i1
}

/// `∫_0^t s^{-1/2} (t-s)^{-1/2} e^{-a/(t-s)} ds = π erfc(√(a/t))`.
fn inverse_sqrt_moment(t: f64, a: f64) -> f64 {
    PI * libm::erfc((a / t).sqrt())
}

/// `y(s) ≈ c s^{-1/2} + r(s)` with `r` piecewise linear on `0, t_1, …, t_n`.
#[derive(Debug, Clone)]
pub(crate) struct SingularSplit {
    pub c: f64,
    nodes: Vec<f64>,
    r: Vec<f64>,
}

impl SingularSplit {
    /// Fits `a + b s + c s^{-1/2}` through the first three samples, so an
    /// inverse square root at `s = 0` is carried exactly; the rest is
    /// linear between samples and extrapolated linearly to `s = 0`.
    pub fn new(t: &[f64], y: &[f64]) -> Result<Self> {
        let c = if t.len() >= 3 {
            let coeffs = fit3(t, y, |s| [1.0, s, 1.0 / s.sqrt()])?;
            coeffs[2]
        } else {
            0.0
        };
        let rest: Vec<f64> = t.iter().zip(y).map(|(s, v)| v - c / s.sqrt()).collect();
        let r0 = match rest.len() {
            1 => rest[0],
            _ => rest[0] - (rest[1] - rest[0]) / (t[1] - t[0]) * t[0],
        };
        let mut nodes = Vec::with_capacity(t.len() + 1);
        nodes.push(0.0);
        nodes.extend_from_slice(t);
        let mut r = Vec::with_capacity(t.len() + 1);
        r.push(r0);
        r.extend(rest);
        Ok(SingularSplit { c, nodes, r })
    }

    /// `∫_0^t y(s) k_a(t - s) ds` for `0 < t ≤ t_n`.
    pub fn integrate(&self, t: f64, a: f64) -> f64 {
        let mut sum = self.c * inverse_sqrt_moment(t, a);
        for j in 0..self.nodes.len() - 1 {
            let (p, q) = (self.nodes[j], self.nodes[j + 1]);
            if p >= t {
                break;
            }
            if q <= t {
                sum += linear_piece(p, q, self.r[j], self.r[j + 1], t, a);
            } else {
                let rt = self.r[j] + (self.r[j + 1] - self.r[j]) * (t - p) / (q - p);
                sum += linear_piece(p, t, self.r[j], rt, t, a);
            }
        }
        sum
    }

    pub fn last_node(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

/// Coefficients of the combination of `basis` through the first three
/// samples.
pub(crate) fn fit3(t: &[f64], y: &[f64], basis: impl Fn(f64) -> [f64; 3]) -> Result<[f64; 3]> {
    let rows: Vec<[f64; 3]> = t[..3].iter().map(|&s| basis(s)).collect();
    let m = Matrix3::from_fn(|i, j| rows[i][j]);
    let sol = m
        .lu()
        .solve(&Vector3::new(y[0], y[1], y[2]))
        .ok_or_else(|| UbvpError::numeric("start-up fit is singular"))?;
    Ok([sol[0], sol[1], sol[2]])
}

/// `d/dt ∫_0^t g(s)(t-s)^{-1/2} ds` at every grid time for `g` sampled on
/// the grid. `g ≈ α + β√s + r(s)` with `α, β` fitted
/// on the first three samples; the `α` and `β` parts are integrated and
/// differentiated in closed form, `r` by linear product integration and
/// three-point differences (one-sided at both ends).
pub(crate) fn abel_derivative(t: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    let [alpha, beta, _] = fit3(t, g, |s| [1.0, s.sqrt(), s])?;
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(t);
    let mut r = vec![0.0];
    r.extend(t.iter().zip(g).map(|(s, v)| v - alpha - beta * s.sqrt()));

    let mut integral = vec![0.0; n];
    for (k, &tk) in t.iter().enumerate() {
        integral[k] = (0..=k).map(|j| linear_piece(nodes[j], nodes[j + 1], r[j], r[j + 1], tk, 0.0)).sum();
    }
    let d = three_point_derivative(t, &integral);
    Ok(t.iter()
        .zip(d)
        .map(|(&tk, dk)| alpha / tk.sqrt() + beta * PI / 2.0 + dk)
        .collect())
}

/// Derivative of samples on a non-uniform grid: centered three-point
/// formula inside, one-sided three-point formulas at the ends.
pub(crate) fn three_point_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let weights = |x: f64, a: f64, b: f64, c: f64| {
        // Derivative at x of the quadratic through a, b, c.
        [
            ((x - b) + (x - c)) / ((a - b) * (a - c)),
            ((x - a) + (x - c)) / ((b - a) * (b - c)),
            ((x - a) + (x - b)) / ((c - a) * (c - b)),
        ]
    };
    (0..n)
        .map(|k| {
            let s = k.saturating_sub(1).min(n - 3);
            let w = weights(t[k], t[s], t[s + 1], t[s + 2]);
            w[0] * f[s] + w[1] * f[s + 1] + w[2] * f[s + 2]
        })
        .collect()
}
