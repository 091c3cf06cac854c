use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::expr::Expr;

use super::S_MAX;

/// Behaviour of the initial data `v` beyond the last sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XDecay {
    /// `v = 0` beyond the grid.
    CompactlySupported,
    /// Grows slower than `exp(ξ²/4t)`; needs a closed-form extension.
    GaussianDominated,
    /// Polynomial growth; needs a closed-form extension.
    Polynomial,
}

impl XDecay {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "compactly-supported" => Ok(XDecay::CompactlySupported),
            "gaussian-dominated" => Ok(XDecay::GaussianDominated),
            "polynomial" => Ok(XDecay::Polynomial),
            other => Err(UbvpError::invalid(format!("unknown x-decay tag {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            XDecay::CompactlySupported => "compactly-supported",
            XDecay::GaussianDominated => "gaussian-dominated",
            XDecay::Polynomial => "polynomial",
        }
    }
}

/// Closed form of `v` used beyond the sampled grid.
#[derive(Clone)]
pub struct Extension {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Extension {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Extension { label: label.into(), f: Arc::new(f) }
    }

    pub fn from_expr(expr: Expr) -> Self {
        Extension { label: expr.to_string(), f: Arc::new(move |x| expr.eval(x)) }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse(src)?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extension").field("label", &self.label).finish()
    }
}

/// Samples of the initial data `v(x) = u(+0, x)` on an increasing grid of
/// positive abscissae, with a model for `v` beyond the grid.
#[derive(Debug, Clone)]
pub struct InitialTrace {
    x_grid: Vec<f64>,
    values: Vec<f64>,
    decay: XDecay,
    extension: Option<Extension>,
}

impl InitialTrace {
    pub fn new(x_grid: Vec<f64>, values: Vec<f64>, decay: XDecay, extension: Option<Extension>) -> Result<Self> {
        check_grid("x", &x_grid)?;
        check_values("v", &values, x_grid.len())?;
        if decay != XDecay::CompactlySupported && extension.is_none() {
            return Err(UbvpError::invalid(format!(
                "v tagged {} needs a closed-form extension beyond x = {}",
                decay.as_str(),
                x_grid[x_grid.len() - 1]
            )));
        }
        Ok(InitialTrace { x_grid, values, decay, extension })
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn decay(&self) -> XDecay {
        self.decay
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    /// Same grid and tail model with different samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        check_values("v", &values, self.x_grid.len())?;
        Ok(InitialTrace { values, ..self.clone() })
    }

    /// True when `v` beyond the grid does not depend on a closed form, so
    /// `v ↦ GaussTerm(v)` is linear in the samples.
    pub fn has_zero_tail(&self) -> bool {
        self.decay == XDecay::CompactlySupported
    }

    /// `v(x)`: local cubic interpolation on the grid (extrapolated below
    /// the first node), tail model beyond the last node.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x_grid.len();
        if x > self.x_grid[n - 1] {
            return match (&self.extension, self.decay) {
                (_, XDecay::CompactlySupported) => 0.0,
                (Some(ext), _) => ext.eval(x),
                (None, _) => unreachable!("checked at construction"),
            };
        }
        let m = n.min(4);
        let i = self.x_grid.partition_point(|&g| g < x);
        let start = i.saturating_sub(m / 2).min(n - m);
        lagrange(&self.x_grid[start..start + m], &self.values[start..start + m], x)
    }

    /// Checks that `v e^{-ξ²/4t}` is negligible past the truncation point
    /// `ξ = 2√t·S_MAX` for every `t ≤ t_max`.
    pub fn check_integrable(&self, t_max: f64) -> Result<()> {
        if self.has_zero_tail() {
            return Ok(());
        }
        let ext = self.extension.as_ref().expect("checked at construction");
        let scale = 1.0 + self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        for s in [S_MAX, 1.25 * S_MAX, 1.5 * S_MAX] {
            let xi = 2.0 * t_max.sqrt() * s;
            let v = ext.eval(xi);
            if !v.is_finite() || v.abs() * (-s * s).exp() > 1e-12 * scale {
                return Err(UbvpError::invalid(format!(
                    "v = {} is not integrable against exp(-ξ²/4t) up to t = {t_max} (v({xi}) = {v:e})",
                    ext.label()
                )));
            }
        }
        Ok(())
    }
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut l = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                l *= (x - xj) / (xi - xj);
            }
        }
        sum += l * yi;
    }
    sum
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(UbvpError::invalid(format!("{name} grid is empty")));
    }
    if !grid.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(UbvpError::invalid(format!("{name} grid must be positive and finite")));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(UbvpError::invalid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn check_values(name: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(UbvpError::invalid(format!("{name} has {} values, grid has {n}", values.len())));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(UbvpError::invalid(format!("{name} has non-finite values")));
    }
    Ok(())
}

/// Boundary data of a caloric function on the quarter plane: `v` at
/// `t = 0`, and `φ = u(t, +0)`, `ψ = u_x(t, +0)` on a time grid.
#[derive(Debug, Clone)]
pub struct CaloricTraces {
    pub initial: InitialTrace,
    t_grid: Vec<f64>,
    phi: Option<Vec<f64>>,
    psi: Option<Vec<f64>>,
}

impl CaloricTraces {
    pub fn new(initial: InitialTrace, t_grid: Vec<f64>) -> Result<Self> {
        check_grid("t", &t_grid)?;
        Ok(CaloricTraces { initial, t_grid, phi: None, psi: None })
    }

    pub fn with_phi(mut self, phi: Vec<f64>) -> Result<Self> {
        check_values("phi", &phi, self.t_grid.len())?;
        self.phi = Some(phi);
        Ok(self)
    }

    pub fn with_psi(mut self, psi: Vec<f64>) -> Result<Self> {
        check_values("psi", &psi, self.t_grid.len())?;
        self.psi = Some(psi);
        Ok(self)
    }

    pub fn without_phi(mut self) -> Self {
        self.phi = None;
        self
    }

    pub fn without_psi(mut self) -> Self {
        self.psi = None;
        self
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn phi(&self) -> Option<&[f64]> {
        self.phi.as_deref()
    }

    pub fn psi(&self) -> Option<&[f64]> {
        self.psi.as_deref()
    }

    pub(crate) fn require_phi(&self) -> Result<&[f64]> {
        self.phi().ok_or_else(|| UbvpError::invalid("phi trace is missing"))
    }

    pub(crate) fn require_psi(&self) -> Result<&[f64]> {
        self.psi().ok_or_else(|| UbvpError::invalid("psi trace is missing"))
    }
}

/// `t_k = k·t_max/n`, `k = 1..=n`; `t = 0` is never a grid point.
pub fn uniform_grid(max: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(max.is_finite() && max > 0.0) {
        return Err(UbvpError::invalid(format!("uniform grid needs n > 0 and max > 0, got n = {n}, max = {max}")));
    }
    Ok((1..=n).map(|k| k as f64 * max / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let x = uniform_grid(4.0, 16).unwrap();
        let v: Vec<f64> = x.iter().map(|x| x * x * x - 2.0 * x).collect();
        let init = InitialTrace::new(x, v, XDecay::Polynomial, Some(Extension::parse("x^3 - 2*x").unwrap())).unwrap();
        for p in [0.01, 0.3, 1.77, 3.99, 4.0, 7.5] {
            let want = p * p * p - 2.0 * p;
            assert!((init.eval(p) - want).abs() < 1e-11, "{p}");
        }
    }

    #[test]
    fn tails() {
        let x = uniform_grid(2.0, 8).unwrap();
        let compact = InitialTrace::new(x.clone(), vec![1.0; 8], XDecay::CompactlySupported, None).unwrap();
        assert_eq!(compact.eval(2.5), 0.0);
        assert!(compact.check_integrable(100.0).is_ok());
        assert!(InitialTrace::new(x.clone(), vec![1.0; 8], XDecay::Polynomial, None).is_err());
        let wild = InitialTrace::new(x, vec![1.0; 8], XDecay::GaussianDominated, Some(Extension::parse("exp(x^2)").unwrap()))
            .unwrap();
        assert!(matches!(wild.check_integrable(1.0), Err(UbvpError::InvalidArgument(_))));
    }

    #[test]
    fn grids_are_validated() {
        assert!(check_grid("t", &[0.0, 1.0]).is_err());
        assert!(check_grid("t", &[0.5, 0.5]).is_err());
        assert!(check_grid("t", &[]).is_err());
        assert_eq!(uniform_grid(1.0, 4).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        let init = InitialTrace::new(vec![1.0], vec![1.0], XDecay::CompactlySupported, None).unwrap();
        let tr = CaloricTraces::new(init, vec![0.5, 1.0]).unwrap();
        assert!(tr.clone().with_phi(vec![1.0]).is_err());
        assert!(tr.with_psi(vec![f64::NAN, 1.0]).is_err());
    }
}
