//! Heat equation `u_t = u_xx` on the quarter plane `x > 0, t > 0`. Every
//! bounded caloric function there has boundary data tied by
//!
//! ```text
//! φ(t) = (πt)^{-1/2} ∫_0^∞ e^{-ξ²/4t} v(ξ) dξ - π^{-1/2} ∫_0^t τ^{-1/2} ψ(t-τ) dτ
//! ```
//!
//! with `v(x) = u(+0, x)`, `φ(t) = u(t, +0)`, `ψ(t) = u_x(t, +0)`. The
//! first term is the Gauss–Weierstrass term, the second the Abel term.

mod abel;
mod data;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::quadrature::{gauss_legendre, trapezoid_weights, Rule1d};
use crate::system::{default_tolerance, system_residual, Compatibility, ResidualReport, ResidualSpace, UniversalBoundarySystem};

pub use data::{uniform_grid, CaloricTraces, Extension, InitialTrace, XDecay};

use abel::{abel_derivative, SingularSplit};

/// Truncation point of the Gauss–Weierstrass integral in `s = ξ/(2√t)`;
/// the neglected Gaussian mass is `erfc(8)/2 < 1e-29`.
pub const S_MAX: f64 = 8.0;

pub const MIN_GAUSS_NODES: usize = 8;

/// Fewest time samples [`psi_from_v_phi`] accepts.
pub const MIN_INVERSION_POINTS: usize = 8;

/// Discretization of the weakly singular time integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbelScheme {
    /// Exact weights for piecewise-linear densities, plus an exactly
    /// integrated `t^{-1/2}` start-up term.
    #[default]
    ProductIntegrationLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes on `[0, S_MAX]` for the Gauss–Weierstrass term.
    pub gauss_nodes: usize,
    pub abel_scheme: AbelScheme,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { gauss_nodes: 64, abel_scheme: AbelScheme::ProductIntegrationLinear }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_nodes < MIN_GAUSS_NODES {
            return Err(UbvpError::invalid(format!(
                "gauss_nodes must be at least {MIN_GAUSS_NODES}, got {}",
                self.gauss_nodes
            )));
        }
        Ok(())
    }

    fn rule(&self, lo: f64, hi: f64) -> Result<Rule1d> {
        self.validate()?;
        // Keep the node density of the [0, S_MAX] rule on longer intervals.
        let n = ((self.gauss_nodes as f64) * (hi - lo) / S_MAX).ceil().max(self.gauss_nodes as f64) as usize;
        gauss_legendre(n, lo, hi)
    }
}

/// `(πt)^{-1/2} ∫_0^∞ e^{-ξ²/4t} v(ξ) dξ` at each time, via `ξ = 2√t·s`.
pub fn gauss_weierstrass(initial: &InitialTrace, times: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let t_max = times.iter().fold(0.0, |m: f64, &t| m.max(t));
    if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(UbvpError::invalid("times must be positive"));
    }
    initial.check_integrable(t_max)?;
    let rule = cfg.rule(0.0, S_MAX)?;
    Ok(times
        .iter()
        .map(|&t| {
            let scale = 2.0 * t.sqrt();
            2.0 / PI.sqrt() * rule.integrate(|s| (-s * s).exp() * initial.eval(scale * s))
        })
        .collect())
}

/// `π^{-1/2} ∫_0^t τ^{-1/2} ψ(t-τ) dτ` at each grid time.
pub fn abel_term(t_grid: &[f64], psi: &[f64]) -> Result<Vec<f64>> {
    data::check_grid("t", t_grid)?;
    if psi.len() != t_grid.len() {
        return Err(UbvpError::invalid(format!("psi has {} values, t grid has {}", psi.len(), t_grid.len())));
    }
    let split = SingularSplit::new(t_grid, psi)?;
    Ok(t_grid.iter().map(|&t| split.integrate(t, 0.0) / PI.sqrt()).collect())
}

/// `φ` on the time grid from `v` and `ψ`.
pub fn phi_from_v_psi(traces: &CaloricTraces, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let psi = traces.require_psi()?;
    let gw = gauss_weierstrass(&traces.initial, traces.t_grid(), cfg)?;
    let abel = abel_term(traces.t_grid(), psi)?;
    Ok(gw.into_iter().zip(abel).map(|(g, a)| g - a).collect())
}

/// `ψ` on the time grid from `v` and `φ`, by Abel inversion of
/// `π^{-1/2} ∫_0^t ψ(s)(t-s)^{-1/2} ds = g(t)`, `g = GaussTerm(v) - φ`:
/// `ψ(t) = π^{-1/2} d/dt ∫_0^t g(s)(t-s)^{-1/2} ds`.
pub fn psi_from_v_phi(traces: &CaloricTraces, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let phi = traces.require_phi()?;
    let t = traces.t_grid();
    if t.len() < MIN_INVERSION_POINTS {
        return Err(UbvpError::invalid(format!(
            "psi inversion needs at least {MIN_INVERSION_POINTS} time samples, got {}",
            t.len()
        )));
    }
    let gw = gauss_weierstrass(&traces.initial, t, cfg)?;
    let g: Vec<f64> = gw.iter().zip(phi).map(|(a, b)| a - b).collect();
    Ok(abel_derivative(t, &g)?.into_iter().map(|d| d / PI.sqrt()).collect())
}

/// The boundary equation as a [`UniversalBoundarySystem`] on the time
/// grid: `A φ = φ`, `B ψ = Abel(ψ)`, and the source slot holds the samples
/// of `v` with `C v = -GaussTerm(v)`. `C` is linear only when the tail of
/// `v` is zero; a closed-form tail adds a fixed offset.
#[derive(Debug, Clone)]
pub struct HeatSystem {
    initial: InitialTrace,
    t_grid: Vec<f64>,
    cfg: QuadratureConfig,
    space: ResidualSpace,
}

impl HeatSystem {
    pub fn new(initial: InitialTrace, t_grid: Vec<f64>, cfg: QuadratureConfig) -> Result<Self> {
        data::check_grid("t", &t_grid)?;
        cfg.validate()?;
        let mut weights = trapezoid_weights(&t_grid);
        if weights.len() == 1 {
            weights[0] = t_grid[0];
        }
        let space = ResidualSpace { label: "t-grid".into(), weights };
        Ok(HeatSystem { initial, t_grid, cfg, space })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }
}

impl UniversalBoundarySystem for HeatSystem {
    fn residual_space(&self) -> &ResidualSpace {
        &self.space
    }

    fn arg_lens(&self) -> [usize; 3] {
        [self.t_grid.len(), self.t_grid.len(), self.initial.x_grid().len()]
    }

    fn apply_a(&self, phi: &[f64]) -> Result<Vec<f64>> {
        Ok(phi.to_vec())
    }

    fn apply_b(&self, psi: &[f64]) -> Result<Vec<f64>> {
        abel_term(&self.t_grid, psi)
    }

    fn apply_c(&self, v: &[f64]) -> Result<Vec<f64>> {
        let initial = self.initial.with_values(v.to_vec())?;
        Ok(gauss_weierstrass(&initial, &self.t_grid, &self.cfg)?.into_iter().map(|g| -g).collect())
    }

    fn compatibility(&self, _phi: &[f64], _psi: &[f64], _v: &[f64]) -> Result<Vec<Compatibility>> {
        Ok(Vec::new())
    }
}

/// Pointwise `φ - GaussTerm(v) + Abel(ψ)` on the time grid. `tol = None`
/// uses [`default_tolerance`] on `(φ, ψ)`.
pub fn heat_residual(traces: &CaloricTraces, cfg: &QuadratureConfig, tol: Option<f64>) -> Result<ResidualReport> {
    let phi = traces.require_phi()?;
    let psi = traces.require_psi()?;
    let sys = HeatSystem::new(traces.initial.clone(), traces.t_grid().to_vec(), *cfg)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(phi, psi));
    system_residual(&sys, phi, psi, traces.initial.values(), tol)
}

/// `u(t, x)` from `v` and `ψ`:
///
/// ```text
/// u = ∫_0^∞ G_N(x, ξ, t) v(ξ) dξ - π^{-1/2} ∫_0^t ψ(t-τ) e^{-x²/4τ} τ^{-1/2} dτ
/// ```
///
/// with the Neumann heat kernel of the half line
/// `G_N = (4πt)^{-1/2} (e^{-(x-ξ)²/4t} + e^{-(x+ξ)²/4t})`. At `x = 0` this
/// is the boundary equation. Points are `(t, x)` with `x > 0` and
/// `0 < t ≤` the last grid time.
pub fn reconstruct_quarterplane(
    traces: &CaloricTraces,
    points: &[(f64, f64)],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let psi = traces.require_psi()?;
    let split = SingularSplit::new(traces.t_grid(), psi)?;
    let t_end = split.last_node();
    let t_max = points.iter().fold(0.0, |m: f64, p| m.max(p.0));
    for &(t, x) in points {
        if !(t.is_finite() && t > 0.0 && x.is_finite() && x > 0.0) {
            return Err(UbvpError::invalid(format!("point (t, x) = ({t}, {x}) is not in the open quarter plane")));
        }
        if t > t_end * (1.0 + 1e-12) {
            return Err(UbvpError::invalid(format!("t = {t} is past the last psi sample at t = {t_end}")));
        }
    }
    traces.initial.check_integrable(t_max)?;
    let initial = &traces.initial;
    points
        .iter()
        .map(|&(t, x)| {
            let scale = 2.0 * t.sqrt();
            let z = x / scale;
            // ξ = x + 2√t s and ξ = 2√t s - x.
            let direct = cfg.rule((-z).max(-S_MAX), S_MAX)?;
            let mut gw = direct.integrate(|s| (-s * s).exp() * initial.eval(x + scale * s));
            if z < S_MAX {
                let image = cfg.rule(z, S_MAX)?;
                gw += image.integrate(|s| (-s * s).exp() * initial.eval(scale * s - x));
            }
            let abel = split.integrate(t.min(t_end), x * x / 4.0);
            Ok((gw - abel) / PI.sqrt())
        })
        .collect()
}
