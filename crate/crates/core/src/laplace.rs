//! Universal boundary equations for Laplace's and Poisson's equation on a
//! closed surface, the completion of either trace from the other, and
//! interior reconstruction.
//!
//! For harmonic `u` with traces `u0 = u|_S`, `u1 = ∂u/∂ν|_S`:
//!
//! ```text
//! u0(x) + (1/2π) (K u0)(x) - (1/2π) (S u1)(x) = 0,   x ∈ S
//! ∫_S u1 dS = 0
//! ```
//!
//! and, for `Δu = f` in `G`, `2π u0 + K u0 - S u1 + σ N f = 0` with the
//! Newtonian potential `N f = ∫_G f/|x-y| dy` and `σ = +1` (Green's third
//! identity), together with `∫_S u1 dS = ∫_G f dy`.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::geometry::{Surface, Vec3, VolumeQuadrature};
use crate::layer::{
    assemble_double_layer, assemble_single_layer, eval_green_representation, newtonian_volume_potential,
    DenseOperator, GreenEvaluation,
};
use crate::system::{
    default_tolerance, system_residual, Compatibility, ResidualReport, ResidualSpace, UniversalBoundarySystem,
};
use crate::trace::{BoundaryTrace, TraceRole};

/// Default relative tolerance for the zero-flux check in
/// [`solve_u0_from_u1`].
pub const DEFAULT_FLUX_TOLERANCE: f64 = 1e-8;

/// Default Tikhonov parameter for [`solve_u1_from_u0`].
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;

/// Pivot ratio below which the regularized single-layer system is treated
/// as rank deficient.
const RANK_COLLAPSE_RATIO: f64 = 1e-14;

const REFINEMENT_STEPS: usize = 8;
const REFINEMENT_TOLERANCE: f64 = 1e-14;

/// Smallest admissible singular value of the mean-augmented `A`.
const MIN_SINGULAR_VALUE: f64 = 1e-6;

/// Sign `σ` of the volume term in the Poisson boundary equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeTermSign {
    /// `σ = +1`: correct for `Δu = f`.
    #[default]
    Plus,
    /// `σ = -1`: the form that holds under the convention `Δu = -f`.
    Minus,
}

impl VolumeTermSign {
    pub fn value(self) -> f64 {
        match self {
            VolumeTermSign::Plus => 1.0,
            VolumeTermSign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i32) -> Result<Self> {
        match v {
            1 => Ok(VolumeTermSign::Plus),
            -1 => Ok(VolumeTermSign::Minus),
            _ => Err(UbvpError::invalid(format!("volume-term sign must be +1 or -1, got {v}"))),
        }
    }
}

/// Assembled Laplace system on one surface. `A = I + K/2π`,
/// `B = -S/2π`, compatibility `∫_S u1 dS`.
#[derive(Debug)]
pub struct LaplaceSystem {
    surface: Surface,
    double_layer: DenseOperator,
    single_layer: DenseOperator,
    volume: Option<VolumeQuadrature>,
    space: ResidualSpace,
    /// Cholesky factor of `AᵀWA + ĉĉᵀ`, `ĉ = w/‖w‖`, `W = diag(w)/mean(w)`.
    mean_augmented: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    a_matrix: DMatrix<f64>,
    min_singular_value: f64,
}

impl LaplaceSystem {
    pub fn new(surface: Surface) -> Result<Self> {
        Self::build(surface, None)
    }

    /// System with a volume rule for the Poisson form.
    pub fn with_volume(surface: Surface, volume: VolumeQuadrature) -> Result<Self> {
        Self::build(surface, Some(volume))
    }

    fn build(surface: Surface, volume: Option<VolumeQuadrature>) -> Result<Self> {
        let double_layer = assemble_double_layer(&surface)?;
        let single_layer = assemble_single_layer(&surface)?;
        let n = surface.len();
        let mut a_matrix = double_layer.matrix() / (2.0 * PI);
        for i in 0..n {
            a_matrix[(i, i)] += 1.0;
        }
        let c_hat = mean_row(&surface);
        let wa = weighted_rows(&surface, &a_matrix);
        let normal = a_matrix.transpose() * wa + &c_hat * c_hat.transpose();
        let mean_augmented = normal
            .cholesky()
            .ok_or_else(|| UbvpError::numeric("mean-augmented normal matrix is not positive definite"))?;
        let min_singular_value = smallest_eigenvalue(&mean_augmented, n).sqrt();
        if !(min_singular_value > MIN_SINGULAR_VALUE) {
            return Err(UbvpError::numeric(format!(
                "A restricted to zero-mean traces is nearly singular (σ_min = {min_singular_value:e})"
            )));
        }
        let space = ResidualSpace { label: "surface-nodes".into(), weights: surface.weights().to_vec() };
        Ok(LaplaceSystem {
            surface,
            double_layer,
            single_layer,
            volume,
            space,
            mean_augmented,
            a_matrix,
            min_singular_value,
        })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn double_layer(&self) -> &DenseOperator {
        &self.double_layer
    }

    pub fn single_layer(&self) -> &DenseOperator {
        &self.single_layer
    }

    pub fn volume(&self) -> Option<&VolumeQuadrature> {
        self.volume.as_ref()
    }

    /// Smallest singular value of `W^{1/2} A` stacked with the normalized
    /// mean row.
    pub fn min_singular_value(&self) -> f64 {
        self.min_singular_value
    }

    /// Matrix of `A = I + K/2π`.
    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a_matrix
    }

    /// The Poisson form `2π u0 + K u0 - S u1 + σ N f` of this system.
    pub fn poisson(&self, sign: VolumeTermSign) -> Result<PoissonSystem<'_>> {
        let volume = self
            .volume
            .as_ref()
            .ok_or_else(|| UbvpError::invalid("Poisson residual needs a volume quadrature"))?;
        Ok(PoissonSystem { base: self, volume, sign })
    }
}

/// Normalized quadrature weights `w / mean(w)`.
fn unit_mean_weights(surface: &Surface) -> Vec<f64> {
    let w = surface.weights();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    w.iter().map(|v| v / mean).collect()
}

/// `W M` for `W = diag(w)/mean(w)`.
fn weighted_rows(surface: &Surface, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, w) in unit_mean_weights(surface).into_iter().enumerate() {
        out.row_mut(i).scale_mut(w);
    }
    out
}

/// Iterative refinement of a normal-equation solve. `residual(x)` must be
/// computed from the unsquared operator: rounding in the formed normal
/// matrix is otherwise amplified by the inverse regularization.
/// `scale` is the solution size below which corrections count as zero,
/// for data whose exact completion vanishes.
fn refine(
    solve: impl Fn(&DVector<f64>) -> Option<DVector<f64>>,
    residual: impl Fn(&DVector<f64>) -> DVector<f64>,
    mut x: DVector<f64>,
    scale: f64,
) -> Result<DVector<f64>> {
    let mut previous = f64::INFINITY;
    for _ in 0..REFINEMENT_STEPS {
        let dx = solve(&residual(&x)).ok_or_else(|| UbvpError::numeric("normal matrix is singular"))?;
        let step = dx.amax();
        x += dx;
        if !step.is_finite() {
            return Err(UbvpError::numeric("refinement diverged"));
        }
        if step <= REFINEMENT_TOLERANCE * x.amax().max(scale) {
            return Ok(x);
        }
        if step >= previous {
            break;
        }
        previous = step;
    }
    let last = solve(&residual(&x)).map(|dx| dx.amax()).unwrap_or(f64::INFINITY);
    let size = x.amax().max(scale);
    if last <= 1e-8 * size {
        Ok(x)
    } else {
        Err(UbvpError::numeric(format!("refinement stalled at relative correction {:e}", last / size)))
    }
}

fn mean_row(surface: &Surface) -> DVector<f64> {
    let w = DVector::from_column_slice(surface.weights());
    let norm = w.norm();
    w / norm
}

/// Inverse iteration for the smallest eigenvalue of an SPD matrix given by
/// its Cholesky factor.
fn smallest_eigenvalue(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>, n: usize) -> f64 {
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
    v /= v.norm();
    let mut lambda = f64::INFINITY;
    for _ in 0..60 {
        let mut w = chol.solve(&v);
        let norm = w.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return 0.0;
        }
        let estimate = 1.0 / norm;
        w /= norm;
        let converged = (estimate - lambda).abs() <= 1e-10 * estimate;
        lambda = estimate;
        v = w;
        if converged {
            break;
        }
    }
    lambda
}

impl UniversalBoundarySystem for LaplaceSystem {
    fn residual_space(&self) -> &ResidualSpace {
        &self.space
    }

    fn arg_lens(&self) -> [usize; 3] {
        [self.surface.len(), self.surface.len(), 0]
    }

    fn apply_a(&self, u0: &[f64]) -> Result<Vec<f64>> {
        let k = self.double_layer.apply(u0)?;
        Ok(u0.iter().zip(k).map(|(u, ku)| u + ku / (2.0 * PI)).collect())
    }

    fn apply_b(&self, u1: &[f64]) -> Result<Vec<f64>> {
        Ok(self.single_layer.apply(u1)?.into_iter().map(|v| -v / (2.0 * PI)).collect())
    }

    fn apply_c(&self, f: &[f64]) -> Result<Vec<f64>> {
        if !f.is_empty() {
            return Err(UbvpError::invalid("the homogeneous Laplace system takes no source term"));
        }
        Ok(vec![0.0; self.surface.len()])
    }

    fn compatibility(&self, _u0: &[f64], u1: &[f64], _f: &[f64]) -> Result<Vec<Compatibility>> {
        Ok(vec![Compatibility { name: "eq3".into(), value: self.surface.integrate(u1)? }])
    }
}

/// Poisson form of a [`LaplaceSystem`] with a volume rule.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSystem<'a> {
    base: &'a LaplaceSystem,
    volume: &'a VolumeQuadrature,
    sign: VolumeTermSign,
}

impl PoissonSystem<'_> {
    pub fn sign(&self) -> VolumeTermSign {
        self.sign
    }
}

impl UniversalBoundarySystem for PoissonSystem<'_> {
    fn residual_space(&self) -> &ResidualSpace {
        &self.base.space
    }

    fn arg_lens(&self) -> [usize; 3] {
        let n = self.base.surface.len();
        [n, n, self.volume.len()]
    }

    fn apply_a(&self, u0: &[f64]) -> Result<Vec<f64>> {
        let k = self.base.double_layer.apply(u0)?;
        Ok(u0.iter().zip(k).map(|(u, ku)| 2.0 * PI * u + ku).collect())
    }

    fn apply_b(&self, u1: &[f64]) -> Result<Vec<f64>> {
        Ok(self.base.single_layer.apply(u1)?.into_iter().map(|v| -v).collect())
    }

    fn apply_c(&self, f: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.sign.value();
        Ok(newtonian_volume_potential(self.volume, f, self.base.surface.nodes())?
            .into_iter()
            .map(|v| sigma * v)
            .collect())
    }

    fn compatibility(&self, _u0: &[f64], u1: &[f64], f: &[f64]) -> Result<Vec<Compatibility>> {
        Ok(vec![Compatibility {
            name: "flux-balance".into(),
            value: self.base.surface.integrate(u1)? - self.volume.integrate(f)?,
        }])
    }
}

fn check_pair(sys: &LaplaceSystem, u0: &BoundaryTrace, u1: &BoundaryTrace) -> Result<()> {
    u0.check_on(&sys.surface)?;
    u1.check_on(&sys.surface)?;
    if u0.role() != TraceRole::Dirichlet || u1.role() != TraceRole::Neumann {
        return Err(UbvpError::invalid("expected a Dirichlet trace u0 and a Neumann trace u1"));
    }
    Ok(())
}

/// Pointwise residual of `u0 + K u0/2π - S u1/2π` at every node plus the
/// compatibility value `∫_S u1 dS`. `tol = None` uses
/// [`default_tolerance`].
pub fn laplace_residual(
    sys: &LaplaceSystem,
    u0: &BoundaryTrace,
    u1: &BoundaryTrace,
    tol: Option<f64>,
) -> Result<ResidualReport> {
    check_pair(sys, u0, u1)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(u0.values(), u1.values()));
    system_residual(sys, u0.values(), u1.values(), &[], tol)
}

/// Pointwise residual of `2π u0 + K u0 - S u1 + σ N f` at every node and
/// the compatibility value `∫_S u1 dS - ∫_G f dy`.
pub fn poisson_residual(
    sys: &LaplaceSystem,
    u0: &BoundaryTrace,
    u1: &BoundaryTrace,
    f: &[f64],
    sign: VolumeTermSign,
    tol: Option<f64>,
) -> Result<ResidualReport> {
    check_pair(sys, u0, u1)?;
    let poisson = sys.poisson(sign)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(u0.values(), u1.values()));
    system_residual(&poisson, u0.values(), u1.values(), f, tol)
}

/// How the additive constant of a Neumann completion was fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullspaceNote {
    /// Prescribed value of `Σ w_i u0_i`.
    pub weighted_sum: f64,
    pub message: String,
}

/// Completes `u0` from `u1` by solving `A u0 = -B u1` in the weighted
/// least-squares sense together with `Σ w_i u0_i = 0`. Constants span the kernel of `A`,
/// so the zero-mean representative is returned.
pub fn solve_u0_from_u1(
    sys: &LaplaceSystem,
    u1: &BoundaryTrace,
    tol: Option<f64>,
) -> Result<(BoundaryTrace, NullspaceNote)> {
    solve_u0_from_u1_with_sum(sys, u1, tol, 0.0)
}

/// As [`solve_u0_from_u1`] with the augmentation `Σ w_i u0_i = weighted_sum`.
pub fn solve_u0_from_u1_with_sum(
    sys: &LaplaceSystem,
    u1: &BoundaryTrace,
    tol: Option<f64>,
    weighted_sum: f64,
) -> Result<(BoundaryTrace, NullspaceNote)> {
    u1.check_on(&sys.surface)?;
    if u1.role() != TraceRole::Neumann {
        return Err(UbvpError::invalid("u0 completion needs a Neumann trace"));
    }
    let tol = tol.unwrap_or(DEFAULT_FLUX_TOLERANCE);
    let flux = sys.surface.integrate(u1.values())?;
    if flux.abs() > tol * sys.surface.area() * u1.sup_norm() {
        return Err(UbvpError::IncompatibleData { constraint: "eq3".into(), value: flux });
    }
    let rhs = DVector::from_vec(sys.single_layer.apply(u1.values())?) / (2.0 * PI);
    let a = &sys.a_matrix;
    let w = DVector::from_vec(unit_mean_weights(&sys.surface));
    let c_hat = mean_row(&sys.surface);
    let target = weighted_sum / DVector::from_column_slice(sys.surface.weights()).norm();
    // Gradient of ½‖A u - rhs‖²_W + ½(ĉᵀu - target)², evaluated without
    // the formed normal matrix.
    let gradient = |u: &DVector<f64>| {
        let r = (&rhs - a * u).component_mul(&w);
        a.tr_mul(&r) + &c_hat * (target - c_hat.dot(u))
    };
    let scale = u1.sup_norm() * sys.surface.diameter();
    let u0 = refine(|g| Some(sys.mean_augmented.solve(g)), gradient, DVector::zeros(rhs.len()), scale)?;
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(UbvpError::numeric("Neumann completion produced non-finite values"));
    }
    let note = NullspaceNote {
        weighted_sum,
        message: format!(
            "u0 is determined up to an additive constant; returned the representative with weighted sum {weighted_sum}"
        ),
    };
    Ok((BoundaryTrace::dirichlet(&sys.surface, u0.iter().copied().collect())?, note))
}

/// Completes `u1` from `u0`: `S u1 = 2π u0 + K u0` as Tikhonov-regularized
/// least squares in the quadrature-weighted norm, with the hard constraint
/// `Σ w_i u1_i = 0` imposed through a Lagrange multiplier.
/// `regularization` is relative to the mean diagonal of `SᵀWS`.
///
/// On spheres the discrete `S` only sees the band-limited part of the
/// density; the weighted penalty makes the unseen part vanish.
pub fn solve_u1_from_u0(sys: &LaplaceSystem, u0: &BoundaryTrace, regularization: f64) -> Result<BoundaryTrace> {
    u0.check_on(&sys.surface)?;
    if u0.role() != TraceRole::Dirichlet {
        return Err(UbvpError::invalid("u1 completion needs a Dirichlet trace"));
    }
    if !(regularization.is_finite() && regularization >= 0.0) {
        return Err(UbvpError::invalid(format!("regularization must be nonnegative, got {regularization}")));
    }
    let n = sys.surface.len();
    let s = sys.single_layer.matrix();
    let ku = sys.double_layer.apply(u0.values())?;
    let rhs = DVector::from_iterator(n, u0.values().iter().zip(ku).map(|(u, k)| 2.0 * PI * u + k));

    let w = unit_mean_weights(&sys.surface);
    let ws = weighted_rows(&sys.surface, s);
    let sts = s.transpose() * &ws;
    let lambda = regularization * sts.trace() / n as f64;
    let c_hat = mean_row(&sys.surface);
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(&sts);
    for i in 0..n {
        kkt[(i, i)] += lambda * w[i];
        kkt[(i, n)] = c_hat[i];
        kkt[(n, i)] = c_hat[i];
    }
    let lu = kkt.lu();
    // Pivots of the saddle-point system: the constraint row contributes
    // one of order one, the regularized block the rest.
    let pivots = lu.u().diagonal().map(f64::abs);
    let (small, large) = (pivots.min(), pivots.max());
    if !(small > RANK_COLLAPSE_RATIO * large) {
        return Err(UbvpError::numeric(format!(
            "single-layer system collapsed in rank (pivot ratio {:e})",
            small / large
        )));
    }
    let wv = DVector::from_vec(w);
    let kkt_residual = |x: &DVector<f64>| {
        let u = x.rows(0, n);
        let r = (&rhs - s * u).component_mul(&wv);
        let mut out = DVector::zeros(n + 1);
        let top = s.tr_mul(&r) - u.component_mul(&wv) * lambda - &c_hat * x[n];
        out.rows_mut(0, n).copy_from(&top);
        out[n] = -c_hat.dot(&u);
        out
    };
    let scale = u0.sup_norm() / sys.surface.diameter();
    let sol = refine(|g| lu.solve(g), kkt_residual, DVector::zeros(n + 1), scale)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(UbvpError::numeric("Dirichlet-to-Neumann completion produced non-finite values"));
    }
    BoundaryTrace::neumann(&sys.surface, sol.rows(0, n).iter().copied().collect())
}

/// What to do when [`reconstruct_interior`] receives traces that fail the
/// residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InconsistencyPolicy {
    #[default]
    Reject,
    WarnAndProceed,
}

/// Interior values of the harmonic function with traces `(u0, u1)`. The
/// pair is first checked against the boundary equations; when consistent,
/// the result is the unique harmonic function with these traces, evaluated
/// by Green's formula.
pub fn reconstruct_interior(
    sys: &LaplaceSystem,
    u0: &BoundaryTrace,
    u1: &BoundaryTrace,
    points: &[Vec3],
    tol: Option<f64>,
    policy: InconsistencyPolicy,
) -> Result<GreenEvaluation> {
    let report = laplace_residual(sys, u0, u1, tol)?;
    if !report.consistent {
        let (constraint, value) = match report.compatibility.first() {
            Some(c) if c.value.abs() > report.tolerance => (c.name.clone(), c.value),
            _ => ("eq2".to_string(), report.sup_norm),
        };
        match policy {
            InconsistencyPolicy::Reject => return Err(UbvpError::IncompatibleData { constraint, value }),
            InconsistencyPolicy::WarnAndProceed => {
                warn!("traces are inconsistent ({constraint} = {value:e}); reconstructing anyway")
            }
        }
    }
    eval_green_representation(&sys.surface, u0, u1, points)
}

/// Weighted mean of `û0 - u0`, where `û0` is the Neumann completion of
/// `u1`: the constant separating the two trace routes.
pub fn constant_offset(sys: &LaplaceSystem, u0: &BoundaryTrace, u1: &BoundaryTrace) -> Result<f64> {
    check_pair(sys, u0, u1)?;
    let (u0_hat, _) = solve_u0_from_u1(sys, u1, None)?;
    let diff: Vec<f64> = u0_hat.values().iter().zip(u0.values()).map(|(a, b)| a - b).collect();
    Ok(sys.surface.integrate(&diff)? / sys.surface.area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball_volume_quadrature, make_sphere};

    fn sys(nt: usize) -> LaplaceSystem {
        LaplaceSystem::new(make_sphere(1.0, Vec3::zeros(), nt, 2 * nt).unwrap()).unwrap()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let s = sys(12);
        let ones = vec![1.0; s.surface().len()];
        let a1 = s.apply_a(&ones).unwrap();
        assert!(a1.iter().all(|v| v.abs() < 1e-12));
        assert!(s.min_singular_value() > 0.1);
    }

    #[test]
    fn residual_examples() {
        let s = sys(16);
        let surf = s.surface();
        let one = BoundaryTrace::constant(surf, TraceRole::Dirichlet, 1.0);
        let zero = BoundaryTrace::constant(surf, TraceRole::Neumann, 0.0);
        let r = laplace_residual(&s, &one, &zero, None).unwrap();
        assert!(r.sup_norm <= 1e-12 && r.consistent);

        let bad = BoundaryTrace::constant(surf, TraceRole::Neumann, 1.0);
        let r = laplace_residual(&s, &one, &bad, None).unwrap();
        assert!(!r.consistent);
        assert!((r.compatibility[0].value - 4.0 * PI).abs() < 1e-10);

        let z0 = BoundaryTrace::dirichlet(surf, surf.sample(|p| p.z)).unwrap();
        let z1 = BoundaryTrace::neumann(surf, surf.sample(|p| p.z)).unwrap();
        let r = laplace_residual(&s, &z0, &z1, None).unwrap();
        assert!(r.sup_norm <= 1e-4 && r.compatibility[0].value.abs() <= 1e-12);
        assert!(laplace_residual(&s, &z1, &z0, None).is_err());
    }

    #[test]
    fn poisson_quadratic_and_sign() {
        let surface = make_sphere(1.0, Vec3::zeros(), 16, 32).unwrap();
        let vq = make_ball_volume_quadrature(1.0, Vec3::zeros(), 8, 16, 32).unwrap();
        let s = LaplaceSystem::with_volume(surface, vq).unwrap();
        let surf = s.surface();
        let u0 = BoundaryTrace::constant(surf, TraceRole::Dirichlet, 1.0);
        let u1 = BoundaryTrace::constant(surf, TraceRole::Neumann, 2.0);
        let f = vec![6.0; s.volume().unwrap().len()];
        let r = poisson_residual(&s, &u0, &u1, &f, VolumeTermSign::Plus, None).unwrap();
        assert!(r.sup_norm <= 1e-3, "{}", r.sup_norm);
        assert!(r.compatibility[0].value.abs() <= 1e-6);
        let r = poisson_residual(&s, &u0, &u1, &f, VolumeTermSign::Minus, None).unwrap();
        assert!((r.sup_norm - 16.0 * PI).abs() < 1e-3);
        assert!(LaplaceSystem::new(make_sphere(1.0, Vec3::zeros(), 8, 16).unwrap())
            .unwrap()
            .poisson(VolumeTermSign::Plus)
            .is_err());
    }

    #[test]
    fn completions_for_linear_field() {
        let s = sys(16);
        let surf = s.surface();
        let z = surf.sample(|p| p.z);
        let (u0, note) = solve_u0_from_u1(&s, &BoundaryTrace::neumann(surf, z.clone()).unwrap(), None).unwrap();
        assert_eq!(note.weighted_sum, 0.0);
        assert!(sup_diff(u0.values(), &z) < 1e-3);
        let u1 = solve_u1_from_u0(&s, &BoundaryTrace::dirichlet(surf, z.clone()).unwrap(), DEFAULT_REGULARIZATION)
            .unwrap();
        assert!(sup_diff(u1.values(), &z) < 1e-3);
        assert!(surf.integrate(u1.values()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn unregularized_single_layer_collapses_on_the_sphere() {
        // The band-limited S has a large kernel on the tensor grid.
        let s = sys(12);
        let z = BoundaryTrace::dirichlet(s.surface(), s.surface().sample(|p| p.z)).unwrap();
        assert!(matches!(solve_u1_from_u0(&s, &z, 0.0), Err(UbvpError::NumericFailure(_))));
    }

    #[test]
    fn incompatible_flux_is_rejected() {
        let s = sys(8);
        let ones = BoundaryTrace::constant(s.surface(), TraceRole::Neumann, 1.0);
        match solve_u0_from_u1(&s, &ones, None) {
            Err(UbvpError::IncompatibleData { constraint, value }) => {
                assert_eq!(constraint, "eq3");
                assert!((value - 4.0 * PI).abs() < 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
        let zero = BoundaryTrace::constant(s.surface(), TraceRole::Neumann, 0.0);
        let (u0, _) = solve_u0_from_u1(&s, &zero, None).unwrap();
        assert!(u0.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn reconstruction_policy() {
        let s = sys(8);
        let one = BoundaryTrace::constant(s.surface(), TraceRole::Dirichlet, 1.0);
        let bad = BoundaryTrace::constant(s.surface(), TraceRole::Neumann, 1.0);
        let pts = [Vec3::zeros()];
        assert!(matches!(
            reconstruct_interior(&s, &one, &bad, &pts, None, InconsistencyPolicy::Reject),
            Err(UbvpError::IncompatibleData { .. })
        ));
        assert!(reconstruct_interior(&s, &one, &bad, &pts, None, InconsistencyPolicy::WarnAndProceed).is_ok());
    }
}
