//! C interface to `ubvp`.
//!
//! Every function returns a [`UbvpStatus`]. On failure the message is kept
//! per thread and can be read with [`ubvp_last_error_message`]. Surfaces
//! and Laplace systems are opaque handles released with their `_free`
//! function. Arrays are caller-owned; point arrays are `xyz` interleaved.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ubvp::geometry::{make_ellipsoid, make_sphere, Surface, SurfaceDescriptor, Vec3};
use ubvp::heat::{
    phi_from_v_psi, psi_from_v_phi, reconstruct_quarterplane, CaloricTraces, Extension, InitialTrace,
    QuadratureConfig, XDecay,
};
use ubvp::laplace::{
    laplace_residual, reconstruct_interior, solve_u0_from_u1, solve_u1_from_u0, InconsistencyPolicy, LaplaceSystem,
};
use ubvp::trace::BoundaryTrace;
use ubvp::UbvpError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UbvpStatus {
    Ok = 0,
    InvalidArgument = 1,
    Unsupported = 2,
    NumericFailure = 3,
    IncompatibleData = 4,
    NearSingular = 5,
    Io = 6,
    Parse = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Tail model of the initial data beyond its last sample.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UbvpXDecay {
    CompactlySupported = 0,
    GaussianDominated = 1,
    Polynomial = 2,
}

/// Opaque discretized surface.
pub struct UbvpSurface(Surface);

/// Opaque assembled Laplace system; owns a copy of its surface.
pub struct UbvpLaplace(LaplaceSystem);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

enum Failure {
    Ubvp(UbvpError),
    Null(&'static str),
}

impl From<UbvpError> for Failure {
    fn from(e: UbvpError) -> Self {
        Failure::Ubvp(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn status_of(e: &UbvpError) -> UbvpStatus {
    match e {
        UbvpError::InvalidArgument(_) => UbvpStatus::InvalidArgument,
        UbvpError::Unsupported(_) => UbvpStatus::Unsupported,
        UbvpError::NumericFailure(_) => UbvpStatus::NumericFailure,
        UbvpError::IncompatibleData { .. } => UbvpStatus::IncompatibleData,
        UbvpError::NearSingular(_) => UbvpStatus::NearSingular,
        UbvpError::Io(_) => UbvpStatus::Io,
        UbvpError::Parse(_) => UbvpStatus::Parse,
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> UbvpStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UbvpStatus::Ok,
        Ok(Err(Failure::Ubvp(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} is null"));
            UbvpStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            UbvpStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, n: usize, name: &'static str) -> FfiResult<&'a [f64]> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, name: &'static str) -> FfiResult<&'a mut [f64]> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn text(p: *const c_char, name: &'static str) -> FfiResult<String> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| UbvpError::invalid(format!("{name} is not UTF-8")).into())
}

fn copy_into(dst: &mut [f64], src: &[f64]) -> FfiResult<()> {
    if dst.len() != src.len() {
        return Err(UbvpError::invalid(format!("output holds {} values, result has {}", dst.len(), src.len())).into());
    }
    dst.copy_from_slice(src);
    Ok(())
}

fn optional_tol(tol: f64) -> Option<f64> {
    (!tol.is_nan()).then_some(tol)
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `len - 1` bytes, into `buf`. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ubvp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Sphere with Gauss–Legendre nodes in `cos(theta)` and uniform `phi`.
///
/// # Safety
/// `center` must point to 3 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_sphere(
    radius: f64,
    center: *const f64,
    n_theta: usize,
    n_phi: usize,
    out: *mut *mut UbvpSurface,
) -> UbvpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let c = input(center, 3, "center")?;
        let s = make_sphere(radius, Vec3::new(c[0], c[1], c[2]), n_theta, n_phi)?;
        store(out, UbvpSurface(s));
        Ok(())
    })
}

/// Ellipsoid with semi-axes `axes[0..3]` along x, y, z.
///
/// # Safety
/// `axes` and `center` must point to 3 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_ellipsoid(
    axes: *const f64,
    center: *const f64,
    n_theta: usize,
    n_phi: usize,
    out: *mut *mut UbvpSurface,
) -> UbvpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let a = input(axes, 3, "axes")?;
        let c = input(center, 3, "center")?;
        let s = make_ellipsoid(a[0], a[1], a[2], Vec3::new(c[0], c[1], c[2]), n_theta, n_phi)?;
        store(out, UbvpSurface(s));
        Ok(())
    })
}

/// Surface from a JSON descriptor such as
/// `{"type":"sphere","radius":1,"grid":[16,32]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_from_json(json: *const c_char, out: *mut *mut UbvpSurface) -> UbvpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let desc: SurfaceDescriptor =
            serde_json::from_str(&text(json, "json")?).map_err(|e| UbvpError::Parse(e.to_string()))?;
        store(out, UbvpSurface(desc.build()?));
        Ok(())
    })
}

/// # Safety
/// `surface` must be null or a handle from a `ubvp_surface_*` constructor
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_free(surface: *mut UbvpSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Number of quadrature nodes, or 0 for a null handle.
///
/// # Safety
/// `surface` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_len(surface: *const UbvpSurface) -> usize {
    surface.as_ref().map_or(0, |s| s.0.len())
}

/// Writes nodes and outward normals (`3 n` doubles each, either may be
/// null) and weights (`n` doubles, may be null).
///
/// # Safety
/// Non-null arrays must hold the sizes above with `n = ubvp_surface_len`.
#[no_mangle]
pub unsafe extern "C" fn ubvp_surface_quadrature(
    surface: *const UbvpSurface,
    nodes: *mut f64,
    normals: *mut f64,
    weights: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let s = &handle(surface, "surface")?.0;
        let n = s.len();
        for (dst, src) in [(nodes, s.nodes()), (normals, s.normals())] {
            if !dst.is_null() {
                let flat: Vec<f64> = src.iter().flat_map(|p| [p.x, p.y, p.z]).collect();
                output(dst, 3 * n, "nodes")?.copy_from_slice(&flat);
            }
        }
        if !weights.is_null() {
            output(weights, n, "weights")?.copy_from_slice(s.weights());
        }
        Ok(())
    })
}

/// Assembles the layer operators on a copy of `surface`.
///
/// # Safety
/// `surface` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_new(surface: *const UbvpSurface, out: *mut *mut UbvpLaplace) -> UbvpStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let s = handle(surface, "surface")?.0.clone();
        store(out, UbvpLaplace(LaplaceSystem::new(s)?));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from [`ubvp_laplace_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_free(sys: *mut UbvpLaplace) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of collocation nodes of the system.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_len(sys: *const UbvpLaplace) -> usize {
    sys.as_ref().map_or(0, |s| s.0.surface().len())
}

/// Residual of `(u0, u1)`. Writes the pointwise residual (`n` doubles,
/// may be null), its sup norm, the net flux `∫ u1`, and whether the pair
/// passes at tolerance `tol` (NaN selects the default). An inconsistent
/// pair is not an error.
///
/// # Safety
/// `u0`, `u1` hold `n` doubles; scalar outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_residual(
    sys: *const UbvpLaplace,
    u0: *const f64,
    u1: *const f64,
    n: usize,
    tol: f64,
    pointwise: *mut f64,
    sup_norm: *mut f64,
    flux: *mut f64,
    consistent: *mut bool,
) -> UbvpStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        if sup_norm.is_null() || flux.is_null() || consistent.is_null() {
            return Err(Failure::Null("scalar output"));
        }
        let s = sys.surface();
        let u0 = BoundaryTrace::dirichlet(s, input(u0, n, "u0")?.to_vec())?;
        let u1 = BoundaryTrace::neumann(s, input(u1, n, "u1")?.to_vec())?;
        let report = laplace_residual(sys, &u0, &u1, optional_tol(tol))?;
        if !pointwise.is_null() {
            copy_into(output(pointwise, n, "pointwise")?, &report.pointwise)?;
        }
        *sup_norm = report.sup_norm;
        *flux = report.compatibility.first().map_or(0.0, |c| c.value);
        *consistent = report.consistent;
        Ok(())
    })
}

/// Neumann trace from the Dirichlet trace. `regularization` is the
/// relative Tikhonov weight (1e-10 is a good default).
///
/// # Safety
/// `u0` and `u1_out` hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_solve_u1(
    sys: *const UbvpLaplace,
    u0: *const f64,
    n: usize,
    regularization: f64,
    u1_out: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let u0 = BoundaryTrace::dirichlet(sys.surface(), input(u0, n, "u0")?.to_vec())?;
        let u1 = solve_u1_from_u0(sys, &u0, regularization)?;
        copy_into(output(u1_out, n, "u1_out")?, u1.values())
    })
}

/// Zero-mean Dirichlet trace from the Neumann trace. `flux_tol` bounds the
/// relative net flux (NaN selects the default).
///
/// # Safety
/// `u1` and `u0_out` hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_solve_u0(
    sys: *const UbvpLaplace,
    u1: *const f64,
    n: usize,
    flux_tol: f64,
    u0_out: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let u1 = BoundaryTrace::neumann(sys.surface(), input(u1, n, "u1")?.to_vec())?;
        let (u0, _) = solve_u0_from_u1(sys, &u1, optional_tol(flux_tol))?;
        copy_into(output(u0_out, n, "u0_out")?, u0.values())
    })
}

/// Interior values at `m` points (`3 m` doubles). Inconsistent traces
/// give `UBVP_STATUS_INCOMPATIBLE_DATA` unless `allow_inconsistent`.
/// `near_boundary` (`m` flags, may be null) marks degraded points.
///
/// # Safety
/// `u0`, `u1` hold `n` doubles, `points` `3 m`, `values` `m`.
#[no_mangle]
pub unsafe extern "C" fn ubvp_laplace_reconstruct(
    sys: *const UbvpLaplace,
    u0: *const f64,
    u1: *const f64,
    n: usize,
    points: *const f64,
    m: usize,
    allow_inconsistent: bool,
    values: *mut f64,
    near_boundary: *mut bool,
) -> UbvpStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let s = sys.surface();
        let u0 = BoundaryTrace::dirichlet(s, input(u0, n, "u0")?.to_vec())?;
        let u1 = BoundaryTrace::neumann(s, input(u1, n, "u1")?.to_vec())?;
        let pts: Vec<Vec3> = input(points, 3 * m, "points")?.chunks_exact(3).map(Vec3::from_column_slice).collect();
        let policy = if allow_inconsistent { InconsistencyPolicy::WarnAndProceed } else { InconsistencyPolicy::Reject };
        let eval = reconstruct_interior(sys, &u0, &u1, &pts, None, policy)?;
        copy_into(output(values, m, "values")?, &eval.values)?;
        if !near_boundary.is_null() && m > 0 {
            std::slice::from_raw_parts_mut(near_boundary, m).copy_from_slice(&eval.degraded);
        }
        Ok(())
    })
}

/// Initial data on the half line for the heat functions.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UbvpInitialData {
    /// Increasing sample points `x > 0`.
    pub x: *const f64,
    pub values: *const f64,
    pub len: usize,
    pub decay: UbvpXDecay,
    /// Closed form beyond the last sample, e.g. `"exp(x)"`; may be null.
    pub extension: *const c_char,
}

unsafe fn initial_trace(data: *const UbvpInitialData) -> FfiResult<InitialTrace> {
    let d = handle(data, "initial")?;
    let decay = match d.decay {
        UbvpXDecay::CompactlySupported => XDecay::CompactlySupported,
        UbvpXDecay::GaussianDominated => XDecay::GaussianDominated,
        UbvpXDecay::Polynomial => XDecay::Polynomial,
    };
    let ext = if d.extension.is_null() { None } else { Some(Extension::parse(&text(d.extension, "extension")?)?) };
    let x = input(d.x, d.len, "x")?.to_vec();
    let v = input(d.values, d.len, "values")?.to_vec();
    Ok(InitialTrace::new(x, v, decay, ext)?)
}

fn quadrature(gauss_nodes: usize) -> QuadratureConfig {
    let mut cfg = QuadratureConfig::default();
    if gauss_nodes > 0 {
        cfg.gauss_nodes = gauss_nodes;
    }
    cfg
}

/// Boundary values `φ` on the time grid `t` (`nt` increasing positive
/// times) from the initial data and the flux `ψ`. `gauss_nodes = 0`
/// selects the default quadrature.
///
/// # Safety
/// `t`, `psi` and `phi_out` hold `nt` doubles.
#[no_mangle]
pub unsafe extern "C" fn ubvp_heat_phi(
    initial: *const UbvpInitialData,
    t: *const f64,
    psi: *const f64,
    nt: usize,
    gauss_nodes: usize,
    phi_out: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let traces =
            CaloricTraces::new(initial_trace(initial)?, input(t, nt, "t")?.to_vec())?.with_psi(input(psi, nt, "psi")?.to_vec())?;
        let phi = phi_from_v_psi(&traces, &quadrature(gauss_nodes))?;
        copy_into(output(phi_out, nt, "phi_out")?, &phi)
    })
}

/// Flux `ψ` on the time grid from the initial data and the boundary
/// values `φ`.
///
/// # Safety
/// `t`, `phi` and `psi_out` hold `nt` doubles.
#[no_mangle]
pub unsafe extern "C" fn ubvp_heat_psi(
    initial: *const UbvpInitialData,
    t: *const f64,
    phi: *const f64,
    nt: usize,
    gauss_nodes: usize,
    psi_out: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let traces =
            CaloricTraces::new(initial_trace(initial)?, input(t, nt, "t")?.to_vec())?.with_phi(input(phi, nt, "phi")?.to_vec())?;
        let psi = psi_from_v_phi(&traces, &quadrature(gauss_nodes))?;
        copy_into(output(psi_out, nt, "psi_out")?, &psi)
    })
}

/// `u(t, x)` at `m` points given as interleaved `(t, x)` pairs with
/// `x > 0` and `t` within the time grid.
///
/// # Safety
/// `t` and `psi` hold `nt` doubles, `points` `2 m`, `values` `m`.
#[no_mangle]
pub unsafe extern "C" fn ubvp_heat_reconstruct(
    initial: *const UbvpInitialData,
    t: *const f64,
    psi: *const f64,
    nt: usize,
    points: *const f64,
    m: usize,
    gauss_nodes: usize,
    values: *mut f64,
) -> UbvpStatus {
    guard(|| {
        let traces =
            CaloricTraces::new(initial_trace(initial)?, input(t, nt, "t")?.to_vec())?.with_psi(input(psi, nt, "psi")?.to_vec())?;
        let pts: Vec<(f64, f64)> = input(points, 2 * m, "points")?.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let u = reconstruct_quarterplane(&traces, &pts, &quadrature(gauss_nodes))?;
        copy_into(output(values, m, "values")?, &u)
    })
}
