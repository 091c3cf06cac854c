//! The `ubvp` command line. Reports go to `report.json` (also printed on
//! stdout), bulk data to CSV, all in the output directory.
//!
//! Exit status: 0 success, 1 inconsistent data, 2 invalid input, 3
//! numeric failure. Failures print one JSON object on stderr.

mod job;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub use job::{CommandTag, ConvergenceOp, Given, HeatTarget, JobConfig, KernelArg, OUT_DIR_ENV};

use crate::error::{Result, UbvpError};
use crate::format::{fmt_f64, JsonObject};
use crate::geometry::{
    make_ball_volume_quadrature, verify_strong_convexity, Shape, Surface, SurfaceDescriptor, Vec3,
};
use crate::heat::{
    heat_residual, phi_from_v_psi, psi_from_v_phi, reconstruct_quarterplane, uniform_grid, CaloricTraces, Extension,
    InitialTrace, QuadratureConfig, XDecay,
};
use crate::io;
use crate::laplace::{
    laplace_residual, poisson_residual, reconstruct_interior, solve_u0_from_u1, solve_u1_from_u0,
    InconsistencyPolicy, LaplaceSystem, VolumeTermSign, DEFAULT_REGULARIZATION,
};
use crate::layer::{assemble_double_layer, assemble_single_layer};
use crate::oracles::{
    caloric_traces, harmonic_traces, low_degree_harmonics, sphere_double_layer_eigenvalue,
    sphere_single_layer_eigenvalue, CaloricOracle, HarmonicOracle, PoissonOracle,
};
use crate::system::ResidualReport;
use crate::trace::BoundaryTrace;

const DEFAULT_VOLUME_GRID: [usize; 3] = [12, 16, 32];
const DEFAULT_TMAX: f64 = 1.0;
const DEFAULT_NT: usize = 64;
const DEFAULT_XMAX: f64 = 16.0;
const DEFAULT_NX: usize = 256;
/// Heat convergence errors are measured from this time on.
const HEAT_ERROR_T0: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "ubvp", version, about = "Boundary equation checks, completions and reconstructions")]
struct Cli {
    #[command(flatten)]
    job: JobConfig,
}

/// What a command left behind besides its files.
#[derive(Debug)]
enum Outcome {
    Ok,
    /// Exit 1 with this payload on stderr.
    Inconsistent(String),
}

/// Parses `args`, runs the job and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", JsonObject::new().string("error", "invalid-argument").string("message", e.to_string().trim()).finish());
            return 2;
        }
    };
    let result = cli.job.resolve(std::env::var_os(OUT_DIR_ENV)).and_then(|job| dispatch(&job));
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Inconsistent(payload)) => {
            eprintln!("{payload}");
            1
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &UbvpError) -> u8 {
    match e {
        UbvpError::IncompatibleData { .. } => 1,
        UbvpError::InvalidArgument(_) | UbvpError::Unsupported(_) | UbvpError::Io(_) | UbvpError::Parse(_) => 2,
        UbvpError::NumericFailure(_) | UbvpError::NearSingular(_) => 3,
    }
}

pub fn error_json(e: &UbvpError) -> String {
    let obj = JsonObject::new().string("error", e.kind()).string("message", &e.to_string());
    match e {
        UbvpError::IncompatibleData { constraint, value } => obj.string("constraint", constraint).num("value", *value),
        _ => obj,
    }
    .finish()
}

fn dispatch(job: &JobConfig) -> Result<Outcome> {
    let out = Output { dir: job.out.clone().expect("resolved") };
    match job.command.expect("validated") {
        CommandTag::CheckLaplace => check_laplace(job, &out),
        CommandTag::CheckPoisson => check_poisson(job, &out),
        CommandTag::SolveLaplace => solve_laplace(job, &out),
        CommandTag::Reconstruct => reconstruct(job, &out),
        CommandTag::CheckHeat => check_heat(job, &out),
        CommandTag::SolveHeat => solve_heat(job, &out),
        CommandTag::ReconstructHeat => reconstruct_heat(job, &out),
        CommandTag::Convergence => convergence(job, &out),
        CommandTag::DumpOperator => dump_operator(job, &out),
        CommandTag::CheckConvexity => check_convexity(job, &out),
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn write(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        io::write_file(&self.dir.join(name), f)
    }

    /// Writes `report.json` and echoes it on stdout.
    fn report(&self, json: &str) -> Result<()> {
        self.write("report.json", |b| {
            b.extend_from_slice(json.as_bytes());
            b.push(b'\n');
            Ok(())
        })?;
        println!("{json}");
        Ok(())
    }
}

fn verdict(report: &ResidualReport) -> Outcome {
    if report.consistent {
        Outcome::Ok
    } else {
        Outcome::Inconsistent(
            JsonObject::new()
                .string("error", "inconsistent")
                .string("message", "traces fail the boundary equations")
                .raw("report", report.to_json())
                .finish(),
        )
    }
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| UbvpError::invalid(format!("--{flag} is required")))
}

fn reject(present: bool, flag: &str, why: &str) -> Result<()> {
    if present {
        return Err(UbvpError::invalid(format!("--{flag} {why}")));
    }
    Ok(())
}

// Laplace and Poisson

fn surface_descriptor(job: &JobConfig, path: &Path) -> Result<SurfaceDescriptor> {
    let desc = io::read_surface_descriptor(path)?;
    match job.grid.as_deref() {
        None => Ok(desc),
        Some(&[nt, np]) => Ok(desc.with_grid(nt, np)),
        Some(g) => Err(UbvpError::invalid(format!("--grid needs n_theta,n_phi, got {g:?}"))),
    }
}

fn load_surface(job: &JobConfig) -> Result<Surface> {
    let path = require(&job.surface, "surface")?;
    if io::is_off(path) {
        reject(job.grid.is_some(), "grid", "applies only to analytic surface descriptors")?;
        return io::load_surface(path);
    }
    surface_descriptor(job, path)?.build()
}

fn harmonic_oracle(job: &JobConfig) -> Result<Option<HarmonicOracle>> {
    job.oracle.as_deref().map(HarmonicOracle::parse).transpose()
}

fn read_u0(job: &JobConfig, surface: &Surface) -> Result<BoundaryTrace> {
    BoundaryTrace::dirichlet(surface, io::read_trace_csv(require(&job.u0, "u0")?, surface)?)
}

fn read_u1(job: &JobConfig, surface: &Surface) -> Result<BoundaryTrace> {
    BoundaryTrace::neumann(surface, io::read_trace_csv(require(&job.u1, "u1")?, surface)?)
}

fn laplace_traces(job: &JobConfig, surface: &Surface) -> Result<(BoundaryTrace, BoundaryTrace)> {
    match harmonic_oracle(job)? {
        Some(o) => harmonic_traces(&o, surface),
        None => Ok((read_u0(job, surface)?, read_u1(job, surface)?)),
    }
}

fn write_residual(out: &Output, report: &ResidualReport) -> Result<()> {
    out.write("residual.csv", |b| report.write_pointwise_csv(b))
}

fn check_laplace(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let surface = load_surface(job)?;
    let (u0, u1) = laplace_traces(job, &surface)?;
    let sys = LaplaceSystem::new(surface)?;
    let report = laplace_residual(&sys, &u0, &u1, job.tol)?;
    write_residual(out, &report)?;
    out.report(&report.to_json())?;
    Ok(verdict(&report))
}

fn check_poisson(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let surface = load_surface(job)?;
    let (radius, center) = match surface.shape() {
        Shape::Sphere { radius, center } => (*radius, *center),
        _ => return Err(UbvpError::Unsupported("volume quadrature is available for balls only".into())),
    };
    let [nr, nt, np] = match job.volume_grid.as_deref() {
        None => DEFAULT_VOLUME_GRID,
        Some(&[a, b, c]) => [a, b, c],
        Some(g) => return Err(UbvpError::invalid(format!("--volume-grid needs n_r,n_theta,n_phi, got {g:?}"))),
    };
    let vq = make_ball_volume_quadrature(radius, center, nr, nt, np)?;
    let sign = VolumeTermSign::from_value(job.poisson_sign.unwrap_or(1))?;
    let (u0, u1, f) = match job.oracle.as_deref() {
        Some(name) => match PoissonOracle::parse(name) {
            Ok(o) => o.sample(&surface, &vq)?,
            Err(_) => {
                let (u0, u1) = harmonic_traces(&HarmonicOracle::parse(name)?, &surface)?;
                (u0, u1, vec![0.0; vq.len()])
            }
        },
        None => {
            let f = *require(&job.f_const, "f-const")?;
            (read_u0(job, &surface)?, read_u1(job, &surface)?, vec![f; vq.len()])
        }
    };
    let sys = LaplaceSystem::with_volume(surface, vq)?;
    let report = poisson_residual(&sys, &u0, &u1, &f, sign, job.tol)?;
    write_residual(out, &report)?;
    out.report(&report.to_json())?;
    Ok(verdict(&report))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// Sup distance between `a` and `b` after removing the weighted mean of
/// `a - b`.
fn sup_diff_mod_constant(surface: &Surface, a: &[f64], b: &[f64]) -> Result<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = surface.integrate(&d)? / surface.area();
    Ok(d.iter().fold(0.0, |m: f64, v| m.max((v - mean).abs())))
}

fn solve_laplace(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let given = *require(&job.given, "given")?;
    let surface = load_surface(job)?;
    let oracle = harmonic_oracle(job)?;
    let exact = oracle.map(|o| harmonic_traces(&o, &surface)).transpose()?;
    let sys = LaplaceSystem::new(surface)?;
    let surface = sys.surface();
    let mut obj = JsonObject::new();
    let (u0, u1) = match given {
        Given::U1 => {
            reject(job.u0.is_some(), "u0", "is completed, not read, with --given u1")?;
            let u1 = match &exact {
                Some((_, u1)) => u1.clone(),
                None => read_u1(job, surface)?,
            };
            let (u0, note) = solve_u0_from_u1(&sys, &u1, job.flux_tol)?;
            out.write("u0.csv", |b| io::write_trace_csv(b, surface, u0.values()))?;
            obj = obj
                .string("given", "u1")
                .string("completed", "u0")
                .raw("nullspace", JsonObject::new().num("weighted_sum", note.weighted_sum).string("message", &note.message).finish());
            if let Some((e0, _)) = &exact {
                obj = obj.num("oracle_error", sup_diff_mod_constant(surface, u0.values(), e0.values())?);
            }
            (u0, u1)
        }
        Given::U0 => {
            reject(job.u1.is_some(), "u1", "is completed, not read, with --given u0")?;
            let u0 = match &exact {
                Some((u0, _)) => u0.clone(),
                None => read_u0(job, surface)?,
            };
            let u1 = solve_u1_from_u0(&sys, &u0, job.regularization.unwrap_or(DEFAULT_REGULARIZATION))?;
            out.write("u1.csv", |b| io::write_trace_csv(b, surface, u1.values()))?;
            obj = obj.string("given", "u0").string("completed", "u1").num("flux", surface.integrate(u1.values())?);
            if let Some((_, e1)) = &exact {
                obj = obj.num("oracle_error", sup_diff(u1.values(), e1.values()));
            }
            (u0, u1)
        }
    };
    let report = laplace_residual(&sys, &u0, &u1, job.tol)?;
    write_residual(out, &report)?;
    out.report(&obj.raw("residual", report.to_json()).finish())?;
    Ok(verdict(&report))
}

fn reconstruct(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let points = io::read_points_csv(require(&job.points, "points")?)?;
    let surface = load_surface(job)?;
    let (u0, u1) = laplace_traces(job, &surface)?;
    let oracle = harmonic_oracle(job)?;
    let sys = LaplaceSystem::new(surface)?;
    let policy = if job.allow_inconsistent { InconsistencyPolicy::WarnAndProceed } else { InconsistencyPolicy::Reject };
    let eval = reconstruct_interior(&sys, &u0, &u1, &points, job.tol, policy)?;
    out.write("values.csv", |b| {
        use std::io::Write;
        writeln!(b, "x,y,z,value,near_boundary")?;
        for ((p, v), d) in points.iter().zip(&eval.values).zip(&eval.degraded) {
            writeln!(b, "{},{},{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z), fmt_f64(*v), u8::from(*d))?;
        }
        Ok(())
    })?;
    let mut obj = JsonObject::new()
        .int("points", points.len())
        .int("near_boundary", eval.degraded.iter().filter(|&&d| d).count());
    if let Some(o) = oracle {
        let exact: Vec<f64> = points.iter().map(|p| o.eval(p)).collect();
        obj = obj.num("oracle_error", sup_diff(&eval.values, &exact));
    }
    out.report(&obj.finish())?;
    Ok(Outcome::Ok)
}

// Heat

fn quadrature_config(job: &JobConfig) -> Result<QuadratureConfig> {
    let mut cfg = QuadratureConfig::default();
    if let Some(n) = job.gauss_nodes {
        cfg.gauss_nodes = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn caloric_oracle(job: &JobConfig) -> Result<Option<CaloricOracle>> {
    job.oracle.as_deref().map(CaloricOracle::parse).transpose()
}

fn oracle_traces(job: &JobConfig, o: CaloricOracle) -> Result<CaloricTraces> {
    reject(job.x_decay.is_some(), "x-decay", "applies to file inputs; oracles carry their own")?;
    reject(job.v_extension.is_some(), "v-extension", "applies to file inputs; oracles carry their own")?;
    let t = uniform_grid(job.tmax.unwrap_or(DEFAULT_TMAX), job.nt.unwrap_or(DEFAULT_NT))?;
    let x = uniform_grid(job.xmax.unwrap_or(DEFAULT_XMAX), job.nx.unwrap_or(DEFAULT_NX))?;
    caloric_traces(o, &x, &t)
}

/// Traces from an oracle, or from files with `need_phi` / `need_psi`
/// selecting which boundary series are read.
fn heat_traces(job: &JobConfig, need_phi: bool, need_psi: bool) -> Result<(CaloricTraces, Option<CaloricOracle>)> {
    if let Some(o) = caloric_oracle(job)? {
        let mut tr = oracle_traces(job, o)?;
        if !need_phi {
            tr = tr.without_phi();
        }
        if !need_psi {
            tr = tr.without_psi();
        }
        return Ok((tr, Some(o)));
    }
    for (flag, set) in [("tmax", job.tmax.is_some()), ("nt", job.nt.is_some()), ("xmax", job.xmax.is_some()), ("nx", job.nx.is_some())] {
        reject(set, flag, "sets the oracle grid; file inputs carry their own")?;
    }
    reject(!need_phi && job.phi.is_some(), "phi", "is completed, not read, by this command")?;
    reject(!need_psi && job.psi.is_some(), "psi", "is completed, not read, by this command")?;
    let (x, v) = io::read_series_csv(require(&job.v, "v")?, "x")?;
    let decay = match job.x_decay.as_deref() {
        Some(s) => XDecay::parse(s)?,
        None => XDecay::CompactlySupported,
    };
    let ext = job.v_extension.as_deref().map(Extension::parse).transpose()?;
    let initial = InitialTrace::new(x, v, decay, ext)?;
    let phi = if need_phi { Some(io::read_series_csv(require(&job.phi, "phi")?, "t")?) } else { None };
    let psi = if need_psi { Some(io::read_series_csv(require(&job.psi, "psi")?, "t")?) } else { None };
    let t = match (&phi, &psi) {
        (Some((a, _)), Some((b, _))) => {
            if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
                return Err(UbvpError::invalid("phi and psi are sampled on different time grids"));
            }
            a.clone()
        }
        (Some((a, _)), None) | (None, Some((a, _))) => a.clone(),
        (None, None) => unreachable!("every heat command reads phi or psi"),
    };
    let mut tr = CaloricTraces::new(initial, t)?;
    if let Some((_, p)) = phi {
        tr = tr.with_phi(p)?;
    }
    if let Some((_, p)) = psi {
        tr = tr.with_psi(p)?;
    }
    Ok((tr, None))
}

fn write_heat_residual(out: &Output, t: &[f64], report: &ResidualReport) -> Result<()> {
    out.write("residual.csv", |b| io::write_series_csv(b, "t", t, &report.pointwise))
}

fn check_heat(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let cfg = quadrature_config(job)?;
    let (traces, _) = heat_traces(job, true, true)?;
    let report = heat_residual(&traces, &cfg, job.tol)?;
    write_heat_residual(out, traces.t_grid(), &report)?;
    out.report(&report.to_json())?;
    Ok(verdict(&report))
}

/// Sup of `|a - f(t)|` over grid times `t ≥ t0`.
fn sup_error_from(t: &[f64], a: &[f64], f: impl Fn(f64) -> f64, t0: f64) -> f64 {
    t.iter().zip(a).filter(|(t, _)| **t >= t0).fold(0.0, |m: f64, (t, v)| m.max((v - f(*t)).abs()))
}

fn solve_heat(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let target = *require(&job.target, "target")?;
    let cfg = quadrature_config(job)?;
    let (traces, oracle) = heat_traces(job, target == HeatTarget::Psi, target == HeatTarget::Phi)?;
    let t = traces.t_grid().to_vec();
    let (name, completed, traces) = match target {
        HeatTarget::Phi => {
            let phi = phi_from_v_psi(&traces, &cfg)?;
            ("phi", phi.clone(), traces.with_phi(phi)?)
        }
        HeatTarget::Psi => {
            let psi = psi_from_v_phi(&traces, &cfg)?;
            ("psi", psi.clone(), traces.with_psi(psi)?)
        }
    };
    out.write(&format!("{name}.csv"), |b| io::write_series_csv(b, "t", &t, &completed))?;
    let report = heat_residual(&traces, &cfg, job.tol)?;
    write_heat_residual(out, &t, &report)?;
    let mut obj = JsonObject::new().string("completed", name);
    if let Some(o) = oracle {
        let err = match target {
            HeatTarget::Phi => sup_error_from(&t, &completed, |t| o.phi(t), 0.0),
            HeatTarget::Psi => sup_error_from(&t, &completed, |t| o.psi(t), 0.0),
        };
        obj = obj.num("oracle_error", err);
    }
    out.report(&obj.raw("residual", report.to_json()).finish())?;
    Ok(verdict(&report))
}

fn reconstruct_heat(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let points = io::read_tx_points_csv(require(&job.points, "points")?)?;
    let cfg = quadrature_config(job)?;
    let (traces, oracle) = heat_traces(job, false, true)?;
    let values = reconstruct_quarterplane(&traces, &points, &cfg)?;
    out.write("values.csv", |b| {
        use std::io::Write;
        writeln!(b, "t,x,value")?;
        for ((t, x), v) in points.iter().zip(&values) {
            writeln!(b, "{},{},{}", fmt_f64(*t), fmt_f64(*x), fmt_f64(*v))?;
        }
        Ok(())
    })?;
    let mut obj = JsonObject::new().int("points", points.len());
    if let Some(o) = oracle {
        let exact: Vec<f64> = points.iter().map(|&(t, x)| o.eval(t, x)).collect();
        obj = obj.num("oracle_error", sup_diff(&values, &exact));
    }
    out.report(&obj.finish())?;
    Ok(Outcome::Ok)
}

// Convergence and diagnostics

fn unit_sphere_descriptor() -> SurfaceDescriptor {
    SurfaceDescriptor::Sphere { radius: 1.0, center: [0.0; 3], grid: [8, 16] }
}

fn convergence_descriptor(job: &JobConfig) -> Result<SurfaceDescriptor> {
    match &job.surface {
        None => Ok(unit_sphere_descriptor()),
        Some(p) if io::is_off(p) => Err(UbvpError::Unsupported("convergence studies need an analytic surface".into())),
        Some(p) => io::read_surface_descriptor(p),
    }
}

/// `max_n,Y ‖M Y - λ_n Y‖∞` over the degree ≤ 3 harmonics.
pub fn sphere_spectral_error(surface: &Surface, kernel: KernelArg) -> Result<f64> {
    let (radius, center) = match surface.shape() {
        Shape::Sphere { radius, center } => (*radius, *center),
        _ => return Err(UbvpError::Unsupported("spectral errors are defined on spheres only".into())),
    };
    let op = match kernel {
        KernelArg::DoubleLayer => assemble_double_layer(surface)?,
        KernelArg::SingleLayer => assemble_single_layer(surface)?,
    };
    let mut worst = 0.0f64;
    for (n, _, y) in low_degree_harmonics() {
        let vals = surface.sample(|p| y(&((p - center) / radius)));
        let lambda = match kernel {
            KernelArg::DoubleLayer => sphere_double_layer_eigenvalue(n),
            KernelArg::SingleLayer => sphere_single_layer_eigenvalue(n, radius),
        };
        let applied = op.apply(&vals)?;
        let scaled: Vec<f64> = vals.iter().map(|v| lambda * v).collect();
        worst = worst.max(sup_diff(&applied, &scaled));
    }
    Ok(worst)
}

/// `(unknowns, error)` of one convergence run at grid size `g`.
fn convergence_point(job: &JobConfig, op: ConvergenceOp, g: usize) -> Result<(usize, f64)> {
    match op {
        ConvergenceOp::DoubleLayer | ConvergenceOp::SingleLayer => {
            let surface = convergence_descriptor(job)?.with_grid(g, 2 * g).build()?;
            let kernel = if op == ConvergenceOp::DoubleLayer { KernelArg::DoubleLayer } else { KernelArg::SingleLayer };
            Ok((surface.len(), sphere_spectral_error(&surface, kernel)?))
        }
        ConvergenceOp::LaplaceResidual | ConvergenceOp::SolveU0 | ConvergenceOp::SolveU1 => {
            let oracle = harmonic_oracle(job)?.unwrap_or(HarmonicOracle::PointSource(Vec3::from(HarmonicOracle::DEFAULT_SOURCE)));
            let surface = convergence_descriptor(job)?.with_grid(g, 2 * g).build()?;
            let n = surface.len();
            let (u0, u1) = harmonic_traces(&oracle, &surface)?;
            let sys = LaplaceSystem::new(surface)?;
            let err = match op {
                ConvergenceOp::LaplaceResidual => laplace_residual(&sys, &u0, &u1, job.tol)?.sup_norm,
                ConvergenceOp::SolveU0 => {
                    // The oracle has zero flux; on coarse grids its samples
                    // do not, so the quadrature defect is projected out.
                    let s = sys.surface();
                    let mean = s.integrate(u1.values())? / s.area();
                    let u1 = BoundaryTrace::neumann(s, u1.values().iter().map(|v| v - mean).collect())?;
                    let (got, _) = solve_u0_from_u1(&sys, &u1, job.flux_tol)?;
                    sup_diff_mod_constant(sys.surface(), got.values(), u0.values())?
                }
                _ => {
                    let got = solve_u1_from_u0(&sys, &u0, job.regularization.unwrap_or(DEFAULT_REGULARIZATION))?;
                    sup_diff(got.values(), u1.values())
                }
            };
            Ok((n, err))
        }
        ConvergenceOp::HeatPhi | ConvergenceOp::HeatPsi => {
            let oracle = caloric_oracle(job)?.unwrap_or(CaloricOracle::ErfSimilarity);
            let job = JobConfig { nt: Some(g), ..job.clone() };
            let cfg = quadrature_config(&job)?;
            let tr = oracle_traces(&job, oracle)?;
            let t = tr.t_grid().to_vec();
            let err = if op == ConvergenceOp::HeatPhi {
                sup_error_from(&t, &phi_from_v_psi(&tr, &cfg)?, |t| oracle.phi(t), HEAT_ERROR_T0)
            } else {
                sup_error_from(&t, &psi_from_v_phi(&tr, &cfg)?, |t| oracle.psi(t), HEAT_ERROR_T0)
            };
            Ok((g, err))
        }
    }
}

fn convergence(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let op = *require(&job.op, "op")?;
    let grids = require(&job.grids, "grids")?;
    if grids.is_empty() {
        return Err(UbvpError::invalid("--grids is empty"));
    }
    reject(job.grid.is_some(), "grid", "is replaced by --grids in convergence studies")?;
    let rows: Vec<(usize, usize, f64)> = grids
        .iter()
        .map(|&g| convergence_point(job, op, g).map(|(n, e)| (g, n, e)))
        .collect::<Result<_>>()?;
    let mut orders = Vec::new();
    out.write("convergence.csv", |b| {
        use std::io::Write;
        writeln!(b, "grid,unknowns,error,ratio,order")?;
        for (k, &(g, n, e)) in rows.iter().enumerate() {
            if k == 0 {
                writeln!(b, "{g},{n},{},,", fmt_f64(e))?;
            } else {
                let (g0, _, e0) = rows[k - 1];
                let ratio = e0 / e;
                let order = ratio.ln() / (g as f64 / g0 as f64).ln();
                orders.push(order);
                writeln!(b, "{g},{n},{},{},{}", fmt_f64(e), fmt_f64(ratio), fmt_f64(order))?;
            }
        }
        Ok(())
    })?;
    let op_name = op.to_possible_value().expect("no skipped variants").get_name().to_string();
    let errors: Vec<String> = rows.iter().map(|r| fmt_f64(r.2)).collect();
    let orders: Vec<String> = orders.iter().map(|o| fmt_f64(*o)).collect();
    out.report(
        &JsonObject::new()
            .string("op", &op_name)
            .raw("grids", format!("{grids:?}").replace(' ', ""))
            .raw("errors", format!("[{}]", errors.join(",")))
            .raw("orders", format!("[{}]", orders.join(",")))
            .finish(),
    )?;
    Ok(Outcome::Ok)
}

fn dump_operator(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let kernel = *require(&job.kernel, "kernel")?;
    let surface = load_surface(job)?;
    let op = match kernel {
        KernelArg::DoubleLayer => assemble_double_layer(&surface)?,
        KernelArg::SingleLayer => assemble_single_layer(&surface)?,
    };
    out.write("operator.bin", |b| op.write_binary(b))?;
    let name = kernel.to_possible_value().expect("no skipped variants").get_name().to_string();
    out.report(&JsonObject::new().string("kernel", &name).int("rows", op.nrows()).int("cols", op.ncols()).finish())?;
    Ok(Outcome::Ok)
}

fn check_convexity(job: &JobConfig, out: &Output) -> Result<Outcome> {
    let surface = load_surface(job)?;
    let r = verify_strong_convexity(&surface)?;
    let json = JsonObject::new()
        .num("c0_estimate", r.c0_estimate)
        .raw("min_location", format!("[{},{}]", fmt_f64(r.min_location[0]), fmt_f64(r.min_location[1])))
        .num("threshold", r.threshold)
        .boolean("passed", r.passed)
        .finish();
    out.report(&json)?;
    if r.passed {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Inconsistent(
            JsonObject::new().string("error", "not-convex").string("message", "surface fails the convexity check").raw("report", json).finish(),
        ))
    }
}
