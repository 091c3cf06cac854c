//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any fails. Runs at desk scale on the 32×64 unit sphere.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use ubvp::geometry::{make_ball_volume_quadrature, make_ellipsoid, make_sphere, Surface, Vec3};
use ubvp::heat::{
    phi_from_v_psi, psi_from_v_phi, reconstruct_quarterplane, uniform_grid, CaloricTraces,
    InitialTrace, QuadratureConfig, XDecay,
};
use ubvp::laplace::{
    laplace_residual, poisson_residual, reconstruct_interior, solve_u0_from_u1, solve_u1_from_u0,
    InconsistencyPolicy, LaplaceSystem, VolumeTermSign, DEFAULT_REGULARIZATION,
};
use ubvp::layer::{assemble_double_layer, assemble_single_layer, gauss_identity_check, ProbeLocation};
use ubvp::oracles::{
    caloric_fd_residual, caloric_traces, harmonic_traces, low_degree_harmonics, sphere_double_layer_eigenvalue,
    sphere_single_layer_eigenvalue, CaloricOracle, HarmonicOracle, PoissonOracle,
};
use ubvp::trace::{BoundaryTrace, TraceRole};
use ubvp::UbvpError;

const GAUSS_INSIDE_TOL: f64 = 1e-6;
const GAUSS_OUTSIDE_TOL: f64 = 1e-8;
const ROW_SUM_TOL: f64 = 1e-12;
/// Plain quadrature of the off-surface kernel needs the probe to stay a
/// few node spacings away from the surface.
const GAUSS_PROBE_MIN_DISTANCE: f64 = 0.25;
const SPECTRAL_TOL: f64 = 1e-3;
const SPECTRAL_SHRINK: f64 = 4.0;
/// Errors this small are rounding, and no longer shrink with the grid.
const SPECTRAL_ROUNDOFF_FLOOR: f64 = 1e-12;
const FORWARD_RESIDUAL_TOL: f64 = 1e-4;
const ZERO_FLUX_TOL: f64 = 1e-10;
const COMPLETION_TOL: f64 = 1e-3;
const RECONSTRUCT_TOL: f64 = 1e-5;
const RECONSTRUCT_MIN_DISTANCE: f64 = 0.3;
const POISSON_RESIDUAL_TOL: f64 = 1e-3;
const POISSON_COMPAT_TOL: f64 = 1e-6;
const POISSON_WRONG_SIGN_TOL: f64 = 1e-3;
const PHI_WINDOW: (f64, f64) = (0.1, 1.0);
const ROUND_TRIP_TOL: f64 = 1e-3;
const QUARTER_PLANE_TOL: f64 = 1e-4;
const BOUNDARY_LIMIT_TOL: f64 = 1e-4;
const FD_HEAT_TOL: f64 = 1e-3;
const INCONSISTENT_COMPAT_TOL: f64 = 1e-10;
const LINEARITY_TOL: f64 = 0.05;

type Check = Result<String, String>;

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

fn sphere(nt: usize) -> Surface {
    make_sphere(1.0, Vec3::zeros(), nt, 2 * nt).unwrap()
}

fn harmonic_oracles() -> Vec<(&'static str, HarmonicOracle)> {
    ["constant", "linear-z", "quadratic-y2", "r2y2", "point-source"]
        .into_iter()
        .map(|n| (n, HarmonicOracle::parse(n).unwrap()))
        .collect()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gauss_identities() -> Check {
    let probes_in = [Vec3::zeros(), Vec3::new(0.2, -0.1, 0.3), Vec3::new(0.0, 0.0, -0.3), Vec3::new(0.4, 0.3, 0.0)];
    let probes_out = [Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.5, 1.0, 0.0), Vec3::new(-3.0, 0.5, 2.0)];
    let mut worst = [0.0f64; 3];
    for surface in [sphere(32), make_ellipsoid(1.0, 0.8, 0.6, Vec3::zeros(), 32, 64).unwrap()] {
        let k = assemble_double_layer(&surface).unwrap();
        let probes: Vec<Vec3> = probes_in
            .iter()
            .chain(&probes_out)
            .copied()
            .filter(|p| surface.distance_to(p) >= GAUSS_PROBE_MIN_DISTANCE)
            .collect();
        let rep = gauss_identity_check(&surface, &k, &probes).unwrap();
        for p in &rep.probes {
            let slot = if p.location == ProbeLocation::Inside { 0 } else { 1 };
            worst[slot] = worst[slot].max(p.error);
        }
        worst[2] = worst[2].max(rep.on_surface_max_deviation);
    }
    ensure(
        worst[0] <= GAUSS_INSIDE_TOL && worst[1] <= GAUSS_OUTSIDE_TOL && worst[2] <= ROW_SUM_TOL,
        format!(
            "inside {:.1e}, outside {:.1e} (probes >= {GAUSS_PROBE_MIN_DISTANCE} from S), row sums {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn spectral_error(surface: &Surface, double: bool) -> f64 {
    let op = if double { assemble_double_layer(surface) } else { assemble_single_layer(surface) }.unwrap();
    let mut worst = 0.0f64;
    for (n, _, y) in low_degree_harmonics() {
        let vals = surface.sample(y);
        let lambda = if double { sphere_double_layer_eigenvalue(n) } else { sphere_single_layer_eigenvalue(n, 1.0) };
        let want: Vec<f64> = vals.iter().map(|v| lambda * v).collect();
        worst = worst.max(sup_diff(&op.apply(&vals).unwrap(), &want));
    }
    worst
}

fn layer_spectra() -> Check {
    let (coarse, fine) = (sphere(16), sphere(32));
    let mut details = Vec::new();
    let mut ok = true;
    for (name, double) in [("K", true), ("S", false)] {
        let (e0, e1) = (spectral_error(&coarse, double), spectral_error(&fine, double));
        let shrinks = e0 / e1 >= SPECTRAL_SHRINK || e1 <= SPECTRAL_ROUNDOFF_FLOOR;
        ok &= e1 <= SPECTRAL_TOL && shrinks;
        details.push(format!("{name}: 16x32 {e0:.1e}, 32x64 {e1:.1e}"));
    }
    ensure(ok, details.join("; "))
}

fn forward_residuals(sys: &LaplaceSystem) -> Check {
    let mut worst = (0.0f64, 0.0f64);
    for (_, o) in harmonic_oracles() {
        let (u0, u1) = harmonic_traces(&o, sys.surface()).unwrap();
        let rep = laplace_residual(sys, &u0, &u1, None).unwrap();
        worst.0 = worst.0.max(rep.sup_norm);
        worst.1 = worst.1.max(rep.compatibility[0].value.abs());
    }
    ensure(
        worst.0 <= FORWARD_RESIDUAL_TOL && worst.1 <= ZERO_FLUX_TOL,
        format!("sup residual {:.1e}, |flux| {:.1e} over 5 oracles", worst.0, worst.1),
    )
}

fn converse(sys: &LaplaceSystem) -> Check {
    let s = sys.surface();
    let probes: Vec<Vec3> = [
        Vec3::zeros(),
        Vec3::new(0.3, 0.2, -0.1),
        Vec3::new(0.0, 0.0, 0.7),
        Vec3::new(-0.5, 0.4, 0.2),
        Vec3::new(0.1, -0.6, -0.35),
    ]
    .into_iter()
    .filter(|p| s.distance_to(p) >= RECONSTRUCT_MIN_DISTANCE)
    .collect();
    let mut worst = [0.0f64; 4];
    for (_, o) in harmonic_oracles() {
        let (u0, u1) = harmonic_traces(&o, s).unwrap();
        let (got0, _) = solve_u0_from_u1(sys, &u1, None).unwrap();
        let d: Vec<f64> = got0.values().iter().zip(u0.values()).map(|(a, b)| a - b).collect();
        let mean = s.integrate(&d).unwrap() / s.area();
        worst[0] = worst[0].max(d.iter().fold(0.0, |m: f64, v| m.max((v - mean).abs())));
        let got1 = solve_u1_from_u0(sys, &u0, DEFAULT_REGULARIZATION).unwrap();
        worst[1] = worst[1].max(sup_diff(got1.values(), u1.values()));
        worst[2] = worst[2].max(s.integrate(got1.values()).unwrap().abs());
        let ev = reconstruct_interior(sys, &u0, &u1, &probes, None, InconsistencyPolicy::Reject).unwrap();
        let exact: Vec<f64> = probes.iter().map(|p| o.eval(p)).collect();
        worst[3] = worst[3].max(sup_diff(&ev.values, &exact));
    }
    ensure(
        worst[0] <= COMPLETION_TOL && worst[1] <= COMPLETION_TOL && worst[2] <= ZERO_FLUX_TOL && worst[3] <= RECONSTRUCT_TOL,
        format!(
            "u0 {:.1e} (mod const), u1 {:.1e}, |flux| {:.1e}, interior {:.1e} at {} probes",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            probes.len()
        ),
    )
}

fn poisson() -> Check {
    let s = sphere(32);
    let vq = make_ball_volume_quadrature(1.0, Vec3::zeros(), 12, 16, 32).unwrap();
    let (u0, u1, f) = PoissonOracle::RadialQuadratic.sample(&s, &vq).unwrap();
    let sys = LaplaceSystem::with_volume(s, vq).unwrap();
    let plus = poisson_residual(&sys, &u0, &u1, &f, VolumeTermSign::Plus, None).unwrap();
    let minus = poisson_residual(&sys, &u0, &u1, &f, VolumeTermSign::Minus, None).unwrap();
    let compat = plus.compatibility[0].value.abs();
    ensure(
        plus.sup_norm <= POISSON_RESIDUAL_TOL
            && compat <= POISSON_COMPAT_TOL
            && (minus.sup_norm - 16.0 * PI).abs() <= POISSON_WRONG_SIGN_TOL,
        format!(
            "sigma=+1 sup {:.1e}, compat {:.1e}; sigma=-1 sup {:.6} (16pi = {:.6})",
            plus.sup_norm,
            compat,
            minus.sup_norm,
            16.0 * PI
        ),
    )
}

fn oracle_grid(o: CaloricOracle, nt: usize) -> CaloricTraces {
    caloric_traces(o, &uniform_grid(16.0, 256).unwrap(), &uniform_grid(1.0, nt).unwrap()).unwrap()
}

fn phi_evaluation() -> Check {
    let cfg = QuadratureConfig::default();
    let cases = [
        (CaloricOracle::Constant, 1e-12),
        (CaloricOracle::LinearX, 1e-8),
        (CaloricOracle::X2Plus2t, 1e-8),
        (CaloricOracle::ErfSimilarity, 1e-3),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (o, tol) in cases {
        let tr = oracle_grid(o, 64);
        let phi = phi_from_v_psi(&tr, &cfg).unwrap();
        let err = tr
            .t_grid()
            .iter()
            .zip(&phi)
            .filter(|(t, _)| **t >= PHI_WINDOW.0 && **t <= PHI_WINDOW.1)
            .fold(0.0f64, |m, (t, p)| m.max((p - o.phi(*t)).abs()));
        ok &= err <= tol;
        details.push(format!("{o} {err:.1e}"));
    }
    ensure(ok, details.join(", "))
}

fn abel_round_trip() -> Check {
    let cfg = QuadratureConfig::default();
    let n = 64;
    let t = uniform_grid(1.0, n).unwrap();
    let h = t[0];
    let x = uniform_grid(4.0, 64).unwrap();
    let quiet = InitialTrace::new(x.clone(), vec![0.0; x.len()], XDecay::CompactlySupported, None).unwrap();
    let smooth: [(&str, fn(f64) -> f64); 3] = [("cos t", |t| t.cos()), ("1 + t^2", |t| 1.0 + t * t), ("e^-t", |t| (-t).exp())];
    let mut worst = 0.0f64;
    let mut names = Vec::new();
    for (name, psi_fn) in smooth {
        let psi: Vec<f64> = t.iter().map(|&s| psi_fn(s)).collect();
        let tr = CaloricTraces::new(quiet.clone(), t.clone()).unwrap().with_psi(psi.clone()).unwrap();
        let phi = phi_from_v_psi(&tr, &cfg).unwrap();
        let back = psi_from_v_phi(&tr.without_psi().with_phi(phi).unwrap(), &cfg).unwrap();
        let err = t
            .iter()
            .zip(back.iter().zip(&psi))
            .filter(|(s, _)| **s >= 4.0 * h)
            .fold(0.0f64, |m, (_, (a, b))| m.max((a - b).abs()));
        worst = worst.max(err);
        names.push(name);
    }
    // Oracle data with nonzero v.
    let tr = oracle_grid(CaloricOracle::ExpGrowth, n);
    let phi = phi_from_v_psi(&tr, &cfg).unwrap();
    let back = psi_from_v_phi(&tr.clone().without_psi().with_phi(phi).unwrap(), &cfg).unwrap();
    let err = t
        .iter()
        .zip(back.iter().zip(tr.psi().unwrap()))
        .filter(|(s, _)| **s >= 4.0 * h)
        .fold(0.0f64, |m, (_, (a, b))| m.max((a - b).abs()));
    worst = worst.max(err);
    names.push("exp-growth");
    ensure(worst <= ROUND_TRIP_TOL, format!("sup {worst:.1e} on t in [4h, 1] for {}", names.join(", ")))
}

fn quarter_plane() -> Check {
    let cfg = QuadratureConfig::default();
    let pts: Vec<(f64, f64)> = [0.25, 0.5, 1.0]
        .iter()
        .flat_map(|&t| [0.1, 0.5, 1.0, 2.0].into_iter().map(move |x| (t, x)))
        .collect();
    let mut worst = [0.0f64; 3];
    for o in CaloricOracle::ALL {
        let tr = oracle_grid(o, 64);
        let got = reconstruct_quarterplane(&tr, &pts, &cfg).unwrap();
        let exact: Vec<f64> = pts.iter().map(|&(t, x)| o.eval(t, x)).collect();
        worst[0] = worst[0].max(sup_diff(&got, &exact));

        let phi = phi_from_v_psi(&tr, &cfg).unwrap();
        let near: Vec<(f64, f64)> = tr.t_grid().iter().filter(|t| **t >= PHI_WINDOW.0).map(|&t| (t, 1e-6)).collect();
        let limit = reconstruct_quarterplane(&tr, &near, &cfg).unwrap();
        let phi_at: Vec<f64> = tr
            .t_grid()
            .iter()
            .zip(&phi)
            .filter(|(t, _)| **t >= PHI_WINDOW.0)
            .map(|(_, p)| *p)
            .collect();
        worst[1] = worst[1].max(sup_diff(&limit, &phi_at));

        let h = 1e-3;
        for &(t, x) in &[(0.5, 0.5), (0.75, 1.0), (0.3, 0.2)] {
            let u = |t: f64, x: f64| reconstruct_quarterplane(&tr, &[(t, x)], &cfg).unwrap()[0];
            worst[2] = worst[2].max(caloric_fd_residual(u, t, x, h).abs());
        }
    }
    ensure(
        worst[0] <= QUARTER_PLANE_TOL && worst[1] <= BOUNDARY_LIMIT_TOL && worst[2] <= FD_HEAT_TOL,
        format!("interior {:.1e}, x->0 limit {:.1e}, FD heat residual {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn inconsistency(sys: &LaplaceSystem) -> Check {
    let s = sys.surface();
    let one0 = BoundaryTrace::constant(s, TraceRole::Dirichlet, 1.0);
    let one1 = BoundaryTrace::constant(s, TraceRole::Neumann, 1.0);
    let rep = laplace_residual(sys, &one0, &one1, None).unwrap();
    let compat = rep.compatibility[0].value;
    let rejected = matches!(
        reconstruct_interior(sys, &one0, &one1, &[Vec3::zeros()], None, InconsistencyPolicy::Reject),
        Err(UbvpError::IncompatibleData { value, .. }) if (value - 4.0 * PI).abs() <= INCONSISTENT_COMPAT_TOL
    );

    let (u0, u1) = harmonic_traces(&HarmonicOracle::LinearZ, s).unwrap();
    let bump = s.sample(|p| (3.0 * p.x).sin() * p.y * p.y + p.z.powi(4));
    let mut per_eps = Vec::new();
    for eps in [1e-3, 1e-2, 1e-1] {
        let pert: Vec<f64> = u0.values().iter().zip(&bump).map(|(a, b)| a + eps * b).collect();
        let r = laplace_residual(sys, &BoundaryTrace::dirichlet(s, pert).unwrap(), &u1, None).unwrap();
        per_eps.push(r.weighted_l2 / eps);
    }
    let lo = per_eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = per_eps.iter().cloned().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    ensure(
        !rep.consistent && (compat - 4.0 * PI).abs() <= INCONSISTENT_COMPAT_TOL && rejected && spread <= LINEARITY_TOL,
        format!(
            "(1,1) compat - 4pi = {:.1e}, rejected: {rejected}; residual/eps spread {:.2}%",
            compat - 4.0 * PI,
            100.0 * spread
        ),
    )
}

fn run_cli(dir: &Path, out: &str, args: &[&str]) -> Result<(Vec<u8>, Vec<(String, Vec<u8>)>), String> {
    let out_dir = dir.join(out);
    let res = Command::new(env!("CARGO_BIN_EXE_ubvp"))
        .args(args)
        .arg("--out")
        .arg(&out_dir)
        .current_dir(dir)
        .env_remove("UBVP_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
        .map_err(|e| format!("{args:?}: {e}"))?
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    let mut stdout = res.stdout;
    stdout.extend_from_slice(&res.status.code().unwrap_or(-1).to_le_bytes());
    Ok((stdout, files))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(d.join("sphere.json"), r#"{"type":"sphere","radius":1.0,"grid":[16,32]}"#).unwrap();
    std::fs::write(d.join("pts.csv"), "x,y,z\n0,0,0\n0.2,0.1,-0.3\n").unwrap();
    std::fs::write(d.join("tx.csv"), "t,x\n0.5,0.25\n1.0,1.5\n").unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["check-laplace", "--surface", "sphere.json", "--oracle", "point-source"],
        vec!["check-poisson", "--surface", "sphere.json", "--oracle", "radial-quadratic", "--volume-grid", "6,8,16"],
        vec!["solve-laplace", "--surface", "sphere.json", "--oracle", "r2y2", "--given", "u1"],
        vec!["solve-laplace", "--surface", "sphere.json", "--oracle", "r2y2", "--given", "u0"],
        vec!["reconstruct", "--surface", "sphere.json", "--oracle", "linear-z", "--points", "pts.csv"],
        vec!["check-heat", "--oracle", "erf-similarity"],
        vec!["solve-heat", "--oracle", "x2-plus-2t", "--target", "phi"],
        vec!["solve-heat", "--oracle", "exp-growth", "--target", "psi"],
        vec!["reconstruct-heat", "--oracle", "erf-similarity", "--points", "tx.csv"],
        vec!["convergence", "--op", "solve-u0", "--grids", "4,8"],
        vec!["dump-operator", "--surface", "sphere.json", "--kernel", "single-layer"],
        vec!["check-convexity", "--surface", "sphere.json"],
    ];
    for (k, args) in commands.iter().enumerate() {
        let a = run_cli(d, &format!("run{k}a"), args)?;
        let b = run_cli(d, &format!("run{k}b"), args)?;
        if a != b || a.1.is_empty() {
            return Err(format!("{} differs between runs", args[0]));
        }
    }
    Ok(format!("{} commands byte-identical across two runs", commands.len()))
}

fn main() {
    let sys = LaplaceSystem::new(sphere(32)).expect("32x64 sphere system");
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("gauss-identities", Box::new(gauss_identities)),
        ("layer-spectra", Box::new(layer_spectra)),
        ("laplace-forward", Box::new(|| forward_residuals(&sys))),
        ("laplace-converse", Box::new(|| converse(&sys))),
        ("poisson-oracle", Box::new(poisson)),
        ("heat-phi-evaluation", Box::new(phi_evaluation)),
        ("abel-round-trip", Box::new(abel_round_trip)),
        ("quarter-plane-reconstruction", Box::new(quarter_plane)),
        ("inconsistency-detection", Box::new(|| inconsistency(&sys))),
        ("cli-determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
