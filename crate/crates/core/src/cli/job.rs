//! Job description. Every flag has a field of the same (kebab-case) name
//! in a `--config` JSON file; flags given on the command line win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::{Result, UbvpError};

pub const OUT_DIR_ENV: &str = "UBVP_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandTag {
    /// Residual of (u0, u1) against the Laplace boundary equations.
    CheckLaplace,
    /// Residual of (u0, u1, f) against the Poisson boundary equations.
    CheckPoisson,
    /// Complete the missing Laplace trace.
    SolveLaplace,
    /// Interior values from consistent Laplace traces.
    Reconstruct,
    /// Residual of (v, phi, psi) against the quarter-plane heat equation.
    CheckHeat,
    /// Complete phi or psi.
    SolveHeat,
    /// Values in the open quarter plane from v and psi.
    ReconstructHeat,
    /// Error-versus-grid table for one operation.
    Convergence,
    /// Dense layer operator as a flat binary file.
    DumpOperator,
    /// Strong convexity of an analytic surface.
    CheckConvexity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Given {
    U0,
    U1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatTarget {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceOp {
    /// Sup error of K Y = -2π/(2n+1) Y over n ≤ 3 on a sphere.
    DoubleLayer,
    /// Sup error of S Y = 4πr/(2n+1) Y over n ≤ 3 on a sphere.
    SingleLayer,
    /// Sup residual of a harmonic oracle.
    LaplaceResidual,
    /// Sup error of u0 completed from the oracle's u1, up to a constant.
    SolveU0,
    /// Sup error of u1 completed from the oracle's u0.
    SolveU1,
    /// Sup error of phi from (v, psi) on t ≥ 0.1.
    HeatPhi,
    /// Sup error of psi from (v, phi) on t ≥ 0.1.
    HeatPsi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    SingleLayer,
    DoubleLayer,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct JobConfig {
    #[arg(value_enum)]
    pub command: Option<CommandTag>,

    /// JSON job file.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Output directory [default: $UBVP_OUT_DIR, else .]
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Surface descriptor (JSON) or triangle mesh (.off).
    #[arg(long)]
    pub surface: Option<PathBuf>,

    /// Parameter grid `n_theta,n_phi` overriding the descriptor's.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,

    /// Oracle supplying every trace (and the source term).
    #[arg(long)]
    pub oracle: Option<String>,

    /// Dirichlet trace CSV (`index,x,y,z,value`).
    #[arg(long)]
    pub u0: Option<PathBuf>,

    /// Neumann trace CSV (`index,x,y,z,value`).
    #[arg(long)]
    pub u1: Option<PathBuf>,

    /// Constant source term for file inputs to check-poisson.
    #[arg(long, allow_hyphen_values = true)]
    pub f_const: Option<f64>,

    /// Ball quadrature `n_r,n_theta,n_phi` [default: 12,16,32]
    #[arg(long, value_delimiter = ',')]
    pub volume_grid: Option<Vec<usize>>,

    /// Sign of the volume term, +1 or -1 [default: +1]
    #[arg(long, allow_hyphen_values = true)]
    pub poisson_sign: Option<i32>,

    /// Consistency tolerance [default: 1e-6 (1 + |first trace| + |second trace|)]
    #[arg(long)]
    pub tol: Option<f64>,

    /// Relative tolerance on the net flux of a given u1 [default: 1e-8]
    #[arg(long)]
    pub flux_tol: Option<f64>,

    /// Relative Tikhonov weight for the u1 completion [default: 1e-10]
    #[arg(long)]
    pub regularization: Option<f64>,

    #[arg(long, value_enum)]
    pub given: Option<Given>,

    #[arg(long, value_enum)]
    pub target: Option<HeatTarget>,

    /// Points CSV: `x,y,z` for reconstruct, `t,x` for reconstruct-heat.
    #[arg(long)]
    pub points: Option<PathBuf>,

    /// Reconstruct even when the traces fail the residual check.
    #[arg(long)]
    pub allow_inconsistent: bool,

    /// Final time of the oracle time grid [default: 1]
    #[arg(long)]
    pub tmax: Option<f64>,

    /// Number of oracle time samples [default: 64]
    #[arg(long)]
    pub nt: Option<usize>,

    /// Extent of the oracle x grid [default: 16]
    #[arg(long)]
    pub xmax: Option<f64>,

    /// Number of oracle x samples [default: 256]
    #[arg(long)]
    pub nx: Option<usize>,

    /// Initial data CSV (`x,value`).
    #[arg(long)]
    pub v: Option<PathBuf>,

    /// Boundary values CSV (`t,value`).
    #[arg(long)]
    pub phi: Option<PathBuf>,

    /// Boundary flux CSV (`t,value`).
    #[arg(long)]
    pub psi: Option<PathBuf>,

    /// Tail model of v: compactly-supported, gaussian-dominated or polynomial [default: compactly-supported]
    #[arg(long)]
    pub x_decay: Option<String>,

    /// Closed form of v beyond its grid, e.g. `exp(x)` or `x^2 + 1`.
    #[arg(long)]
    pub v_extension: Option<String>,

    /// Gauss–Legendre nodes for the initial-data term [default: 64]
    #[arg(long)]
    pub gauss_nodes: Option<usize>,

    #[arg(long, value_enum)]
    pub op: Option<ConvergenceOp>,

    /// Grid sizes for convergence: n_theta for surfaces (n_phi = 2 n_theta), nt for heat.
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,

    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
}

impl JobConfig {
    /// Fills unset flags from the `--config` file, then the output
    /// directory from the environment.
    pub fn resolve(self, env_out: Option<OsString>) -> Result<JobConfig> {
        let mut job = match self.config.clone() {
            Some(path) => {
                let text = crate::io::read_text(&path)?;
                let mut file: JobConfig =
                    serde_json::from_str(&text).map_err(|e| UbvpError::Parse(format!("{}: {e}", path.display())))?;
                file.rebase(path.parent().unwrap_or(Path::new("")));
                self.or(file)
            }
            None => self,
        };
        if job.out.is_none() {
            job.out = Some(env_out.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")));
        }
        job.validate()?;
        Ok(job)
    }

    /// Relative paths in a config file are relative to the file.
    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.out,
            &mut self.surface,
            &mut self.u0,
            &mut self.u1,
            &mut self.points,
            &mut self.v,
            &mut self.phi,
            &mut self.psi,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    fn or(self, file: JobConfig) -> JobConfig {
        JobConfig {
            command: self.command.or(file.command),
            config: self.config,
            out: self.out.or(file.out),
            surface: self.surface.or(file.surface),
            grid: self.grid.or(file.grid),
            oracle: self.oracle.or(file.oracle),
            u0: self.u0.or(file.u0),
            u1: self.u1.or(file.u1),
            f_const: self.f_const.or(file.f_const),
            volume_grid: self.volume_grid.or(file.volume_grid),
            poisson_sign: self.poisson_sign.or(file.poisson_sign),
            tol: self.tol.or(file.tol),
            flux_tol: self.flux_tol.or(file.flux_tol),
            regularization: self.regularization.or(file.regularization),
            given: self.given.or(file.given),
            target: self.target.or(file.target),
            points: self.points.or(file.points),
            allow_inconsistent: self.allow_inconsistent || file.allow_inconsistent,
            tmax: self.tmax.or(file.tmax),
            nt: self.nt.or(file.nt),
            xmax: self.xmax.or(file.xmax),
            nx: self.nx.or(file.nx),
            v: self.v.or(file.v),
            phi: self.phi.or(file.phi),
            psi: self.psi.or(file.psi),
            x_decay: self.x_decay.or(file.x_decay),
            v_extension: self.v_extension.or(file.v_extension),
            gauss_nodes: self.gauss_nodes.or(file.gauss_nodes),
            op: self.op.or(file.op),
            grids: self.grids.or(file.grids),
            kernel: self.kernel.or(file.kernel),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.command.is_none() {
            return Err(UbvpError::invalid("no command given"));
        }
        for (name, v) in [("tol", self.tol), ("flux-tol", self.flux_tol), ("tmax", self.tmax), ("xmax", self.xmax)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(UbvpError::invalid(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(r) = self.regularization {
            if !(r.is_finite() && r >= 0.0) {
                return Err(UbvpError::invalid(format!("--regularization must be non-negative, got {r}")));
            }
        }
        if self.oracle.is_some() {
            let files = [("u0", &self.u0), ("u1", &self.u1), ("v", &self.v), ("phi", &self.phi), ("psi", &self.psi)];
            if let Some((name, _)) = files.iter().find(|(_, p)| p.is_some()) {
                return Err(UbvpError::invalid(format!("--oracle and --{name} both supply a trace")));
            }
            if self.f_const.is_some() {
                return Err(UbvpError::invalid("--oracle and --f-const both supply the source term"));
            }
        }
        Ok(())
    }
}
