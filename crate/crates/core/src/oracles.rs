//! Closed-form harmonic, Poisson and caloric solutions with exact traces.
//! Gradients are analytic so traces are accurate to rounding.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Result, UbvpError};
use crate::geometry::{Surface, Vec3, VolumeQuadrature};
use crate::heat::{CaloricTraces, Extension, InitialTrace, XDecay};
use crate::trace::BoundaryTrace;

/// Closest a point source may sit to the surface.
pub const MIN_SOURCE_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarmonicOracle {
    Constant,
    LinearZ,
    /// `x² - y²`
    QuadraticY2,
    /// `r² P_2(cos θ) = z² - (x² + y²)/2`
    R2Y2,
    /// `1/|x - x0|`
    PointSource(Vec3),
}

impl HarmonicOracle {
    pub const DEFAULT_SOURCE: [f64; 3] = [0.0, 0.0, 3.0];

    /// `constant`, `linear-z`, `quadratic-y2`, `r2y2`, `point-source` or
    /// `point-source:x,y,z`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "constant" => Ok(HarmonicOracle::Constant),
            "linear-z" => Ok(HarmonicOracle::LinearZ),
            "quadratic-y2" => Ok(HarmonicOracle::QuadraticY2),
            "r2y2" => Ok(HarmonicOracle::R2Y2),
            "point-source" => Ok(HarmonicOracle::PointSource(Vec3::from(Self::DEFAULT_SOURCE))),
            _ => {
                let coords = lower
                    .strip_prefix("point-source:")
                    .ok_or_else(|| UbvpError::invalid(format!("unknown harmonic oracle {name:?}")))?;
                let v: Vec<f64> = coords
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| UbvpError::invalid(format!("bad point-source location {coords:?}")))?;
                match v.as_slice() {
                    [x, y, z] if v.iter().all(|c| c.is_finite()) => {
                        Ok(HarmonicOracle::PointSource(Vec3::new(*x, *y, *z)))
                    }
                    _ => Err(UbvpError::invalid(format!("point-source needs three finite coordinates, got {coords:?}"))),
                }
            }
        }
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            HarmonicOracle::Constant => 1.0,
            HarmonicOracle::LinearZ => p.z,
            HarmonicOracle::QuadraticY2 => p.x * p.x - p.y * p.y,
            HarmonicOracle::R2Y2 => p.z * p.z - 0.5 * (p.x * p.x + p.y * p.y),
            HarmonicOracle::PointSource(x0) => 1.0 / (p - x0).norm(),
        }
    }

    pub fn grad(&self, p: &Vec3) -> Vec3 {
        match self {
            HarmonicOracle::Constant => Vec3::zeros(),
            HarmonicOracle::LinearZ => Vec3::z(),
            HarmonicOracle::QuadraticY2 => Vec3::new(2.0 * p.x, -2.0 * p.y, 0.0),
            HarmonicOracle::R2Y2 => Vec3::new(-p.x, -p.y, 2.0 * p.z),
            HarmonicOracle::PointSource(x0) => {
                let d = p - x0;
                -d / d.norm().powi(3)
            }
        }
    }
}

impl fmt::Display for HarmonicOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarmonicOracle::Constant => write!(f, "constant"),
            HarmonicOracle::LinearZ => write!(f, "linear-z"),
            HarmonicOracle::QuadraticY2 => write!(f, "quadratic-y2"),
            HarmonicOracle::R2Y2 => write!(f, "r2y2"),
            HarmonicOracle::PointSource(x0) => write!(f, "point-source:{},{},{}", x0.x, x0.y, x0.z),
        }
    }
}

/// `(u|_S, ∂u/∂ν|_S)` at the surface nodes.
pub fn harmonic_traces(oracle: &HarmonicOracle, surface: &Surface) -> Result<(BoundaryTrace, BoundaryTrace)> {
    if let HarmonicOracle::PointSource(x0) = oracle {
        if surface.contains(x0) || surface.distance_to(x0) < MIN_SOURCE_DISTANCE {
            return Err(UbvpError::invalid(format!(
                "point source at ({}, {}, {}) must lie outside the surface at distance >= {MIN_SOURCE_DISTANCE}",
                x0.x, x0.y, x0.z
            )));
        }
    }
    let u0 = surface.sample(|p| oracle.eval(p));
    let u1 = surface.nodes().iter().zip(surface.normals()).map(|(p, n)| oracle.grad(p).dot(n)).collect();
    Ok((BoundaryTrace::dirichlet(surface, u0)?, BoundaryTrace::neumann(surface, u1)?))
}

/// Seven-point Laplacian of a harmonic oracle.
pub fn harmonic_fd_laplacian(oracle: &HarmonicOracle, p: &Vec3, h: f64) -> f64 {
    let mut sum = -6.0 * oracle.eval(p);
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = h;
        sum += oracle.eval(&(p + e)) + oracle.eval(&(p - e));
    }
    sum / (h * h)
}

/// Solutions of `Δu = f` with closed-form traces and source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonOracle {
    /// `u = |x - c|²`, `f = 6`, with `c` the surface center.
    RadialQuadratic,
}

impl PoissonOracle {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "radial-quadratic" => Ok(PoissonOracle::RadialQuadratic),
            other => Err(UbvpError::invalid(format!("unknown Poisson oracle {other:?}"))),
        }
    }

    /// Traces on the surface and source samples on the volume points.
    pub fn sample(&self, surface: &Surface, volume: &VolumeQuadrature) -> Result<(BoundaryTrace, BoundaryTrace, Vec<f64>)> {
        match self {
            PoissonOracle::RadialQuadratic => {
                let c = surface.center();
                let u0 = surface.sample(|p| (p - c).norm_squared());
                let u1 = surface.nodes().iter().zip(surface.normals()).map(|(p, n)| 2.0 * (p - c).dot(n)).collect();
                Ok((
                    BoundaryTrace::dirichlet(surface, u0)?,
                    BoundaryTrace::neumann(surface, u1)?,
                    vec![6.0; volume.len()],
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaloricOracle {
    Constant,
    /// `u = x`
    LinearX,
    /// `u = x² + 2t`
    X2Plus2t,
    /// `u = erf(x / 2√t)`
    ErfSimilarity,
    /// `u = e^{x + t}`
    ExpGrowth,
}

impl CaloricOracle {
    pub const ALL: [CaloricOracle; 5] = [
        CaloricOracle::Constant,
        CaloricOracle::LinearX,
        CaloricOracle::X2Plus2t,
        CaloricOracle::ErfSimilarity,
        CaloricOracle::ExpGrowth,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == name.trim())
            .ok_or_else(|| UbvpError::invalid(format!("unknown caloric oracle {name:?}")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaloricOracle::Constant => "constant",
            CaloricOracle::LinearX => "linear-x",
            CaloricOracle::X2Plus2t => "x2-plus-2t",
            CaloricOracle::ErfSimilarity => "erf-similarity",
            CaloricOracle::ExpGrowth => "exp-growth",
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            CaloricOracle::Constant => 1.0,
            CaloricOracle::LinearX => x,
            CaloricOracle::X2Plus2t => x * x + 2.0 * t,
            CaloricOracle::ErfSimilarity => libm::erf(x / (2.0 * t.sqrt())),
            CaloricOracle::ExpGrowth => (x + t).exp(),
        }
    }

    /// `v(x) = u(+0, x)` for `x > 0`.
    pub fn v(&self, x: f64) -> f64 {
        match self {
            CaloricOracle::ErfSimilarity => 1.0,
            _ => self.eval(0.0, x),
        }
    }

    /// `φ(t) = u(t, +0)`.
    pub fn phi(&self, t: f64) -> f64 {
        self.eval(t, 0.0)
    }

    /// `ψ(t) = u_x(t, +0)`.
    pub fn psi(&self, t: f64) -> f64 {
        match self {
            CaloricOracle::Constant | CaloricOracle::X2Plus2t => 0.0,
            CaloricOracle::LinearX => 1.0,
            CaloricOracle::ErfSimilarity => 1.0 / (PI * t).sqrt(),
            CaloricOracle::ExpGrowth => t.exp(),
        }
    }

    pub fn x_decay(&self) -> XDecay {
        match self {
            CaloricOracle::ExpGrowth => XDecay::GaussianDominated,
            _ => XDecay::Polynomial,
        }
    }

    /// Unbounded on the quarter plane, hence outside the hypotheses under
    /// which the boundary equation is stated. Used for residual tests on
    /// finite windows only.
    pub fn exceeds_growth_class(&self) -> bool {
        matches!(self, CaloricOracle::LinearX | CaloricOracle::X2Plus2t | CaloricOracle::ExpGrowth)
    }
}

impl fmt::Display for CaloricOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exact `(v, φ, ψ)` samples with the oracle's closed form as the tail of
/// `v`.
pub fn caloric_traces(oracle: CaloricOracle, x_grid: &[f64], t_grid: &[f64]) -> Result<CaloricTraces> {
    let v = x_grid.iter().map(|&x| oracle.v(x)).collect();
    let ext = Extension::from_fn(oracle.name(), move |x| oracle.v(x));
    let initial = InitialTrace::new(x_grid.to_vec(), v, oracle.x_decay(), Some(ext))?;
    CaloricTraces::new(initial, t_grid.to_vec())?
        .with_phi(t_grid.iter().map(|&t| oracle.phi(t)).collect())?
        .with_psi(t_grid.iter().map(|&t| oracle.psi(t)).collect())
}

/// Centered-difference `u_t - u_xx`.
pub fn caloric_fd_residual(u: impl Fn(f64, f64) -> f64, t: f64, x: f64, h: f64) -> f64 {
    let ut = (u(t + h, x) - u(t - h, x)) / (2.0 * h);
    let uxx = (u(t, x + h) - 2.0 * u(t, x) + u(t, x - h)) / (h * h);
    ut - uxx
}

/// `(degree, name, Y)`
pub type Harmonic = (usize, &'static str, fn(&Vec3) -> f64);

/// Real solid harmonics of degree `n ≤ 3`, one basis of each space. On the
/// unit sphere they are surface harmonics.
pub fn low_degree_harmonics() -> Vec<Harmonic> {
    vec![
        (0, "1", |_| 1.0),
        (1, "x", |p| p.x),
        (1, "y", |p| p.y),
        (1, "z", |p| p.z),
        (2, "xy", |p| p.x * p.y),
        (2, "yz", |p| p.y * p.z),
        (2, "xz", |p| p.x * p.z),
        (2, "x2-y2", |p| p.x * p.x - p.y * p.y),
        (2, "2z2-x2-y2", |p| 2.0 * p.z * p.z - p.x * p.x - p.y * p.y),
        (3, "x(x2-3y2)", |p| p.x * (p.x * p.x - 3.0 * p.y * p.y)),
        (3, "y(3x2-y2)", |p| p.y * (3.0 * p.x * p.x - p.y * p.y)),
        (3, "xyz", |p| p.x * p.y * p.z),
        (3, "z(x2-y2)", |p| p.z * (p.x * p.x - p.y * p.y)),
        (3, "x(4z2-x2-y2)", |p| p.x * (4.0 * p.z * p.z - p.x * p.x - p.y * p.y)),
        (3, "y(4z2-x2-y2)", |p| p.y * (4.0 * p.z * p.z - p.x * p.x - p.y * p.y)),
        (3, "z(2z2-3x2-3y2)", |p| p.z * (2.0 * p.z * p.z - 3.0 * p.x * p.x - 3.0 * p.y * p.y)),
    ]
}

/// Eigenvalues on a sphere of radius `r`: `K Y_n = -2π/(2n+1) Y_n`,
/// `S Y_n = 4πr/(2n+1) Y_n`.
pub fn sphere_double_layer_eigenvalue(n: usize) -> f64 {
    -2.0 * PI / (2 * n + 1) as f64
}

pub fn sphere_single_layer_eigenvalue(n: usize, r: f64) -> f64 {
    4.0 * PI * r / (2 * n + 1) as f64
}
