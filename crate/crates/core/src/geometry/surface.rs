use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::mesh::TriangleMesh;
use super::Vec3;
use crate::error::{Result, UbvpError};
use crate::quadrature::gauss_legendre;
use crate::trace::BoundaryTrace;

static NEXT_SURFACE_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a discretized surface. Clones share the id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceId(u64);

impl SurfaceId {
    fn fresh() -> Self {
        SurfaceId(NEXT_SURFACE_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    AnalyticSphere,
    AnalyticEllipsoid,
    Triangulated,
}

/// Geometric description behind a discretization.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere { radius: f64, center: Vec3 },
    Ellipsoid { axes: [f64; 3], center: Vec3 },
    Mesh(TriangleMesh),
}

/// Tensor grid of an analytic surface: Gauss–Legendre in `cos(theta)`,
/// uniform in `phi`. Node `(i, j)` is stored at `i * n_phi + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub cos_theta: Vec<f64>,
    pub cos_theta_weights: Vec<f64>,
}

impl ParamGrid {
    pub fn index(&self, i_theta: usize, i_phi: usize) -> usize {
        i_theta * self.n_phi + i_phi
    }

    pub fn phi(&self, i_phi: usize) -> f64 {
        2.0 * PI * i_phi as f64 / self.n_phi as f64
    }
}

/// A quadrature-ready closed surface: nodes, positive area weights and unit
/// outward normals. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Surface {
    id: SurfaceId,
    shape: Shape,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    normals: Vec<Vec3>,
    param_grid: Option<ParamGrid>,
}

fn check_grid(n_theta: usize, n_phi: usize) -> Result<()> {
    if n_theta < 4 || n_phi < 8 {
        return Err(UbvpError::invalid(format!(
            "surface grid {n_theta}x{n_phi} is too small (need n_theta >= 4, n_phi >= 8)"
        )));
    }
    Ok(())
}

fn check_length(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(UbvpError::invalid(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

/// Sphere of the given radius: Gauss–Legendre nodes in `cos(theta)`
/// tensored with a uniform `phi` grid.
pub fn make_sphere(radius: f64, center: Vec3, n_theta: usize, n_phi: usize) -> Result<Surface> {
    check_length("radius", radius)?;
    check_grid(n_theta, n_phi)?;
    let mut surface = analytic_surface([radius; 3], center, n_theta, n_phi)?;
    surface.shape = Shape::Sphere { radius, center };
    Ok(surface)
}

/// Ellipsoid `(x/a)^2 + (y/b)^2 + (z/c)^2 = 1` on the same tensor grid as
/// [`make_sphere`], parametrized by `(a sinθ cosφ, b sinθ sinφ, c cosθ)`.
pub fn make_ellipsoid(
    a: f64,
    b: f64,
    c: f64,
    center: Vec3,
    n_theta: usize,
    n_phi: usize,
) -> Result<Surface> {
    check_length("semi-axis a", a)?;
    check_length("semi-axis b", b)?;
    check_length("semi-axis c", c)?;
    check_grid(n_theta, n_phi)?;
    analytic_surface([a, b, c], center, n_theta, n_phi)
}

fn analytic_surface(axes: [f64; 3], center: Vec3, n_theta: usize, n_phi: usize) -> Result<Surface> {
    let [a, b, c] = axes;
    let rule = gauss_legendre(n_theta, -1.0, 1.0)?;
    let dphi = 2.0 * PI / n_phi as f64;
    let n = n_theta * n_phi;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let st = (1.0 - t * t).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            let (sp, cp) = phi.sin_cos();
            nodes.push(center + Vec3::new(a * st * cp, b * st * sp, c * t));
            // (r_theta x r_phi) / sin(theta); its norm is the area element in (cosθ, φ).
            let m = Vec3::new(b * c * st * cp, a * c * st * sp, a * b * t);
            let jac = m.norm();
            weights.push(wt * dphi * jac);
            normals.push(m / jac);
        }
    }
    Ok(Surface {
        id: SurfaceId::fresh(),
        shape: Shape::Ellipsoid { axes, center },
        nodes,
        weights,
        normals,
        param_grid: Some(ParamGrid {
            n_theta,
            n_phi,
            cos_theta: rule.nodes,
            cos_theta_weights: rule.weights,
        }),
    })
}

impl Surface {
    /// Centroid-rule discretization of a closed triangle mesh.
    pub fn from_mesh(mesh: TriangleMesh) -> Result<Surface> {
        let (nodes, weights, normals) = mesh.centroid_rule()?;
        Ok(Surface {
            id: SurfaceId::fresh(),
            shape: Shape::Mesh(mesh),
            nodes,
            weights,
            normals,
            param_grid: None,
        })
    }

    pub fn id(&self) -> SurfaceId {
        self.id
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> SurfaceKind {
        match &self.shape {
            Shape::Sphere { .. } => SurfaceKind::AnalyticSphere,
            Shape::Ellipsoid { .. } => SurfaceKind::AnalyticEllipsoid,
            Shape::Mesh(_) => SurfaceKind::Triangulated,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn param_grid(&self) -> Option<&ParamGrid> {
        self.param_grid.as_ref()
    }

    /// Whether target-aligned re-quadrature (pole rotation) is available.
    pub fn rotation_support(&self) -> bool {
        matches!(self.shape, Shape::Sphere { .. })
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn center(&self) -> Vec3 {
        match &self.shape {
            Shape::Sphere { center, .. } | Shape::Ellipsoid { center, .. } => *center,
            Shape::Mesh(mesh) => mesh.centroid(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Sphere { radius, .. } => 2.0 * radius,
            Shape::Ellipsoid { axes, .. } => 2.0 * axes.iter().cloned().fold(0.0, f64::max),
            Shape::Mesh(mesh) => mesh.diameter(),
        }
    }

    /// Whether `p` lies in the open interior domain.
    pub fn contains(&self, p: &Vec3) -> bool {
        match &self.shape {
            Shape::Sphere { radius, center } => (p - center).norm() < *radius,
            Shape::Ellipsoid { axes, center } => {
                let d = p - center;
                (0..3).map(|k| (d[k] / axes[k]).powi(2)).sum::<f64>() < 1.0
            }
            Shape::Mesh(mesh) => mesh.winding_number(p) > 0.5,
        }
    }

    /// Distance from `p` to the surface. Exact for spheres and ellipsoids;
    /// nearest-triangle distance for meshes.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        match &self.shape {
            Shape::Sphere { radius, center } => ((p - center).norm() - radius).abs(),
            Shape::Ellipsoid { axes, center } => ellipsoid_distance(axes, &(p - center)),
            Shape::Mesh(mesh) => mesh.distance_to(p),
        }
    }

    /// `sum_i w_i values_i`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(UbvpError::invalid(format!(
                "{} values supplied for a surface with {} nodes",
                values.len(),
                self.len()
            )));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&Vec3) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}

/// Integral of a boundary trace over its surface.
pub fn surface_integral(surface: &Surface, values: &BoundaryTrace) -> Result<f64> {
    values.check_on(surface)?;
    surface.integrate(values.values())
}

/// Closest-point distance to an ellipsoid centred at the origin, from the
/// Lagrange condition `sum a_k^2 p_k^2 / (a_k^2 + s)^2 = 1`.
fn ellipsoid_distance(axes: &[f64; 3], p: &Vec3) -> f64 {
    let level: f64 = (0..3).map(|k| (p[k] / axes[k]).powi(2)).sum();
    if (level - 1.0).abs() < 1e-15 {
        return 0.0;
    }
    let amin = axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let g = |s: f64| -> f64 {
        (0..3)
            .map(|k| (axes[k] * p[k] / (axes[k] * axes[k] + s)).powi(2))
            .sum::<f64>()
            - 1.0
    };
    // g decreases on (-amin^2, inf); bracket the root and bisect.
    let (mut lo, mut hi) = if level > 1.0 {
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        (0.0, hi)
    } else {
        let lo = -amin * amin * (1.0 - 1e-15);
        if g(lo) <= 0.0 {
            return degenerate_interior_distance(axes, p, amin);
        }
        (lo, 0.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let q = Vec3::from_fn(|k, _| axes[k] * axes[k] * p[k] / (axes[k] * axes[k] + s));
    (p - q).norm()
}

/// Interior points with no component along the shortest axes, where the
/// Lagrange multiplier sits at `-amin²`: the nearest points form a circle
/// (or a pair) off the coordinate plane.
fn degenerate_interior_distance(axes: &[f64; 3], p: &Vec3, amin: f64) -> f64 {
    let mut d2 = 0.0;
    let mut level = 0.0;
    for k in 0..3 {
        if axes[k] > amin {
            let x = axes[k] * axes[k] * p[k] / (axes[k] * axes[k] - amin * amin);
            d2 += (x - p[k]).powi(2);
            level += (x / axes[k]).powi(2);
        }
    }
    (d2 + amin * amin * (1.0 - level).max(0.0)).sqrt()
}

/// JSON surface descriptor accepted by the CLI and job configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceDescriptor {
    Sphere {
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
        grid: [usize; 2],
    },
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default)]
        center: [f64; 3],
        grid: [usize; 2],
    },
}

impl SurfaceDescriptor {
    pub fn build(&self) -> Result<Surface> {
        match *self {
            SurfaceDescriptor::Sphere { radius, center, grid } => {
                make_sphere(radius, Vec3::from(center), grid[0], grid[1])
            }
            SurfaceDescriptor::Ellipsoid { a, b, c, center, grid } => {
                make_ellipsoid(a, b, c, Vec3::from(center), grid[0], grid[1])
            }
        }
    }

    /// Same geometry on a different `(n_theta, n_phi)` grid.
    pub fn with_grid(&self, n_theta: usize, n_phi: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            SurfaceDescriptor::Sphere { grid, .. } | SurfaceDescriptor::Ellipsoid { grid, .. } => {
                *grid = [n_theta, n_phi]
            }
        }
        out
    }
}
