//! Sampled estimate of the strong-convexity constant
//! `c0 = min |(ν, d²r)| / (du² + dv²)`.
//!
//! At every sample point `p` the surface is charted radially about its
//! centre: `r(u, v) = ρ(s) s` with `s(u, v) = normalize(d + u e1 + v e2)`,
//! where `d` is the unit direction of `p` and `(e1, e2)` complete an
//! orthonormal frame. This chart is regular everywhere (no pole
//! degeneracy), so `d²r` is the second derivative along each sampled
//! direction `(du, dv)` and the constant scales linearly with the size of
//! the surface. The result is an estimate over the samples, not a bound.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use super::surface::{Shape, Surface};
use super::Vec3;
use crate::error::{Result, UbvpError};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_directions: usize,
    pub threshold: f64,
    /// Rotation applied to the sample directions (reparametrization check).
    pub frame: Rotation3<f64>,
}

impl Default for ConvexityConfig {
    fn default() -> Self {
        ConvexityConfig {
            n_theta: 64,
            n_phi: 128,
            n_directions: 16,
            threshold: 1e-8,
            frame: Rotation3::identity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub c0_estimate: f64,
    /// `(theta, phi)` of the minimizing sample direction.
    pub min_location: [f64; 2],
    pub passed: bool,
    pub threshold: f64,
}

pub fn verify_strong_convexity(surface: &Surface) -> Result<ConvexityReport> {
    verify_strong_convexity_with(surface, &ConvexityConfig::default())
}

pub fn verify_strong_convexity_with(surface: &Surface, cfg: &ConvexityConfig) -> Result<ConvexityReport> {
    let axes = match surface.shape() {
        Shape::Sphere { radius, .. } => [*radius; 3],
        Shape::Ellipsoid { axes, .. } => *axes,
        Shape::Mesh(_) => {
            return Err(UbvpError::Unsupported(
                "strong convexity needs C2 parametrization data; triangulated surfaces carry none".into(),
            ))
        }
    };
    if cfg.n_theta == 0 || cfg.n_phi == 0 || cfg.n_directions == 0 {
        return Err(UbvpError::invalid("convexity sampling counts must be positive"));
    }
    let inv_sq = Vec3::from_fn(|k, _| 1.0 / (axes[k] * axes[k]));

    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..cfg.n_theta {
        let theta = PI * (i as f64 + 0.5) / cfg.n_theta as f64;
        for j in 0..cfg.n_phi {
            let phi = 2.0 * PI * j as f64 / cfg.n_phi as f64;
            let d = cfg.frame
                * Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            let value = min_normal_curvature_form(&d, &inv_sq, cfg.n_directions)?;
            if value < best.0 {
                best = (value, [theta, phi]);
            }
        }
    }
    Ok(ConvexityReport {
        c0_estimate: best.0,
        min_location: best.1,
        passed: best.0 > cfg.threshold,
        threshold: cfg.threshold,
    })
}

/// Minimum over sampled tangent directions of `|ν · d²r| / |w|²` at the
/// point of the quadric `x^T diag(inv_sq) x = 1` in unit direction `d`.
fn min_normal_curvature_form(d: &Vec3, inv_sq: &Vec3, n_directions: usize) -> Result<f64> {
    let m = |x: &Vec3| x.component_mul(inv_sq);
    let g0 = d.dot(&m(d));
    if !(g0.is_finite() && g0 > 0.0) {
        return Err(UbvpError::numeric("degenerate radial parametrization"));
    }
    let rho = g0.powf(-0.5);
    let nu = m(d).normalize();
    if nu.dot(d) < 1e-12 {
        return Err(UbvpError::numeric("surface normal is tangent to the radial chart"));
    }
    let helper = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = d.cross(&helper).normalize();
    let e2 = d.cross(&e1);

    let mut best = f64::INFINITY;
    for k in 0..n_directions {
        // Directions are symmetric under w -> -w; sample a half turn.
        let alpha = PI * k as f64 / n_directions as f64;
        let w = e1 * alpha.cos() + e2 * alpha.sin();
        // s(t) = d + t w + O(t^2) with s'' = -|w|^2 d at t = 0.
        let g1 = 2.0 * d.dot(&m(&w));
        let g2 = 2.0 * w.dot(&m(&w)) - 2.0 * g0;
        let rho1 = -0.5 * g0.powf(-1.5) * g1;
        let rho2 = 0.75 * g0.powf(-2.5) * g1 * g1 - 0.5 * g0.powf(-1.5) * g2;
        let r2 = d * rho2 + w * (2.0 * rho1) - d * rho;
        best = best.min(nu.dot(&r2).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::surface::{make_ellipsoid, make_sphere};
    use super::*;

    /// Independent oracle: second derivative of the explicit chart by
    /// central finite differences, minimized over the same samples.
    fn fd_oracle(axes: [f64; 3], n_theta: usize, n_phi: usize, n_dirs: usize) -> f64 {
        let chart = |d: &Vec3, e1: &Vec3, e2: &Vec3, u: f64, v: f64| -> Vec3 {
            let s = (d + e1 * u + e2 * v).normalize();
            let q: f64 = (0..3).map(|k| (s[k] / axes[k]).powi(2)).sum();
            s / q.sqrt()
        };
        let h = 1e-4;
        let mut best = f64::INFINITY;
        for i in 0..n_theta {
            let theta = PI * (i as f64 + 0.5) / n_theta as f64;
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let d = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                let helper = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                let e1 = d.cross(&helper).normalize();
                let e2 = d.cross(&e1);
                let p = chart(&d, &e1, &e2, 0.0, 0.0);
                let nu = Vec3::from_fn(|k, _| p[k] / (axes[k] * axes[k])).normalize();
                for k in 0..n_dirs {
                    let a = PI * k as f64 / n_dirs as f64;
                    let (du, dv) = (a.cos(), a.sin());
                    let r2 = (chart(&d, &e1, &e2, h * du, h * dv) - 2.0 * p
                        + chart(&d, &e1, &e2, -h * du, -h * dv))
                        / (h * h);
                    best = best.min(nu.dot(&r2).abs());
                }
            }
        }
        best
    }

    #[test]
    fn unit_sphere_passes() {
        let s = make_sphere(1.0, Vec3::zeros(), 8, 16).unwrap();
        let r = verify_strong_convexity(&s).unwrap();
        assert!(r.passed);
        assert!((r.c0_estimate - 1.0).abs() < 1e-12);
        assert!((r.c0_estimate - fd_oracle([1.0; 3], 16, 32, 8)).abs() < 1e-5);
    }

    #[test]
    fn prolate_ellipsoid_is_less_convex() {
        let e = make_ellipsoid(1.0, 1.0, 2.0, Vec3::zeros(), 8, 16).unwrap();
        let s = make_sphere(1.0, Vec3::zeros(), 8, 16).unwrap();
        let re = verify_strong_convexity(&e).unwrap();
        let rs = verify_strong_convexity(&s).unwrap();
        assert!(re.passed && re.c0_estimate > 0.0);
        assert!(re.c0_estimate < rs.c0_estimate);
        let oracle = fd_oracle([1.0, 1.0, 2.0], 64, 128, 16);
        assert!((re.c0_estimate - oracle).abs() < 1e-5, "{} vs {oracle}", re.c0_estimate);
        // Meridian at the equator: ρ'' = 3/4 gives |ν·d²r| = 1/4.
        assert!((re.c0_estimate - 0.25).abs() < 1e-3);
    }

    #[test]
    fn scales_linearly_with_radius() {
        let base = verify_strong_convexity(&make_sphere(1.0, Vec3::zeros(), 8, 16).unwrap())
            .unwrap()
            .c0_estimate;
        for r in [0.5, 2.0, 7.5] {
            let c = verify_strong_convexity(&make_sphere(r, Vec3::zeros(), 8, 16).unwrap())
                .unwrap()
                .c0_estimate;
            assert!((c - r * base).abs() < 1e-10 * r);
        }
        let e1 = verify_strong_convexity(&make_ellipsoid(1.0, 1.0, 2.0, Vec3::zeros(), 8, 16).unwrap())
            .unwrap()
            .c0_estimate;
        let e3 = verify_strong_convexity(&make_ellipsoid(3.0, 3.0, 6.0, Vec3::zeros(), 8, 16).unwrap())
            .unwrap()
            .c0_estimate;
        assert!((e3 - 3.0 * e1).abs() < 1e-10);
    }

    #[test]
    fn invariant_under_reparametrization() {
        let s = make_sphere(1.3, Vec3::zeros(), 8, 16).unwrap();
        let base = verify_strong_convexity(&s).unwrap().c0_estimate;
        let cfg = ConvexityConfig {
            frame: Rotation3::from_euler_angles(0.3, -1.1, 2.0),
            ..Default::default()
        };
        let rotated = verify_strong_convexity_with(&s, &cfg).unwrap().c0_estimate;
        assert!((base - rotated).abs() < 1e-8);
    }

    #[test]
    fn triangulated_is_unsupported() {
        let mesh = super::super::mesh::parse_off(
            "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n",
        )
        .unwrap();
        let s = Surface::from_mesh(mesh).unwrap();
        assert!(matches!(verify_strong_convexity(&s), Err(UbvpError::Unsupported(_))));
    }
}
