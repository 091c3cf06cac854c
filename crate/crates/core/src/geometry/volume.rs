use std::f64::consts::PI;

use super::Vec3;
use crate::error::{Result, UbvpError};
use crate::quadrature::{gauss_legendre, Rule1d};

/// Shell structure of a ball product rule. Point `(ir, it, ip)` is stored at
/// `(ir * n_theta + it) * n_phi + ip`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallLayout {
    pub center: Vec3,
    pub radius: f64,
    /// Radial Gauss–Legendre rule on `(0, radius)`, without the `r²` factor.
    pub radial: Rule1d,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Unit directions of the angular grid, `it * n_phi + ip`.
    pub directions: Vec<Vec3>,
    /// Angular weights on the unit sphere (sum to 4π).
    pub angular_weights: Vec<f64>,
}

/// Points strictly inside a domain with positive volume weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeQuadrature {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub ball: Option<BallLayout>,
}

impl VolumeQuadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(UbvpError::invalid(format!(
                "{} values supplied for a volume rule with {} points",
                values.len(),
                self.len()
            )));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    pub fn sample(&self, f: impl Fn(&Vec3) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }
}

/// Product rule on a ball: Gauss–Legendre in `r` and `cos θ`, uniform in
/// `φ`, with the `r²` Jacobian folded into the weights.
pub fn make_ball_volume_quadrature(
    radius: f64,
    center: Vec3,
    n_r: usize,
    n_theta: usize,
    n_phi: usize,
) -> Result<VolumeQuadrature> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(UbvpError::invalid(format!("ball radius must be positive, got {radius}")));
    }
    if n_r == 0 || n_theta < 2 || n_phi < 4 {
        return Err(UbvpError::invalid(format!(
            "ball grid {n_r}x{n_theta}x{n_phi} is degenerate"
        )));
    }
    let radial = gauss_legendre(n_r, 0.0, radius)?;
    let polar = gauss_legendre(n_theta, -1.0, 1.0)?;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut directions = Vec::with_capacity(n_theta * n_phi);
    let mut angular_weights = Vec::with_capacity(n_theta * n_phi);
    for (&t, &wt) in polar.nodes.iter().zip(&polar.weights) {
        let st = (1.0 - t * t).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            directions.push(Vec3::new(st * phi.cos(), st * phi.sin(), t));
            angular_weights.push(wt * dphi);
        }
    }
    let mut points = Vec::with_capacity(n_r * directions.len());
    let mut weights = Vec::with_capacity(n_r * directions.len());
    for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (dir, &wa) in directions.iter().zip(&angular_weights) {
            points.push(center + dir * r);
            weights.push(wr * r * r * wa);
        }
    }
    Ok(VolumeQuadrature {
        points,
        weights,
        ball: Some(BallLayout {
            center,
            radius,
            radial,
            n_theta,
            n_phi,
            directions,
            angular_weights,
        }),
    })
}
