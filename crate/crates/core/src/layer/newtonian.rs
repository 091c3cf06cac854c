use rayon::prelude::*;

use super::operator::{DenseOperator, KernelTag};
use crate::error::{Result, UbvpError};
use crate::geometry::{BallLayout, Vec3, VolumeQuadrature};
use crate::layer::assembly::band_limit;
use crate::quadrature::legendre_table;

/// Per-point weights `W_j(x)` with `∫_G f(y)/|x-y| dy ≈ Σ_j W_j(x) f(p_j)`.
///
/// For ball rules and targets on or outside the outermost shell, each shell
/// of radius `r` uses the kernel's Legendre expansion
/// `1/|x-y| = Σ_n r^n/ρ^{n+1} P_n(x̂·ŷ)` (`ρ = |x - c|`) truncated at the
/// angular band limit; this is exact for data band-limited on each shell and
/// stays accurate for targets on the ball's boundary, where the plain sum
/// `Σ_j w_j/|x - p_j|` converges only at second order. Other targets use
/// the plain sum.
fn target_weights(vq: &VolumeQuadrature, x: &Vec3) -> Result<Vec<f64>> {
    if let Some(ball) = &vq.ball {
        let rho = (x - ball.center).norm();
        let r_max = ball.radial.nodes.last().copied().unwrap_or(0.0);
        if rho > r_max {
            return Ok(shell_expansion_weights(vq, ball, x, rho));
        }
    }
    let scale = vq.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let mut out = Vec::with_capacity(vq.len());
    for (p, w) in vq.points.iter().zip(&vq.weights) {
        let r = (x - p).norm();
        if r <= 1e-10 * scale {
            return Err(UbvpError::NearSingular(format!(
                "target ({}, {}, {}) coincides with a volume quadrature point",
                x.x, x.y, x.z
            )));
        }
        out.push(w / r);
    }
    Ok(out)
}

fn shell_expansion_weights(vq: &VolumeQuadrature, ball: &BallLayout, x: &Vec3, rho: f64) -> Vec<f64> {
    let lmax = band_limit(ball.n_theta, ball.n_phi);
    let xhat = (x - ball.center) / rho;
    let n_ang = ball.directions.len();
    let legendre: Vec<Vec<f64>> = ball
        .directions
        .iter()
        .map(|d| legendre_table(lmax, xhat.dot(d).clamp(-1.0, 1.0)))
        .collect();
    let mut out = vec![0.0; vq.len()];
    for (ir, (&r, &wr)) in ball.radial.nodes.iter().zip(&ball.radial.weights).enumerate() {
        let t = r / rho;
        let mut powers = Vec::with_capacity(lmax + 1);
        let mut tn = 1.0 / rho;
        for _ in 0..=lmax {
            powers.push(tn);
            tn *= t;
        }
        for (ia, (p, &wa)) in legendre.iter().zip(&ball.angular_weights).enumerate() {
            let k: f64 = powers.iter().zip(p).map(|(a, b)| a * b).sum();
            out[ir * n_ang + ia] = wr * r * r * wa * k;
        }
    }
    out
}

/// `∫_G f(y) / |x - y| dy` at each target.
pub fn newtonian_volume_potential(vq: &VolumeQuadrature, f: &[f64], targets: &[Vec3]) -> Result<Vec<f64>> {
    if f.len() != vq.len() {
        return Err(UbvpError::invalid(format!(
            "{} source values for a volume rule with {} points",
            f.len(),
            vq.len()
        )));
    }
    targets
        .par_iter()
        .map(|x| Ok(target_weights(vq, x)?.iter().zip(f).map(|(w, v)| w * v).sum()))
        .collect()
}

/// Dense matrix of [`newtonian_volume_potential`] (targets × volume points).
pub fn assemble_newtonian(vq: &VolumeQuadrature, targets: &[Vec3]) -> Result<DenseOperator> {
    let rows = targets
        .par_iter()
        .map(|x| target_weights(vq, x))
        .collect::<Result<Vec<_>>>()?;
    DenseOperator::from_rows(rows, targets.to_vec(), vq.points.clone(), KernelTag::Newtonian)
}
