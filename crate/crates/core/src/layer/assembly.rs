use std::f64::consts::PI;

use rayon::prelude::*;

use super::operator::{DenseOperator, KernelTag};
use super::{double_layer_kernel, single_layer_kernel};
use crate::error::Result;
use crate::geometry::{flat_polygon_inverse_distance, Shape, Surface, Vec3};
use crate::quadrature::{gauss_legendre, legendre_series, legendre_table};

/// On-surface value of `∫_S ∂/∂ν_y (1/|x-y|) dS_y`.
pub const ON_SURFACE_GAUSS: f64 = -2.0 * PI;

/// Double-layer operator `(K u)(x_i) ≈ p.v. ∫_S ∂/∂ν_y(1/|x_i-y|) u(y) dS_y`.
///
/// The diagonal is fixed by singularity subtraction so that every row sums
/// to exactly `-2π`, i.e. `(K u)(x_i) = Σ_{j≠i} K_ij (u_j - u_i) - 2π u_i`.
/// On spheres the off-diagonal entries come from the target-aligned
/// rotated rule (see [`assemble_single_layer`]).
pub fn assemble_double_layer(surface: &Surface) -> Result<DenseOperator> {
    let mut rows = if let Some(radius) = sphere_radius(surface) {
        zonal_rows(surface, radius, double_layer_kernel)?
    } else {
        let nodes = surface.nodes();
        let normals = surface.normals();
        let weights = surface.weights();
        (0..surface.len())
            .into_par_iter()
            .map(|i| {
                (0..nodes.len())
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            weights[j] * double_layer_kernel(&nodes[i], &nodes[j], &normals[j])
                        }
                    })
                    .collect::<Vec<f64>>()
            })
            .collect()
    };
    for (i, row) in rows.iter_mut().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).sum();
        row[i] = ON_SURFACE_GAUSS - off;
    }
    DenseOperator::from_rows(rows, surface.nodes().to_vec(), surface.nodes().to_vec(), KernelTag::DoubleLayer)
}

/// Single-layer operator `(S u)(x_i) ≈ ∫_S u(y) / |x_i - y| dS_y`.
///
/// Spheres: for each target the rule is rotated so the target sits at the
/// pole, where `1/|x-y|` times the area element is smooth in the polar
/// angle; the density is carried to the rotated nodes by its spherical
/// harmonic interpolant of degree `n_theta - 1`. Both sphere kernels depend
/// on `x·y` only, so each row reduces to a Legendre series in `x̂_i·x̂_j`
/// whose coefficients are polar-angle Gauss integrals of the kernel.
///
/// Ellipsoids: plain Nyström off the diagonal, self cell replaced by the
/// exact `1/r` integral over its flat tangent parallelogram.
/// Meshes: centroid rule, self triangle integrated exactly. Both are low
/// order.
pub fn assemble_single_layer(surface: &Surface) -> Result<DenseOperator> {
    let rows = if let Some(radius) = sphere_radius(surface) {
        zonal_rows(surface, radius, |x, y, _| single_layer_kernel(x, y))?
    } else {
        let nodes = surface.nodes();
        let weights = surface.weights();
        let self_terms = self_cell_integrals(surface);
        (0..surface.len())
            .into_par_iter()
            .map(|i| {
                (0..nodes.len())
                    .map(|j| {
                        if i == j {
                            self_terms[i]
                        } else {
                            weights[j] * single_layer_kernel(&nodes[i], &nodes[j])
                        }
                    })
                    .collect::<Vec<f64>>()
            })
            .collect()
    };
    DenseOperator::from_rows(rows, surface.nodes().to_vec(), surface.nodes().to_vec(), KernelTag::SingleLayer)
}

fn sphere_radius(surface: &Surface) -> Option<f64> {
    match surface.shape() {
        Shape::Sphere { radius, .. } if surface.rotation_support() && surface.param_grid().is_some() => {
            Some(*radius)
        }
        _ => None,
    }
}

/// Highest spherical-harmonic degree the tensor grid resolves exactly.
pub(crate) fn band_limit(n_theta: usize, n_phi: usize) -> usize {
    (n_theta - 1).min((n_phi - 1) / 2)
}

/// Rows of a sphere operator with a kernel that depends on `x·y` only.
fn zonal_rows(
    surface: &Surface,
    radius: f64,
    kernel: impl Fn(&Vec3, &Vec3, &Vec3) -> f64,
) -> Result<Vec<Vec<f64>>> {
    let grid = surface.param_grid().expect("sphere has a parameter grid");
    let lmax = band_limit(grid.n_theta, grid.n_phi);

    // Rotated rule about the pole: Gauss in the polar angle, where
    // kernel(θ) sinθ is smooth; the azimuthal sum of P_n is exact.
    let polar = gauss_legendre((4 * (lmax + 1)).max(64), 0.0, PI)?;
    let pole = Vec3::new(0.0, 0.0, radius);
    let mut moments = vec![0.0; lmax + 1];
    for (&theta, &w) in polar.nodes.iter().zip(&polar.weights) {
        let dir = Vec3::new(theta.sin(), 0.0, theta.cos());
        let k = kernel(&pole, &(dir * radius), &dir);
        let p = legendre_table(lmax, theta.cos());
        for n in 0..=lmax {
            moments[n] += w * k * theta.sin() * p[n];
        }
    }
    // Eigenvalue of degree n is mu_n = 2π R² moments[n]; interpolation
    // contributes (2n+1)/(4π) per unit-sphere weight w_j / R².
    let coeffs: Vec<f64> = (0..=lmax)
        .map(|n| (2 * n + 1) as f64 / (4.0 * PI) * 2.0 * PI * moments[n])
        .collect();

    let center = surface.center();
    let dirs: Vec<Vec3> = surface.nodes().iter().map(|x| (x - center) / radius).collect();
    let weights = surface.weights();
    Ok((0..dirs.len())
        .into_par_iter()
        .map(|i| {
            dirs.iter()
                .zip(weights)
                .map(|(dj, &wj)| wj * legendre_series(&coeffs, dirs[i].dot(dj).clamp(-1.0, 1.0)))
                .collect()
        })
        .collect())
}

fn self_cell_integrals(surface: &Surface) -> Vec<f64> {
    let axes = match surface.shape() {
        Shape::Mesh(mesh) => {
            return (0..surface.len())
                .map(|k| flat_polygon_inverse_distance(&surface.nodes()[k], &mesh.triangle(k)))
                .collect()
        }
        Shape::Ellipsoid { axes, .. } => *axes,
        Shape::Sphere { radius, .. } => [*radius; 3],
    };
    let grid = surface.param_grid().expect("analytic surfaces carry a parameter grid");
    let [a, b, c] = axes;
    let dphi = 2.0 * PI / grid.n_phi as f64;
    let mut out = Vec::with_capacity(surface.len());
    for (it, (&t, &wt)) in grid.cos_theta.iter().zip(&grid.cos_theta_weights).enumerate() {
        let st = (1.0 - t * t).sqrt();
        for ip in 0..grid.n_phi {
            let (sp, cp) = grid.phi(ip).sin_cos();
            // Tangent parallelogram with the node's area weight.
            let r_theta = Vec3::new(a * t * cp, b * t * sp, -c * st) * (wt / st);
            let r_phi = Vec3::new(-a * st * sp, b * st * cp, 0.0) * dphi;
            let x = surface.nodes()[grid.index(it, ip)];
            let cell = [
                x - 0.5 * r_theta - 0.5 * r_phi,
                x + 0.5 * r_theta - 0.5 * r_phi,
                x + 0.5 * r_theta + 0.5 * r_phi,
                x - 0.5 * r_theta + 0.5 * r_phi,
            ];
            out.push(flat_polygon_inverse_distance(&x, &cell).abs());
        }
    }
    out
}
