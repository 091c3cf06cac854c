use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{double_layer_kernel, single_layer_kernel, DenseOperator};
use crate::error::{Result, UbvpError};
use crate::geometry::{Surface, Vec3};
use crate::trace::{BoundaryTrace, TraceRole};

/// Probes closer than this fraction of the surface diameter are flagged.
pub const DEFAULT_NEAR_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct GreenEvaluation {
    pub values: Vec<f64>,
    /// Probes within the near-singular band; their accuracy is degraded.
    pub degraded: Vec<bool>,
}

impl GreenEvaluation {
    pub fn any_degraded(&self) -> bool {
        self.degraded.iter().any(|&d| d)
    }
}

/// Green's formula for interior points:
/// `u(x) = (1/4π) ∫_S u1/|x-y| dS - (1/4π) ∫_S ∂/∂ν_y(1/|x-y|) u0 dS`.
pub fn eval_green_representation(
    surface: &Surface,
    u0: &BoundaryTrace,
    u1: &BoundaryTrace,
    points: &[Vec3],
) -> Result<GreenEvaluation> {
    eval_green_representation_with(surface, u0, u1, points, DEFAULT_NEAR_FRACTION * surface.diameter())
}

/// As [`eval_green_representation`] with an explicit near-singular distance.
pub fn eval_green_representation_with(
    surface: &Surface,
    u0: &BoundaryTrace,
    u1: &BoundaryTrace,
    points: &[Vec3],
    near_distance: f64,
) -> Result<GreenEvaluation> {
    u0.check_on(surface)?;
    u1.check_on(surface)?;
    if u0.role() != TraceRole::Dirichlet || u1.role() != TraceRole::Neumann {
        return Err(UbvpError::invalid("expected a Dirichlet trace u0 and a Neumann trace u1"));
    }
    let mut degraded = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        if !surface.contains(p) {
            return Err(UbvpError::invalid(format!(
                "point {k} ({}, {}, {}) is not inside the surface",
                p.x, p.y, p.z
            )));
        }
        let near = surface.distance_to(p) < near_distance;
        if near {
            warn!("point {k} lies within {near_distance} of the surface; accuracy is degraded");
        }
        degraded.push(near);
    }
    let nodes = surface.nodes();
    let normals = surface.normals();
    let weights = surface.weights();
    let (a, b) = (u0.values(), u1.values());
    let values = points
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for j in 0..nodes.len() {
                acc += weights[j]
                    * (single_layer_kernel(x, &nodes[j]) * b[j]
                        - double_layer_kernel(x, &nodes[j], &normals[j]) * a[j]);
            }
            acc / (4.0 * PI)
        })
        .collect();
    Ok(GreenEvaluation { values, degraded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeLocation {
    Inside,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussProbe {
    pub point: [f64; 3],
    pub location: ProbeLocation,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussIdentityReport {
    pub probes: Vec<GaussProbe>,
    /// `max_i |Σ_j K_ij + 2π|` over the on-surface operator rows.
    pub on_surface_max_deviation: f64,
}

/// Evaluates `∫_S ∂/∂ν_y(1/|x-y|) dS_y` at off-surface probes and compares
/// with `-4π` (inside) or `0` (outside); on-surface rows of `double_layer`
/// are compared with `-2π`.
pub fn gauss_identity_check(
    surface: &Surface,
    double_layer: &DenseOperator,
    probes: &[Vec3],
) -> Result<GaussIdentityReport> {
    let scale = surface.diameter();
    let mut out = Vec::with_capacity(probes.len());
    for (k, p) in probes.iter().enumerate() {
        if surface.distance_to(p) <= 1e-12 * scale {
            return Err(UbvpError::invalid(format!("probe {k} lies on the surface")));
        }
        let value: f64 = surface
            .nodes()
            .iter()
            .zip(surface.normals())
            .zip(surface.weights())
            .map(|((y, n), w)| w * double_layer_kernel(p, y, n))
            .sum();
        let (location, expected) = if surface.contains(p) {
            (ProbeLocation::Inside, -4.0 * PI)
        } else {
            (ProbeLocation::Outside, 0.0)
        };
        out.push(GaussProbe {
            point: [p.x, p.y, p.z],
            location,
            value,
            expected,
            error: (value - expected).abs(),
        });
    }
    let on_surface_max_deviation = double_layer
        .row_sums()
        .iter()
        .map(|s| (s + 2.0 * PI).abs())
        .fold(0.0, f64::max);
    Ok(GaussIdentityReport { probes: out, on_surface_max_deviation })
}
