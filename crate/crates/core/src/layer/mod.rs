//! Single- and double-layer operators, Green's representation and the
//! Newtonian volume potential for the Laplace kernel `1/|x - y|`.
//!
//! Kernels are unnormalized: the double-layer kernel is
//! `∂/∂ν_y (1/|x-y|) = (x-y)·ν_y / |x-y|³`, whose surface integral is
//! `-4π`, `-2π`, `0` for `x` inside, on, and outside the surface.

mod assembly;
mod green;
mod newtonian;
mod operator;

pub use assembly::{assemble_double_layer, assemble_single_layer};
pub use green::{
    eval_green_representation, eval_green_representation_with, gauss_identity_check, GaussIdentityReport,
    GaussProbe, GreenEvaluation, ProbeLocation, DEFAULT_NEAR_FRACTION,
};
pub use newtonian::{assemble_newtonian, newtonian_volume_potential};
pub use operator::{DenseOperator, KernelTag};

use crate::geometry::Vec3;

/// `1 / |x - y|`
#[inline]
pub fn single_layer_kernel(x: &Vec3, y: &Vec3) -> f64 {
    1.0 / (x - y).norm()
}

/// `∂/∂ν_y (1/|x - y|)`
#[inline]
pub fn double_layer_kernel(x: &Vec3, y: &Vec3, normal_y: &Vec3) -> f64 {
    let d = x - y;
    let r2 = d.norm_squared();
    d.dot(normal_y) / (r2 * r2.sqrt())
}
