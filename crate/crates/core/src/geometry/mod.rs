//! Closed surfaces in R^3, their quadratures, and ball volume rules.

mod convexity;
mod mesh;
mod surface;
mod volume;

pub use convexity::{verify_strong_convexity, verify_strong_convexity_with, ConvexityConfig, ConvexityReport};
pub use mesh::{flat_polygon_inverse_distance, flat_triangle_inverse_distance, parse_off, TriangleMesh};
pub use surface::{
    make_ellipsoid, make_sphere, surface_integral, ParamGrid, Shape, Surface, SurfaceDescriptor,
    SurfaceId, SurfaceKind,
};
pub use volume::{make_ball_volume_quadrature, BallLayout, VolumeQuadrature};

pub type Vec3 = nalgebra::Vector3<f64>;
