//! Residual checks, trace completion and reconstruction for boundary value
//! problems of Laplace, Poisson and heat type.
//!
//! The elliptic part works on closed strongly convex surfaces in ℝ³ with
//! dense collocation of the single- and double-layer potentials. The
//! parabolic part covers the heat equation on the quarter plane
//! `x > 0, t > 0`.

pub mod cli;
pub mod error;
pub mod expr;
pub mod format;
pub mod geometry;
pub mod heat;
pub mod io;
pub mod laplace;
pub mod layer;
pub mod oracles;
pub mod quadrature;
pub mod system;
pub mod trace;

pub use error::{Result, UbvpError};
