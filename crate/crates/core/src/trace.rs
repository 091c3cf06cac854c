use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::geometry::{Surface, SurfaceId};

/// Which boundary trace a sampled function represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceRole {
    /// `u0 = u|_S`
    Dirichlet,
    /// `u1 = ∂u/∂ν|_S` with the exterior normal.
    Neumann,
}

/// Values of a function at the nodes of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    values: Vec<f64>,
    role: TraceRole,
    surface_id: SurfaceId,
}

impl BoundaryTrace {
    pub fn new(surface: &Surface, role: TraceRole, values: Vec<f64>) -> Result<Self> {
        if values.len() != surface.len() {
            return Err(UbvpError::invalid(format!(
                "trace has {} values but the surface has {} nodes",
                values.len(),
                surface.len()
            )));
        }
        Ok(BoundaryTrace { values, role, surface_id: surface.id() })
    }

    pub fn dirichlet(surface: &Surface, values: Vec<f64>) -> Result<Self> {
        Self::new(surface, TraceRole::Dirichlet, values)
    }

    pub fn neumann(surface: &Surface, values: Vec<f64>) -> Result<Self> {
        Self::new(surface, TraceRole::Neumann, values)
    }

    pub fn constant(surface: &Surface, role: TraceRole, value: f64) -> Self {
        BoundaryTrace { values: vec![value; surface.len()], role, surface_id: surface.id() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn role(&self) -> TraceRole {
        self.role
    }

    pub fn surface_id(&self) -> SurfaceId {
        self.surface_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Errors unless the trace was sampled on `surface`.
    pub fn check_on(&self, surface: &Surface) -> Result<()> {
        if self.surface_id != surface.id() || self.values.len() != surface.len() {
            return Err(UbvpError::invalid(format!(
                "trace belongs to surface {} ({} values), expected surface {} ({} nodes)",
                self.surface_id.get(),
                self.values.len(),
                surface.id().get(),
                surface.len()
            )));
        }
        Ok(())
    }
}
