use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTag {
    SingleLayer,
    DoubleLayer,
    Newtonian,
}

/// Matrix of a discretized integral operator: row `i` evaluates at
/// `row_points[i]`, column `j` weighs the density at `col_nodes[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    row_points: Vec<Vec3>,
    col_nodes: Vec<Vec3>,
    kernel: KernelTag,
}

impl DenseOperator {
    pub(crate) fn from_rows(
        rows: Vec<Vec<f64>>,
        row_points: Vec<Vec3>,
        col_nodes: Vec<Vec3>,
        kernel: KernelTag,
    ) -> Result<Self> {
        let m = rows.len();
        let n = col_nodes.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        if flat.len() != m * n {
            return Err(UbvpError::numeric("operator rows have inconsistent lengths"));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(UbvpError::numeric(format!("{kernel:?} operator has non-finite entries")));
        }
        Ok(DenseOperator { matrix: DMatrix::from_row_slice(m, n, &flat), row_points, col_nodes, kernel })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn row_points(&self) -> &[Vec3] {
        &self.row_points
    }

    pub fn col_nodes(&self) -> &[Vec3] {
        &self.col_nodes
    }

    pub fn kernel(&self) -> KernelTag {
        self.kernel
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, density: &[f64]) -> Result<Vec<f64>> {
        if density.len() != self.ncols() {
            return Err(UbvpError::invalid(format!(
                "operator has {} columns, density has {} values",
                self.ncols(),
                density.len()
            )));
        }
        let x = DVector::from_column_slice(density);
        Ok((&self.matrix * x).iter().copied().collect())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    /// Row count and column count as little-endian `u64`, then the entries
    /// row-major as little-endian `f64`.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(&(self.nrows() as u64).to_le_bytes())?;
        out.write_all(&(self.ncols() as u64).to_le_bytes())?;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.write_all(&self.matrix[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a matrix written by [`DenseOperator::write_binary`].
    pub fn read_binary_matrix(mut input: impl Read) -> Result<DMatrix<f64>> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            input.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }
}
