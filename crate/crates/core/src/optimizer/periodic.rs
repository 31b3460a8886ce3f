use serde::{Deserialize, Serialize};

use crate::{Result, RtoError};

/// A mesh tiled by `cells_x × cells_y` identical cells of
/// `cell_nx × cell_ny` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicLayout {
    pub cells_x: usize,
    pub cells_y: usize,
    pub cell_nx: usize,
    pub cell_ny: usize,
}

impl PeriodicLayout {
    /// Layout of `cells_x × cells_y` cells over an `nx × ny` mesh.
    pub fn for_mesh(nx: usize, ny: usize, cells_x: usize, cells_y: usize) -> Result<Self> {
        if cells_x == 0 || cells_y == 0 || nx % cells_x != 0 || ny % cells_y != 0 {
            return Err(RtoError::InvalidInput(format!(
                "{cells_x} x {cells_y} cells do not divide a {nx} x {ny} mesh"
            )));
        }
        Ok(PeriodicLayout {
            cells_x,
            cells_y,
            cell_nx: nx / cells_x,
            cell_ny: ny / cells_y,
        })
    }

    pub fn mesh_nx(&self) -> usize {
        self.cells_x * self.cell_nx
    }

    pub fn mesh_ny(&self) -> usize {
        self.cells_y * self.cell_ny
    }

    pub fn cell_len(&self) -> usize {
        self.cell_nx * self.cell_ny
    }

    pub fn n_cells(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub fn check(&self, nx: usize, ny: usize) -> Result<()> {
        if self.cell_len() == 0 || self.mesh_nx() != nx || self.mesh_ny() != ny {
            return Err(RtoError::InvalidInput(format!(
                "layout {}x{} cells of {}x{} does not match a {nx} x {ny} mesh",
                self.cells_x, self.cells_y, self.cell_nx, self.cell_ny
            )));
        }
        Ok(())
    }

    /// In-cell index of mesh element `e`.
    pub fn cell_index(&self, e: usize) -> usize {
        let nx = self.mesh_nx();
        let (row, col) = (e / nx, e % nx);
        (row % self.cell_ny) * self.cell_nx + col % self.cell_nx
    }

    /// Tiles one cell over the whole mesh.
    pub fn expand(&self, cell: &[f64]) -> Result<Vec<f64>> {
        if cell.len() != self.cell_len() {
            return Err(RtoError::InvalidInput(format!(
                "cell field has {} entries, layout needs {}",
                cell.len(),
                self.cell_len()
            )));
        }
        Ok((0..self.n_cells() * self.cell_len()).map(|e| cell[self.cell_index(e)]).collect())
    }

    /// Sums a mesh field over corresponding positions of every cell.
    pub fn reduce(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.n_cells() * self.cell_len() {
            return Err(RtoError::InvalidInput(format!(
                "field has {} entries, layout covers {}",
                field.len(),
                self.n_cells() * self.cell_len()
            )));
        }
        let mut out = vec![0.0; self.cell_len()];
        for (e, v) in field.iter().enumerate() {
            out[self.cell_index(e)] += v;
        }
        Ok(out)
    }

    /// Cell `(cx, cy)` of a mesh field, row by row.
    pub fn extract_cell(&self, field: &[f64], cx: usize, cy: usize) -> Vec<f64> {
        let nx = self.mesh_nx();
        let mut out = Vec::with_capacity(self.cell_len());
        for r in 0..self.cell_ny {
            let row = cy * self.cell_ny + r;
            let start = row * nx + cx * self.cell_nx;
            out.extend_from_slice(&field[start..start + self.cell_nx]);
        }
        out
    }

    /// Whether every cell of `field` is bitwise identical to cell `(0, 0)`.
    pub fn cells_identical(&self, field: &[f64]) -> bool {
        let first = self.extract_cell(field, 0, 0);
        (0..self.cells_y).all(|cy| {
            (0..self.cells_x).all(|cx| {
                self.extract_cell(field, cx, cy)
                    .iter()
                    .zip(&first)
                    .all(|(a, b)| a.to_bits() == b.to_bits())
            })
        })
    }
}
