use serde::{Deserialize, Serialize};

use crate::{Result, RtoError};

/// Side of the rectangular design domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

/// Named support arrangements of the benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPreset {
    /// Every node on the bottom edge clamped.
    BottomFixed,
    /// Every node on the left edge clamped.
    LeftFixed,
    /// Every node on the right edge clamped.
    RightFixed,
    /// Both bottom corner nodes pinned in x and y.
    BottomCornersPinned,
}

/// Contiguous run of boundary nodes carrying the field load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadEdge {
    /// Nodes in order along the edge.
    pub nodes: Vec<usize>,
    /// Unit vector the (signed) load magnitude acts along.
    pub direction: [f64; 2],
}

/// Regular grid of square bilinear elements.
///
/// Elements are numbered row by row from the top-left corner
/// (`e = row * nx + col`). Node `(i, j)`, column `i` and row `j` counted from
/// the top, has index `i * (ny + 1) + j` and coordinates
/// `(i h, (ny - j) h)`. Node `n` owns DOFs `2n` (x) and `2n + 1` (y).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub elem_size: f64,
    /// Sorted, deduplicated constrained DOFs.
    pub fixed_dofs: Vec<usize>,
    pub load_edge: LoadEdge,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, elem_size: f64, fixed_dofs: Vec<usize>, load_edge: LoadEdge) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(RtoError::InvalidInput(format!("mesh needs nx, ny >= 1 (got {nx} x {ny})")));
        }
        if !(elem_size > 0.0) {
            return Err(RtoError::InvalidInput("element size must be positive".into()));
        }
        let ndof = 2 * (nx + 1) * (ny + 1);
        let mut fixed_dofs = fixed_dofs;
        fixed_dofs.sort_unstable();
        fixed_dofs.dedup();
        if fixed_dofs.is_empty() {
            return Err(RtoError::InvalidInput("no constrained degrees of freedom".into()));
        }
        if let Some(d) = fixed_dofs.iter().find(|&&d| d >= ndof) {
            return Err(RtoError::InvalidInput(format!("constrained DOF {d} out of range (ndof = {ndof})")));
        }
        let mesh = Mesh {
            nx,
            ny,
            elem_size,
            fixed_dofs,
            load_edge,
        };
        if mesh.load_edge.nodes.len() < 2 {
            return Err(RtoError::InvalidInput("load edge needs at least two nodes".into()));
        }
        if let Some(n) = mesh.load_edge.nodes.iter().find(|&&n| !mesh.is_boundary_node(n)) {
            return Err(RtoError::InvalidInput(format!("load edge node {n} is not on the boundary")));
        }
        let [dx, dy] = mesh.load_edge.direction;
        if ((dx * dx + dy * dy).sqrt() - 1.0).abs() > 1e-9 {
            return Err(RtoError::InvalidInput("load direction must be a unit vector".into()));
        }
        Ok(mesh)
    }

    pub fn n_elems(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn node_coords(&self, n: usize) -> [f64; 2] {
        let i = n / (self.ny + 1);
        let j = n % (self.ny + 1);
        [i as f64 * self.elem_size, (self.ny - j) as f64 * self.elem_size]
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        let i = n / (self.ny + 1);
        let j = n % (self.ny + 1);
        i == 0 || i == self.nx || j == 0 || j == self.ny
    }

    /// Corner nodes of element `e`, counterclockwise from lower-left.
    pub fn elem_nodes(&self, e: usize) -> [usize; 4] {
        let row = e / self.nx;
        let col = e % self.nx;
        [
            self.node(col, row + 1),
            self.node(col + 1, row + 1),
            self.node(col + 1, row),
            self.node(col, row),
        ]
    }

    pub fn elem_dofs(&self, e: usize) -> [usize; 8] {
        let n = self.elem_nodes(e);
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    }

    pub fn elem_center(&self, e: usize) -> [f64; 2] {
        let row = e / self.nx;
        let col = e % self.nx;
        [
            (col as f64 + 0.5) * self.elem_size,
            (self.ny as f64 - row as f64 - 0.5) * self.elem_size,
        ]
    }

    pub fn elem_volume(&self) -> f64 {
        self.elem_size * self.elem_size
    }

    /// Nodes along `side` spanning elements `start..end` of that side.
    ///
    /// Horizontal sides count from the left, vertical sides from the top.
    pub fn side_nodes(&self, side: Side, start: usize, end: usize) -> Result<Vec<usize>> {
        Self::side_span(self.nx, self.ny, side, start, end)
    }

    /// [`Mesh::side_nodes`] before the mesh exists.
    pub fn side_span(nx: usize, ny: usize, side: Side, start: usize, end: usize) -> Result<Vec<usize>> {
        let node = |i: usize, j: usize| i * (ny + 1) + j;
        let len = match side {
            Side::Top | Side::Bottom => nx,
            Side::Left | Side::Right => ny,
        };
        if start >= end || end > len {
            return Err(RtoError::InvalidInput(format!(
                "edge span {start}..{end} invalid for a side of {len} elements"
            )));
        }
        Ok((start..=end)
            .map(|k| match side {
                Side::Top => node(k, 0),
                Side::Bottom => node(k, ny),
                Side::Left => node(0, k),
                Side::Right => node(nx, k),
            })
            .collect())
    }

    /// DOFs constrained by a named support arrangement.
    pub fn preset_dofs(nx: usize, ny: usize, preset: SupportPreset) -> Vec<usize> {
        let node = |i: usize, j: usize| i * (ny + 1) + j;
        let both = |n: usize| [2 * n, 2 * n + 1];
        match preset {
            SupportPreset::BottomFixed => (0..=nx).flat_map(|i| both(node(i, ny))).collect(),
            SupportPreset::LeftFixed => (0..=ny).flat_map(|j| both(node(0, j))).collect(),
            SupportPreset::RightFixed => (0..=ny).flat_map(|j| both(node(nx, j))).collect(),
            SupportPreset::BottomCornersPinned => {
                [node(0, ny), node(nx, ny)].into_iter().flat_map(both).collect()
            }
        }
    }

    /// Length of the loaded edge.
    pub fn load_edge_length(&self) -> f64 {
        let first = self.node_coords(self.load_edge.nodes[0]);
        let last = self.node_coords(*self.load_edge.nodes.last().unwrap());
        ((last[0] - first[0]).powi(2) + (last[1] - first[1]).powi(2)).sqrt()
    }

    /// Coordinates of the load edge nodes mapped onto `[-a, a]`, `a` half the edge length.
    pub fn load_edge_coords(&self) -> Vec<f64> {
        let first = self.node_coords(self.load_edge.nodes[0]);
        let half = 0.5 * self.load_edge_length();
        self.load_edge
            .nodes
            .iter()
            .map(|&n| {
                let p = self.node_coords(n);
                let s = ((p[0] - first[0]).powi(2) + (p[1] - first[1]).powi(2)).sqrt();
                (s - half).clamp(-half, half)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plate(n: usize) -> Mesh {
        let fixed = Mesh::preset_dofs(n, n, SupportPreset::BottomFixed);
        let probe = Mesh {
            nx: n,
            ny: n,
            elem_size: 1.0,
            fixed_dofs: vec![],
            load_edge: LoadEdge {
                nodes: vec![],
                direction: [0.0, 1.0],
            },
        };
        let nodes = probe.side_nodes(Side::Top, 0, n).unwrap();
        Mesh::new(n, n, 1.0, fixed, LoadEdge { nodes, direction: [0.0, 1.0] }).unwrap()
    }

    #[test]
    fn numbering() {
        let m = plate(3);
        assert_eq!(m.n_nodes(), 16);
        assert_eq!(m.elem_nodes(0), [1, 5, 4, 0]);
        assert_eq!(m.node_coords(0), [0.0, 3.0]);
        assert_eq!(m.node_coords(3), [0.0, 0.0]);
        assert_eq!(m.elem_center(0), [0.5, 2.5]);
        let coords = m.load_edge_coords();
        assert_eq!(coords, vec![-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(m.load_edge_length(), 3.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        let e = LoadEdge {
            nodes: vec![0, 4],
            direction: [0.0, 1.0],
        };
        assert!(Mesh::new(0, 3, 1.0, vec![0], e.clone()).is_err());
        assert!(Mesh::new(3, 3, 1.0, vec![], e.clone()).is_err());
        // interior node 5 of a 3x3 mesh
        let interior = LoadEdge {
            nodes: vec![0, 5],
            direction: [0.0, 1.0],
        };
        assert!(Mesh::new(3, 3, 1.0, vec![0], interior).is_err());
    }
}
