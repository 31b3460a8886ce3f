//! Plane-stress finite elements on a regular grid with SIMP interpolation.

mod compliance;
mod element;
mod loads;
mod mesh;
mod solver;

pub use compliance::{compliance_matrix, raw_compliance, solve_cases, ComplianceMatrix};
pub use element::{element_energy, element_stiffness, ElementMatrix, SimpParams};
pub use loads::{build_load_cases, lump_line_load, LoadCaseSet};
pub use mesh::{LoadEdge, Mesh, Side, SupportPreset};
pub use solver::{assemble_and_factor, FactoredStiffness, SolverKind, DIRECT_LIMIT, RESIDUAL_TOL};
