//! Robust topology optimization of 2D structures under load fields whose
//! mean and standard deviation are only known up to intervals.
//!
//! The load on one boundary edge is a Gaussian random field with an
//! exponential covariance kernel. Its Karhunen-Loève expansion turns a
//! single random load into `M + 1` deterministic load cases, so the first two
//! moments of compliance follow in closed form from the matrix of pairwise
//! compliances `c_ij = f_iᵀ u_j`. Interval bounds over the p-box of the
//! load's mean and standard deviation come from exact rescaling of that
//! matrix, which makes a corner search (and the scanning engines used to
//! cross-check it) essentially free compared to a finite element solve.
//!
//! Module map:
//! - [`random_field`]: p-boxes, the K-L basis of the exponential kernel, a
//!   Nyström oracle and field realizations.
//! - [`fem`]: bilinear plane-stress elements with SIMP interpolation, banded
//!   Cholesky solves and the compliance matrix.
//! - [`moments`]: mean, variance and objective of the quadratic compliance form.
//! - [`bounds`]: combinatorial, quasi-Monte Carlo and particle swarm bound engines.
//! - [`sensitivity`]: weight matrix, orthogonal similarity transformation and
//!   element sensitivities.
//! - [`filter`]: linear density filter and volume-preserving Heaviside projection.
//! - [`optimizer`]: MMA update, periodic layouts and the full optimization loop.
//! - [`io`]: run configuration, output writers and the command implementations
//!   behind the `rto` binary.

pub mod bounds;
pub mod error;
pub mod fem;
pub mod filter;
pub mod io;
pub mod moments;
pub mod optimizer;
pub mod random_field;
pub mod sensitivity;

pub use error::{Result, RtoError};
