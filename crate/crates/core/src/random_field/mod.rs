//! Imprecise Gaussian load field on a 1D edge.
//!
//! A [`PBox`] bounds the field's mean and standard deviation. The field's
//! exponential covariance has closed-form K-L eigenpairs ([`kl_basis`]);
//! [`nystrom_eigenpairs`] is the numerical cross-check.

mod kl;
mod nystrom;
mod pbox;
mod quadrature;
mod realize;

pub use kl::{
    cosine_root, eigenvalue, kl_basis, kl_frequencies, significance_order, sine_root, ExponentialKernel,
    Frequency, KLBasis, Parity, Truncation,
};
pub use nystrom::{nystrom_eigenpairs, NystromSpectrum};
pub use pbox::{pbox_from_moments, pbox_from_samples, PBox};
pub use quadrature::GaussLegendre;
pub use realize::{realize_field, standard_normals, FieldRealization};
