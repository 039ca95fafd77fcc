//! Dense complex linear algebra on finite-dimensional tensor-product spaces.

mod eig;
mod factor;
mod hermitian;
mod matrix;

pub(crate) use eig::eig_matrix;
pub use eig::{eig_hermitian, Spectrum};
pub use factor::{cholesky, haar_unitary, lower_triangular_inverse, random_pure_state};
pub use hermitian::{
    partial_trace_matrix, partial_transpose_matrix, permutation_unitary, permute_matrix, psd_check, Density, Hermitian,
    SubsystemDims,
};
pub use matrix::Matrix;
