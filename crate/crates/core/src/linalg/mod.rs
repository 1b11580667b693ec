//! Complex matrix arithmetic, Hermitian eigensystems and the Cartesian
//! decomposition of an operator.

pub mod eig;
pub mod matrix;
pub mod operator;
pub mod svd;

pub use eig::{hermitian_eig, hermitian_eigenvalues, EigSystem};
pub use matrix::{dot, orthonormalize, vec_norm, CMatrix, C64};
pub use operator::{decompose, normalized_trace, top_k_sum, Operator};
pub use svd::{svd, Svd};
