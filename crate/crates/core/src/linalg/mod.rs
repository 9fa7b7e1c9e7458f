//! Linear algebra building blocks: sparse storage, dense eigensolves,
//! envelope `LDLᵀ` and a Lanczos solver for extreme eigenvalues.

pub mod dense;
pub mod lanczos;
pub mod ldlt;
pub mod scalar;
pub mod sparse;

pub use dense::DenseOps;
pub use scalar::Scalar;
pub use sparse::CsrMatrix;
