//! Sparse matrices and direct solvers.

mod cholesky;
mod csr;
mod lu;
mod ordering;

pub use cholesky::SparseCholesky;
pub use csr::{relative_residual, CsrMatrix, DenseVector, TripletBuilder};
pub use lu::{LuOptions, SparseLu};
pub use ordering::{invert_permutation, is_permutation, nested_dissection, Ordering};
