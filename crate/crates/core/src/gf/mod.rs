//! Exact arithmetic in GF(3) and GF(9) and the dense linear-algebra kernels
//! built on it.

mod matrix;
mod scalar;
mod subspace;

pub use matrix::{JordanType, Matrix};
pub use scalar::{FieldScalar, Gf3, Gf9};
pub use subspace::Subspace;
