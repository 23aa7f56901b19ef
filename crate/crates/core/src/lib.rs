//! The maximal F4 subgroup of E8 in characteristic 3.

pub mod chevgroup;
pub mod classify;
pub mod embedding;
pub mod error;
pub mod gf;
pub mod hillclimb;
pub mod liealg;
pub mod modrep;
pub mod rootsys;

pub use error::{Error, Result};
pub use gf::{FieldScalar, Gf3, Gf9, JordanType, Matrix, Subspace};
pub use liealg::{LieAlgebra, LieElement, SubalgebraBasis};
pub use rootsys::{Root, RootSystem, RootSystemType};

/// Matrices over GF(3).
pub type Mat3 = Matrix<Gf3>;
/// Matrices over GF(9).
pub type Mat9 = Matrix<Gf9>;
