//! Qubit-level toolkit for 1+1D SU(Nc) lattice gauge theory with Nf staggered
//! quark flavors in axial gauge: operator construction, sector diagonalization,
//! Trotter circuits and their resource counts, state-vector evolution with noise
//! and mitigation, and a QUBO-based eigensolver.

pub mod anneal;
pub mod circuit;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod scalar;
pub mod sector;

pub use error::{Error, Result};
pub use scalar::{Cplx, Scalar};

/// Default real scalar.
pub type Real = f64;
/// Complex amplitude over [`Real`].
pub type Complex = Cplx<Real>;
/// Pauli sum over [`Real`].
pub type Operator = pauli::PauliOperator<Real>;
