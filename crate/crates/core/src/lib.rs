//! Surrogate quantum circuit for the D2Q9 BGK collision operator.
//!
//! Nine lattice populations are amplitude-encoded on four qubits, evolved by
//! a trained D8-equivariant circuit and read back as probabilities scaled by
//! the node mass. The crate covers the classical lattice physics, the
//! statevector simulator with adjoint gradients, training, native-gate
//! lowering, a hybrid LBM driver and the on-disk formats.

pub mod circuit;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod persistence;
pub mod qstate;
pub mod sim;
pub mod training;

pub use error::{Error, Result};
