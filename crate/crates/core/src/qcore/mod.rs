//! Dense complex linear algebra and statevector primitives.
//!
//! Everything here is a pure function of its inputs. Gate application works
//! in place over strided amplitude groups, so a two-qubit gate costs O(2^n)
//! and no 2^n × 2^n operator is ever built.

mod eig;
mod matrix;
mod state;

pub use eig::{hermitian_eig, hermitian_eig_checked, Eigen};
pub use matrix::{CMatrix, DensityMatrix, HermitianMatrix};
pub use state::{apply_two_qubit, partial_trace, RealGate, StateVector, MAX_QUBITS};

pub(crate) use state::{apply_real_gate, for_each_pair_group};
