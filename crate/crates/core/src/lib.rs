//! Statevector laboratory for barren plateaus in layered 1D circuits.
//!
//! Qubit 0 is the most significant bit of every amplitude index. Circuits
//! are brick walls of six-angle real orthogonal two-qubit gates; the cost
//! register `R_C` is a contiguous block of qubits and `θ^E` denotes the
//! angles of gates straddling its boundary.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases at
//! the bottom of this file fix the scalar to `f64`, which is what the
//! experiment runners use.

pub mod circuit;
pub mod entanglement;
pub mod error;
pub mod gradients;
pub mod groundstates;
pub mod observables;
pub mod qcore;
pub mod rng;
pub mod scalar;
pub mod training;

pub use circuit::{
    apply_circuit, gate_unitary, generator_matrix, init_params, output_state, CircuitLayout, CompiledCircuit, GateSite,
    InitScheme, ParamFile, ParamVector, Placement, RegisterSpec,
};
pub use error::{Error, Result};
pub use gradients::{GradientVector, VarianceReport};
pub use observables::{CostFunction, LabeledState, ObservableSum, Pauli, PauliString};
pub use qcore::{DensityMatrix, HermitianMatrix, StateVector};
pub use scalar::{Real, ENTROPY_CLIP, SPECTRAL_TOL, STRUCTURAL_TOL};

pub type StateVectorF64 = qcore::StateVector<f64>;
pub type StateVectorF32 = qcore::StateVector<f32>;
pub type DensityMatrixF64 = qcore::DensityMatrix<f64>;
pub type HermitianMatrixF64 = qcore::HermitianMatrix<f64>;
pub type ParamVectorF64 = circuit::ParamVector<f64>;
pub type ParamVectorF32 = circuit::ParamVector<f32>;
pub type GradientVectorF64 = gradients::GradientVector<f64>;
pub type ObservableF64 = observables::ObservableSum<f64>;
pub type CostFunctionF64 = observables::CostFunction<f64>;
pub type HamiltonianF64 = groundstates::LongRangeHamiltonian<f64>;
pub type CompressorDatasetF64 = groundstates::CompressorDataset<f64>;
