//! Brick-wall circuit structure, the six-angle gate, and initialization schemes.

mod gates;
mod init;
mod layout;
mod params;

/// Angles per two-qubit gate.
pub const ANGLES_PER_GATE: usize = 6;

pub use gates::{
    apply_circuit, gate_derivatives, gate_unitary, generator_matrix, givens, output_state, CompiledCircuit,
    ROTATION_AXES,
};
pub use init::{init_params, InitScheme, Placement};
pub use layout::{CircuitLayout, GateSite, RegisterSpec};
pub use params::{LayoutDescriptor, ParamFile, ParamVector};

