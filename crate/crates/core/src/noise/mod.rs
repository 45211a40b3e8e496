//! Ancilla dephasing, quantum operations and fidelity measures.
//!
//! * [`channel`]: completely positive trace-preserving maps.
//! * [`lindblad`]: the dephasing master equation and its closed form.
//! * [`fidelity`]: state and operation fidelities and the closed-form module
//!   fidelities.

pub mod channel;
pub mod fidelity;
pub mod lindblad;

pub use channel::QuantumOperation;
pub use fidelity::{
    analytic_module_fidelity, fidelity_of_input, operation_fidelity, product_state, pure_fidelity,
    state_fidelity, AnalyticFidelity, InputSpace, ModuleKind, OperationFidelity, SamplerConfig,
};
pub use lindblad::{
    dephasing_channel, lindblad_propagate, phase_damping, DephasedSubsystem, DephasingModel,
};
