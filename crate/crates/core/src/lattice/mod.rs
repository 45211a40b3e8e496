//! Two-species Bose-Hubbard simulation of the register gates.
//!
//! * [`fock`]: occupation-number states and exact dynamical subspaces.
//! * [`hamiltonian`]: Hubbard and ancilla-coupled Hamiltonians.
//! * [`register`]: placement of the register atoms and the Fock ↔ spin map.
//! * [`elimination`]: adiabatic elimination of doubly occupied states.
//! * [`closed_form`]: analytic non-interacting dynamics.
//! * [`gates`]: full simulations of `R_z`, `R_x`, CPHASE and initialization.
//! * [`units`]: recoil units and gate durations.
//! * [`scan`]: parallel parameter sweeps.

pub mod closed_form;
pub mod elimination;
pub mod fock;
pub mod gates;
pub mod hamiltonian;
pub mod register;
pub mod scan;
pub mod units;

pub use closed_form::{chain_propagator, closed_form_free_evolution, FreeEvolution};
pub use elimination::{
    adiabatic_eliminate, adiabatic_eliminate_with, effective_x_hamiltonian, symmetric_x_params,
    EffectiveCouplings, InverseOrder, XEffective,
};
pub use fock::{FockBasis, Occupation, Species};
pub use gates::{
    locate_swap_time, run_cphase, run_initialization, run_rx_gate, run_rz_gate,
    worst_case_infidelity, CphaseConfig, CphaseResult, GateTrajectory, InitConfig, InitResult,
    InitRoute, Regime, RxConfig, RxResult, RzConfig, RzResult,
};
pub use hamiltonian::{build_cphase_hamiltonian, build_hamiltonian, AncillaParams, HubbardParams};
pub use register::{fock_leakage, logical_overlap, RegisterLayout};
pub use scan::{detuning_scan, ScanBase, ScanGate, ScanKnob, ScanResult, ScanRow};
pub use units::{gate_time, gate_time_internal, GateKind, LatticeUnits, DEFAULT_J};
