//! Numerical simulator for a quantum repeater whose memories are logical qubits
//! stored in the decoherence-free subspace (DFS) of four atoms.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum`]: dense states, operators, density matrices, propagation.
//! * [`dfs`]: the four-qubit DFS code, permutation operators and logical gates.
//! * [`lattice`]: the two-species Bose-Hubbard model that realizes the gates,
//!   adiabatic elimination, closed-form free dynamics and gate timing.
//! * [`noise`]: ancilla dephasing, state/operation fidelities and analytic
//!   module fidelities.
//! * [`protocol`]: logical-level circuits (transfer, purification, CNOT,
//!   measurement, swapping), the nested repeater loop and time budgets.
//! * [`experiment`]: configuration, scans, reports and the `dfsrep` front-end.

pub mod dfs;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod noise;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
