//! Logical-level repeater protocol.
//!
//! * [`register`]: branch-weighted density matrices over named qubits.
//! * [`circuits`]: state transfer, logical CNOT, readout and the DFS–DFS
//!   variants, with ancilla dephasing during every CPHASE.
//! * [`pairs`]: Bell states, Werner states and logical pairs.
//! * [`purification`]: one purification round, its threshold and the
//!   one-node operation.
//! * [`swap`]: Bell measurement and the derived correction table.
//! * [`repeater`]: the nested purify-and-swap loop.
//! * [`budget`]: module durations from the lattice gate times.
//! * [`embedding`]: the transfer circuit rerun on the four-atom register.

pub mod budget;
pub mod circuits;
pub mod embedding;
pub mod pairs;
pub mod purification;
pub mod register;
pub mod repeater;
pub mod swap;

pub use budget::{
    gate_time_budget, module_budget, Module, ModuleBudget, ModuleTimes, PrimitiveTimes,
};
pub use circuits::{
    circuit_cnot_logical, circuit_measure_logical, circuit_state_transfer, cnot_channel,
    cphase_channel, dfs_transfer_channel, measurement_channel, state_transfer_channel, CircuitId,
    CircuitNoise, CircuitRun, LogicalMeasurement, MeasurementRecord,
};
pub use embedding::{transfer_embedding_check, EmbeddingCheck};
pub use pairs::{logical_zero, Bell, LogicalPair, Side};
pub use purification::{
    circuit_purification_round, purification_round_sampled, purification_side_channel,
    purification_threshold, werner_map, AuxCarrier, PurificationOutcome, SampledRound,
};
pub use register::{basis_qubit, Branch, Register};
pub use repeater::{
    iterate_purification, nested_repeater_run, AuxPolicy, ExecutionMode, LevelTrace,
    ProtocolConfig, RepeaterResult, RunStatus, SampledSummary,
};
pub use swap::{
    correction_table, derive_correction_table, entanglement_swap, Correction, CorrectionTable,
    SwapOutcome,
};
