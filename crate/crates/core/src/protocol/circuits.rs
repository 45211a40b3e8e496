//! Logical-level circuits of the repeater modules.
//!
//! Every CPHASE between an ancilla and a DFS qubit exposes the ancilla to
//! dephasing for the gate duration `t`; the ancilla coherence is multiplied
//! by `λ = e^{−γt}` per gate. Logical rotations and ancilla rotations are
//! noiseless, and the DFS qubits themselves do not decohere.
//!
//! Each circuit is built from small gadgets acting on a [`Register`]:
//!
//! * transfer: `R_L^x(π/2)`, controlled `−Z_L`, `R_L^x(−π/2)` on the target;
//!   `R^x(−π/2)` and measurement on the ancilla; `R_L^z(π)` on outcome 1.
//! * measurement: ancilla `|1⟩`, `R^x(π/2)`, controlled `−Z_L`, `R^x(−π/2)`,
//!   measurement; the outcome is the logical bit.
//! * CNOT: one ancilla `|0⟩` controls `−Z_L` on both logical qubits between
//!   `R^x(∓π/2)` pulses; the target is conjugated by `R_L^z(−π/2)R_L^x(π/2)`,
//!   the control by `R_L^x(−π)`, and the control gets `R_L^z(π)` on outcome 1.
//! * DFS–DFS CPHASE: the CNOT gadget without the target conjugation; it
//!   realizes controlled `−Z_L` between two logical qubits.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use super::register::{basis_qubit, rx, rz, Register};
use crate::error::{Error, Result};
use crate::noise::{DephasingModel, QuantumOperation};
use crate::quantum::{CMatrix, DensityMatrix};

/// Largest accepted deviation of a transfer target from `|0_L⟩`.
pub const TARGET_TOL: f64 = 1e-10;

/// Ancilla coherence surviving one CPHASE gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitNoise {
    lambda: f64,
}

impl CircuitNoise {
    pub fn ideal() -> Self {
        CircuitNoise { lambda: 1.0 }
    }

    /// `λ = e^{−γt}` from a dephasing model whose duration is one CPHASE.
    pub fn from_model(model: &DephasingModel) -> Self {
        CircuitNoise {
            lambda: model.coherence(),
        }
    }

    pub fn from_gamma_t(gamma_t: f64) -> Result<Self> {
        if !(gamma_t >= 0.0 && gamma_t.is_finite()) {
            return Err(Error::validation("gamma*t must be finite and non-negative"));
        }
        Ok(CircuitNoise {
            lambda: (-gamma_t).exp(),
        })
    }

    pub fn coherence(&self) -> f64 {
        self.lambda
    }
}

impl Default for CircuitNoise {
    fn default() -> Self {
        CircuitNoise::ideal()
    }
}

/// Which circuit produced a measurement record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitId {
    StateTransfer,
    Cnot,
    Measurement,
    Purification,
    EntanglementSwap,
    DfsStateTransfer,
    DfsPurification,
}

/// One measurement branch of a circuit run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub circuit: CircuitId,
    /// Outcome bits in the order the measurements were made.
    pub outcomes: Vec<u8>,
    /// Whether postselection keeps this branch.
    pub accepted: bool,
    pub probability: f64,
}

/// Branch records of a register, with acceptance decided by `accept`.
pub fn branch_records(
    circuit: CircuitId,
    reg: &Register,
    accept: impl Fn(&[u8]) -> bool,
) -> Vec<MeasurementRecord> {
    reg.branches()
        .iter()
        .map(|b| MeasurementRecord {
            circuit,
            outcomes: b.outcomes.clone(),
            accepted: accept(&b.outcomes),
            probability: b.probability(),
        })
        .collect()
}

/// Output state of a circuit together with its branch records.
#[derive(Clone, Debug)]
pub struct CircuitRun {
    pub state: DensityMatrix,
    pub records: Vec<MeasurementRecord>,
}

fn fresh_name(reg: &Register, prefix: &str) -> String {
    (0..)
        .map(|k| format!("{prefix}{k}"))
        .find(|n| !reg.names().contains(n) && !reg.measured().contains(n))
        .expect("unbounded name supply")
}

fn hermitized(m: CMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked((&m + m.adjoint()).unscale(2.0))
}

/// Moves the ancilla state into `target`, which must hold `|0_L⟩`, and
/// measures the ancilla. Returns the outcome index.
pub fn transfer_gadget(
    reg: &mut Register,
    ancilla: &str,
    target: &str,
    noise: CircuitNoise,
) -> Result<usize> {
    reg.apply(target, &rx(FRAC_PI_2))?;
    reg.controlled_neg_z(ancilla, target, noise.lambda)?;
    reg.apply(target, &rx(-FRAC_PI_2))?;
    reg.apply(ancilla, &rx(-FRAC_PI_2))?;
    let k = reg.measure(ancilla)?;
    reg.apply_if(target, &rz(PI), k, 1)?;
    Ok(k)
}

/// Reads out a logical qubit with a fresh ancilla. The logical qubit stays
/// in the register, projected; returns the outcome index.
pub fn measure_gadget(reg: &mut Register, logical: &str, noise: CircuitNoise) -> Result<usize> {
    let anc = fresh_name(reg, "anc");
    reg.add_qubit(&anc, &basis_qubit(1))?;
    reg.apply(&anc, &rx(FRAC_PI_2))?;
    reg.controlled_neg_z(&anc, logical, noise.lambda)?;
    reg.apply(&anc, &rx(-FRAC_PI_2))?;
    reg.measure(&anc)
}

fn two_qubit_gadget(
    reg: &mut Register,
    control: &str,
    target: &str,
    noise: CircuitNoise,
    cnot: bool,
) -> Result<usize> {
    if control == target {
        return Err(Error::validation("control and target must differ"));
    }
    let anc = fresh_name(reg, "anc");
    reg.add_qubit(&anc, &basis_qubit(0))?;
    reg.apply(&anc, &rx(-FRAC_PI_2))?;
    reg.apply(control, &rx(-PI))?;
    if cnot {
        reg.apply(target, &rz(-FRAC_PI_2))?;
        reg.apply(target, &rx(FRAC_PI_2))?;
    }
    reg.controlled_neg_z(&anc, control, noise.lambda)?;
    reg.apply(&anc, &rx(FRAC_PI_2))?;
    reg.controlled_neg_z(&anc, target, noise.lambda)?;
    reg.apply(&anc, &rx(-FRAC_PI_2))?;
    if cnot {
        reg.apply(target, &rx(-FRAC_PI_2))?;
        reg.apply(target, &rz(FRAC_PI_2))?;
    }
    let k = reg.measure(&anc)?;
    reg.apply(control, &rx(PI))?;
    reg.apply_if(control, &rz(PI), k, 1)?;
    Ok(k)
}

/// Logical CNOT through one ancilla; returns the ancilla outcome index.
pub fn cnot_gadget(
    reg: &mut Register,
    control: &str,
    target: &str,
    noise: CircuitNoise,
) -> Result<usize> {
    two_qubit_gadget(reg, control, target, noise, true)
}

/// Controlled `−Z_L` between two logical qubits through one ancilla.
pub fn dfs_cphase_gadget(
    reg: &mut Register,
    control: &str,
    target: &str,
    noise: CircuitNoise,
) -> Result<usize> {
    two_qubit_gadget(reg, control, target, noise, false)
}

fn check_dim(rho: &DensityMatrix, d: usize) -> Result<()> {
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Transfers an ancilla state into a logical qubit prepared in `|0_L⟩`.
pub fn circuit_state_transfer(
    psi_anc: &DensityMatrix,
    target: &DensityMatrix,
    noise: CircuitNoise,
) -> Result<CircuitRun> {
    check_dim(psi_anc, 2)?;
    check_dim(target, 2)?;
    let p0 = target.matrix()[(0, 0)].re;
    if 1.0 - p0 > TARGET_TOL {
        return Err(Error::validation(format!(
            "transfer target must be |0_L> (population of |1_L> is {:e})",
            1.0 - p0
        )));
    }
    let mut reg = Register::new(&["q"], psi_anc)?;
    reg.add_qubit("L", target)?;
    transfer_gadget(&mut reg, "q", "L", noise)?;
    Ok(CircuitRun {
        state: hermitized(reg.state()),
        records: branch_records(CircuitId::StateTransfer, &reg, |_| true),
    })
}

/// The transfer circuit as a map from ancilla states to logical states.
pub fn state_transfer_channel(noise: CircuitNoise) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(2, 2, |m| {
        let mut reg = Register::new(&["q"], &DensityMatrix::from_matrix_unchecked(m.clone()))?;
        reg.add_qubit("L", &basis_qubit(0))?;
        transfer_gadget(&mut reg, "q", "L", noise)?;
        Ok(reg.state())
    })
}

/// Logical CNOT on a two-qubit logical state, first factor controlling.
pub fn circuit_cnot_logical(rho: &DensityMatrix, noise: CircuitNoise) -> Result<CircuitRun> {
    check_dim(rho, 4)?;
    let mut reg = Register::new(&["c", "t"], rho)?;
    cnot_gadget(&mut reg, "c", "t", noise)?;
    let state = hermitized(reg.state_in_order(&["c", "t"])?);
    Ok(CircuitRun {
        state,
        records: branch_records(CircuitId::Cnot, &reg, |_| true),
    })
}

pub fn cnot_channel(noise: CircuitNoise) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(4, 4, |m| {
        let mut reg = Register::new(
            &["c", "t"],
            &DensityMatrix::from_matrix_unchecked(m.clone()),
        )?;
        cnot_gadget(&mut reg, "c", "t", noise)?;
        reg.state_in_order(&["c", "t"])
    })
}

/// Ancilla-controlled `−Z_L` with the ancilla dephased: input and output
/// are ordered ancilla ⊗ logical.
pub fn cphase_channel(noise: CircuitNoise) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(4, 4, |m| {
        let mut reg = Register::new(
            &["q", "L"],
            &DensityMatrix::from_matrix_unchecked(m.clone()),
        )?;
        reg.controlled_neg_z("q", "L", noise.lambda)?;
        Ok(reg.state())
    })
}

/// Readout of a logical qubit.
#[derive(Clone, Debug)]
pub struct LogicalMeasurement {
    /// Probabilities of the ancilla outcomes 0 and 1.
    pub probabilities: [f64; 2],
    /// Normalized post-measurement logical state per outcome, if possible.
    pub posterior: [Option<DensityMatrix>; 2],
    pub records: Vec<MeasurementRecord>,
}

pub fn circuit_measure_logical(
    psi: &DensityMatrix,
    noise: CircuitNoise,
) -> Result<LogicalMeasurement> {
    check_dim(psi, 2)?;
    let mut reg = Register::new(&["L"], psi)?;
    measure_gadget(&mut reg, "L", noise)?;
    let mut probabilities = [0.0; 2];
    let mut posterior = [None, None];
    for b in reg.branches() {
        let m = b.outcomes[0] as usize;
        let p = b.probability();
        probabilities[m] = p;
        if p > 1e-14 {
            posterior[m] = Some(hermitized(b.rho.unscale(p)));
        }
    }
    Ok(LogicalMeasurement {
        probabilities,
        posterior,
        records: branch_records(CircuitId::Measurement, &reg, |_| true),
    })
}

/// Readout as a map from a logical qubit to logical ⊗ classical outcome
/// (the outcome stored as `|m⟩⟨m|`).
pub fn measurement_channel(noise: CircuitNoise) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(2, 4, |m| {
        let mut reg = Register::new(&["L"], &DensityMatrix::from_matrix_unchecked(m.clone()))?;
        measure_gadget(&mut reg, "L", noise)?;
        Ok(with_classical_bits(&reg, &[0]))
    })
}

/// `Σ_branches ρ_b ⊗ |m_b⟩⟨m_b|` over the listed outcome positions.
pub(crate) fn with_classical_bits(reg: &Register, positions: &[usize]) -> CMatrix {
    let c = 1usize << positions.len();
    let d = 1usize << reg.names().len();
    let mut out = CMatrix::zeros(d * c, d * c);
    for b in reg.branches() {
        let idx = positions
            .iter()
            .fold(0usize, |acc, &p| (acc << 1) | b.outcomes[p] as usize);
        let mut e = CMatrix::zeros(c, c);
        e[(idx, idx)] = crate::quantum::ONE;
        out += b.rho.kronecker(&e);
    }
    out
}

/// Transfer from one logical qubit into another prepared in `|0_L⟩`: the
/// ancilla of the transfer circuit is replaced by the source DFS qubit, the
/// CPHASE runs through an ancilla, and the source is read out by the
/// measurement circuit.
pub fn dfs_transfer_gadget(
    reg: &mut Register,
    source: &str,
    target: &str,
    noise: CircuitNoise,
) -> Result<usize> {
    reg.apply(target, &rx(FRAC_PI_2))?;
    dfs_cphase_gadget(reg, source, target, noise)?;
    reg.apply(target, &rx(-FRAC_PI_2))?;
    reg.apply(source, &rx(-FRAC_PI_2))?;
    let k = measure_gadget(reg, source, noise)?;
    reg.apply_if(target, &rz(PI), k, 1)?;
    reg.trace_out(source)?;
    Ok(k)
}

pub fn dfs_transfer_channel(noise: CircuitNoise) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(2, 2, |m| {
        let mut reg = Register::new(&["S"], &DensityMatrix::from_matrix_unchecked(m.clone()))?;
        reg.add_qubit("T", &basis_qubit(0))?;
        dfs_transfer_gadget(&mut reg, "S", "T", noise)?;
        Ok(reg.state())
    })
}
