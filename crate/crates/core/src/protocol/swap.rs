//! Entanglement swapping: a logical Bell measurement at the middle node and
//! outcome-controlled corrections at the far end.
//!
//! The Bell measurement is a logical CNOT (`M₁` controls `M₂`), a Hadamard
//! on `M₁` built as `R_L^z(π/2)R_L^x(π/2)R_L^z(π/2)`, and two logical
//! readouts. The corrections on node B are not given explicitly anywhere; for
//! each of the four outcomes they are found by searching products
//! `R_L^z(lπ/2) R_L^x(kπ/2)` for the one that restores `Φ⁺` from perfect
//! inputs.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use super::circuits::{
    branch_records, cnot_gadget, measure_gadget, CircuitId, CircuitNoise, MeasurementRecord,
};
use super::pairs::{Bell, LogicalPair};
use super::register::{rx, rz, Register};
use crate::error::{Error, Result};
use crate::noise::pure_fidelity;
use crate::quantum::{tensor, CMatrix, DensityMatrix};

/// Fidelity a candidate correction must reach on perfect inputs.
pub const CORRECTION_TOL: f64 = 1e-10;

/// Correction `R_L^z(z_quarters·π/2) R_L^x(x_quarters·π/2)` (x applied first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub x_quarters: u8,
    pub z_quarters: u8,
}

impl Correction {
    pub fn unitary(self) -> CMatrix {
        rz(self.z_quarters as f64 * FRAC_PI_2) * rx(self.x_quarters as f64 * FRAC_PI_2)
    }

    /// Total rotation angle in quarter turns, used to prefer short corrections.
    fn cost(self) -> u8 {
        let fold = |q: u8| q.min(4 - q);
        fold(self.x_quarters) + fold(self.z_quarters)
    }
}

/// Corrections indexed by `2·m₁ + m₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionTable(pub [Correction; 4]);

fn bell_measure(
    reg: &mut Register,
    m1: &str,
    m2: &str,
    noise: CircuitNoise,
) -> Result<(usize, usize)> {
    cnot_gadget(reg, m1, m2, noise)?;
    reg.apply(m1, &rz(FRAC_PI_2))?;
    reg.apply(m1, &rx(FRAC_PI_2))?;
    reg.apply(m1, &rz(FRAC_PI_2))?;
    let k1 = measure_gadget(reg, m1, noise)?;
    let k2 = measure_gadget(reg, m2, noise)?;
    reg.trace_out(m1)?;
    reg.trace_out(m2)?;
    Ok((k1, k2))
}

fn swap_register(
    left: &LogicalPair,
    right: &LogicalPair,
    noise: CircuitNoise,
) -> Result<(Register, (usize, usize))> {
    let joint = tensor(left.state(), right.state())?;
    let mut reg = Register::new(&["A", "M1", "M2", "B"], &joint)?;
    let k = bell_measure(&mut reg, "M1", "M2", noise)?;
    Ok((reg, k))
}

/// Normalized A–B state of one Bell-measurement outcome, if it can occur.
fn outcome_state(reg: &Register, k: (usize, usize), bits: (u8, u8)) -> Result<Option<CMatrix>> {
    let m = reg.state_where(|o| o[k.0] == bits.0 && o[k.1] == bits.1);
    let p = m.trace().re;
    if p <= 1e-14 {
        return Ok(None);
    }
    let m = reg.permuted(&m.unscale(p), &["A", "B"])?;
    Ok(Some((&m + m.adjoint()).unscale(2.0)))
}

/// Solves for the correction of each outcome on perfect inputs.
pub fn derive_correction_table() -> Result<CorrectionTable> {
    let phi = LogicalPair::phi_plus();
    let (reg, (k1, k2)) = swap_register(&phi, &phi, CircuitNoise::ideal())?;
    let mut candidates: Vec<Correction> = (0..4)
        .flat_map(|x| {
            (0..4).map(move |z| Correction {
                x_quarters: x,
                z_quarters: z,
            })
        })
        .collect();
    candidates.sort_by_key(|c| (c.cost(), c.x_quarters, c.z_quarters));
    let target = Bell::PhiPlus.vector();
    let mut table = [Correction {
        x_quarters: 0,
        z_quarters: 0,
    }; 4];
    for m1 in 0..2u8 {
        for m2 in 0..2u8 {
            let rho = outcome_state(&reg, (k1, k2), (m1, m2))?
                .ok_or_else(|| Error::Search("missing Bell-measurement branch".into()))?;
            let found = candidates.iter().copied().find(|c| {
                let u = CMatrix::identity(2, 2).kronecker(&c.unitary());
                pure_fidelity(&target, &(&u * &rho * u.adjoint())) > 1.0 - CORRECTION_TOL
            });
            table[(2 * m1 + m2) as usize] = found.ok_or_else(|| {
                Error::Search(format!(
                    "no correction restores Phi+ for outcome ({m1}, {m2})"
                ))
            })?;
        }
    }
    Ok(CorrectionTable(table))
}

/// The correction table, derived once per process.
pub fn correction_table() -> Result<CorrectionTable> {
    static TABLE: OnceLock<std::result::Result<CorrectionTable, Error>> = OnceLock::new();
    TABLE.get_or_init(derive_correction_table).clone()
}

/// Swapped pair and the Bell-measurement branch records.
#[derive(Clone, Debug)]
pub struct SwapOutcome {
    pub pair: LogicalPair,
    pub records: Vec<MeasurementRecord>,
    /// Normalized, corrected state of each outcome `2·m₁ + m₂` (`None` if
    /// the outcome cannot occur).
    pub branch_pairs: Vec<Option<LogicalPair>>,
}

/// Joins the pairs A–M and M–B into an A–B pair.
pub fn entanglement_swap(
    left: &LogicalPair,
    right: &LogicalPair,
    noise: CircuitNoise,
) -> Result<SwapOutcome> {
    let table = correction_table()?;
    let (mut reg, (k1, k2)) = swap_register(left, right, noise)?;
    for m1 in 0..2u8 {
        for m2 in 0..2u8 {
            let u = table.0[(2 * m1 + m2) as usize].unitary();
            reg.apply_where("B", &u, |o| o[k1] == m1 && o[k2] == m2)?;
        }
    }
    let mut branch_pairs = Vec::with_capacity(4);
    for m1 in 0..2u8 {
        for m2 in 0..2u8 {
            let state = outcome_state(&reg, (k1, k2), (m1, m2))?;
            branch_pairs.push(
                state
                    .map(|m| LogicalPair::new(DensityMatrix::from_matrix_unchecked(m)))
                    .transpose()?,
            );
        }
    }
    let state = reg.state_in_order(&["A", "B"])?;
    let pair = LogicalPair::new(DensityMatrix::from_matrix_unchecked(
        (&state + state.adjoint()).unscale(2.0),
    ))?;
    Ok(SwapOutcome {
        pair,
        records: branch_records(CircuitId::EntanglementSwap, &reg, |_| true),
        branch_pairs,
    })
}
