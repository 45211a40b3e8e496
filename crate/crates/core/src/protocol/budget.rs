//! Module durations from the gate primitives.
//!
//! Each module is scheduled as soon as possible on three lines: the
//! ancilla and up to two DFS qubits. Logical rotations take time in
//! proportion to their angle; rotations on distinct DFS qubits run in
//! parallel; ancilla rotations are instantaneous; a CPHASE occupies the
//! ancilla and one DFS qubit. A module ends with the ancilla measurement, so
//! rotations after the last CPHASE and classically controlled corrections
//! are not counted. A rotation on a freshly prepared `|0_L⟩` is folded into
//! the preparation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{gate_time, GateKind, LatticeUnits, Regime};

/// Durations of the primitives, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveTimes {
    /// `R_L^x(π)`.
    pub rx_pi: f64,
    /// `R_L^z(π)`.
    pub rz_pi: f64,
    /// One ancilla–DFS CPHASE.
    pub cphase: f64,
}

impl PrimitiveTimes {
    pub fn new(rx_pi: f64, rz_pi: f64, cphase: f64) -> Result<Self> {
        if [rx_pi, rz_pi, cphase]
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(Error::validation(
                "primitive durations must be finite and non-negative",
            ));
        }
        Ok(PrimitiveTimes {
            rx_pi,
            rz_pi,
            cphase,
        })
    }

    /// Primitive times of the lattice gates. In the free regime `R_z` and
    /// CPHASE use their non-interacting versions; `R_x` has no
    /// non-interacting realization and keeps its interacting duration.
    pub fn from_lattice(
        units: &LatticeUnits,
        j: f64,
        u_over_j: f64,
        regime: Regime,
    ) -> Result<Self> {
        let t = |k| gate_time(k, j, u_over_j, Some(units));
        let (rz, cp) = match regime {
            Regime::Interacting => (GateKind::RzPiInteracting, GateKind::CphaseInteracting),
            Regime::Free => (GateKind::RzPiFree, GateKind::CphaseFree),
        };
        PrimitiveTimes::new(t(GateKind::RxPiInteracting)?, t(rz)?, t(cp)?)
    }
}

/// Repeater modules with a timed circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    StateTransfer,
    Purification,
    Cnot,
    Readout,
}

impl Module {
    pub const ALL: [Module; 4] = [
        Module::StateTransfer,
        Module::Purification,
        Module::Cnot,
        Module::Readout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::StateTransfer => "state_transfer",
            Module::Purification => "purification",
            Module::Cnot => "cnot",
            Module::Readout => "readout",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Axis {
    X,
    Z,
}

/// One step of a module circuit on lines 0 (ancilla), 1 and 2 (DFS).
#[derive(Clone, Copy, Debug, PartialEq)]
enum Step {
    /// Logical rotation by `angle/π` half turns on a DFS line.
    Rotate {
        line: usize,
        axis: Axis,
        half_turns: f64,
    },
    /// Rotation absorbed into the preparation of `|0_L⟩`.
    Prepared,
    /// CPHASE between the ancilla and a DFS line.
    Cphase { line: usize },
}

fn steps(module: Module) -> Vec<Step> {
    use Step::*;
    match module {
        Module::StateTransfer => vec![Prepared, Cphase { line: 1 }],
        Module::Readout => vec![Cphase { line: 1 }],
        Module::Cnot => vec![
            Rotate {
                line: 1,
                axis: Axis::X,
                half_turns: 1.0,
            },
            Rotate {
                line: 2,
                axis: Axis::Z,
                half_turns: 0.5,
            },
            Rotate {
                line: 2,
                axis: Axis::X,
                half_turns: 0.5,
            },
            Cphase { line: 1 },
            Cphase { line: 2 },
        ],
        Module::Purification => vec![
            Rotate {
                line: 1,
                axis: Axis::X,
                half_turns: 0.5,
            },
            Rotate {
                line: 1,
                axis: Axis::X,
                half_turns: 1.0,
            },
            Cphase { line: 1 },
        ],
    }
}

/// Duration and CPHASE count of one module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleBudget {
    pub module: Module,
    /// Seconds from the start of the module to the ancilla measurement.
    pub duration: f64,
    pub cphase_count: usize,
    /// Seconds of CPHASE per gate.
    pub cphase_time: f64,
}

/// As-soon-as-possible schedule of one module.
pub fn module_budget(module: Module, times: &PrimitiveTimes) -> ModuleBudget {
    let mut ready = [0.0f64; 3];
    let mut count = 0;
    for step in steps(module) {
        match step {
            Step::Prepared => {}
            Step::Rotate {
                line,
                axis,
                half_turns,
            } => {
                let t_pi = match axis {
                    Axis::X => times.rx_pi,
                    Axis::Z => times.rz_pi,
                };
                ready[line] += half_turns * t_pi;
            }
            Step::Cphase { line } => {
                let end = ready[0].max(ready[line]) + times.cphase;
                ready[0] = end;
                ready[line] = end;
                count += 1;
            }
        }
    }
    ModuleBudget {
        module,
        duration: ready[0],
        cphase_count: count,
        cphase_time: times.cphase,
    }
}

/// Budgets of all modules for the lattice gates at the given parameters.
pub fn gate_time_budget(
    units: &LatticeUnits,
    j: f64,
    u_over_j: f64,
    regime: Regime,
) -> Result<Vec<ModuleBudget>> {
    let times = PrimitiveTimes::from_lattice(units, j, u_over_j, regime)?;
    Ok(Module::ALL
        .iter()
        .map(|&m| module_budget(m, &times))
        .collect())
}

/// Per-module durations used by the repeater loop, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleTimes {
    pub state_transfer: f64,
    pub purification: f64,
    pub cnot: f64,
    pub readout: f64,
    /// One ancilla CPHASE; sets the dephasing exposure per gate.
    pub cphase: f64,
}

impl ModuleTimes {
    pub fn from_primitives(times: &PrimitiveTimes) -> Self {
        let d = |m| module_budget(m, times).duration;
        ModuleTimes {
            state_transfer: d(Module::StateTransfer),
            purification: d(Module::Purification),
            cnot: d(Module::Cnot),
            readout: d(Module::Readout),
            cphase: times.cphase,
        }
    }

    pub fn zero() -> Self {
        ModuleTimes {
            state_transfer: 0.0,
            purification: 0.0,
            cnot: 0.0,
            readout: 0.0,
            cphase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.state_transfer,
            self.purification,
            self.cnot,
            self.readout,
            self.cphase,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::validation(
                "module durations must be finite and non-negative",
            ));
        }
        Ok(())
    }

    /// Entanglement swapping: one CNOT and two readouts in sequence.
    pub fn swap(&self) -> f64 {
        self.cnot + 2.0 * self.readout
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rotations_give_cphase_multiples() {
        let t = PrimitiveTimes::new(0.0, 0.0, 1.5).unwrap();
        for m in Module::ALL {
            let b = module_budget(m, &t);
            assert!(
                (b.duration - b.cphase_count as f64 * 1.5).abs() < 1e-15,
                "{m:?}"
            );
        }
        assert_eq!(module_budget(Module::Cnot, &t).cphase_count, 2);
    }

    #[test]
    fn parallel_rotations_are_counted_once() {
        // Target conjugation (3 units) hides behind control rotation + CPHASE.
        let t = PrimitiveTimes::new(2.0, 4.0, 10.0).unwrap();
        let b = module_budget(Module::Cnot, &t);
        assert!((b.duration - (2.0 + 10.0 + 10.0)).abs() < 1e-12);
        // A slow target delays the second CPHASE.
        let t = PrimitiveTimes::new(2.0, 40.0, 10.0).unwrap();
        let b = module_budget(Module::Cnot, &t);
        assert!((b.duration - (20.0 + 1.0 + 10.0)).abs() < 1e-12);
    }
}
