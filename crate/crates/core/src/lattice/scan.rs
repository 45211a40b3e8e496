//! Parameter sweeps of the lattice gates, one full propagation per point.
//!
//! Points are independent and evaluated in parallel; rows are returned in
//! grid order and do not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gates::{
    run_cphase, run_rx_gate, run_rz_gate, CphaseConfig, Regime, RxConfig, RzConfig,
};
use super::units::DEFAULT_J;
use crate::error::{Error, Result};

/// Gate being swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanGate {
    Rz,
    Rx,
    Cphase,
}

/// Swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanKnob {
    /// Register interaction `U/J` (interacting regime).
    #[serde(rename = "UoverJ")]
    UOverJ,
    /// Stray hopping `J₂/J₁` for `R_z`; for `R_x` the ratio `J₂/(√2J₁)`.
    #[serde(rename = "J2_over_J1")]
    J2OverJ1,
    /// Interspecies interaction `U_ab/U`.
    #[serde(rename = "Uab_over_U")]
    UabOverU,
    /// Residual register–ancilla interaction `U^q_1/J` (CPHASE).
    #[serde(rename = "Uq1_over_J")]
    Uq1OverJ,
    /// Residual register interaction `U/J` in the free regime.
    #[serde(rename = "residual_U_over_J")]
    ResidualUOverJ,
}

impl ScanKnob {
    pub const ALL: [ScanKnob; 5] = [
        ScanKnob::UOverJ,
        ScanKnob::J2OverJ1,
        ScanKnob::UabOverU,
        ScanKnob::Uq1OverJ,
        ScanKnob::ResidualUOverJ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanKnob::UOverJ => "UoverJ",
            ScanKnob::J2OverJ1 => "J2_over_J1",
            ScanKnob::UabOverU => "Uab_over_U",
            ScanKnob::Uq1OverJ => "Uq1_over_J",
            ScanKnob::ResidualUOverJ => "residual_U_over_J",
        }
    }

    fn supports(self, gate: ScanGate) -> bool {
        match self {
            ScanKnob::UOverJ | ScanKnob::ResidualUOverJ => true,
            ScanKnob::J2OverJ1 | ScanKnob::UabOverU => gate != ScanGate::Cphase,
            ScanKnob::Uq1OverJ => gate == ScanGate::Cphase,
        }
    }
}

impl fmt::Display for ScanKnob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanKnob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        ScanKnob::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase().replace('_', "") == key)
            .ok_or_else(|| Error::validation(format!("unknown scan knob '{s}'")))
    }
}

impl FromStr for ScanGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rz" => Ok(ScanGate::Rz),
            "rx" => Ok(ScanGate::Rx),
            "cphase" => Ok(ScanGate::Cphase),
            _ => Err(Error::validation(format!("unknown gate '{s}'"))),
        }
    }
}

/// Fixed parameters around which a knob is swept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanBase {
    pub j: f64,
    /// Interacting `U/J` (ignored by the free regime).
    pub u_over_j: f64,
    /// Residual `U/J` used when the regime is free.
    pub residual_u_over_j: f64,
    pub regime: Regime,
    pub uq0_over_j: f64,
    pub uq1_over_j: f64,
    pub samples: usize,
}

impl Default for ScanBase {
    fn default() -> Self {
        ScanBase {
            j: DEFAULT_J,
            u_over_j: 100.0,
            residual_u_over_j: 0.0,
            regime: Regime::Interacting,
            uq0_over_j: 100.0,
            uq1_over_j: 0.0,
            samples: super::gates::TRAJECTORY_SAMPLES,
        }
    }
}

/// One grid point. Metrics are absent only when the point failed (`error`
/// set) or, for the phase, when a logical overlap vanished.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub knob: f64,
    pub gate_time: Option<f64>,
    /// `R_z`, `R_x`: worst-case logical gate infidelity;
    /// CPHASE: `max(1 − f_01, 1 − f_00)`.
    pub infidelity: Option<f64>,
    /// `R_z`: relative logical phase; CPHASE: swap phase difference.
    pub phase: Option<f64>,
    /// `R_z`: `|φ − θ|`; CPHASE: `|φ|`.
    pub phase_error: Option<f64>,
    /// Largest DFS leakage over the trajectory.
    pub leakage: Option<f64>,
    /// `R_z`: `1 − f_Z` for `|1_L⟩`; `R_x`: `1 − f_X`; CPHASE: `1 − f_01`.
    pub primary_infidelity: Option<f64>,
    pub error: Option<String>,
}

impl ScanRow {
    fn failed(knob: f64, e: Error) -> Self {
        ScanRow {
            knob,
            gate_time: None,
            infidelity: None,
            phase: None,
            phase_error: None,
            leakage: None,
            primary_infidelity: None,
            error: Some(e.to_string()),
        }
    }
}

/// Tabulated sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub gate: ScanGate,
    pub knob: ScanKnob,
    pub base: ScanBase,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Column names, with units, of the tabular form.
    pub fn header(&self) -> Vec<String> {
        vec![
            self.knob.name().to_string(),
            "gate_time_hbar_per_ER".into(),
            "infidelity".into(),
            "phase_rad".into(),
            "phase_error_rad".into(),
            "leakage".into(),
            "primary_infidelity".into(),
            "error".into(),
        ]
    }
}

fn evaluate(gate: ScanGate, knob: ScanKnob, base: &ScanBase, x: f64) -> Result<ScanRow> {
    let j = base.j;
    let regime = if knob == ScanKnob::ResidualUOverJ {
        Regime::Free
    } else {
        base.regime
    };
    let u_over_j = match (knob, regime) {
        (ScanKnob::UOverJ, _) => x,
        (ScanKnob::ResidualUOverJ, _) => x,
        (_, Regime::Free) => base.residual_u_over_j,
        (_, Regime::Interacting) => base.u_over_j,
    };
    if knob == ScanKnob::UOverJ && regime == Regime::Free {
        return Err(Error::validation(
            "UoverJ knob needs the interacting regime",
        ));
    }
    let mut row = ScanRow::failed(x, Error::validation("unset"));
    row.error = None;
    match gate {
        ScanGate::Rz => {
            let mut c = match regime {
                Regime::Interacting => RzConfig::interacting(j, u_over_j, std::f64::consts::PI),
                Regime::Free => RzConfig::free(j, u_over_j),
            };
            c.samples = base.samples;
            match knob {
                ScanKnob::J2OverJ1 => c.j2_over_j1 = x,
                ScanKnob::UabOverU => c.uab_over_u = x,
                _ => {}
            }
            let r = run_rz_gate(&c)?;
            row.gate_time = Some(r.gate_time);
            row.infidelity = Some(r.gate_infidelity);
            row.phase = r.phase;
            row.phase_error = r.phase_error;
            row.leakage = Some(r.max_leakage);
            row.primary_infidelity = Some(1.0 - r.f_z[1]);
        }
        ScanGate::Rx => {
            if regime == Regime::Free {
                return Err(Error::validation("R_x has no free-regime realization"));
            }
            let mut c = RxConfig::new(j, u_over_j, std::f64::consts::PI);
            c.samples = base.samples;
            match knob {
                ScanKnob::J2OverJ1 => c.hop_ratio = x,
                ScanKnob::UabOverU => c.uab_over_u = x,
                _ => {}
            }
            let r = run_rx_gate(&c)?;
            row.gate_time = Some(r.gate_time);
            row.infidelity = Some(r.gate_infidelity);
            row.leakage = Some(r.max_leakage);
            row.primary_infidelity = Some(1.0 - r.f_x);
        }
        ScanGate::Cphase => {
            let mut c = match regime {
                Regime::Interacting => CphaseConfig::interacting(j, u_over_j),
                Regime::Free => CphaseConfig::free(j, u_over_j),
            };
            c.samples = base.samples;
            c.u_q0 = base.uq0_over_j * j;
            c.u_q1 = if knob == ScanKnob::Uq1OverJ {
                x
            } else {
                base.uq1_over_j
            } * j;
            let r = run_cphase(&c)?;
            row.gate_time = Some(r.gate_time);
            row.infidelity = Some((1.0 - r.f_01).max(1.0 - r.f_00));
            row.phase = r.phi;
            row.phase_error = r.phi.map(f64::abs);
            row.leakage = Some(r.leakage_max);
            row.primary_infidelity = Some(1.0 - r.f_01);
        }
    }
    Ok(row)
}

/// Sweeps `knob` over `grid` for `gate`. Invalid combinations and an empty
/// grid are rejected up front; failures at individual points are recorded
/// in the affected rows.
pub fn detuning_scan(
    gate: ScanGate,
    knob: ScanKnob,
    grid: &[f64],
    base: &ScanBase,
) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(Error::validation("scan grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::validation(format!(
            "grid values must be finite and non-negative, got {x}"
        )));
    }
    if !knob.supports(gate) {
        return Err(Error::validation(format!(
            "knob {knob} does not apply to the {gate:?} gate"
        )));
    }
    let rows = grid
        .par_iter()
        .map(|&x| evaluate(gate, knob, base, x).unwrap_or_else(|e| ScanRow::failed(x, e)))
        .collect();
    Ok(ScanResult {
        gate,
        knob,
        base: base.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScanBase {
        ScanBase {
            samples: 10,
            ..ScanBase::default()
        }
    }

    #[test]
    fn rejects_bad_grids_and_combinations() {
        assert!(detuning_scan(ScanGate::Rz, ScanKnob::UOverJ, &[], &quick()).is_err());
        assert!(detuning_scan(ScanGate::Rz, ScanKnob::Uq1OverJ, &[0.0], &quick()).is_err());
        assert!(detuning_scan(ScanGate::Cphase, ScanKnob::J2OverJ1, &[0.0], &quick()).is_err());
        assert!(detuning_scan(ScanGate::Rz, ScanKnob::UOverJ, &[f64::NAN], &quick()).is_err());
    }

    #[test]
    fn failing_points_are_flagged() {
        // U/J = 0.5 is not an interacting configuration.
        let r = detuning_scan(ScanGate::Rz, ScanKnob::UOverJ, &[0.5, 40.0], &quick()).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].error.is_some() && r.rows[0].infidelity.is_none());
        assert!(r.rows[1].error.is_none() && r.rows[1].infidelity.is_some());
        assert_eq!(r.failures(), 1);
    }

    #[test]
    fn knob_names_parse() {
        for k in ScanKnob::ALL {
            assert_eq!(k.name().parse::<ScanKnob>().unwrap(), k);
        }
        assert_eq!("uoverj".parse::<ScanKnob>().unwrap(), ScanKnob::UOverJ);
        assert!("bogus".parse::<ScanKnob>().is_err());
        assert_eq!("CPHASE".parse::<ScanGate>().unwrap(), ScanGate::Cphase);
    }

    #[test]
    fn free_residual_scan_starts_exact() {
        let r =
            detuning_scan(ScanGate::Cphase, ScanKnob::ResidualUOverJ, &[0.0], &quick()).unwrap();
        assert!(r.rows[0].infidelity.unwrap() < 1e-12);
    }
}
