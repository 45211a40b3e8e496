//! Run configuration: a TOML file with one optional section per subcommand.
//!
//! Every field has a default except where a value has no sensible default
//! (the lattice tunneling `J` for gate timing). Command-line flags are
//! applied on top of the parsed file by the front-end. The grammar is
//! documented in `docs/config.md`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeUnits, Regime, ScanBase, ScanGate, ScanKnob, DEFAULT_J};
use crate::protocol::{AuxPolicy, ExecutionMode, ModuleTimes, PrimitiveTimes, ProtocolConfig};

/// Most points accepted in one grid.
pub const MAX_GRID_POINTS: usize = 100_000;

/// Evenly spaced grid written `start:stop:count` (both ends included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::validation("grid bounds must be finite"));
        }
        if count == 0 {
            return Err(Error::validation("grid is empty (count = 0)"));
        }
        if count > MAX_GRID_POINTS {
            return Err(Error::validation(format!(
                "grid has more than {MAX_GRID_POINTS} points"
            )));
        }
        if count == 1 && start != stop {
            return Err(Error::validation("a one-point grid needs start = stop"));
        }
        Ok(Grid { start, stop, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else {
                    self.start + k as f64 * step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::validation(format!(
                "grid '{s}' is not of the form start:stop:count"
            )));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::validation(format!("bad grid bound '{x}' in '{s}'")))
        };
        let count = n
            .parse::<usize>()
            .map_err(|_| Error::validation(format!("bad grid count '{n}' in '{s}'")))?;
        Grid::new(num(a)?, num(b)?, count)
    }
}

impl TryFrom<String> for Grid {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Atomic species and lattice wavelength.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsSpec {
    /// Named preset; `na514` is sodium in a 514 nm lattice.
    pub preset: Option<String>,
    /// Lattice laser wavelength, nm.
    pub wavelength_nm: Option<f64>,
    /// Atomic mass, atomic mass units.
    pub mass_u: Option<f64>,
}

impl UnitsSpec {
    pub fn na514() -> Self {
        UnitsSpec {
            preset: Some("na514".into()),
            wavelength_nm: None,
            mass_u: None,
        }
    }

    pub fn resolve(&self) -> Result<LatticeUnits> {
        match (&self.preset, self.wavelength_nm, self.mass_u) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Error::validation(
                "give either a units preset or wavelength and mass, not both",
            )),
            (Some(p), None, None) => match p.to_ascii_lowercase().as_str() {
                "na514" => Ok(LatticeUnits::sodium_514()),
                other => Err(Error::validation(format!("unknown units preset '{other}'"))),
            },
            (None, Some(w), Some(m)) => LatticeUnits::with_mass_u(w * 1e-9, m),
            (None, None, None) => Ok(LatticeUnits::sodium_514()),
            (None, _, _) => Err(Error::validation(
                "custom units need both wavelength_nm and mass_u",
            )),
        }
    }
}

/// Lattice parameters shared by gate timing and the repeater schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub units: UnitsSpec,
    /// Tunneling `J` in recoil energies; required by `gate-times`.
    pub j: Option<f64>,
    pub u_over_j: f64,
    pub regime: Regime,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection {
            units: UnitsSpec::default(),
            j: None,
            u_over_j: 75.0,
            regime: Regime::Interacting,
        }
    }
}

/// `scan` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub gate: Option<ScanGate>,
    pub knob: Option<ScanKnob>,
    pub grid: Option<Grid>,
    pub j: f64,
    pub u_over_j: f64,
    pub residual_u_over_j: f64,
    pub regime: Regime,
    pub uq0_over_j: f64,
    pub uq1_over_j: f64,
    pub samples: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        let b = ScanBase::default();
        ScanSection {
            gate: None,
            knob: None,
            grid: None,
            j: b.j,
            u_over_j: b.u_over_j,
            residual_u_over_j: b.residual_u_over_j,
            regime: b.regime,
            uq0_over_j: b.uq0_over_j,
            uq1_over_j: b.uq1_over_j,
            samples: b.samples,
        }
    }
}

impl ScanSection {
    pub fn base(&self) -> ScanBase {
        ScanBase {
            j: self.j,
            u_over_j: self.u_over_j,
            residual_u_over_j: self.residual_u_over_j,
            regime: self.regime,
            uq0_over_j: self.uq0_over_j,
            uq1_over_j: self.uq1_over_j,
            samples: self.samples,
        }
    }
}

/// `gate-times` subcommand.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateTimesSection {
    /// Ancilla dephasing rate in 1/s; when set, module fidelities are reported.
    pub gamma: Option<f64>,
}

/// `repeater` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepeaterSection {
    pub source_fidelity: f64,
    pub f_min: f64,
    pub target_fidelity: f64,
    pub max_rounds: usize,
    pub levels: usize,
    /// Ancilla dephasing rate, 1/s.
    pub gamma: f64,
    pub aux_policy: AuxPolicy,
    /// Sampled trajectories; 0 runs the exact schedule only.
    pub trajectories: usize,
    /// Explicit module durations in seconds; derived from `[lattice]` when absent.
    pub module_times: Option<ModuleTimes>,
}

impl Default for RepeaterSection {
    fn default() -> Self {
        RepeaterSection {
            source_fidelity: 0.8,
            f_min: 0.5,
            target_fidelity: 0.99,
            max_rounds: 50,
            levels: 1,
            gamma: 0.0,
            aux_policy: AuxPolicy::Pumping,
            trajectories: 0,
            module_times: None,
        }
    }
}

/// `verify` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub suite: String,
    /// Random inputs per operation-fidelity minimization.
    pub samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            suite: "all".into(),
            samples: 2_000,
        }
    }
}

/// Complete, resolved run configuration; echoed into every manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master seed of every random choice in the run.
    pub seed: u64,
    pub lattice: LatticeSection,
    pub scan: ScanSection,
    pub gate_times: GateTimesSection,
    pub repeater: RepeaterSection,
    pub verify: VerifySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            lattice: LatticeSection::default(),
            scan: ScanSection::default(),
            gate_times: GateTimesSection::default(),
            repeater: RepeaterSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Module durations for the repeater: explicit, or scheduled from the
    /// lattice gates (`DEFAULT_J` if none is configured).
    pub fn module_times(&self) -> Result<ModuleTimes> {
        if let Some(t) = self.repeater.module_times {
            t.validate()?;
            return Ok(t);
        }
        let l = &self.lattice;
        let times = PrimitiveTimes::from_lattice(
            &l.units.resolve()?,
            l.j.unwrap_or(DEFAULT_J),
            l.u_over_j,
            l.regime,
        )?;
        Ok(ModuleTimes::from_primitives(&times))
    }

    pub fn protocol(&self) -> Result<ProtocolConfig> {
        let r = &self.repeater;
        let cfg = ProtocolConfig {
            source_fidelity: r.source_fidelity,
            f_min: r.f_min,
            target_fidelity: r.target_fidelity,
            max_rounds: r.max_rounds,
            levels: r.levels,
            gamma: r.gamma,
            gate_times: self.module_times()?,
            seed: self.seed,
            aux_policy: r.aux_policy,
            mode: match r.trajectories {
                0 => ExecutionMode::Exact,
                n => ExecutionMode::Sampled { trajectories: n },
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
