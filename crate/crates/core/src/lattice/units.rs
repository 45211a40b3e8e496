//! Recoil-energy units and gate-time formulas.
//!
//! Internally ħ = 1 and energies are measured in recoil energies
//! `E_R = ħ²(2π)²/(2mλ²)`, so a dimensionless time `τ` corresponds to
//! `τ·ħ/E_R` seconds.

use serde::{Deserialize, Serialize};

use super::gates::{locate_swap_time, CphaseConfig};
use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of sodium-23 in atomic mass units.
pub const SODIUM_MASS_U: f64 = 22.989_769_28;
/// Reference hopping for the sodium lattice, in recoil energies.
pub const DEFAULT_J: f64 = 0.033;

/// Lattice wavelength and atomic mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeUnits {
    /// Lattice laser wavelength (m).
    pub wavelength: f64,
    /// Atomic mass (kg).
    pub mass: f64,
}

impl LatticeUnits {
    pub fn new(wavelength: f64, mass: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite() && mass > 0.0 && mass.is_finite()) {
            return Err(Error::validation(
                "wavelength and mass must be positive and finite",
            ));
        }
        Ok(LatticeUnits { wavelength, mass })
    }

    /// Mass given in atomic mass units.
    pub fn with_mass_u(wavelength: f64, mass_u: f64) -> Result<Self> {
        LatticeUnits::new(wavelength, mass_u * ATOMIC_MASS_UNIT)
    }

    /// Sodium in a 514 nm lattice.
    pub fn sodium_514() -> Self {
        LatticeUnits {
            wavelength: 514e-9,
            mass: SODIUM_MASS_U * ATOMIC_MASS_UNIT,
        }
    }

    /// `E_R` in joules.
    pub fn recoil_energy(&self) -> f64 {
        let k = 2.0 * std::f64::consts::PI / self.wavelength;
        HBAR * HBAR * k * k / (2.0 * self.mass)
    }

    /// `E_R/ħ` in s⁻¹.
    pub fn recoil_rate(&self) -> f64 {
        self.recoil_energy() / HBAR
    }

    /// Converts a dimensionless time (units ħ/E_R) to seconds.
    pub fn to_seconds(&self, tau: f64) -> f64 {
        tau / self.recoil_rate()
    }

    /// Converts seconds to dimensionless time.
    pub fn from_seconds(&self, seconds: f64) -> f64 {
        seconds * self.recoil_rate()
    }

    /// Converts an energy in recoil units to joules.
    pub fn energy_to_joules(&self, e: f64) -> f64 {
        e * self.recoil_energy()
    }

    pub fn energy_from_joules(&self, joules: f64) -> f64 {
        joules / self.recoil_energy()
    }
}

/// Gate primitives with known durations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// `R_L^z(π)` with strong interactions, `t = πU/(4J²)`.
    RzPiInteracting,
    /// `R_L^z(π)` without interactions, `t = π/(2J)`.
    RzPiFree,
    /// `R_L^x(π)` with strong interactions, `t = πU/(4√3J²)`.
    RxPiInteracting,
    /// CPHASE without register interactions, `t = π/(√2J)`.
    CphaseFree,
    /// CPHASE with strong interactions; swap time located numerically.
    CphaseInteracting,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [
        GateKind::RzPiInteracting,
        GateKind::RzPiFree,
        GateKind::RxPiInteracting,
        GateKind::CphaseFree,
        GateKind::CphaseInteracting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::RzPiInteracting => "rz_pi_interacting",
            GateKind::RzPiFree => "rz_pi_free",
            GateKind::RxPiInteracting => "rx_pi_interacting",
            GateKind::CphaseFree => "cphase_free",
            GateKind::CphaseInteracting => "cphase_interacting",
        }
    }
}

/// Gate duration in units of ħ/E_R for hopping `j` (E_R) and ratio `U/J`.
pub fn gate_time_internal(kind: GateKind, j: f64, u_over_j: f64) -> Result<f64> {
    use std::f64::consts::PI;
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::validation("hopping J must be positive"));
    }
    let interacting = matches!(
        kind,
        GateKind::RzPiInteracting | GateKind::RxPiInteracting | GateKind::CphaseInteracting
    );
    if interacting && !(u_over_j > 0.0 && u_over_j.is_finite()) {
        return Err(Error::validation("interacting gates need U/J > 0"));
    }
    let u = u_over_j * j;
    Ok(match kind {
        GateKind::RzPiInteracting => PI * u / (4.0 * j * j),
        GateKind::RzPiFree => PI / (2.0 * j),
        GateKind::RxPiInteracting => PI * u / (4.0 * 3f64.sqrt() * j * j),
        GateKind::CphaseFree => PI / (2f64.sqrt() * j),
        GateKind::CphaseInteracting => locate_swap_time(&CphaseConfig::interacting(j, u_over_j))?,
    })
}

/// Gate duration in seconds. Units are mandatory.
pub fn gate_time(
    kind: GateKind,
    j: f64,
    u_over_j: f64,
    units: Option<&LatticeUnits>,
) -> Result<f64> {
    let units = units
        .ok_or_else(|| Error::validation("lattice units are required for physical gate times"))?;
    Ok(units.to_seconds(gate_time_internal(kind, j, u_over_j)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sodium_recoil_rate() {
        let u = LatticeUnits::sodium_514();
        // E_R/ħ for Na at 514 nm is about 2.06e5 s^-1.
        assert!(
            (u.recoil_rate() - 2.064e5).abs() / 2.064e5 < 1e-3,
            "{}",
            u.recoil_rate()
        );
    }

    #[test]
    fn conversions_round_trip() {
        let u = LatticeUnits::sodium_514();
        for x in [1e-3, 1.0, 137.0] {
            assert!((u.from_seconds(u.to_seconds(x)) - x).abs() / x < 1e-12);
            assert!((u.energy_from_joules(u.energy_to_joules(x)) - x).abs() / x < 1e-12);
        }
        assert!(LatticeUnits::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_gate_times() {
        let u = LatticeUnits::sodium_514();
        let ms = |k| 1e3 * gate_time(k, DEFAULT_J, 75.0, Some(&u)).unwrap();
        assert!((ms(GateKind::RzPiInteracting) - 8.7).abs() < 0.02 * 8.7);
        assert!((ms(GateKind::RzPiFree) - 0.23).abs() < 0.02 * 0.23);
        assert!((ms(GateKind::RxPiInteracting) - 5.0).abs() < 0.02 * 5.0);
        assert!((ms(GateKind::CphaseFree) - 0.33).abs() < 0.02 * 0.33);
        assert!(gate_time(GateKind::RzPiFree, DEFAULT_J, 75.0, None).is_err());
        assert!(gate_time_internal(GateKind::RzPiInteracting, 0.0, 75.0).is_err());
    }
}
