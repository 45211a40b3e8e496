//! Ancilla dephasing: the master equation
//! `∂ₜρ = −i[H, ρ] + (γ/2)(σ_z ρ σ_z − ρ)` with `σ_z` acting on one qubit
//! factor, and its closed-form phase-damping channel.
//!
//! Times and rates share one unit: `H` is an angular frequency in the inverse
//! of the unit used for `duration` (ħ = 1), and `gamma` is in the same
//! inverse unit.

use serde::{Deserialize, Serialize};

use super::channel::QuantumOperation;
use crate::error::{Error, Result};
use crate::quantum::{qubit, re, CMatrix, DensityMatrix, Operator, I};

/// Local error target of the adaptive integrator.
pub const LINDBLAD_TOL: f64 = 1e-10;
/// Step budget before the integrator gives up.
pub const MAX_STEPS: usize = 1_000_000;

/// Dephasing rate and exposure time of the ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingModel {
    /// Rate `γ`; `1/γ` is the decoherence time.
    pub gamma: f64,
    /// Exposure time `t`.
    pub duration: f64,
}

impl DephasingModel {
    pub fn new(gamma: f64, duration: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite() && duration >= 0.0 && duration.is_finite()) {
            return Err(Error::validation(
                "gamma and duration must be finite and non-negative",
            ));
        }
        Ok(DephasingModel { gamma, duration })
    }

    /// `γ` from a decoherence time `1/γ`.
    pub fn from_coherence_time(coherence_time: f64, duration: f64) -> Result<Self> {
        if !(coherence_time > 0.0) {
            return Err(Error::validation("coherence time must be positive"));
        }
        DephasingModel::new(1.0 / coherence_time, duration)
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma * self.duration
    }

    /// Surviving coherence `λ = e^{−γt}`.
    pub fn coherence(&self) -> f64 {
        (-self.gamma_t()).exp()
    }
}

/// Which factor of a Kronecker-ordered product space is dephased.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DephasedSubsystem {
    /// Dimensions of all factors (left = most significant).
    pub dims: Vec<usize>,
    /// Index of the dephased qubit factor.
    pub index: usize,
}

impl DephasedSubsystem {
    /// A lone qubit.
    pub fn qubit() -> Self {
        DephasedSubsystem {
            dims: vec![2],
            index: 0,
        }
    }

    pub fn new(dims: Vec<usize>, index: usize) -> Result<Self> {
        if index >= dims.len() || dims[index] != 2 {
            return Err(Error::validation(
                "the dephased factor must exist and be a qubit",
            ));
        }
        if dims.contains(&0) {
            return Err(Error::validation("factor dimensions must be positive"));
        }
        Ok(DephasedSubsystem { dims, index })
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// `1 ⊗ … ⊗ σ_z ⊗ … ⊗ 1`.
    pub fn sigma_z(&self) -> CMatrix {
        let mut m = CMatrix::identity(1, 1);
        for (k, &d) in self.dims.iter().enumerate() {
            let f = if k == self.index {
                qubit::pauli_z()
            } else {
                CMatrix::identity(d, d)
            };
            m = m.kronecker(&f);
        }
        m
    }
}

/// Closed-form phase damping of one qubit factor: coherences between its
/// `|0⟩` and `|1⟩` are multiplied by `λ`.
pub fn phase_damping(sub: &DephasedSubsystem, lambda: f64) -> Result<QuantumOperation> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::validation("coherence factor must lie in [0, 1]"));
    }
    let z = sub.sigma_z();
    let p = (1.0 + lambda) / 2.0;
    let d = sub.total_dim();
    QuantumOperation::from_kraus(&[
        CMatrix::identity(d, d) * re(p.sqrt()),
        z * re((1.0 - p).sqrt()),
    ])
}

/// Closed-form channel of the dephasing model on a qubit factor.
pub fn dephasing_channel(
    model: &DephasingModel,
    sub: &DephasedSubsystem,
) -> Result<QuantumOperation> {
    phase_damping(sub, model.coherence())
}

fn generator(h: &CMatrix, z: &CMatrix, gamma: f64, rho: &CMatrix) -> CMatrix {
    let comm = h * rho - rho * h;
    comm * (-I) + (z * rho * z - rho) * re(gamma / 2.0)
}

fn rk4_step(h: &CMatrix, z: &CMatrix, gamma: f64, rho: &CMatrix, dt: f64) -> CMatrix {
    let k1 = generator(h, z, gamma, rho);
    let k2 = generator(h, z, gamma, &(rho + &k1 * re(dt / 2.0)));
    let k3 = generator(h, z, gamma, &(rho + &k2 * re(dt / 2.0)));
    let k4 = generator(h, z, gamma, &(rho + &k3 * re(dt)));
    rho + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(dt / 6.0)
}

/// Integrates the master equation from `ρ` over `model.duration`.
///
/// Classical RK4 with step doubling: a step is accepted when one full step
/// and two half steps agree to [`LINDBLAD_TOL`] (entrywise), and the
/// Richardson-extrapolated value is kept.
pub fn lindblad_propagate(
    rho: &DensityMatrix,
    h: &Operator,
    model: &DephasingModel,
    sub: &DephasedSubsystem,
) -> Result<DensityMatrix> {
    let d = sub.total_dim();
    if rho.dim() != d || h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim().max(h.dim()),
        });
    }
    if h.hermiticity_error() > 1e-12 * h.matrix().camax().max(1.0) {
        return Err(Error::NotHermitian(h.hermiticity_error()));
    }
    let (hm, z) = (h.matrix(), sub.sigma_z());
    let total = model.duration;
    let rate = hm.camax() * d as f64 + model.gamma;
    let mut dt = if rate > 0.0 {
        (0.5 / rate).min(total)
    } else {
        total
    };
    let mut t = 0.0;
    let mut state = rho.matrix().clone();
    let mut steps = 0;
    while t < total {
        if steps >= MAX_STEPS {
            return Err(Error::Integration(format!(
                "step budget exhausted at t = {t:e}"
            )));
        }
        steps += 1;
        dt = dt.min(total - t);
        let full = rk4_step(hm, &z, model.gamma, &state, dt);
        let half = rk4_step(hm, &z, model.gamma, &state, dt / 2.0);
        let two = rk4_step(hm, &z, model.gamma, &half, dt / 2.0);
        let err = (&two - &full).camax();
        if err <= LINDBLAD_TOL {
            state = &two + (&two - &full) * re(1.0 / 15.0);
            t += dt;
            if err < LINDBLAD_TOL / 64.0 {
                dt *= 2.0;
            }
        } else {
            dt /= 2.0;
            if dt < total * 1e-15 {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {t:e}"
                )));
            }
        }
    }
    let state = (&state + state.adjoint()).unscale(2.0);
    DensityMatrix::new(state)
}
