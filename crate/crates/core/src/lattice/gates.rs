//! Full Bose-Hubbard simulations of the register operations: logical `R_z`
//! and `R_x` rotations, the ancilla-controlled CPHASE and the preparation of
//! `|0_L⟩`.
//!
//! All propagations use the full Hamiltonian (no elimination) on the exact
//! dynamical Fock subspace of the four register atoms, with atoms outside the
//! active window frozen on their home sites. Energies are in `E_R`, ħ = 1.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::fock::FockBasis;
use super::hamiltonian::{
    build_cphase_hamiltonian, build_hamiltonian, AncillaParams, HubbardParams,
};
use super::register::{fock_leakage, RegisterLayout};
use crate::dfs::{permutation_op, single_qubit_op, DfsCodec};
use crate::error::{Error, Result};
use crate::quantum::{qubit, CMatrix, Operator, Propagator, StateVector, C64};

/// Trajectory samples per gate for "during the whole gate" claims.
pub const TRAJECTORY_SAMPLES: usize = 200;
/// Overlap below which a phase is reported as absent.
pub const PHASE_OVERLAP_FLOOR: f64 = 1e-8;
/// Grid size of the coarse swap-time scan.
pub const SWAP_SEARCH_POINTS: usize = 20_001;

/// Whether register atoms interact strongly (`U ≫ J`) or not at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Interacting,
    Free,
}

/// Time-resolved record of a gate.
///
/// `overlap[k][l]` is the probability that logical input `l` is found in its
/// ideal-gate target at `times[k]`: `|⟨l_L|ψ_l(t)⟩|²` for `R_z` and CPHASE
/// blocking, `|⟨1−l_L|ψ_l(t)⟩|²` for `R_x`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GateTrajectory {
    pub times: Vec<f64>,
    pub overlap: Vec<[f64; 2]>,
    pub leakage: Vec<f64>,
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Worst-case infidelity `1 − min_ψ |⟨Gψ|Aψ⟩|²` over logical pure states of
/// an actual logical block `a` (possibly non-unitary through leakage) versus
/// the ideal gate `g`. Insensitive to global phase.
pub fn worst_case_infidelity(a: &Matrix2<C64>, g: &Matrix2<C64>) -> f64 {
    let m = g.adjoint() * a;
    let f = |th: f64, ph: f64| -> f64 {
        let v = nalgebra::Vector2::new(
            C64::new((th / 2.0).cos(), 0.0),
            C64::from_polar((th / 2.0).sin(), ph),
        );
        (v.adjoint() * m * v)[(0, 0)].norm_sqr()
    };
    let (nt, np) = (61usize, 120usize);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nt {
        let th = PI * i as f64 / nt as f64;
        for k in 0..np {
            let ph = 2.0 * PI * k as f64 / np as f64;
            let v = f(th, ph);
            if v < best.0 {
                best = (v, th, ph);
            }
        }
    }
    // Pattern search refinement around the best grid point.
    let (mut step_t, mut step_p) = (PI / nt as f64, 2.0 * PI / np as f64);
    while step_t > 1e-9 {
        let mut improved = false;
        for (dt, dp) in [(step_t, 0.0), (-step_t, 0.0), (0.0, step_p), (0.0, -step_p)] {
            let v = f(best.1 + dt, best.2 + dp);
            if v < best.0 {
                best = (v, best.1 + dt, best.2 + dp);
                improved = true;
            }
        }
        if !improved {
            step_t /= 2.0;
            step_p /= 2.0;
        }
    }
    (1.0 - best.0).max(0.0)
}

fn matrix2(m: &CMatrix) -> Matrix2<C64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

fn sample_times(total: f64, samples: usize) -> Vec<f64> {
    (1..=samples)
        .map(|k| total * k as f64 / samples as f64)
        .collect()
}

fn check_energy(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{name} must be finite and non-negative, got {x}"
        )))
    }
}

fn check_regime(regime: Regime, j: f64, u: f64) -> Result<()> {
    if j == 0.0 {
        return Ok(());
    }
    match regime {
        Regime::Interacting if u < j => Err(Error::validation(format!(
            "interacting regime needs U/J >= 1, got {}",
            u / j
        ))),
        Regime::Free if u >= j => Err(Error::validation(format!(
            "free regime needs a residual U/J < 1, got {}",
            u / j
        ))),
        _ => Ok(()),
    }
}

/// Logical block `⟨k_L|U|l_L⟩` of an evolved pair of logical inputs.
fn logical_block(
    codec: &DfsCodec,
    layout: &RegisterLayout,
    basis: &FockBasis,
    out: &[StateVector; 2],
) -> Result<Matrix2<C64>> {
    let mut a = Matrix2::zeros();
    for l in 0..2 {
        let reg = layout.project(&out[l], basis)?;
        for k in 0..2 {
            a[(k, l)] = codec.logical(k).inner(&reg)?;
        }
    }
    Ok(a)
}

/// Relative phase `arg(⟨1_L|ψ⟩/⟨0_L|ψ⟩)` in `[0, 2π)` of the evolved `|+_L⟩`.
fn plus_state_phase(a: &Matrix2<C64>) -> Option<f64> {
    let c0 = a[(0, 0)] + a[(0, 1)];
    let c1 = a[(1, 0)] + a[(1, 1)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if (c0 * s).norm() < PHASE_OVERLAP_FLOOR || (c1 * s).norm() < PHASE_OVERLAP_FLOOR {
        None
    } else {
        Some((c1 / c0).arg().rem_euclid(2.0 * PI))
    }
}

// ---------------------------------------------------------------------------
// Logical Z rotation
// ---------------------------------------------------------------------------

/// Parameters of a logical `R_z(θ)` on atoms 1 and 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RzConfig {
    /// Hopping `J₁` between sites 1 and 2 (E_R).
    pub j: f64,
    /// Interaction `U_a = U_b` (E_R); in the free regime the residual value.
    pub u: f64,
    /// Rotation angle; the free regime only realizes `π`.
    pub theta: f64,
    pub regime: Regime,
    /// Stray hopping `J₂/J₁` towards atom 3.
    pub j2_over_j1: f64,
    /// Interspecies detuning `U_ab/U`.
    pub uab_over_u: f64,
    pub samples: usize,
}

impl RzConfig {
    pub fn interacting(j: f64, u_over_j: f64, theta: f64) -> Self {
        RzConfig {
            j,
            u: u_over_j * j,
            theta,
            regime: Regime::Interacting,
            j2_over_j1: 0.0,
            uab_over_u: 1.0,
            samples: TRAJECTORY_SAMPLES,
        }
    }

    pub fn free(j: f64, residual_u_over_j: f64) -> Self {
        RzConfig {
            regime: Regime::Free,
            ..RzConfig::interacting(j, residual_u_over_j, PI)
        }
    }

    fn validate(&self) -> Result<()> {
        check_energy("J", self.j)?;
        check_energy("U", self.u)?;
        check_energy("J2/J1", self.j2_over_j1)?;
        check_energy("U_ab/U", self.uab_over_u)?;
        if self.j == 0.0 {
            return Err(Error::validation("R_z gate needs J > 0"));
        }
        if self.samples == 0 || !self.theta.is_finite() {
            return Err(Error::validation(
                "need at least one sample and a finite angle",
            ));
        }
        check_regime(self.regime, self.j, self.u)?;
        if self.regime == Regime::Free && (self.theta - PI).abs() > 1e-12 {
            return Err(Error::validation("the free regime realizes only R_z(π)"));
        }
        Ok(())
    }

    pub fn params(&self) -> HubbardParams {
        let mut p =
            HubbardParams::with_bonds(&[self.j, self.j2_over_j1 * self.j, 0.0, 0.0], self.u);
        p.u_ab = self.uab_over_u * self.u;
        p
    }

    /// Analytic gate time: `θU/(4J²)` or `π/(2J)`.
    pub fn gate_time(&self) -> f64 {
        match self.regime {
            Regime::Interacting => self.theta * self.u / (4.0 * self.j * self.j),
            Regime::Free => PI / (2.0 * self.j),
        }
    }
}

/// Outcome of a logical `R_z` simulation.
#[derive(Clone, Debug, Serialize)]
pub struct RzResult {
    pub gate_time: f64,
    /// `|⟨l_L|U(t)|l_L⟩|²` at the gate time, `l = 0, 1`.
    pub f_z: [f64; 2],
    /// Largest `1 − |⟨l_L|U(t)|l_L⟩|²` over the trajectory.
    pub max_infidelity: [f64; 2],
    /// Relative logical phase in `[0, 2π)`; absent if an overlap vanishes.
    pub phase: Option<f64>,
    /// `|φ − θ|` wrapped to `[0, π]`.
    pub phase_error: Option<f64>,
    /// Worst-case infidelity against the ideal `R_z(θ)`.
    pub gate_infidelity: f64,
    pub max_leakage: f64,
    pub trajectory: GateTrajectory,
}

/// Propagates the full Hamiltonian of the logical `R_z` gate.
pub fn run_rz_gate(cfg: &RzConfig) -> Result<RzResult> {
    cfg.validate()?;
    let codec = DfsCodec::new();
    let layout = RegisterLayout::standard();
    let params = cfg.params();
    let basis = layout.basis(&params)?;
    let prop = Propagator::new(&build_hamiltonian(&params, &basis)?)?;
    let t_gate = cfg.gate_time();
    let inputs = [
        layout.embed(codec.logical(0), &basis)?,
        layout.embed(codec.logical(1), &basis)?,
    ];

    let times = sample_times(t_gate, cfg.samples);
    let paths = [
        prop.evolve_many(&inputs[0], &times)?,
        prop.evolve_many(&inputs[1], &times)?,
    ];
    let mut traj = GateTrajectory {
        times: times.clone(),
        ..Default::default()
    };
    for k in 0..times.len() {
        let mut ov = [0.0; 2];
        let mut leak: f64 = 0.0;
        for l in 0..2 {
            let reg = layout.project(&paths[l][k], &basis)?;
            ov[l] = codec.logical(l).overlap_sq(&reg)?;
            leak = leak.max(fock_leakage(&codec, &paths[l][k], &basis)?);
        }
        traj.overlap.push(ov);
        traj.leakage.push(leak);
    }
    let finals = [
        paths[0].last().unwrap().clone(),
        paths[1].last().unwrap().clone(),
    ];
    let a = logical_block(&codec, &layout, &basis, &finals)?;
    let f_z = [a[(0, 0)].norm_sqr(), a[(1, 1)].norm_sqr()];
    let max_infidelity =
        [0, 1].map(|l| traj.overlap.iter().map(|o| 1.0 - o[l]).fold(0.0, f64::max));
    let phase = plus_state_phase(&a);
    let phase_error = phase.map(|p| wrap_angle(p - cfg.theta).abs());
    let gate_infidelity = worst_case_infidelity(&a, &matrix2(&qubit::rz(cfg.theta)));
    let max_leakage = traj.leakage.iter().copied().fold(0.0, f64::max);
    Ok(RzResult {
        gate_time: t_gate,
        f_z,
        max_infidelity,
        phase,
        phase_error,
        gate_infidelity,
        max_leakage,
        trajectory: traj,
    })
}

// ---------------------------------------------------------------------------
// Logical X rotation
// ---------------------------------------------------------------------------

/// Parameters of the logical `R_x` gate on atoms 1–3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RxConfig {
    /// Hopping `J₁` (E_R); `J₂ = √2·J·hop_ratio`.
    pub j: f64,
    /// Interaction `U_a = U_b` (E_R).
    pub u: f64,
    /// Magnitude of the rotation; the gate realizes `R_x(−θ)`.
    pub theta: f64,
    /// `J₂/(√2 J₁)`, equal to one for the ideal gate.
    pub hop_ratio: f64,
    /// `U_ab/U`.
    pub uab_over_u: f64,
    /// Overrides the analytic gate time (required when `J = 0`).
    pub duration: Option<f64>,
    pub samples: usize,
}

impl RxConfig {
    pub fn new(j: f64, u_over_j: f64, theta: f64) -> Self {
        RxConfig {
            j,
            u: u_over_j * j,
            theta,
            hop_ratio: 1.0,
            uab_over_u: 1.0,
            duration: None,
            samples: TRAJECTORY_SAMPLES,
        }
    }

    fn validate(&self) -> Result<()> {
        check_energy("J", self.j)?;
        check_energy("U", self.u)?;
        check_energy("hop ratio", self.hop_ratio)?;
        check_energy("U_ab/U", self.uab_over_u)?;
        if self.samples == 0 || !self.theta.is_finite() {
            return Err(Error::validation(
                "need at least one sample and a finite angle",
            ));
        }
        check_regime(Regime::Interacting, self.j, self.u)?;
        if self.j == 0.0 && self.duration.is_none() {
            return Err(Error::validation(
                "with J = 0 an explicit duration is required",
            ));
        }
        if let Some(d) = self.duration {
            check_energy("duration", d)?;
        }
        Ok(())
    }

    pub fn params(&self) -> HubbardParams {
        let j2 = 2f64.sqrt() * self.j * self.hop_ratio;
        let mut p = HubbardParams::with_bonds(&[self.j, j2, 0.0, 0.0], self.u);
        p.u_ab = self.uab_over_u * self.u;
        p
    }

    /// `θU/(4√3J²)` unless overridden.
    pub fn gate_time(&self) -> f64 {
        self.duration
            .unwrap_or_else(|| self.theta * self.u / (4.0 * 3f64.sqrt() * self.j * self.j))
    }
}

/// Outcome of a logical `R_x` simulation.
#[derive(Clone, Debug, Serialize)]
pub struct RxResult {
    pub gate_time: f64,
    /// `|⟨0_L|U(t)|1_L⟩|²` at the gate time.
    pub f_x: f64,
    /// Worst-case infidelity against the ideal `R_x(−θ)`.
    pub gate_infidelity: f64,
    pub max_leakage: f64,
    pub trajectory: GateTrajectory,
}

/// Propagates the full Hamiltonian of the logical `R_x` gate.
pub fn run_rx_gate(cfg: &RxConfig) -> Result<RxResult> {
    cfg.validate()?;
    let codec = DfsCodec::new();
    let layout = RegisterLayout::standard();
    let params = cfg.params();
    let basis = layout.basis(&params)?;
    let prop = Propagator::new(&build_hamiltonian(&params, &basis)?)?;
    let t_gate = cfg.gate_time();
    let inputs = [
        layout.embed(codec.logical(0), &basis)?,
        layout.embed(codec.logical(1), &basis)?,
    ];
    let times = sample_times(t_gate, cfg.samples);
    let paths = [
        prop.evolve_many(&inputs[0], &times)?,
        prop.evolve_many(&inputs[1], &times)?,
    ];
    let mut traj = GateTrajectory {
        times: times.clone(),
        ..Default::default()
    };
    for k in 0..times.len() {
        let mut ov = [0.0; 2];
        let mut leak: f64 = 0.0;
        for l in 0..2 {
            let reg = layout.project(&paths[l][k], &basis)?;
            ov[l] = codec.logical(1 - l).overlap_sq(&reg)?;
            leak = leak.max(fock_leakage(&codec, &paths[l][k], &basis)?);
        }
        traj.overlap.push(ov);
        traj.leakage.push(leak);
    }
    let finals = [
        paths[0].last().unwrap().clone(),
        paths[1].last().unwrap().clone(),
    ];
    let a = logical_block(&codec, &layout, &basis, &finals)?;
    let f_x = a[(0, 1)].norm_sqr();
    let gate_infidelity = worst_case_infidelity(&a, &matrix2(&qubit::rx(-cfg.theta)));
    let max_leakage = traj.leakage.iter().copied().fold(0.0, f64::max);
    Ok(RxResult {
        gate_time: t_gate,
        f_x,
        gate_infidelity,
        max_leakage,
        trajectory: traj,
    })
}

// ---------------------------------------------------------------------------
// Ancilla-controlled CPHASE
// ---------------------------------------------------------------------------

/// Lattice site of the ancilla (between atoms 3 and 4).
pub const ANCILLA_SITE: usize = 3;

/// Parameters of the CPHASE gate on atoms 3 and 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CphaseConfig {
    /// Hopping on both bonds adjacent to the ancilla (E_R).
    pub j: f64,
    /// Register interactions `U_a = U_b = U_ab` (E_R).
    pub u: f64,
    /// Register–ancilla interaction for `|0⟩_q` (blocking).
    pub u_q0: f64,
    /// Register–ancilla interaction for `|1⟩_q` (ideally zero).
    pub u_q1: f64,
    pub regime: Regime,
    /// Overrides the gate time.
    pub swap_time: Option<f64>,
    pub samples: usize,
}

impl CphaseConfig {
    /// Strongly interacting register, blocking `U^q_0 = 100 J`.
    pub fn interacting(j: f64, u_over_j: f64) -> Self {
        CphaseConfig {
            j,
            u: u_over_j * j,
            u_q0: 100.0 * j,
            u_q1: 0.0,
            regime: Regime::Interacting,
            swap_time: None,
            samples: TRAJECTORY_SAMPLES,
        }
    }

    /// Non-interacting register with a residual `U/J`.
    pub fn free(j: f64, residual_u_over_j: f64) -> Self {
        CphaseConfig {
            regime: Regime::Free,
            ..CphaseConfig::interacting(j, residual_u_over_j)
        }
    }

    fn validate(&self) -> Result<()> {
        for (n, x) in [
            ("J", self.j),
            ("U", self.u),
            ("U_q0", self.u_q0),
            ("U_q1", self.u_q1),
        ] {
            check_energy(n, x)?;
        }
        if self.j == 0.0 {
            return Err(Error::validation("CPHASE needs J > 0"));
        }
        if self.samples == 0 {
            return Err(Error::validation("need at least one trajectory sample"));
        }
        if let Some(t) = self.swap_time {
            check_energy("swap time", t)?;
        }
        check_regime(self.regime, self.j, self.u)
    }

    pub fn params(&self) -> HubbardParams {
        HubbardParams::with_bonds(&[0.0, 0.0, self.j, self.j], self.u)
    }

    pub fn ancilla(&self, sigma: u8) -> AncillaParams {
        AncillaParams {
            site: ANCILLA_SITE,
            u_q0: self.u_q0,
            u_q1: self.u_q1,
            sigma,
        }
    }
}

/// Spin-basis index of atoms 3, 4 in states `(α, β)` with atoms 1, 2 in `|0⟩`.
fn pair_index(alpha: usize, beta: usize) -> usize {
    (alpha << 1) | beta
}

struct CphaseSystem {
    layout: RegisterLayout,
    basis: FockBasis,
    prop: [Propagator; 2],
}

impl CphaseSystem {
    fn new(cfg: &CphaseConfig) -> Result<Self> {
        let layout = RegisterLayout::standard();
        let params = cfg.params();
        let basis = layout.basis(&params)?;
        let prop = [
            Propagator::new(&build_cphase_hamiltonian(&params, &cfg.ancilla(0), &basis)?)?,
            Propagator::new(&build_cphase_hamiltonian(&params, &cfg.ancilla(1), &basis)?)?,
        ];
        Ok(CphaseSystem {
            layout,
            basis,
            prop,
        })
    }

    fn index(&self, alpha: usize, beta: usize) -> usize {
        self.basis
            .index_of(&self.layout.occupation(pair_index(alpha, beta)))
            .expect("home configuration")
    }
}

/// Gate time: `π/(√2J)` in the free regime; in the interacting regime the
/// global maximum of `|⟨0σ1|U(t)|1σ0⟩|²` over `(0, 3πU/(4J²)]`, located on a
/// dense grid and refined by golden-section search.
pub fn locate_swap_time(cfg: &CphaseConfig) -> Result<f64> {
    cfg.validate()?;
    if let Some(t) = cfg.swap_time {
        return Ok(t);
    }
    if cfg.regime == Regime::Free {
        return Ok(PI / (2f64.sqrt() * cfg.j));
    }
    let sys = CphaseSystem::new(cfg)?;
    search_swap(&sys, 3.0 * PI * cfg.u / (4.0 * cfg.j * cfg.j))
}

fn search_swap(sys: &CphaseSystem, t_max: f64) -> Result<f64> {
    let (from, to) = (sys.index(1, 0), sys.index(0, 1));
    let f = |t: f64| sys.prop[1].amplitude(to, from, t).norm_sqr();
    let n = SWAP_SEARCH_POINTS;
    let dt = t_max / (n - 1) as f64;
    let (mut best_k, mut best) = (0usize, f64::NEG_INFINITY);
    for k in 1..n {
        let v = f(k as f64 * dt);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    if best < 0.5 {
        return Err(Error::Search(format!(
            "no swap peak found: max |<0s1|U|1s0>|^2 = {best:.3e}"
        )));
    }
    // Golden-section maximization on the bracketing grid cell.
    let (mut a, mut b) = (
        (best_k as f64 - 1.0) * dt,
        ((best_k + 1) as f64 * dt).min(t_max),
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-10 * b {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// Outcome of a CPHASE simulation.
#[derive(Clone, Debug, Serialize)]
pub struct CphaseResult {
    pub gate_time: f64,
    /// `|⟨0σ1|U(t)|1σ0⟩|²`.
    pub f_01: f64,
    /// `|⟨0σ0|U(t)|0σ0⟩|²`.
    pub f_00: f64,
    /// `|⟨1σ1|U(t)|1σ1⟩|²`.
    pub f_11: f64,
    /// Swap phase difference `φ₀₀ − φ₁₀`, wrapped to `(−π, π]`.
    pub phi: Option<f64>,
    /// Phase fidelity `(5 + 4 cos φ)/9`.
    pub f_ph: Option<f64>,
    /// Smallest probability that the register stays home when the ancilla
    /// is `|0⟩_q`, at the gate time.
    pub blocked_prob: f64,
    /// Same, minimized over the trajectory.
    pub blocked_prob_min: f64,
    /// Largest DFS leakage of `|0_L⟩`, `|1_L⟩` over the trajectory (ancilla `|1⟩_q`).
    pub leakage_max: f64,
    /// Worst-case logical infidelity against `V₃₄` (ancilla `|1⟩_q`).
    pub swap_infidelity: f64,
}

/// Propagates the CPHASE Hamiltonian for both ancilla states.
pub fn run_cphase(cfg: &CphaseConfig) -> Result<CphaseResult> {
    cfg.validate()?;
    let sys = CphaseSystem::new(cfg)?;
    let t = match (cfg.swap_time, cfg.regime) {
        (Some(t), _) => t,
        (None, Regime::Free) => PI / (2f64.sqrt() * cfg.j),
        (None, Regime::Interacting) => search_swap(&sys, 3.0 * PI * cfg.u / (4.0 * cfg.j * cfg.j))?,
    };
    let p1 = &sys.prop[1];
    let amp = |to: (usize, usize), from: (usize, usize)| {
        p1.amplitude(sys.index(to.0, to.1), sys.index(from.0, from.1), t)
    };
    let a10 = amp((0, 1), (1, 0));
    let a00 = amp((0, 0), (0, 0));
    let a11 = amp((1, 1), (1, 1));
    let phi = (a10.norm() >= PHASE_OVERLAP_FLOOR && a00.norm() >= PHASE_OVERLAP_FLOOR)
        .then(|| wrap_angle(a00.arg() - a10.arg()));
    let f_ph = phi.map(|p| (5.0 + 4.0 * p.cos()) / 9.0);

    // Blocking with the ancilla in |0>_q.
    let times = sample_times(t, cfg.samples);
    let mut blocked_prob = f64::INFINITY;
    let mut blocked_prob_min = f64::INFINITY;
    for alpha in 0..2 {
        for beta in 0..2 {
            let i = sys.index(alpha, beta);
            blocked_prob = blocked_prob.min(sys.prop[0].amplitude(i, i, t).norm_sqr());
            for &s in &times {
                blocked_prob_min = blocked_prob_min.min(sys.prop[0].amplitude(i, i, s).norm_sqr());
            }
        }
    }

    // Leakage and logical action with the ancilla in |1>_q.
    let codec = DfsCodec::new();
    let inputs = [
        sys.layout.embed(codec.logical(0), &sys.basis)?,
        sys.layout.embed(codec.logical(1), &sys.basis)?,
    ];
    let mut leakage_max: f64 = 0.0;
    for input in &inputs {
        for state in p1.evolve_many(input, &times)? {
            leakage_max = leakage_max.max(fock_leakage(&codec, &state, &sys.basis)?);
        }
    }
    let finals = [p1.evolve(&inputs[0], t)?, p1.evolve(&inputs[1], t)?];
    let a = logical_block(&codec, &sys.layout, &sys.basis, &finals)?;
    let v34 = codec.restrict(&permutation_op(3, 4)?)?;
    let swap_infidelity = worst_case_infidelity(&a, &v34);

    Ok(CphaseResult {
        gate_time: t,
        f_01: a10.norm_sqr(),
        f_00: a00.norm_sqr(),
        f_11: a11.norm_sqr(),
        phi,
        f_ph,
        blocked_prob,
        blocked_prob_min,
        leakage_max,
        swap_infidelity,
    })
}

// ---------------------------------------------------------------------------
// Initialization of |0_L>
// ---------------------------------------------------------------------------

/// Which dynamics prepares the singlet pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitRoute {
    /// Eliminated spin-exchange Hamiltonian `−(J²/U)(σ₁·σ₂ + σ₃·σ₄)`.
    Effective,
    /// Full Bose-Hubbard dynamics on four sites with `J₂ = 0`.
    Full,
}

/// Parameters of the `|0_L⟩` preparation from `|0110⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    pub j: f64,
    pub u: f64,
    pub route: InitRoute,
    /// Overrides `πU/(8J²)`; defaults to zero when `J = 0`.
    pub duration: Option<f64>,
}

impl InitConfig {
    pub fn new(j: f64, u_over_j: f64, route: InitRoute) -> Self {
        InitConfig {
            j,
            u: u_over_j * j,
            route,
            duration: None,
        }
    }

    pub fn duration(&self) -> f64 {
        match self.duration {
            Some(t) => t,
            None if self.j == 0.0 => 0.0,
            None => PI * self.u / (8.0 * self.j * self.j),
        }
    }
}

/// Prepared register state.
#[derive(Clone, Debug)]
pub struct InitResult {
    /// Amplitudes on the 16 home configurations (not renormalized).
    pub state: StateVector,
    /// `|⟨0_L|state⟩|²`.
    pub fidelity: f64,
    /// Weight remaining on the home configurations.
    pub norm: f64,
    pub duration: f64,
}

/// Evolves `|0110⟩` and applies `exp(−iπσ₁^z/4)`, `exp(−iπσ₄^z/4)`.
pub fn run_initialization(cfg: &InitConfig) -> Result<InitResult> {
    check_energy("J", cfg.j)?;
    check_energy("U", cfg.u)?;
    if cfg.j > 0.0 {
        check_regime(Regime::Interacting, cfg.j, cfg.u)?;
    }
    let t = cfg.duration();
    check_energy("duration", t)?;
    let start = StateVector::qubit_state("0110")?;
    let evolved = match cfg.route {
        InitRoute::Effective => {
            let coupling = if cfg.j == 0.0 {
                0.0
            } else {
                cfg.j * cfg.j / cfg.u
            };
            // σ_i·σ_j = 2 V_ij − 1.
            let dots = permutation_op(1, 2)?
                .plus(&permutation_op(3, 4)?)?
                .scaled(2.0)
                .plus(&Operator::identity(16).scaled(-2.0))?;
            Propagator::new(&dots.scaled(-coupling))?.evolve(&start, t)?
        }
        InitRoute::Full => {
            let layout = RegisterLayout::initialization();
            let params = HubbardParams::with_bonds(&[cfg.j, 0.0, cfg.j], cfg.u);
            let basis = layout.basis(&params)?;
            let prop = Propagator::new(&build_hamiltonian(&params, &basis)?)?;
            let out = prop.evolve(&layout.embed(&start, &basis)?, t)?;
            layout.project(&out, &basis)?
        }
    };
    let rz = qubit::rz(PI / 2.0);
    let local = single_qubit_op(&rz, 1)?.compose(&single_qubit_op(&rz, 4)?)?;
    let state = local.apply(&evolved)?;
    let codec = DfsCodec::new();
    let fidelity = codec.logical_zero().overlap_sq(&state)?;
    let norm = state.norm().powi(2);
    Ok(InitResult {
        state,
        fidelity,
        norm,
        duration: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{re, ONE, ZERO};

    #[test]
    fn worst_case_infidelity_examples() {
        let id = Matrix2::identity();
        assert!(worst_case_infidelity(&id, &id) < 1e-15);
        let z = Matrix2::new(ONE, ZERO, ZERO, -ONE);
        // Z versus identity: |+> is mapped to an orthogonal state.
        assert!((worst_case_infidelity(&z, &id) - 1.0).abs() < 1e-12);
        // Phase-only error δ on |1>: worst case sin²(δ/2).
        let d = 0.1;
        let a = Matrix2::new(ONE, ZERO, ZERO, C64::from_polar(1.0, d));
        assert!((worst_case_infidelity(&a, &id) - (d / 2.0).sin().powi(2)).abs() < 1e-12);
        let _ = re(0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_rz_is_exact_without_interactions() {
        let r = run_rz_gate(&RzConfig::free(0.033, 0.0)).unwrap();
        assert!(r.gate_infidelity < 1e-12);
        assert!(r.max_leakage < 1e-12);
        assert!(r.phase_error.unwrap() < 1e-10);
        assert!(1.0 - r.f_z[1] < 1e-12);
    }

    #[test]
    fn regime_mismatch_is_rejected() {
        assert!(run_rz_gate(&RzConfig::free(0.033, 5.0)).is_err());
        assert!(run_rz_gate(&RzConfig::interacting(0.033, 0.5, PI)).is_err());
        let mut c = RzConfig::free(0.033, 0.0);
        c.theta = 1.0;
        assert!(run_rz_gate(&c).is_err());
    }

    #[test]
    fn logical_zero_is_invariant_under_rz() {
        let r = run_rz_gate(&RzConfig::interacting(0.033, 30.0, PI)).unwrap();
        assert!(r.max_infidelity[0] < 1e-9);
    }

    #[test]
    fn frozen_rx_leaves_state_unchanged() {
        let mut c = RxConfig::new(0.0, 75.0, PI);
        c.duration = Some(5.0);
        let r = run_rx_gate(&c).unwrap();
        assert_eq!(r.f_x, 0.0);
        assert!(r
            .trajectory
            .overlap
            .iter()
            .all(|o| o[0] == 0.0 && o[1] == 0.0));
        assert!(run_rx_gate(&RxConfig {
            duration: None,
            ..c
        })
        .is_err());
    }

    #[test]
    fn free_cphase_is_an_exact_swap() {
        let r = run_cphase(&CphaseConfig::free(0.033, 0.0)).unwrap();
        assert!(1.0 - r.f_01 < 1e-12 && 1.0 - r.f_00 < 1e-12);
        assert!(r.phi.unwrap().abs() < 1e-10);
        assert!(r.leakage_max < 1e-10);
        assert!(r.swap_infidelity < 1e-12);
    }

    #[test]
    fn effective_initialization_is_exact() {
        let r = run_initialization(&InitConfig::new(0.033, 75.0, InitRoute::Effective)).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        let frozen = run_initialization(&InitConfig::new(0.0, 75.0, InitRoute::Full)).unwrap();
        let start = StateVector::qubit_state("0110").unwrap();
        assert!((frozen.state.overlap_sq(&start).unwrap() - 1.0).abs() < 1e-14);
    }
}
