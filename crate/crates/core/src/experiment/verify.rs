//! Self-checks of the library's invariants, grouped by module.
//!
//! Every check measures one number (a worst deviation, a count of
//! violations, a leakage) and compares it with a fixed tolerance. Checks
//! are independent and run in parallel; the report lists them in a fixed
//! order, so it does not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dfs::{
    collective_noise_hamiltonian, permutation_op, DfsCodec, NoiseField, PHYSICAL_DIM,
};
use crate::error::{Error, Result};
use crate::lattice::elimination::three_site_basis;
use crate::lattice::{
    adiabatic_eliminate_with, build_hamiltonian, run_cphase, run_rz_gate, CphaseConfig,
    EffectiveCouplings, FockBasis, HubbardParams, InverseOrder, RegisterLayout, RzConfig, Species,
    DEFAULT_J,
};
use crate::noise::{
    analytic_module_fidelity, lindblad_propagate, operation_fidelity, DephasedSubsystem,
    DephasingModel, ModuleKind, QuantumOperation, SamplerConfig,
};
use crate::protocol::{
    circuit_purification_round, cnot_channel, cphase_channel, dfs_transfer_channel,
    entanglement_swap, purification_side_channel, purification_threshold, state_transfer_channel,
    transfer_embedding_check, werner_map, AuxCarrier, CircuitNoise, LogicalPair,
};
use crate::quantum::{
    propagate, random_pure_state, tensor, CMatrix, DensityMatrix, Operator, Propagator, C64,
};

/// Dephasing strengths `γt` at which simulated and analytic module
/// fidelities are compared.
pub const GAMMA_T_GRID: [f64; 5] = [0.001, 0.01, 0.1, 0.5, 1.0];
/// Agreement required between simulated and analytic fidelities.
pub const FIDELITY_TOL: f64 = 1e-4;

/// Group of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Dfs,
    Lattice,
    Noise,
    Protocol,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Dfs, Suite::Lattice, Suite::Noise, Suite::Protocol];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dfs => "dfs",
            Suite::Lattice => "lattice",
            Suite::Noise => "noise",
            Suite::Protocol => "protocol",
        }
    }
}

/// `all` or one suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteSelection {
    All,
    One(Suite),
}

impl SuiteSelection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            SuiteSelection::All => Suite::ALL.to_vec(),
            SuiteSelection::One(s) => vec![s],
        }
    }
}

impl FromStr for SuiteSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(SuiteSelection::All);
        }
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .map(SuiteSelection::One)
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown suite '{s}' (expected all, dfs, lattice, noise or protocol)"
                ))
            })
    }
}

impl fmt::Display for SuiteSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteSelection::All => f.write_str("all"),
            SuiteSelection::One(s) => f.write_str(s.name()),
        }
    }
}

/// Settings shared by the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random inputs per operation-fidelity minimization.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            samples: 2_000,
        }
    }
}

impl VerifyOptions {
    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            samples: self.samples,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    /// `suite.check`, e.g. `dfs.collective_noise_invariance`.
    pub name: String,
    pub suite: Suite,
    pub passed: bool,
    /// Measured quantity (worst deviation, violation count, ...).
    pub value: f64,
    /// Largest accepted value.
    pub tolerance: f64,
    pub detail: String,
}

/// Result of a verification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub total: usize,
    /// Names of the failed checks.
    pub failed: Vec<String>,
    pub checks: Vec<Check>,
}

type Measure = fn(&VerifyOptions) -> Result<(f64, String)>;

struct CheckDef {
    suite: Suite,
    name: &'static str,
    tolerance: f64,
    measure: Measure,
}

const fn check(suite: Suite, name: &'static str, tolerance: f64, measure: Measure) -> CheckDef {
    CheckDef {
        suite,
        name,
        tolerance,
        measure,
    }
}

fn catalogue() -> Vec<CheckDef> {
    use Suite::*;
    vec![
        check(
            Dfs,
            "propagate_preserves_inner_products",
            1e-10,
            propagate_unitary,
        ),
        check(
            Dfs,
            "propagate_composes_in_time",
            1e-10,
            propagate_composition,
        ),
        check(Dfs, "tensor_is_associative", 1e-15, tensor_associative),
        check(
            Dfs,
            "collective_noise_invariance",
            1e-10,
            collective_noise_invariance,
        ),
        check(
            Dfs,
            "logical_paulis_anticommute_and_square_to_one",
            1e-12,
            logical_paulis,
        ),
        check(
            Dfs,
            "projector_commutes_with_permutations",
            1e-12,
            projector_symmetry,
        ),
        check(
            Lattice,
            "species_numbers_conserved",
            1e-12,
            number_conservation,
        ),
        check(Lattice, "free_regime_has_no_leakage", 1e-10, free_leakage),
        check(
            Lattice,
            "eliminated_couplings_match_closed_form",
            1e-12,
            eliminated_couplings,
        ),
        check(
            Lattice,
            "interacting_cphase_leakage_below_5e-4",
            5e-4,
            interacting_cphase_leakage,
        ),
        check(Lattice, "cphase_f00_equals_f11", 1e-10, cphase_symmetry),
        check(
            Noise,
            "lindblad_preserves_trace_and_hermiticity",
            1e-10,
            lindblad_trace,
        ),
        check(Noise, "analytic_inequality_chain", 0.0, inequality_chain),
        check(
            Noise,
            "pre_post_unitaries_leave_fidelity_unchanged",
            FIDELITY_TOL,
            unitary_invariance,
        ),
        check(
            Noise,
            "cphase_matches_analytic",
            FIDELITY_TOL,
            cphase_vs_analytic,
        ),
        check(Protocol, "ideal_circuits_are_exact", 1e-10, ideal_circuits),
        check(
            Protocol,
            "purification_keeps_bell_diagonal_form",
            1e-10,
            bell_diagonal,
        ),
        check(
            Protocol,
            "purification_monotone_about_threshold",
            0.0,
            purification_monotonicity,
        ),
        check(
            Protocol,
            "cnot_matches_analytic",
            FIDELITY_TOL,
            cnot_vs_analytic,
        ),
        check(
            Protocol,
            "state_transfer_matches_analytic",
            FIDELITY_TOL,
            transfer_vs_analytic,
        ),
        check(
            Protocol,
            "purification_respects_lower_bound",
            0.0,
            purification_bound,
        ),
        check(
            Protocol,
            "swap_restores_phi_plus",
            1e-10,
            swap_of_perfect_pairs,
        ),
        check(
            Protocol,
            "physical_embedding_of_transfer",
            1e-8,
            transfer_embedding,
        ),
    ]
}

/// Names of the checks in `selection`, in report order.
pub fn check_names(selection: SuiteSelection) -> Vec<String> {
    let suites = selection.suites();
    catalogue()
        .iter()
        .filter(|s| suites.contains(&s.suite))
        .map(|s| format!("{}.{}", s.suite.name(), s.name))
        .collect()
}

/// Runs the selected suites.
pub fn run_verify(selection: SuiteSelection, opts: &VerifyOptions) -> VerifyReport {
    let suites = selection.suites();
    let defs: Vec<CheckDef> = catalogue()
        .into_iter()
        .filter(|s| suites.contains(&s.suite))
        .collect();
    let checks: Vec<Check> = defs
        .par_iter()
        .map(|s| {
            let name = format!("{}.{}", s.suite.name(), s.name);
            match (s.measure)(opts) {
                Ok((value, detail)) => {
                    let passed = value.is_finite() && value <= s.tolerance;
                    Check {
                        name,
                        suite: s.suite,
                        passed,
                        value,
                        tolerance: s.tolerance,
                        detail,
                    }
                }
                Err(e) => Check {
                    name,
                    suite: s.suite,
                    passed: false,
                    value: f64::NAN,
                    tolerance: s.tolerance,
                    detail: e.to_string(),
                },
            }
        })
        .collect();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    VerifyReport {
        suite: selection.to_string(),
        seed: opts.seed,
        samples: opts.samples,
        passed: failed.is_empty(),
        total: checks.len(),
        failed,
        checks,
    }
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    let mut g = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let a = CMatrix::from_fn(dim, dim, |_, _| g());
    Operator::hermitian((&a + a.adjoint()).unscale(2.0))
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    Ok(Propagator::new(&random_hermitian(dim, rng)?)?.unitary(1.0))
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> Result<f64>) -> Result<f64> {
    items.into_iter().try_fold(0.0f64, |m, x| Ok(m.max(f(x)?)))
}

fn grid_detail(label: &str, values: &[(f64, f64, f64)]) -> String {
    let parts: Vec<String> = values
        .iter()
        .map(|(gt, sim, ana)| format!("gt={gt}: {sim:.8} vs {ana:.8}"))
        .collect();
    format!("{label}; {}", parts.join(", "))
}

/// Worst `|simulated − analytic|` over [`GAMMA_T_GRID`].
fn analytic_agreement(
    opts: &VerifyOptions,
    kind: ModuleKind,
    channel: fn(CircuitNoise) -> Result<QuantumOperation>,
) -> Result<(f64, String)> {
    let ideal = channel(CircuitNoise::ideal())?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for gt in GAMMA_T_GRID {
        let noisy = channel(CircuitNoise::from_gamma_t(gt)?)?;
        let sim = operation_fidelity(&ideal, &noisy, &opts.sampler())?.value;
        let ana = analytic_module_fidelity(kind, gt)?.value;
        worst = worst.max((sim - ana).abs());
        rows.push((gt, sim, ana));
    }
    Ok((worst, grid_detail("simulated vs analytic", &rows)))
}

// ---------------------------------------------------------------------------
// dfs (with the dense linear-algebra core it relies on)
// ---------------------------------------------------------------------------

fn propagate_unitary(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(1);
    let h = random_hermitian(PHYSICAL_DIM, &mut rng)?;
    let worst = max_over(0..10u64, |k| {
        let phi = random_pure_state(PHYSICAL_DIM, opts.seed.wrapping_add(2 * k))?;
        let psi = random_pure_state(PHYSICAL_DIM, opts.seed.wrapping_add(2 * k + 1))?;
        let t = 0.37 * (k + 1) as f64;
        let before = phi.inner(&psi)?;
        let after = propagate(&h, t, &phi)?.inner(&propagate(&h, t, &psi)?)?;
        Ok((after - before).norm())
    })?;
    Ok((worst, "10 random pairs, random 16-dim Hamiltonian".into()))
}

fn propagate_composition(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(2);
    let h = random_hermitian(PHYSICAL_DIM, &mut rng)?;
    let worst = max_over(0..10u64, |k| {
        let psi = random_pure_state(PHYSICAL_DIM, opts.seed.wrapping_add(100 + k))?;
        let (t1, t2) = (0.3 + 0.1 * k as f64, 1.7 - 0.05 * k as f64);
        let once = propagate(&h, t1 + t2, &psi)?;
        let twice = propagate(&h, t2, &propagate(&h, t1, &psi)?)?;
        Ok((once.amplitudes() - twice.amplitudes()).norm())
    })?;
    Ok((worst, "U(t1+t2) vs U(t2)U(t1), 10 random states".into()))
}

fn tensor_associative(opts: &VerifyOptions) -> Result<(f64, String)> {
    let a = random_pure_state(2, opts.seed)?;
    let b = random_pure_state(3, opts.seed.wrapping_add(1))?;
    let c = random_pure_state(4, opts.seed.wrapping_add(2))?;
    let left = tensor(&tensor(&a, &b)?, &c)?;
    let right = tensor(&a, &tensor(&b, &c)?)?;
    Ok((
        (left.amplitudes() - right.amplitudes()).camax(),
        "(a⊗b)⊗c vs a⊗(b⊗c), dims 2,3,4".into(),
    ))
}

fn collective_noise_invariance(opts: &VerifyOptions) -> Result<(f64, String)> {
    let codec = DfsCodec::new();
    let mut rng = opts.rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let field = NoiseField::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )?;
        let t = rng.gen_range(0.0..10.0);
        let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (c, d): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let psi = codec.encode(C64::new(a, b), C64::new(c, d)).normalized()?;
        let out = propagate(&collective_noise_hamiltonian(&field), t, &psi)?;
        worst = worst.max((out.amplitudes() - psi.amplitudes()).camax());
    }
    Ok((
        worst,
        "20 random fields, times and logical states; exact equality (no phase freedom)".into(),
    ))
}

fn logical_paulis(_: &VerifyOptions) -> Result<(f64, String)> {
    let codec = DfsCodec::new();
    let x = codec.restrict(&codec.logical_x())?;
    let z = codec.restrict(&codec.logical_z())?;
    let id = nalgebra::Matrix2::<C64>::identity();
    let worst = [
        (x * z + z * x).camax(),
        (x * x - id).camax(),
        (z * z - id).camax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok((worst, "max of |{X,Z}|, |X²−1|, |Z²−1| on the DFS".into()))
}

fn projector_symmetry(_: &VerifyOptions) -> Result<(f64, String)> {
    let codec = DfsCodec::new();
    let mut worst: f64 = 0.0;
    for i in 1..=4 {
        for j in i + 1..=4 {
            worst = worst.max(codec.projector().commutator_norm(&permutation_op(i, j)?)?);
        }
    }
    Ok((worst, "all six exchanges V_ij".into()))
}

// ---------------------------------------------------------------------------
// lattice
// ---------------------------------------------------------------------------

fn number_conservation(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(4);
    let mut worst: f64 = 0.0;
    for sites in [3usize, 4] {
        let mut p = HubbardParams::uniform(sites, DEFAULT_J, 75.0 * DEFAULT_J);
        for bond in 0..sites - 1 {
            p.j_a[bond] = rng.gen_range(0.0..0.1);
            p.j_b[bond] = rng.gen_range(0.0..0.1);
        }
        p.u_a = rng.gen_range(0.5..5.0);
        p.u_b = rng.gen_range(0.5..5.0);
        p.u_ab = rng.gen_range(0.5..5.0);
        let basis = FockBasis::with_total(sites, sites)?;
        let h = build_hamiltonian(&p, &basis)?;
        for s in [Species::A, Species::B] {
            worst = worst.max(h.commutator_norm(&basis.number_operator(s))?);
        }
    }
    let reg = RegisterLayout::standard();
    let p = HubbardParams::uniform(reg.sites(), DEFAULT_J, 75.0 * DEFAULT_J);
    let basis = reg.basis(&p)?;
    let h = build_hamiltonian(&p, &basis)?;
    for s in [Species::A, Species::B] {
        worst = worst.max(h.commutator_norm(&basis.number_operator(s))?);
    }
    Ok((
        worst,
        "random 3- and 4-site chains and the gate register".into(),
    ))
}

fn free_leakage(_: &VerifyOptions) -> Result<(f64, String)> {
    let rz = run_rz_gate(&RzConfig::free(DEFAULT_J, 0.0))?.max_leakage;
    let cp = run_cphase(&CphaseConfig::free(DEFAULT_J, 0.0))?.leakage_max;
    Ok((
        rz.max(cp),
        format!("R_z {rz:.3e}, CPHASE {cp:.3e} (200 samples per gate)"),
    ))
}

fn eliminated_couplings(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(5);
    let basis = three_site_basis()?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = HubbardParams {
            j_a: vec![rng.gen_range(0.01..0.1), rng.gen_range(0.01..0.1)],
            j_b: vec![rng.gen_range(0.01..0.1), rng.gen_range(0.01..0.1)],
            u_a: rng.gen_range(1.0..5.0),
            u_b: rng.gen_range(1.0..5.0),
            u_ab: rng.gen_range(1.0..5.0),
        };
        let h = build_hamiltonian(&p, &basis)?;
        let heff = adiabatic_eliminate_with(
            &h,
            &basis.singly_occupied_projector(),
            InverseOrder::FirstOrder,
        )?;
        let got = EffectiveCouplings::extract(&heff, &basis)?;
        let want = EffectiveCouplings::from_params(&p)?;
        for (a, b) in [
            (got.f1, want.f1),
            (got.f2, want.f2),
            (got.f3, want.f3),
            (got.g1, want.g1),
            (got.g2, want.g2),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((
        worst,
        "f1, f2, f3, g1, g2 at 10 random parameter sets (second order in J)".into(),
    ))
}

fn interacting_cphase_leakage(_: &VerifyOptions) -> Result<(f64, String)> {
    let r = run_cphase(&CphaseConfig::interacting(DEFAULT_J, 75.0))?;
    Ok((
        r.leakage_max,
        format!("U/J = 75, gate time {:.6e} hbar/E_R", r.gate_time),
    ))
}

fn cphase_symmetry(_: &VerifyOptions) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for cfg in [
        CphaseConfig::interacting(DEFAULT_J, 75.0),
        CphaseConfig::free(DEFAULT_J, 0.01),
    ] {
        let r = run_cphase(&cfg)?;
        worst = worst.max((r.f_00 - r.f_11).abs());
        parts.push(format!("f00 {:.12} f11 {:.12}", r.f_00, r.f_11));
    }
    Ok((worst, parts.join("; ")))
}

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

fn lindblad_trace(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(6);
    let h = random_hermitian(4, &mut rng)?;
    let sub = DephasedSubsystem::new(vec![2, 2], 0)?;
    let rho = random_pure_state(4, opts.seed)?.to_density()?;
    let worst = max_over([0.1, 0.5, 1.0, 2.0], |t| {
        let out = lindblad_propagate(&rho, &h, &DephasingModel::new(0.7, t)?, &sub)?;
        let m = out.matrix();
        Ok((out.trace() - 1.0).abs().max((m - m.adjoint()).camax()))
    })?;
    Ok((
        worst,
        "random 4-dim Hamiltonian, gamma = 0.7, four durations".into(),
    ))
}

fn inequality_chain(_: &VerifyOptions) -> Result<(f64, String)> {
    let mut violation: f64 = 0.0;
    for k in 0..=140 {
        let gt = 10f64.powf(-6.0 + 7.0 * k as f64 / 140.0);
        let f = |kind| analytic_module_fidelity(kind, gt).map(|a| a.value);
        violation = violation
            .max((1.0 - gt / 2.0) - f(ModuleKind::Cphase)?)
            .max((1.0 - gt) - f(ModuleKind::Cnot)?)
            .max((1.0 - 1.5 * gt) - f(ModuleKind::StateTransfer)?);
    }
    Ok((
        violation,
        "141 log-spaced points in [1e-6, 10]; value is the largest violation".into(),
    ))
}

fn unitary_invariance(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(7);
    let e0 = cphase_channel(CircuitNoise::ideal())?;
    let e = cphase_channel(CircuitNoise::from_gamma_t(0.2)?)?;
    let pre = QuantumOperation::unitary(&random_unitary(4, &mut rng)?)?;
    let post = QuantumOperation::unitary(&random_unitary(4, &mut rng)?)?;
    let wrap = |x: &QuantumOperation| pre.then(x)?.then(&post);
    let plain = operation_fidelity(&e0, &e, &opts.sampler())?.value;
    let dressed = operation_fidelity(&wrap(&e0)?, &wrap(&e)?, &opts.sampler())?.value;
    Ok((
        (plain - dressed).abs(),
        format!("noisy CPHASE at gt = 0.2: {plain:.8} vs {dressed:.8}"),
    ))
}

fn cphase_vs_analytic(opts: &VerifyOptions) -> Result<(f64, String)> {
    analytic_agreement(opts, ModuleKind::Cphase, cphase_channel)
}

// ---------------------------------------------------------------------------
// protocol
// ---------------------------------------------------------------------------

/// `1 − Tr(C²)/Tr(C)²` of the Choi matrix: zero iff the channel is unitary.
fn choi_impurity(ch: &QuantumOperation) -> f64 {
    let c = ch.choi();
    let tr = c.trace().re;
    1.0 - (&c * &c).trace().re / (tr * tr)
}

fn ideal_circuits(_: &VerifyOptions) -> Result<(f64, String)> {
    let ideal = CircuitNoise::ideal();
    let mut cnot = CMatrix::identity(4, 4);
    cnot.swap_rows(2, 3);
    let mut cz = CMatrix::identity(4, 4);
    cz[(2, 2)] = -cz[(2, 2)];
    let cases: [(&str, QuantumOperation, QuantumOperation); 4] = [
        (
            "transfer",
            state_transfer_channel(ideal)?,
            QuantumOperation::identity(2),
        ),
        (
            "dfs_transfer",
            dfs_transfer_channel(ideal)?,
            QuantumOperation::identity(2),
        ),
        (
            "cnot",
            cnot_channel(ideal)?,
            QuantumOperation::unitary(&Operator::new(cnot)?)?,
        ),
        (
            "cphase",
            cphase_channel(ideal)?,
            QuantumOperation::unitary(&Operator::new(cz)?)?,
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, got, want) in &cases {
        let dev = (got.superoperator() - want.superoperator()).camax();
        let e = got.trace_error().max(choi_impurity(got).abs()).max(dev);
        parts.push(format!("{name} {e:.2e}"));
        worst = worst.max(e);
    }
    Ok((
        worst,
        format!(
            "trace error, Choi impurity and deviation from the ideal gate: {}",
            parts.join(", ")
        ),
    ))
}

fn bell_diagonal(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rng = opts.rng(8);
    let mut draw = || -> Result<LogicalPair> {
        let w: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.01..1.0));
        let s: f64 = w.iter().sum();
        LogicalPair::bell_diagonal(w.map(|x| x / s))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let (pair, aux) = (draw()?, draw()?);
        for carrier in [AuxCarrier::Atom, AuxCarrier::Dfs] {
            let out = circuit_purification_round(&pair, &aux, CircuitNoise::ideal(), carrier)?;
            if let Some(p) = out.pair {
                worst = worst.max(p.bell_off_diagonal());
            }
        }
    }
    Ok((worst, "8 random Bell-diagonal pairs, both auxiliary carriers; value is the largest off-Bell-diagonal entry".into()))
}

fn purification_monotonicity(_: &VerifyOptions) -> Result<(f64, String)> {
    let ideal = CircuitNoise::ideal();
    let threshold = purification_threshold(ideal, AuxCarrier::Atom)?;
    let mut violations = 0usize;
    for k in 0..=40 {
        let f = 0.3 + 0.6999 * k as f64 / 40.0;
        if (f - threshold).abs() < 1e-3 {
            continue;
        }
        let (fp, _) = werner_map(f, ideal, AuxCarrier::Atom)?;
        if (f > threshold) != (fp > f) {
            violations += 1;
        }
    }
    Ok((
        violations as f64,
        format!("threshold located at F = {threshold:.10}; 41 Werner inputs in [0.3, 0.9999]"),
    ))
}

fn cnot_vs_analytic(opts: &VerifyOptions) -> Result<(f64, String)> {
    analytic_agreement(opts, ModuleKind::Cnot, cnot_channel)
}

fn transfer_vs_analytic(opts: &VerifyOptions) -> Result<(f64, String)> {
    analytic_agreement(opts, ModuleKind::StateTransfer, dfs_transfer_channel)
}

/// Worst one-node purification fidelity over both auxiliary carriers.
fn purification_fidelity(opts: &VerifyOptions, gt: f64) -> Result<f64> {
    let mut worst: f64 = 1.0;
    for carrier in [AuxCarrier::Atom, AuxCarrier::Dfs] {
        let ideal = purification_side_channel(CircuitNoise::ideal(), carrier)?;
        let noisy = purification_side_channel(CircuitNoise::from_gamma_t(gt)?, carrier)?;
        worst = worst.min(operation_fidelity(&ideal, &noisy, &opts.sampler())?.value);
    }
    Ok(worst)
}

fn purification_bound(opts: &VerifyOptions) -> Result<(f64, String)> {
    let mut rows = Vec::new();
    let mut shortfall: f64 = 0.0;
    for gt in GAMMA_T_GRID {
        let sim = purification_fidelity(opts, gt)?;
        let bound = analytic_module_fidelity(ModuleKind::EntPurification, gt)?.value;
        shortfall = shortfall.max(bound - sim);
        rows.push((gt, sim, bound));
    }
    Ok((
        shortfall.max(0.0),
        grid_detail("simulated (worse carrier) vs lower bound", &rows),
    ))
}

fn swap_of_perfect_pairs(_: &VerifyOptions) -> Result<(f64, String)> {
    let phi = LogicalPair::phi_plus();
    let out = entanglement_swap(&phi, &phi, CircuitNoise::ideal())?;
    let worst = max_over(out.branch_pairs.iter().enumerate(), |(k, p)| {
        p.as_ref()
            .map(|p| 1.0 - p.fidelity())
            .ok_or_else(|| Error::Search(format!("Bell-measurement outcome {k} never occurs")))
    })?;
    Ok((worst, "1 − F(Φ⁺) in each of the four outcomes".into()))
}

fn transfer_embedding(opts: &VerifyOptions) -> Result<(f64, String)> {
    let worst = max_over([0.0, 0.05, 0.4], |gt| {
        let psi: DensityMatrix = random_pure_state(2, opts.seed)?.to_density()?;
        let chk = transfer_embedding_check(&psi, CircuitNoise::from_gamma_t(gt)?)?;
        Ok(chk.max_deviation.max(chk.leakage))
    })?;
    Ok((
        worst,
        "16-dim register vs two-level model at gt = 0, 0.05, 0.4".into(),
    ))
}
