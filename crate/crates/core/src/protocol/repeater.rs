//! The nested purify-and-swap repeater loop.
//!
//! Level 1 works on one elementary segment: a source pair of Werner
//! fidelity `F0` is held by two ancilla atoms, moved into DFS qubits by the
//! transfer circuit at both ends, and purified until it reaches the target
//! fidelity. Each further level joins two pairs of the level below by
//! entanglement swapping and purifies the result again, so `L` levels span
//! `2^(L−1)` segments. All segments of a level are identical, so one pair
//! stands for all of them.
//!
//! Auxiliary pairs follow one of two policies:
//!
//! * pumping: the auxiliary pair is always a fresh copy of the level's input
//!   pair (at level 1 a source pair on ancilla atoms), so the fidelity
//!   approaches a fixed point below 1;
//! * recurrence: the auxiliary pair is an identical copy of the current
//!   pair, held in DFS qubits.
//!
//! Timing: module durations add up along the chain; the segments of a level
//! and the copies consumed by a round are produced in parallel, so a round
//! costs one purification module. `success_probability` is the chance that
//! no round anywhere in the chain is rejected.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::budget::ModuleTimes;
use super::circuits::{state_transfer_channel, CircuitNoise};
use super::pairs::LogicalPair;
use super::purification::{circuit_purification_round, purification_round_sampled, AuxCarrier};
use super::swap::entanglement_swap;
use crate::error::{Error, Result};
use crate::quantum::DensityMatrix;

/// A round counts as progress only if it raises the fidelity by more than this.
pub const STALL_TOL: f64 = 1e-9;
/// Most restarts of one level in a sampled trajectory.
pub const MAX_ATTEMPTS: usize = 100_000;
/// Deepest nesting accepted.
pub const MAX_LEVELS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxPolicy {
    #[default]
    Pumping,
    Recurrence,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExecutionMode {
    /// Branch-weighted density matrices; postselection by exact projection.
    #[default]
    Exact,
    /// Seeded trajectories with drawn measurement outcomes, run in addition
    /// to the exact schedule.
    Sampled { trajectories: usize },
}

/// Parameters of a repeater run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Werner fidelity of the source pairs.
    pub source_fidelity: f64,
    /// Smallest fidelity purification is attempted on.
    pub f_min: f64,
    /// Fidelity at which a level stops purifying.
    pub target_fidelity: f64,
    /// Cap on purification rounds per level.
    pub max_rounds: usize,
    /// Nesting levels; level `L` spans `2^(L−1)` segments.
    pub levels: usize,
    /// Ancilla dephasing rate, 1/s.
    pub gamma: f64,
    /// Module durations, seconds.
    pub gate_times: ModuleTimes,
    pub seed: u64,
    #[serde(default)]
    pub aux_policy: AuxPolicy,
    #[serde(default)]
    pub mode: ExecutionMode,
}

impl ProtocolConfig {
    /// Noise-free single-level run with the given source fidelity and target.
    pub fn ideal(source_fidelity: f64, target_fidelity: f64) -> Self {
        ProtocolConfig {
            source_fidelity,
            f_min: 0.5,
            target_fidelity,
            max_rounds: 50,
            levels: 1,
            gamma: 0.0,
            gate_times: ModuleTimes::zero(),
            seed: 0,
            aux_policy: AuxPolicy::Pumping,
            mode: ExecutionMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source_fidelity > 0.0 && self.source_fidelity <= 1.0) {
            return Err(Error::validation("source fidelity must lie in (0, 1]"));
        }
        if !(self.f_min > 0.0 && self.f_min < 1.0) {
            return Err(Error::validation("F_min must lie in (0, 1)"));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(Error::validation("target fidelity must lie in (0, 1]"));
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::validation(format!(
                "levels must lie in 1..={MAX_LEVELS}"
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation("gamma must be finite and non-negative"));
        }
        if let ExecutionMode::Sampled { trajectories: 0 } = self.mode {
            return Err(Error::validation(
                "sampled mode needs at least one trajectory",
            ));
        }
        self.gate_times.validate()
    }

    /// Ancilla coherence per CPHASE.
    pub fn noise(&self) -> CircuitNoise {
        CircuitNoise::from_gamma_t(self.gamma * self.gate_times.cphase)
            .expect("validated gamma and time")
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Every level reached the target fidelity.
    Reached,
    /// A level's input fell below `F_min`; purification was not attempted.
    BelowThreshold,
    /// Rounds stopped improving the fidelity (a fixed point).
    Stalled,
    /// The round cap was hit first.
    RoundLimit,
}

/// What happened at one nesting level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    /// Elementary segments spanned by one pair of this level.
    pub span: usize,
    /// Pairs of this level needed for the whole chain.
    pub pairs: usize,
    pub input_fidelity: f64,
    pub output_fidelity: f64,
    pub rounds: usize,
    /// Fidelity after each round.
    pub round_fidelities: Vec<f64>,
    /// Acceptance probability of each round.
    pub round_success: Vec<f64>,
    /// Cumulative time at the end of the level, seconds.
    pub time: f64,
    pub status: RunStatus,
}

/// Statistics of the sampled trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSummary {
    pub trajectories: usize,
    pub mean_time: f64,
    pub std_time: f64,
    pub mean_fidelity: f64,
    /// Accepted rounds over attempted rounds.
    pub acceptance_rate: f64,
    /// Trajectories in which every level finished within the attempt cap.
    pub completed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeaterResult {
    pub final_fidelity: f64,
    pub rounds: usize,
    pub total_time: f64,
    pub success_probability: f64,
    pub status: RunStatus,
    pub converged: bool,
    pub levels: Vec<LevelTrace>,
    pub sampled: Option<SampledSummary>,
}

fn elementary_pair(cfg: &ProtocolConfig) -> Result<LogicalPair> {
    let source = LogicalPair::werner(cfg.source_fidelity)?;
    let ch = state_transfer_channel(cfg.noise())?;
    let both = ch.tensor(&ch)?;
    let out = both.apply(source.state())?;
    LogicalPair::new(DensityMatrix::from_matrix_unchecked(out.into_matrix()))
}

/// Auxiliary pair and its carrier at a level.
fn aux_for(
    cfg: &ProtocolConfig,
    level: usize,
    input: &LogicalPair,
    current: &LogicalPair,
) -> Result<(LogicalPair, AuxCarrier)> {
    Ok(match (cfg.aux_policy, level) {
        (AuxPolicy::Pumping, 1) => (LogicalPair::werner(cfg.source_fidelity)?, AuxCarrier::Atom),
        (AuxPolicy::Pumping, _) => (input.clone(), AuxCarrier::Dfs),
        (AuxPolicy::Recurrence, _) => (current.clone(), AuxCarrier::Dfs),
    })
}

fn reached(f: f64, target: f64) -> bool {
    f >= target - 1e-12
}

/// Runs the nested scheme. Non-convergence is reported in the result.
pub fn nested_repeater_run(cfg: &ProtocolConfig) -> Result<RepeaterResult> {
    cfg.validate()?;
    let noise = cfg.noise();
    let times = &cfg.gate_times;
    let mut time = times.state_transfer;
    let mut success = 1.0;
    let mut traces = Vec::with_capacity(cfg.levels);
    let mut pair = elementary_pair(cfg)?;
    let mut status = RunStatus::Reached;
    let mut total_rounds = 0;

    for level in 1..=cfg.levels {
        if level > 1 {
            pair = entanglement_swap(&pair, &pair, noise)?.pair;
            time += times.swap();
        }
        let input = pair.clone();
        let pairs = 1usize << (cfg.levels - level);
        let mut trace = LevelTrace {
            level,
            span: 1 << (level - 1),
            pairs,
            input_fidelity: input.fidelity(),
            output_fidelity: input.fidelity(),
            rounds: 0,
            round_fidelities: Vec::new(),
            round_success: Vec::new(),
            time,
            status: RunStatus::Reached,
        };
        if trace.input_fidelity < cfg.f_min && !reached(trace.input_fidelity, cfg.target_fidelity) {
            trace.status = RunStatus::BelowThreshold;
        } else {
            let mut f = trace.input_fidelity;
            while !reached(f, cfg.target_fidelity) {
                if trace.rounds >= cfg.max_rounds {
                    trace.status = RunStatus::RoundLimit;
                    break;
                }
                let (aux, carrier) = aux_for(cfg, level, &input, &pair)?;
                let out = circuit_purification_round(&pair, &aux, noise, carrier)?;
                let next = out
                    .pair
                    .ok_or_else(|| Error::Search("purification round never succeeds".into()))?;
                trace.rounds += 1;
                trace.round_success.push(out.p_success);
                success *= out.p_success.powi(pairs as i32);
                time += times.purification;
                let nf = next.fidelity();
                trace.round_fidelities.push(nf);
                pair = next;
                if nf <= f + STALL_TOL {
                    trace.status = RunStatus::Stalled;
                    break;
                }
                f = nf;
            }
        }
        trace.output_fidelity = pair.fidelity();
        trace.time = time;
        total_rounds += trace.rounds;
        let level_status = trace.status;
        traces.push(trace);
        if level_status != RunStatus::Reached {
            status = level_status;
            break;
        }
    }

    let sampled = match cfg.mode {
        ExecutionMode::Exact => None,
        ExecutionMode::Sampled { trajectories } => Some(run_sampled(cfg, &traces, trajectories)?),
    };
    Ok(RepeaterResult {
        final_fidelity: pair.fidelity(),
        rounds: total_rounds,
        total_time: time,
        success_probability: success,
        converged: status == RunStatus::Reached,
        status,
        levels: traces,
        sampled,
    })
}

struct Trajectory {
    time: f64,
    fidelity: f64,
    accepted: usize,
    attempted: usize,
    completed: bool,
}

/// One trajectory: the exact schedule's round counts, with outcomes drawn.
/// A rejected round discards the level's pair; the level restarts from a
/// regenerated input, which costs the time the input took to make.
fn trajectory(
    cfg: &ProtocolConfig,
    plan: &[LevelTrace],
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let noise = cfg.noise();
    let times = &cfg.gate_times;
    let mut t = Trajectory {
        time: times.state_transfer,
        fidelity: 0.0,
        accepted: 0,
        attempted: 0,
        completed: true,
    };
    let mut pair = elementary_pair(cfg)?;
    let mut input_cost = times.state_transfer;
    for level in plan {
        if level.level > 1 {
            pair = entanglement_swap(&pair, &pair, noise)?.pair;
            t.time += times.swap();
            input_cost += times.swap();
        }
        let input = pair.clone();
        let mut attempts = 0;
        let mut done = 0;
        while done < level.rounds {
            let (aux, carrier) = aux_for(cfg, level.level, &input, &pair)?;
            let round = purification_round_sampled(&pair, &aux, noise, carrier, rng)?;
            t.attempted += 1;
            t.time += times.purification;
            if round.accepted {
                t.accepted += 1;
                done += 1;
                pair = round.pair;
            } else {
                attempts += 1;
                if attempts >= MAX_ATTEMPTS {
                    t.completed = false;
                    break;
                }
                done = 0;
                pair = input.clone();
                t.time += input_cost;
            }
        }
        input_cost = t.time;
        if !t.completed {
            break;
        }
    }
    t.fidelity = pair.fidelity();
    Ok(t)
}

fn run_sampled(
    cfg: &ProtocolConfig,
    plan: &[LevelTrace],
    trajectories: usize,
) -> Result<SampledSummary> {
    let runs: Vec<Trajectory> = (0..trajectories)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            trajectory(cfg, plan, &mut rng)
        })
        .collect::<Result<_>>()?;
    let n = runs.len() as f64;
    let mean_time = runs.iter().map(|r| r.time).sum::<f64>() / n;
    let var = runs
        .iter()
        .map(|r| (r.time - mean_time).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let attempted: usize = runs.iter().map(|r| r.attempted).sum();
    let accepted: usize = runs.iter().map(|r| r.accepted).sum();
    Ok(SampledSummary {
        trajectories,
        mean_time,
        std_time: var.sqrt(),
        mean_fidelity: runs.iter().map(|r| r.fidelity).sum::<f64>() / n,
        acceptance_rate: if attempted > 0 {
            accepted as f64 / attempted as f64
        } else {
            1.0
        },
        completed: runs.iter().filter(|r| r.completed).count(),
    })
}

/// Fidelities of repeated rounds with a fixed auxiliary pair (pumping) or a
/// copy of the current pair (recurrence), starting from Werner `F0`, ideal
/// gates; for oracle comparisons and fixed-point studies.
pub fn iterate_purification(f0: f64, policy: AuxPolicy, rounds: usize) -> Result<Vec<f64>> {
    let start = LogicalPair::werner(f0)?;
    let mut pair = start.clone();
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let aux = match policy {
            AuxPolicy::Pumping => &start,
            AuxPolicy::Recurrence => &pair,
        };
        let next = circuit_purification_round(&pair, aux, CircuitNoise::ideal(), AuxCarrier::Atom)?
            .pair
            .ok_or_else(|| Error::Search("purification round never succeeds".into()))?;
        out.push(next.fidelity());
        pair = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form two-copy map of the bilateral-CNOT protocol with local
    /// `R^x(±π/2)` rotations, acting on Bell weights. Returns the accepted
    /// weights and the acceptance probability.
    fn dejmps(a: [f64; 4], b: [f64; 4]) -> ([f64; 4], f64) {
        // Weights ordered Φ⁺, Ψ⁻, Ψ⁺, Φ⁻ as in the usual statement of the map.
        let (a1, a2, a3, a4) = (a[0], a[3], a[2], a[1]);
        let (b1, b2, b3, b4) = (b[0], b[3], b[2], b[1]);
        let n = (a1 + a2) * (b1 + b2) + (a3 + a4) * (b3 + b4);
        let out = [
            (a1 * b1 + a2 * b2) / n,
            (a3 * b4 + a4 * b3) / n,
            (a3 * b3 + a4 * b4) / n,
            (a1 * b2 + a2 * b1) / n,
        ];
        // Back to Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
        ([out[0], out[3], out[2], out[1]], n)
    }

    #[test]
    fn perfect_source_needs_no_rounds() {
        let r = nested_repeater_run(&ProtocolConfig::ideal(1.0, 0.99)).unwrap();
        assert_eq!(r.rounds, 0);
        assert!((r.final_fidelity - 1.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn recurrence_rounds_follow_the_map_oracle() {
        let cfg = ProtocolConfig {
            aux_policy: AuxPolicy::Recurrence,
            ..ProtocolConfig::ideal(0.8, 0.95)
        };
        let r = nested_repeater_run(&cfg).unwrap();
        let mut w = LogicalPair::werner(0.8).unwrap().bell_weights();
        let mut n = 0;
        while w[0] < 0.95 {
            w = dejmps(w, w).0;
            n += 1;
        }
        assert_eq!(r.rounds, n);
        assert!((r.final_fidelity - w[0]).abs() < 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn pumping_stalls_below_one() {
        let cfg = ProtocolConfig {
            max_rounds: 500,
            ..ProtocolConfig::ideal(0.8, 0.99)
        };
        let r = nested_repeater_run(&cfg).unwrap();
        assert!(!r.converged);
        assert!(r.final_fidelity < 0.99 && r.final_fidelity > 0.9);
        // Oracle fixed point of the pumping map.
        let aux = LogicalPair::werner(0.8).unwrap().bell_weights();
        let mut w = aux;
        for _ in 0..2000 {
            w = dejmps(w, aux).0;
        }
        assert!(
            (r.final_fidelity - w[0]).abs() < 1e-6,
            "{} {}",
            r.final_fidelity,
            w[0]
        );
    }

    #[test]
    fn below_threshold_is_reported_not_raised() {
        let r = nested_repeater_run(&ProtocolConfig::ideal(0.45, 0.9)).unwrap();
        assert_eq!(r.status, RunStatus::BelowThreshold);
        assert!(!r.converged);
    }

    #[test]
    fn two_levels_swap_then_purify() {
        let cfg = ProtocolConfig {
            levels: 2,
            aux_policy: AuxPolicy::Recurrence,
            ..ProtocolConfig::ideal(0.8, 0.95)
        };
        let r = nested_repeater_run(&cfg).unwrap();
        assert_eq!(r.levels.len(), 2);
        let l1 = r.levels[0].output_fidelity;
        // Swapping two Werner-like pairs: Φ⁺ weight is Σ w_k².
        let w = LogicalPair::werner(0.8).unwrap().bell_weights();
        let mut w1 = w;
        for _ in 0..r.levels[0].rounds {
            w1 = dejmps(w1, w1).0;
        }
        assert!((l1 - w1[0]).abs() < 1e-10);
        let swapped: f64 = w1.iter().map(|x| x * x).sum();
        assert!((r.levels[1].input_fidelity - swapped).abs() < 1e-10);
        assert!(r.converged);
        assert_eq!(r.levels[1].pairs, 1);
        assert_eq!(r.levels[0].pairs, 2);
    }

    #[test]
    fn sampled_mode_is_reproducible() {
        let cfg = ProtocolConfig {
            mode: ExecutionMode::Sampled { trajectories: 16 },
            seed: 11,
            aux_policy: AuxPolicy::Recurrence,
            gate_times: ModuleTimes {
                state_transfer: 1.0,
                purification: 2.0,
                cnot: 3.0,
                readout: 1.0,
                cphase: 0.5,
            },
            ..ProtocolConfig::ideal(0.8, 0.95)
        };
        let a = nested_repeater_run(&cfg).unwrap().sampled.unwrap();
        let b = nested_repeater_run(&cfg).unwrap().sampled.unwrap();
        assert_eq!(a, b);
        assert!(a.acceptance_rate > 0.5 && a.acceptance_rate < 1.0);
        assert!(a.mean_time >= 1.0 + 3.0 * 2.0);
    }
}
