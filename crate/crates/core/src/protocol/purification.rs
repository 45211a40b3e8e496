//! Entanglement purification of logical pairs.
//!
//! At each node the primary DFS qubit `L` and the auxiliary qubit `a` first
//! get the local basis change `U` (`R^x(π/2)` at A, `R^x(−π/2)` at B). The
//! auxiliary qubit then controls `−Z_L` between `R^z(−π/2)R^x(−π/2)` and its
//! inverse, `L` is conjugated by `R_L^x(∓π)`, and `a` is measured. The
//! round succeeds when the two outcomes coincide.
//!
//! The auxiliary pair is held either by ancilla atoms (the gate is a single
//! dephasing CPHASE and `a` is measured directly) or by DFS qubits (the gate
//! runs through an ancilla and `a` is read out by the measurement circuit).

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use super::circuits::{
    branch_records, dfs_cphase_gadget, measure_gadget, with_classical_bits, CircuitId,
    CircuitNoise, MeasurementRecord,
};
use super::pairs::LogicalPair;
use super::register::{rx, rz, Register};
use crate::error::{Error, Result};
use crate::noise::QuantumOperation;
use crate::quantum::{tensor, CMatrix, DensityMatrix};

/// Bisection tolerance of [`purification_threshold`].
pub const THRESHOLD_TOL: f64 = 1e-12;

/// What holds the auxiliary pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxCarrier {
    /// Ancilla atoms, entangled directly by the source.
    #[default]
    Atom,
    /// DFS qubits.
    Dfs,
}

impl AuxCarrier {
    fn circuit(self) -> CircuitId {
        match self {
            AuxCarrier::Atom => CircuitId::Purification,
            AuxCarrier::Dfs => CircuitId::DfsPurification,
        }
    }
}

/// The local part of a round at one node; returns the outcome index of the
/// auxiliary readout.
pub fn purification_side(
    reg: &mut Register,
    primary: &str,
    aux: &str,
    basis_change: &CMatrix,
    noise: CircuitNoise,
    carrier: AuxCarrier,
) -> Result<usize> {
    reg.apply(aux, basis_change)?;
    reg.apply(primary, basis_change)?;
    reg.apply(aux, &rz(-FRAC_PI_2))?;
    reg.apply(aux, &rx(-FRAC_PI_2))?;
    reg.apply(primary, &rx(-PI))?;
    match carrier {
        AuxCarrier::Atom => reg.controlled_neg_z(aux, primary, noise.coherence())?,
        AuxCarrier::Dfs => {
            dfs_cphase_gadget(reg, aux, primary, noise)?;
        }
    }
    reg.apply(aux, &rx(FRAC_PI_2))?;
    reg.apply(aux, &rz(FRAC_PI_2))?;
    reg.apply(primary, &rx(PI))?;
    match carrier {
        AuxCarrier::Atom => reg.measure(aux),
        AuxCarrier::Dfs => {
            let k = measure_gadget(reg, aux, noise)?;
            reg.trace_out(aux)?;
            Ok(k)
        }
    }
}

/// Result of one round in density-matrix mode.
#[derive(Clone, Debug)]
pub struct PurificationOutcome {
    /// Postselected pair, `None` if acceptance has zero probability.
    pub pair: Option<LogicalPair>,
    pub p_success: f64,
    pub records: Vec<MeasurementRecord>,
}

/// Result of one round in sampled mode.
#[derive(Clone, Debug)]
pub struct SampledRound {
    pub accepted: bool,
    /// State of the primary pair after the drawn outcomes.
    pub pair: LogicalPair,
    pub record: MeasurementRecord,
}

fn run_round(
    pair: &LogicalPair,
    aux: &LogicalPair,
    noise: CircuitNoise,
    carrier: AuxCarrier,
) -> Result<(Register, usize, usize)> {
    let joint = tensor(pair.state(), aux.state())?;
    let mut reg = Register::new(&["A", "B", "a", "b"], &joint)?;
    let ka = purification_side(&mut reg, "A", "a", &rx(FRAC_PI_2), noise, carrier)?;
    let kb = purification_side(&mut reg, "B", "b", &rx(-FRAC_PI_2), noise, carrier)?;
    Ok((reg, ka, kb))
}

fn normalized_pair(reg: &Register, m: CMatrix, p: f64) -> Result<LogicalPair> {
    let m = reg.permuted(&m, &["A", "B"])?.unscale(p);
    LogicalPair::new(DensityMatrix::from_matrix_unchecked(
        (&m + m.adjoint()).unscale(2.0),
    ))
}

/// One purification round on both nodes with postselection on coincident
/// outcomes; the primary pair's first factor is node A.
pub fn circuit_purification_round(
    pair: &LogicalPair,
    aux: &LogicalPair,
    noise: CircuitNoise,
    carrier: AuxCarrier,
) -> Result<PurificationOutcome> {
    let (reg, ka, kb) = run_round(pair, aux, noise, carrier)?;
    let accept = |o: &[u8]| o[ka] == o[kb];
    let kept = reg.state_where(accept);
    let p_success = kept.trace().re;
    let pair = if p_success > 1e-15 {
        Some(normalized_pair(&reg, kept, p_success)?)
    } else {
        None
    };
    Ok(PurificationOutcome {
        pair,
        p_success,
        records: branch_records(carrier.circuit(), &reg, accept),
    })
}

/// One round with outcomes drawn from their Born probabilities.
pub fn purification_round_sampled<R: Rng + ?Sized>(
    pair: &LogicalPair,
    aux: &LogicalPair,
    noise: CircuitNoise,
    carrier: AuxCarrier,
    rng: &mut R,
) -> Result<SampledRound> {
    let (reg, ka, kb) = run_round(pair, aux, noise, carrier)?;
    let records = branch_records(carrier.circuit(), &reg, |o| o[ka] == o[kb]);
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    let mut pick = records.len() - 1;
    for (i, rec) in records.iter().enumerate() {
        acc += rec.probability;
        if r < acc {
            pick = i;
            break;
        }
    }
    let record = records[pick].clone();
    if !(record.probability > 0.0) {
        return Err(Error::Search("sampled a zero-probability branch".into()));
    }
    let pair = normalized_pair(&reg, reg.branches()[pick].rho.clone(), record.probability)?;
    Ok(SampledRound {
        accepted: record.accepted,
        pair,
        record,
    })
}

/// Werner-input purification map `F ↦ F'` with `F_aux = F`.
pub fn werner_map(f: f64, noise: CircuitNoise, carrier: AuxCarrier) -> Result<(f64, f64)> {
    let w = LogicalPair::werner(f)?;
    let out = circuit_purification_round(&w, &w, noise, carrier)?;
    let pair = out
        .pair
        .ok_or_else(|| Error::Search("purification never succeeds".into()))?;
    Ok((pair.fidelity(), out.p_success))
}

/// Smallest Werner fidelity that a round (with an equal auxiliary pair)
/// improves, located by bisection of `F'(F) − F` on `[0.3, 0.95]`.
pub fn purification_threshold(noise: CircuitNoise, carrier: AuxCarrier) -> Result<f64> {
    let g = |f: f64| werner_map(f, noise, carrier).map(|(fp, _)| fp - f);
    let (mut lo, mut hi) = (0.3, 0.95);
    if !(g(lo)? < 0.0 && g(hi)? > 0.0) {
        return Err(Error::Search(
            "purification map has no threshold in [0.3, 0.95]".into(),
        ));
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One node's purification step as a map from primary ⊗ auxiliary logical
/// qubits to primary ⊗ classical outcome (`|m⟩⟨m|`).
pub fn purification_side_channel(
    noise: CircuitNoise,
    carrier: AuxCarrier,
) -> Result<QuantumOperation> {
    QuantumOperation::from_fn(4, 4, |m| {
        let mut reg = Register::new(
            &["L", "a"],
            &DensityMatrix::from_matrix_unchecked(m.clone()),
        )?;
        let k = purification_side(&mut reg, "L", "a", &rx(FRAC_PI_2), noise, carrier)?;
        Ok(with_classical_bits(&reg, &[k]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Purification oracle written directly on the 16-dim two-pair space:
    /// the local maps are bilateral CNOTs (primary controls auxiliary) after
    /// `R^x(±π/2)`, and acceptance projects the auxiliary pair onto
    /// coincident `Z` outcomes.
    fn bilateral_oracle(pair: &LogicalPair, aux: &LogicalPair) -> (f64, f64) {
        use crate::quantum::{qubit, Operator};
        let id = CMatrix::identity(2, 2);
        let kron = |ms: &[&CMatrix]| {
            ms.iter()
                .skip(1)
                .fold(ms[0].clone(), |acc, m| acc.kronecker(*m))
        };
        // Order A, B, a, b.
        let local = kron(&[
            &qubit::rx(FRAC_PI_2),
            &qubit::rx(-FRAC_PI_2),
            &qubit::rx(FRAC_PI_2),
            &qubit::rx(-FRAC_PI_2),
        ]);
        let mut cnots = CMatrix::identity(16, 16);
        for (c, t) in [(0usize, 2usize), (1, 3)] {
            let mut u = CMatrix::zeros(16, 16);
            for i in 0..16 {
                let cb = (i >> (3 - c)) & 1;
                let j = if cb == 1 { i ^ (1 << (3 - t)) } else { i };
                u[(j, i)] = crate::quantum::ONE;
            }
            cnots = u * cnots;
        }
        let u = Operator::new(cnots * local).unwrap();
        let rho = tensor(pair.state(), aux.state())
            .unwrap()
            .conjugate(&u)
            .unwrap();
        let mut kept = CMatrix::zeros(4, 4);
        for m in 0..2usize {
            let proj = kron(&[&id, &id, &basis(m), &basis(m)]);
            let r = &proj * rho.matrix() * &proj;
            // Trace out a and b.
            for i in 0..4 {
                for j in 0..4 {
                    kept[(i, j)] += r[((i << 2) | (m << 1) | m, (j << 2) | (m << 1) | m)];
                }
            }
        }
        let p = kept.trace().re;
        let phi = crate::protocol::pairs::Bell::PhiPlus.vector();
        (phi.dotc(&(&kept * &phi)).re / p, p)
    }

    fn basis(m: usize) -> CMatrix {
        let mut b = CMatrix::zeros(2, 2);
        b[(m, m)] = crate::quantum::ONE;
        b
    }

    #[test]
    fn perfect_pairs_are_a_fixed_point() {
        let phi = LogicalPair::phi_plus();
        for carrier in [AuxCarrier::Atom, AuxCarrier::Dfs] {
            let out =
                circuit_purification_round(&phi, &phi, CircuitNoise::ideal(), carrier).unwrap();
            assert!((out.p_success - 1.0).abs() < 1e-10);
            assert!((out.pair.unwrap().fidelity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn werner_round_matches_the_bilateral_oracle() {
        let w = LogicalPair::werner(0.8).unwrap();
        let (f_or, p_or) = bilateral_oracle(&w, &w);
        for carrier in [AuxCarrier::Atom, AuxCarrier::Dfs] {
            let out = circuit_purification_round(&w, &w, CircuitNoise::ideal(), carrier).unwrap();
            assert!((out.p_success - p_or).abs() < 1e-10);
            assert!((out.pair.unwrap().fidelity() - f_or).abs() < 1e-10);
        }
        assert!(f_or > 0.8);
        let total: f64 =
            circuit_purification_round(&w, &w, CircuitNoise::ideal(), AuxCarrier::Atom)
                .unwrap()
                .records
                .iter()
                .map(|r| r.probability)
                .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_bell_diagonal_inputs_stay_bell_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let mut w = [0.0; 4];
            for x in &mut w {
                *x = rng.gen::<f64>();
            }
            let s: f64 = w.iter().sum();
            let a = LogicalPair::bell_diagonal(w.map(|x| x / s)).unwrap();
            let b = LogicalPair::werner(0.5 + 0.5 * rng.gen::<f64>()).unwrap();
            let out = circuit_purification_round(&a, &b, CircuitNoise::ideal(), AuxCarrier::Atom)
                .unwrap();
            let pair = out.pair.unwrap();
            assert!(pair.is_bell_diagonal(), "{}", pair.bell_off_diagonal());
            let (f_or, p_or) = bilateral_oracle(&a, &b);
            assert!((pair.fidelity() - f_or).abs() < 1e-10);
            assert!((out.p_success - p_or).abs() < 1e-10);
        }
    }

    #[test]
    fn below_threshold_fidelity_decreases() {
        let (f, _) = werner_map(0.45, CircuitNoise::ideal(), AuxCarrier::Atom).unwrap();
        assert!(f < 0.45);
        let t = purification_threshold(CircuitNoise::ideal(), AuxCarrier::Atom).unwrap();
        assert!((t - 0.5).abs() < 1e-9, "{t}");
    }

    #[test]
    fn sampled_rounds_are_seeded() {
        let w = LogicalPair::werner(0.8).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| {
                    purification_round_sampled(
                        &w,
                        &w,
                        CircuitNoise::ideal(),
                        AuxCarrier::Atom,
                        &mut rng,
                    )
                    .unwrap()
                    .accepted
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
    }

    #[test]
    fn side_channel_is_trace_preserving() {
        let ch =
            purification_side_channel(CircuitNoise::from_gamma_t(0.1).unwrap(), AuxCarrier::Dfs)
                .unwrap();
        assert!(ch.trace_error() < 1e-12);
    }
}
