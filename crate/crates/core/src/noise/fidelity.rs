//! State and operation fidelities, and the closed-form module fidelities
//! under ancilla dephasing.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::QuantumOperation;
use crate::error::{Error, Result};
use crate::quantum::{
    hermitian_eigen, random_pure_state_with, tensor, CMatrix, CVector, DensityMatrix, StateVector,
    C64,
};

/// Eigenvalues below this are treated as exact zeros in matrix square roots.
const ROUNDOFF_EIGENVALUE: f64 = 1e-13;

/// Squared-trace (Uhlmann) fidelity `(Tr√(√σ ρ √σ))²`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(&(m + m.adjoint()).unscale(2.0));
    if let Some(v) = vals.iter().find(|&&v| v < crate::quantum::EIGEN_FLOOR) {
        return Err(Error::validation(format!(
            "matrix is not positive semidefinite (eigenvalue {v:e})"
        )));
    }
    // Round-off eigenvalues of rank-deficient inputs would otherwise enter
    // through their square roots (1e-16 becomes 1e-8).
    let root = CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| {
            C64::new(
                if v > ROUNDOFF_EIGENVALUE {
                    v.sqrt()
                } else {
                    0.0
                },
                0.0,
            )
        }),
    );
    Ok(&vecs * CMatrix::from_diagonal(&root) * vecs.adjoint())
}

fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: sigma.nrows(),
            found: rho.nrows(),
        });
    }
    let s = psd_sqrt(sigma)?;
    let inner = &s * rho * &s;
    let (vals, _) = hermitian_eigen(&(&inner + inner.adjoint()).unscale(2.0));
    let tr: f64 = vals
        .iter()
        .filter(|&&v| v > ROUNDOFF_EIGENVALUE)
        .map(|&v| v.sqrt())
        .sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Fidelity of a (normalized) pure state with a density matrix, `⟨ψ|σ|ψ⟩`.
pub fn pure_fidelity(psi: &CVector, sigma: &CMatrix) -> f64 {
    psi.dotc(&(sigma * psi)).re.clamp(0.0, 1.0)
}

/// Which pure inputs the minimization ranges over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSpace {
    /// All pure states of the input space.
    Full,
    /// Product states over the listed factor dimensions.
    Product(Vec<usize>),
}

/// Sampling and refinement settings of [`operation_fidelity`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Number of seeded Haar-random pure inputs.
    pub samples: usize,
    pub seed: u64,
    /// Number of best candidates refined by Nelder-Mead.
    pub refine: usize,
    /// Iteration cap per refinement.
    pub max_iters: u64,
    pub inputs: InputSpace,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 10_000,
            seed: 0x5eed,
            refine: 4,
            max_iters: 3_000,
            inputs: InputSpace::Full,
        }
    }
}

/// Minimum fidelity found and the input state attaining it.
#[derive(Clone, Debug)]
pub struct OperationFidelity {
    pub value: f64,
    /// Best value among the random samples, before refinement.
    pub sampled_value: f64,
    pub argmin: StateVector,
}

fn factor_dims(dim: usize, inputs: &InputSpace) -> Result<Vec<usize>> {
    match inputs {
        InputSpace::Full => Ok(vec![dim]),
        InputSpace::Product(dims) => {
            if dims.is_empty() || dims.iter().product::<usize>() != dim || dims.contains(&0) {
                return Err(Error::validation(
                    "product factors must multiply to the input dimension",
                ));
            }
            Ok(dims.clone())
        }
    }
}

/// State from real parameters: per factor, interleaved (re, im) pairs,
/// normalized and tensored.
fn state_from_params(p: &[f64], dims: &[usize]) -> Option<CVector> {
    let mut out = CVector::from_element(1, C64::new(1.0, 0.0));
    let mut offset = 0;
    for &d in dims {
        let v = CVector::from_iterator(
            d,
            (0..d).map(|k| C64::new(p[offset + 2 * k], p[offset + 2 * k + 1])),
        );
        offset += 2 * d;
        let n = v.norm();
        if !(n > 1e-12) {
            return None;
        }
        out = out.kronecker(&v.unscale(n));
    }
    Some(out)
}

fn params_from_state(parts: &[CVector]) -> Vec<f64> {
    parts
        .iter()
        .flat_map(|v| v.iter().flat_map(|z| [z.re, z.im]))
        .collect()
}

struct Objective<'a> {
    e0: &'a QuantumOperation,
    e: &'a QuantumOperation,
    dims: &'a [usize],
}

impl Objective<'_> {
    fn eval(&self, psi: &CVector) -> Result<f64> {
        let rho = psi * psi.adjoint();
        let a = self.e0.apply_matrix(&rho)?;
        let b = self.e.apply_matrix(&rho)?;
        fidelity_matrices(&a, &b)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        match state_from_params(p, self.dims) {
            Some(psi) => self
                .eval(&psi)
                .map_err(|e| argmin::core::Error::msg(e.to_string())),
            None => Ok(1.0),
        }
    }
}

/// `min_ψ f(ℰ₀(ψ), ℰ(ψ))` over pure inputs: seeded Haar sampling (sample `k`
/// draws from ChaCha stream `k`, so the result is independent of threading)
/// followed by Nelder-Mead refinement of the best candidates.
pub fn operation_fidelity(
    e0: &QuantumOperation,
    e: &QuantumOperation,
    cfg: &SamplerConfig,
) -> Result<OperationFidelity> {
    if e0.dim_in() != e.dim_in() || e0.dim_out() != e.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: e0.dim_in(),
            found: e.dim_in(),
        });
    }
    if cfg.samples == 0 {
        return Err(Error::validation("need at least one sample"));
    }
    let dims = factor_dims(e0.dim_in(), &cfg.inputs)?;
    let objective = Objective { e0, e, dims: &dims };

    let sampled: Vec<(f64, Vec<f64>)> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| -> Result<(f64, Vec<f64>)> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let parts = dims
                .iter()
                .map(|&d| random_pure_state_with(d, &mut rng).map(|s| s.into_amplitudes()))
                .collect::<Result<Vec<_>>>()?;
            let p = params_from_state(&parts);
            let psi = state_from_params(&p, &dims).expect("normalized sample");
            Ok((objective.eval(&psi)?, p))
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..sampled.len()).collect();
    order.sort_by(|&a, &b| sampled[a].0.total_cmp(&sampled[b].0).then(a.cmp(&b)));
    let sampled_value = sampled[order[0]].0;

    let mut best = sampled[order[0]].clone();
    for &k in order.iter().take(cfg.refine) {
        let start = &sampled[k].1;
        let mut simplex = vec![start.clone()];
        for i in 0..start.len() {
            let mut v = start.clone();
            v[i] += 0.05;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-15)
            .map_err(|e| Error::Search(e.to_string()))?;
        let res = Executor::new(Objective { e0, e, dims: &dims }, solver)
            .configure(|s| s.max_iters(cfg.max_iters))
            .run()
            .map_err(|e| Error::Search(e.to_string()))?;
        let state = res.state();
        if let Some(p) = state.best_param.as_ref() {
            if state.best_cost < best.0 {
                best = (state.best_cost, p.clone());
            }
        }
    }
    let psi = state_from_params(&best.1, &dims).expect("refined state is normalizable");
    let argmin = StateVector::from_vec(psi.iter().copied().collect())?;
    Ok(OperationFidelity {
        value: best.0,
        sampled_value,
        argmin,
    })
}

/// Exact minimum over product inputs of fixed local states, for checks.
pub fn fidelity_of_input(
    e0: &QuantumOperation,
    e: &QuantumOperation,
    psi: &StateVector,
) -> Result<f64> {
    let v = psi.normalized()?.into_amplitudes();
    Objective {
        e0,
        e,
        dims: &[v.len()],
    }
    .eval(&v)
}

/// Tensor product of pure factor states, a convenience for product inputs.
pub fn product_state(parts: &[StateVector]) -> Result<StateVector> {
    let mut it = parts.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::validation("no factors"))?
        .clone();
    it.try_fold(first, |acc, s| tensor(&acc, s))
}

/// Protocol modules with closed-form fidelities under ancilla dephasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleKind {
    Cphase,
    Cnot,
    StateTransfer,
    EntPurification,
}

/// Closed-form module fidelity, or a lower bound where only a bound is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticFidelity {
    pub value: f64,
    pub lower_bound: bool,
}

/// Module fidelity as a function of `γt`:
/// CPHASE `(1+e^{−γt})/2`, CNOT `((1+e^{−γt})/2)²`,
/// state transfer `¼(1+e^{−2γt})(1+e^{−γt})`, and for entanglement
/// purification the lower bound `1 − (3/2 + √2)γt`.
pub fn analytic_module_fidelity(kind: ModuleKind, gamma_t: f64) -> Result<AnalyticFidelity> {
    if !(gamma_t >= 0.0 && gamma_t.is_finite()) {
        return Err(Error::validation("gamma*t must be finite and non-negative"));
    }
    let l = (-gamma_t).exp();
    let exact = |value| {
        Ok(AnalyticFidelity {
            value,
            lower_bound: false,
        })
    };
    match kind {
        ModuleKind::Cphase => exact((1.0 + l) / 2.0),
        ModuleKind::Cnot => exact(((1.0 + l) / 2.0).powi(2)),
        ModuleKind::StateTransfer => exact(0.25 * (1.0 + l * l) * (1.0 + l)),
        ModuleKind::EntPurification => Ok(AnalyticFidelity {
            value: 1.0 - (1.5 + 2f64.sqrt()) * gamma_t,
            lower_bound: true,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::lindblad::{phase_damping, DephasedSubsystem};
    use crate::quantum::{qubit, random_pure_state, Operator};

    #[test]
    fn state_fidelity_basics() {
        let a = random_pure_state(3, 1).unwrap().to_density().unwrap();
        let b = random_pure_state(3, 2).unwrap();
        assert!((state_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
        let zero = StateVector::qubit_state("0").unwrap().to_density().unwrap();
        let one = StateVector::qubit_state("1").unwrap().to_density().unwrap();
        assert!(state_fidelity(&zero, &one).unwrap() < 1e-12);
        // Pure argument reduces to an expectation value.
        let mixed = DensityMatrix::mixture(&[(0.3, &a), (0.7, &b.to_density().unwrap())]).unwrap();
        let want = mixed.fidelity_with_pure(&b).unwrap();
        let got = state_fidelity(&b.to_density().unwrap(), &mixed).unwrap();
        assert!((got - want).abs() < 1e-10, "{got} {want}");
        assert!((state_fidelity(&mixed, &b.to_density().unwrap()).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn identical_operations_have_unit_fidelity() {
        let u = QuantumOperation::unitary(&Operator::new(qubit::rx(0.3)).unwrap()).unwrap();
        let cfg = SamplerConfig {
            samples: 200,
            ..SamplerConfig::default()
        };
        let f = operation_fidelity(&u, &u, &cfg).unwrap();
        assert!((f.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_dephasing_has_fidelity_one_half_at_equator() {
        let id = QuantumOperation::identity(2);
        let deph = phase_damping(&DephasedSubsystem::qubit(), 0.0).unwrap();
        let cfg = SamplerConfig {
            samples: 500,
            ..SamplerConfig::default()
        };
        let f = operation_fidelity(&id, &deph, &cfg).unwrap();
        assert!((f.value - 0.5).abs() < 1e-6, "{}", f.value);
        // The minimizer lies on the equator: |<0|psi>|^2 = 1/2.
        assert!((f.argmin.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn sampling_is_deterministic() {
        let id = QuantumOperation::identity(2);
        let deph = phase_damping(&DephasedSubsystem::qubit(), 0.4).unwrap();
        let cfg = SamplerConfig {
            samples: 300,
            refine: 0,
            ..SamplerConfig::default()
        };
        let a = operation_fidelity(&id, &deph, &cfg).unwrap();
        let b = operation_fidelity(&id, &deph, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn analytic_values() {
        for k in [
            ModuleKind::Cphase,
            ModuleKind::Cnot,
            ModuleKind::StateTransfer,
            ModuleKind::EntPurification,
        ] {
            assert!((analytic_module_fidelity(k, 0.0).unwrap().value - 1.0).abs() < 1e-15);
        }
        let c = analytic_module_fidelity(ModuleKind::Cphase, 2f64.ln()).unwrap();
        assert!((c.value - 0.75).abs() < 1e-15);
        assert!(
            analytic_module_fidelity(ModuleKind::EntPurification, 0.1)
                .unwrap()
                .lower_bound
        );
        assert!(analytic_module_fidelity(ModuleKind::Cnot, -1.0).is_err());
    }

    #[test]
    fn inequality_chain_on_log_grid() {
        for k in 0..=70 {
            let g = 10f64.powf(-6.0 + k as f64 / 10.0);
            let f = |m| analytic_module_fidelity(m, g).unwrap().value;
            assert!(f(ModuleKind::Cphase) >= 1.0 - g / 2.0);
            assert!(f(ModuleKind::Cnot) >= 1.0 - g);
            assert!(f(ModuleKind::StateTransfer) >= 1.0 - 1.5 * g);
        }
    }
}
