//! Branch-weighted density-matrix register over named qubits.
//!
//! Logical DFS qubits and ancilla atoms are both two-level factors here. A
//! register holds one unnormalized density matrix per measurement history;
//! the trace of a branch is its probability, so the sum over branches is the
//! unconditional state.

use crate::error::{Error, Result};
use crate::quantum::{qubit, re, CMatrix, DensityMatrix, C64, ONE, ZERO};

/// One measurement history and its unnormalized state.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub rho: CMatrix,
    /// Outcome bits, in the order the measurements were made.
    pub outcomes: Vec<u8>,
}

impl Branch {
    pub fn probability(&self) -> f64 {
        self.rho.trace().re
    }
}

/// Qubits addressed by name; qubit 0 is the most significant factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Register {
    names: Vec<String>,
    branches: Vec<Branch>,
    /// Names of the measured qubits, aligned with `Branch::outcomes`.
    measured: Vec<String>,
}

fn check_qubit_state(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(())
}

impl Register {
    /// Register in the joint state `rho` of the named qubits.
    pub fn new<S: AsRef<str>>(names: &[S], rho: &DensityMatrix) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let dim = 1usize << names.len();
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
        for (k, n) in names.iter().enumerate() {
            if names[..k].contains(n) {
                return Err(Error::validation(format!("duplicate qubit name {n}")));
            }
        }
        Ok(Register {
            names,
            branches: vec![Branch {
                rho: rho.matrix().clone(),
                outcomes: Vec::new(),
            }],
            measured: Vec::new(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn measured(&self) -> &[String] {
        &self.measured
    }

    /// Position of a measurement in `Branch::outcomes`.
    pub fn outcome_index(&self, name: &str) -> Result<usize> {
        self.measured
            .iter()
            .rposition(|n| n == name)
            .ok_or_else(|| Error::validation(format!("qubit {name} has not been measured")))
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::validation(format!("no qubit named {name}")))
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    /// `1 ⊗ … ⊗ u ⊗ … ⊗ 1` with `u` on factor `q`.
    fn embed(&self, u: &CMatrix, q: usize) -> CMatrix {
        let mut m = CMatrix::identity(1, 1);
        for k in 0..self.n() {
            m = if k == q {
                m.kronecker(u)
            } else {
                m.kronecker(&CMatrix::identity(2, 2))
            };
        }
        m
    }

    fn bit(&self, index: usize, q: usize) -> usize {
        (index >> (self.n() - 1 - q)) & 1
    }

    /// Appends a fresh qubit in state `rho` as the least significant factor.
    pub fn add_qubit(&mut self, name: &str, rho: &DensityMatrix) -> Result<()> {
        check_qubit_state(rho)?;
        if self.names.iter().any(|n| n == name) {
            return Err(Error::validation(format!("duplicate qubit name {name}")));
        }
        self.names.push(name.to_string());
        for b in &mut self.branches {
            b.rho = b.rho.kronecker(rho.matrix());
        }
        Ok(())
    }

    /// Applies a single-qubit unitary on every branch.
    pub fn apply(&mut self, name: &str, u: &CMatrix) -> Result<()> {
        self.apply_where(name, u, |_| true)
    }

    /// Applies a single-qubit unitary on the branches whose outcome at
    /// `outcome` equals `bit` (a classically controlled gate).
    pub fn apply_if(&mut self, name: &str, u: &CMatrix, outcome: usize, bit: u8) -> Result<()> {
        if outcome >= self.measured.len() {
            return Err(Error::validation(
                "classical control refers to a missing outcome",
            ));
        }
        self.apply_where(name, u, |o| o[outcome] == bit)
    }

    /// Applies a single-qubit unitary on the branches whose outcome history
    /// satisfies `cond`.
    pub fn apply_where(
        &mut self,
        name: &str,
        u: &CMatrix,
        cond: impl Fn(&[u8]) -> bool,
    ) -> Result<()> {
        if u.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: u.nrows(),
            });
        }
        let full = self.embed(u, self.index(name)?);
        let adj = full.adjoint();
        for b in &mut self.branches {
            if cond(&b.outcomes) {
                b.rho = &full * &b.rho * &adj;
            }
        }
        Ok(())
    }

    /// Phase damping of one qubit: its coherences are multiplied by `lambda`.
    pub fn dephase(&mut self, name: &str, lambda: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::validation("coherence factor must lie in [0, 1]"));
        }
        if lambda == 1.0 {
            return Ok(());
        }
        let q = self.index(name)?;
        let d = 1usize << self.n();
        let bits: Vec<usize> = (0..d).map(|i| self.bit(i, q)).collect();
        for b in &mut self.branches {
            for i in 0..d {
                for j in 0..d {
                    if bits[i] != bits[j] {
                        b.rho[(i, j)] *= re(lambda);
                    }
                }
            }
        }
        Ok(())
    }

    /// Controlled `−Z` with `control` in `|1⟩`. The control (the ancilla) is
    /// dephased to coherence `lambda` during the gate; the dephasing commutes
    /// with the gate, so it is applied first.
    pub fn controlled_neg_z(&mut self, control: &str, target: &str, lambda: f64) -> Result<()> {
        let (c, t) = (self.index(control)?, self.index(target)?);
        if c == t {
            return Err(Error::validation("control and target must differ"));
        }
        self.dephase(control, lambda)?;
        let d = 1usize << self.n();
        let phase: Vec<C64> = (0..d)
            .map(|i| {
                if self.bit(i, c) == 1 && self.bit(i, t) == 0 {
                    -ONE
                } else {
                    ONE
                }
            })
            .collect();
        for b in &mut self.branches {
            for i in 0..d {
                for j in 0..d {
                    b.rho[(i, j)] *= phase[i] * phase[j];
                }
            }
        }
        Ok(())
    }

    /// Projective `Z` measurement; the measured qubit is removed and the
    /// outcome appended to every branch history.
    pub fn measure(&mut self, name: &str) -> Result<usize> {
        let q = self.index(name)?;
        let n = self.n();
        let half = 1usize << (n - 1);
        let mut out = Vec::with_capacity(2 * self.branches.len());
        for b in &self.branches {
            for m in 0..2u8 {
                let mut rho = CMatrix::from_element(half, half, ZERO);
                let expand = |k: usize| {
                    let low = k & ((1usize << (n - 1 - q)) - 1);
                    let high = k >> (n - 1 - q);
                    (high << (n - q)) | ((m as usize) << (n - 1 - q)) | low
                };
                for i in 0..half {
                    for j in 0..half {
                        rho[(i, j)] = b.rho[(expand(i), expand(j))];
                    }
                }
                let mut outcomes = b.outcomes.clone();
                outcomes.push(m);
                out.push(Branch { rho, outcomes });
            }
        }
        self.names.remove(q);
        self.branches = out;
        self.measured.push(name.to_string());
        Ok(self.measured.len() - 1)
    }

    /// Discards a qubit (partial trace) without recording anything.
    pub fn trace_out(&mut self, name: &str) -> Result<()> {
        let before = self.branches.len();
        let k = self.measure(name)?;
        // Merge the two outcome branches of each former branch.
        let merged: Vec<Branch> = self
            .branches
            .chunks(2)
            .map(|pair| {
                let mut outcomes = pair[0].outcomes.clone();
                outcomes.truncate(k);
                Branch {
                    rho: &pair[0].rho + &pair[1].rho,
                    outcomes,
                }
            })
            .collect();
        debug_assert_eq!(merged.len(), before);
        self.branches = merged;
        self.measured.pop();
        Ok(())
    }

    /// Unconditional state: the sum over all branches.
    pub fn state(&self) -> CMatrix {
        let d = 1usize << self.n();
        self.branches
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, b| acc + &b.rho)
    }

    /// Sum over the branches selected by `keep`.
    pub fn state_where(&self, keep: impl Fn(&[u8]) -> bool) -> CMatrix {
        let d = 1usize << self.n();
        self.branches
            .iter()
            .filter(|b| keep(&b.outcomes))
            .fold(CMatrix::zeros(d, d), |acc, b| acc + &b.rho)
    }

    /// Reorders the remaining qubits and returns the unconditional state in
    /// that order.
    pub fn state_in_order<S: AsRef<str>>(&self, order: &[S]) -> Result<CMatrix> {
        self.permuted(&self.state(), order)
    }

    /// Permutes the factors of a matrix on the current qubits into `order`.
    pub fn permuted<S: AsRef<str>>(&self, m: &CMatrix, order: &[S]) -> Result<CMatrix> {
        if order.len() != self.n() {
            return Err(Error::validation("order must list every remaining qubit"));
        }
        let pos: Vec<usize> = order
            .iter()
            .map(|s| self.index(s.as_ref()))
            .collect::<Result<_>>()?;
        let n = self.n();
        let d = 1usize << n;
        let map = |k: usize| {
            // k indexes the new order; build the old index.
            let mut old = 0usize;
            for (new_q, &old_q) in pos.iter().enumerate() {
                let b = (k >> (n - 1 - new_q)) & 1;
                old |= b << (n - 1 - old_q);
            }
            old
        };
        let idx: Vec<usize> = (0..d).map(map).collect();
        Ok(CMatrix::from_fn(d, d, |i, j| m[(idx[i], idx[j])]))
    }
}

/// `|0⟩⟨0|` and `|1⟩⟨1|` as qubit density matrices.
pub fn basis_qubit(bit: u8) -> DensityMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(bit as usize, bit as usize)] = ONE;
    DensityMatrix::from_matrix_unchecked(m)
}

/// Rotation shorthands used by the circuits.
pub(crate) fn rx(theta: f64) -> CMatrix {
    qubit::rx(theta)
}

pub(crate) fn rz(theta: f64) -> CMatrix {
    qubit::rz(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random_pure_state, tensor, Operator};
    use std::f64::consts::PI;

    fn pure(seed: u64, dim: usize) -> DensityMatrix {
        random_pure_state(dim, seed).unwrap().to_density().unwrap()
    }

    #[test]
    fn single_qubit_gate_matches_kronecker_product() {
        let rho = pure(3, 4);
        let mut reg = Register::new(&["a", "b"], &rho).unwrap();
        reg.apply("b", &rx(0.7)).unwrap();
        let u = tensor(&Operator::identity(2), &Operator::new(rx(0.7)).unwrap()).unwrap();
        let want = rho.conjugate(&u).unwrap();
        assert!((reg.state() - want.matrix()).camax() < 1e-14);
    }

    #[test]
    fn measurement_branches_sum_to_partial_trace() {
        let rho = pure(5, 8);
        let mut reg = Register::new(&["a", "b", "c"], &rho).unwrap();
        let mut traced = reg.clone();
        reg.measure("b").unwrap();
        traced.trace_out("b").unwrap();
        assert_eq!(reg.branches().len(), 2);
        assert!((reg.state() - traced.state()).camax() < 1e-15);
        let p: f64 = reg.branches().iter().map(Branch::probability).sum();
        assert!((p - 1.0).abs() < 1e-12);
        // Outcome-1 branch equals <1_b| rho |1_b> computed by hand.
        let m = rho.matrix();
        let want = CMatrix::from_fn(4, 4, |i, j| {
            let ex = |k: usize| ((k >> 1) << 2) | (1 << 1) | (k & 1);
            m[(ex(i), ex(j))]
        });
        assert!((&reg.branches()[1].rho - want).camax() < 1e-15);
    }

    #[test]
    fn controlled_phase_and_classical_control() {
        // |1>_c |0>_t picks up −1; Hadamard-like superposition checks the sign.
        let plus = DensityMatrix::from_matrix_unchecked(CMatrix::from_element(2, 2, re(0.5)));
        let mut reg = Register::new(&["c"], &plus).unwrap();
        reg.add_qubit("t", &basis_qubit(0)).unwrap();
        reg.controlled_neg_z("c", "t", 1.0).unwrap();
        let s = reg.state();
        assert!((s[(0, 2)].re + 0.5).abs() < 1e-15);
        let k = reg.measure("c").unwrap();
        reg.apply_if("t", &rx(PI), k, 1).unwrap();
        assert!((reg.branches()[1].rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((reg.branches()[0].rho[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn permutation_reorders_factors() {
        let a = pure(1, 2);
        let b = pure(2, 2);
        let ab = tensor(&a, &b).unwrap();
        let reg = Register::new(&["a", "b"], &ab).unwrap();
        let ba = tensor(&b, &a).unwrap();
        assert!((reg.state_in_order(&["b", "a"]).unwrap() - ba.matrix()).camax() < 1e-15);
    }

    #[test]
    fn dephasing_scales_coherences_of_one_factor() {
        let rho = pure(9, 4);
        let mut reg = Register::new(&["a", "b"], &rho).unwrap();
        reg.dephase("a", 0.25).unwrap();
        let s = reg.state();
        assert!((s[(0, 1)] - rho.matrix()[(0, 1)]).norm() < 1e-15);
        assert!((s[(0, 2)] - rho.matrix()[(0, 2)] * 0.25).norm() < 1e-15);
    }
}
