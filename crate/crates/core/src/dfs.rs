//! The four-qubit decoherence-free subspace.
//!
//! Physical qubit 1 is the most significant tensor factor, so the basis state
//! `|ijkl⟩` has index `8i + 4j + 2k + l`. The DFS is the two-dimensional
//! total-spin-zero subspace spanned by
//!
//! * `|0_L⟩ = ½(|01⟩−|10⟩)⊗(|01⟩−|10⟩)`
//! * `|1_L⟩ = (2|1100⟩ + 2|0011⟩ − (|01⟩+|10⟩)⊗(|01⟩+|10⟩)) / (2√3)`
//!
//! Logical operators are built from permutations of physical qubits
//! (`X_L = (V₁₂ + 2V₂₃)/√3`, `Z_L = −V₁₂`) and are kept as full 16×16
//! matrices so that leakage out of the code space stays representable.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::quantum::{
    qubit, re, BasisTag, CMatrix, CVector, Operator, Propagator, StateVector, C64, ONE, ZERO,
};

/// Number of physical qubits per logical qubit.
pub const PHYSICAL_QUBITS: u32 = 4;
/// Dimension of the physical space.
pub const PHYSICAL_DIM: usize = 16;

/// Basis tag shared by all 4-qubit vectors.
pub fn physical_basis() -> BasisTag {
    BasisTag::qubits(PHYSICAL_QUBITS)
}

/// Value (0 or 1) of physical qubit `q` (1-based) in basis index `idx`.
pub fn bit(idx: usize, q: usize) -> usize {
    (idx >> (PHYSICAL_QUBITS as usize - q)) & 1
}

/// Axis of a logical rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Z,
}

/// Homogeneous environment field coupling identically to every qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseField {
    pub b: [f64; 3],
}

impl NoiseField {
    pub fn new(bx: f64, by: f64, bz: f64) -> Result<Self> {
        let b = [bx, by, bz];
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("noise field components must be finite"));
        }
        Ok(NoiseField { b })
    }
}

/// `V_ij`: unitary exchanging physical qubits `i` and `j` (1-based).
pub fn permutation_op(i: usize, j: usize) -> Result<Operator> {
    let range = 1..=PHYSICAL_QUBITS as usize;
    if !range.contains(&i) || !range.contains(&j) || i == j {
        return Err(Error::validation(format!(
            "permutation indices ({i},{j}) must be distinct and in 1..4"
        )));
    }
    let shift = |q: usize| PHYSICAL_QUBITS as usize - q;
    let mut m = CMatrix::zeros(PHYSICAL_DIM, PHYSICAL_DIM);
    for idx in 0..PHYSICAL_DIM {
        let (bi, bj) = (bit(idx, i), bit(idx, j));
        let swapped =
            (idx & !(1 << shift(i)) & !(1 << shift(j))) | (bj << shift(i)) | (bi << shift(j));
        m[(swapped, idx)] = ONE;
    }
    Operator::hermitian(m)
}

/// Single-qubit operator `m` acting on physical qubit `q` (1-based).
pub fn single_qubit_op(m: &CMatrix, q: usize) -> Result<Operator> {
    if !(1..=PHYSICAL_QUBITS as usize).contains(&q) {
        return Err(Error::validation(format!(
            "qubit index {q} out of range 1..4"
        )));
    }
    let mut full = CMatrix::identity(1, 1);
    for k in 1..=PHYSICAL_QUBITS as usize {
        let factor = if k == q {
            m.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        full = full.kronecker(&factor);
    }
    Operator::new(full)
}

/// `Σ_i (σ_i^x B_x + σ_i^y B_y + σ_i^z B_z)` on four qubits.
pub fn collective_noise_hamiltonian(field: &NoiseField) -> Operator {
    let local = qubit::pauli_x().map(|a| a * field.b[0])
        + qubit::pauli_y().map(|a| a * field.b[1])
        + qubit::pauli_z().map(|a| a * field.b[2]);
    let mut h = CMatrix::zeros(PHYSICAL_DIM, PHYSICAL_DIM);
    for q in 1..=PHYSICAL_QUBITS as usize {
        h += single_qubit_op(&local, q)
            .expect("qubit index in range")
            .into_matrix();
    }
    Operator::hermitian(h).expect("sum of Hermitian terms")
}

/// Collective spin component `Σ_i σ_i^k` for `k ∈ {0,1,2}` = x, y, z.
pub fn collective_spin(k: usize) -> Operator {
    let mut b = [0.0; 3];
    b[k] = 1.0;
    collective_noise_hamiltonian(&NoiseField { b })
}

/// The DFS code: logical basis, projector and logical operators.
#[derive(Clone, Debug)]
pub struct DfsCodec {
    logical_zero: StateVector,
    logical_one: StateVector,
    projector: Operator,
}

impl Default for DfsCodec {
    fn default() -> Self {
        DfsCodec::new()
    }
}

impl DfsCodec {
    pub fn new() -> Self {
        let (zero, one) = logical_basis();
        let z = zero.amplitudes();
        let o = one.amplitudes();
        let p = z * z.adjoint() + o * o.adjoint();
        DfsCodec {
            logical_zero: zero,
            logical_one: one,
            projector: Operator::hermitian(p).expect("projector is Hermitian"),
        }
    }

    pub fn logical_zero(&self) -> &StateVector {
        &self.logical_zero
    }

    pub fn logical_one(&self) -> &StateVector {
        &self.logical_one
    }

    /// `|l_L⟩` for `l ∈ {0, 1}`.
    pub fn logical(&self, l: usize) -> &StateVector {
        if l == 0 {
            &self.logical_zero
        } else {
            &self.logical_one
        }
    }

    /// Rank-2 orthogonal projector onto the DFS.
    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    /// `X_L = (V₁₂ + 2V₂₃)/√3`.
    pub fn logical_x(&self) -> Operator {
        logical_x()
    }

    /// `Z_L = −V₁₂`.
    pub fn logical_z(&self) -> Operator {
        logical_z()
    }

    /// `exp(−i θ/2 X_L)` or `exp(−i θ/2 Z_L)` on the full physical space.
    pub fn logical_rotation(&self, axis: Axis, theta: f64) -> Operator {
        logical_rotation(axis, theta)
    }

    /// `α|0_L⟩ + β|1_L⟩`.
    pub fn encode(&self, alpha: C64, beta: C64) -> StateVector {
        self.logical_zero
            .scaled(alpha)
            .add_scaled(beta, &self.logical_one)
            .expect("both logical states are 16-dimensional")
    }

    /// Encodes a 2-dimensional logical state.
    pub fn encode_state(&self, logical: &StateVector) -> Result<StateVector> {
        if logical.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: logical.dim(),
            });
        }
        let a = logical.amplitudes();
        Ok(self.encode(a[0], a[1]))
    }

    /// Logical amplitudes `(⟨0_L|ψ⟩, ⟨1_L|ψ⟩)`; the norm deficit is the leakage.
    pub fn decode(&self, psi: &StateVector) -> Result<[C64; 2]> {
        Ok([self.logical_zero.inner(psi)?, self.logical_one.inner(psi)?])
    }

    /// `1 − ⟨ψ|P_DFS|ψ⟩` for a normalized physical state.
    pub fn leakage(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != PHYSICAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: PHYSICAL_DIM,
                found: psi.dim(),
            });
        }
        let inside = self.projector.expectation(psi)?.re;
        Ok((psi.norm().powi(2) - inside).clamp(0.0, 1.0))
    }

    /// Weight outside the DFS of an unnormalized vector, `‖(1−P)χ‖²`.
    pub fn leaked_weight(&self, chi: &CVector) -> f64 {
        let [a, b] = [
            self.logical_zero.amplitudes().dotc(chi),
            self.logical_one.amplitudes().dotc(chi),
        ];
        (chi.norm_squared() - a.norm_sqr() - b.norm_sqr()).max(0.0)
    }

    /// 2×2 matrix `⟨k_L|O|l_L⟩` of an operator on the logical basis.
    pub fn restrict(&self, op: &Operator) -> Result<Matrix2<C64>> {
        if op.dim() != PHYSICAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: PHYSICAL_DIM,
                found: op.dim(),
            });
        }
        let mut out = Matrix2::zeros();
        for k in 0..2 {
            for l in 0..2 {
                out[(k, l)] = self.logical(k).inner(&op.apply(self.logical(l))?)?;
            }
        }
        Ok(out)
    }

    /// Norm of the part of `O` that maps DFS states out of the DFS,
    /// `‖(1−P) O P‖_F`.
    pub fn off_block_norm(&self, op: &Operator) -> Result<f64> {
        let p = self.projector.matrix();
        let q = CMatrix::identity(PHYSICAL_DIM, PHYSICAL_DIM) - p;
        Ok((q * op.matrix() * p).norm())
    }
}

/// `(|0_L⟩, |1_L⟩)` as 16-dimensional vectors.
pub fn logical_basis() -> (StateVector, StateVector) {
    let mut zero = vec![ZERO; PHYSICAL_DIM];
    let mut one = vec![ZERO; PHYSICAL_DIM];
    // Two-qubit pieces over the ordered basis |00>,|01>,|10>,|11>.
    let singlet = [0.0, 1.0, -1.0, 0.0];
    let sym = [0.0, 1.0, 1.0, 0.0];
    let norm1 = 1.0 / (2.0 * 3f64.sqrt());
    for hi in 0..4 {
        for lo in 0..4 {
            let idx = 4 * hi + lo;
            zero[idx] = re(0.5 * singlet[hi] * singlet[lo]);
            one[idx] = re(-norm1 * sym[hi] * sym[lo]);
        }
    }
    one[0b1100] += re(2.0 * norm1);
    one[0b0011] += re(2.0 * norm1);
    (
        StateVector::new(CVector::from_vec(zero), physical_basis()).expect("dim 16"),
        StateVector::new(CVector::from_vec(one), physical_basis()).expect("dim 16"),
    )
}

/// `X_L = (V₁₂ + 2V₂₃)/√3` on the full physical space.
pub fn logical_x() -> Operator {
    let v12 = permutation_op(1, 2).expect("valid indices");
    let v23 = permutation_op(2, 3).expect("valid indices");
    v12.plus(&v23.scaled(2.0))
        .expect("same dim")
        .scaled(1.0 / 3f64.sqrt())
}

/// `Z_L = −V₁₂` on the full physical space.
pub fn logical_z() -> Operator {
    permutation_op(1, 2).expect("valid indices").scaled(-1.0)
}

/// Logical rotation `exp(−i θ/2 A_L)` for `A ∈ {X, Z}`.
pub fn logical_rotation(axis: Axis, theta: f64) -> Operator {
    let generator = match axis {
        Axis::X => logical_x(),
        Axis::Z => logical_z(),
    };
    Propagator::new(&generator.scaled(theta / 2.0))
        .expect("Hermitian generator")
        .unitary(1.0)
}
