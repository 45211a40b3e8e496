//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here is an immutable value type: [`StateVector`], [`Operator`]
//! and [`DensityMatrix`] wrap `nalgebra` matrices, carry the label of the basis
//! that indexes them, and validate their physical invariants on construction.
//! Time evolution uses an exact Hermitian eigendecomposition ([`Propagator`]).
//!
//! Tensor products are Kronecker-ordered: the left factor is the most
//! significant index. Global phases are never removed implicitly.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default cap on the number of entries a tensor product may create.
pub const DEFAULT_CAPACITY: usize = 1_000_000;
/// Absolute tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for density-matrix trace and Hermiticity.
pub const DENSITY_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const EIGEN_FLOOR: f64 = -1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Label identifying the basis that indexes a vector or matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisTag {
    name: Arc<str>,
    dim: usize,
}

impl BasisTag {
    pub fn new(name: impl AsRef<str>, dim: usize) -> Self {
        BasisTag {
            name: Arc::from(name.as_ref()),
            dim,
        }
    }

    /// Anonymous computational basis of the given dimension.
    pub fn plain(dim: usize) -> Self {
        BasisTag::new(format!("C^{dim}"), dim)
    }

    /// Computational basis of `n` qubits, qubit 1 most significant.
    pub fn qubits(n: u32) -> Self {
        BasisTag::new(format!("qubits:{n}"), 1usize << n)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tag of the Kronecker product `self ⊗ other`.
    pub fn product(&self, other: &BasisTag) -> BasisTag {
        BasisTag::new(
            format!("({})x({})", self.name, other.name),
            self.dim * other.dim,
        )
    }
}

impl fmt::Debug for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.dim)
    }
}

/// Pure state: complex amplitudes over an indexed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVector,
    basis: BasisTag,
}

impl StateVector {
    /// Wraps amplitudes; the basis dimension must match.
    pub fn new(amps: CVector, basis: BasisTag) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::validation("state vector must have dim >= 1"));
        }
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amps.len(),
            });
        }
        Ok(StateVector { amps, basis })
    }

    /// Amplitudes in an anonymous basis.
    pub fn from_vec(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        StateVector::new(CVector::from_vec(amps), BasisTag::plain(dim))
    }

    /// Real amplitudes in an anonymous basis.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        StateVector::from_vec(amps.iter().map(|&x| re(x)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis_state(basis: BasisTag, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::validation(format!(
                "basis index {index} out of range for dim {}",
                basis.dim()
            )));
        }
        let mut amps = CVector::zeros(basis.dim());
        amps[index] = ONE;
        StateVector::new(amps, basis)
    }

    /// `|bits⟩` on `n` qubits, e.g. `qubit_state("0110")`.
    pub fn qubit_state(bits: &str) -> Result<Self> {
        let n = bits.len() as u32;
        let index = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::validation(format!("'{bits}' is not a bit string")))?;
        StateVector::basis_state(BasisTag::qubits(n), index)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    /// Relabels the basis (dimension must agree).
    pub fn with_basis(self, basis: BasisTag) -> Result<Self> {
        StateVector::new(self.amps, basis)
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Unit-norm copy; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::validation(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(StateVector {
            amps: self.amps.unscale(n),
            basis: self.basis.clone(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn overlap_sq(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn scaled(&self, c: C64) -> StateVector {
        StateVector {
            amps: self.amps.map(|a| a * c),
            basis: self.basis.clone(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: C64, other: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(StateVector {
            amps: &self.amps + other.amps.map(|a| a * c),
            basis: self.basis.clone(),
        })
    }

    /// Projector `|ψ⟩⟨ψ|` (the vector is normalized first).
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }

    /// Largest entrywise distance to `other` after removing the relative
    /// global phase. Only for comparisons that explicitly ignore phase.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> Result<f64> {
        let ov = self.inner(other)?;
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        Ok((&self.amps.map(|a| a * phase) - &other.amps).camax())
    }
}

/// Square complex matrix acting on a Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    hermitian: bool,
}

impl Operator {
    /// General (not necessarily Hermitian) operator.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::validation(format!(
                "operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator {
            matrix,
            hermitian: false,
        })
    }

    /// Hermitian operator; validates `max |H − H†| < 1e-12`.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let mut op = Operator::new(matrix)?;
        let err = op.hermiticity_error();
        if err >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            matrix: CMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            matrix: CMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    /// Diagonal Hermitian operator with real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let d = CVector::from_iterator(entries.len(), entries.iter().map(|&x| re(x)));
        Operator {
            matrix: CMatrix::from_diagonal(&d),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian_hint(&self) -> bool {
        self.hermitian
    }

    /// `max |H − H†|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim(), other.dim())?;
        Operator::new(&self.matrix * &other.matrix)
    }

    pub fn plus(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim(), other.dim())?;
        Ok(Operator {
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Multiplies by a real scalar (keeps the Hermitian hint).
    pub fn scaled(&self, x: f64) -> Operator {
        Operator {
            matrix: self.matrix.map(|a| a * x),
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        Ok(StateVector {
            amps: &self.matrix * &psi.amps,
            basis: psi.basis.clone(),
        })
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        check_dim(self.dim(), psi.dim())?;
        Ok(psi.amps.dotc(&(&self.matrix * &psi.amps)))
    }

    /// Frobenius norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &Operator) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(c.norm())
    }
}

/// Valid mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace within 1e-12 and eigenvalues ≥ −1e-10.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        validate_density(&matrix)?;
        Ok(DensityMatrix { matrix })
    }

    /// Skips validation; for internal hot paths whose construction guarantees
    /// validity (e.g. CPTP maps applied to valid inputs).
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let v = psi.normalized()?;
        Ok(DensityMatrix {
            matrix: &v.amps * v.amps.adjoint(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    /// Convex combination `Σ p_k ρ_k` (weights must sum to one).
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::validation("empty mixture"))?;
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (p, rho) in parts {
            check_dim(first.1.dim(), rho.dim())?;
            if *p < 0.0 {
                return Err(Error::validation("negative mixture weight"));
            }
            m += rho.matrix.map(|a| a * *p);
        }
        DensityMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_eigen(&self.matrix).0.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_dim(self.dim(), op.dim())?;
        Ok((&self.matrix * op.matrix()).trace())
    }

    /// `⟨ψ|ρ|ψ⟩` for a (normalized) pure reference state.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> Result<f64> {
        check_dim(self.dim(), psi.dim())?;
        let v = psi.normalized()?;
        Ok(v.amps.dotc(&(&self.matrix * &v.amps)).re)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &Operator) -> Result<DensityMatrix> {
        check_dim(self.dim(), u.dim())?;
        Ok(DensityMatrix {
            matrix: u.matrix() * &self.matrix * u.matrix().adjoint(),
        })
    }
}

fn validate_density(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::validation(
            "density matrix must be square and non-empty",
        ));
    }
    let herm = max_abs_diff(m, &m.adjoint());
    if herm >= DENSITY_TOL {
        return Err(Error::validation(format!(
            "density matrix not Hermitian ({herm:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() >= DENSITY_TOL || tr.im.abs() >= DENSITY_TOL {
        return Err(Error::validation(format!("density matrix trace {tr} != 1")));
    }
    let hermitized = (m + m.adjoint()).unscale(2.0);
    let min = hermitian_eigen(&hermitized)
        .0
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < EIGEN_FLOOR {
        return Err(Error::validation(format!(
            "density matrix has eigenvalue {min:e} < -1e-10"
        )));
    }
    Ok(())
}

/// Kronecker product with a capacity guard.
pub trait Tensor: Sized {
    fn tensor_with_cap(&self, other: &Self, cap: usize) -> Result<Self>;
}

/// `a ⊗ b` with the default capacity cap of 1e6 entries.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor_with_cap(b, DEFAULT_CAPACITY)
}

fn check_capacity(entries: usize, cap: usize) -> Result<()> {
    if entries > cap {
        Err(Error::Capacity {
            requested: entries,
            cap,
        })
    } else {
        Ok(())
    }
}

impl Tensor for StateVector {
    fn tensor_with_cap(&self, other: &Self, cap: usize) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_capacity(dim, cap)?;
        Ok(StateVector {
            amps: self.amps.kronecker(&other.amps),
            basis: self.basis.product(&other.basis),
        })
    }
}

impl Tensor for Operator {
    fn tensor_with_cap(&self, other: &Self, cap: usize) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_capacity(dim.saturating_mul(dim), cap)?;
        Ok(Operator {
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        })
    }
}

impl Tensor for DensityMatrix {
    fn tensor_with_cap(&self, other: &Self, cap: usize) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        check_capacity(dim.saturating_mul(dim), cap)?;
        Ok(DensityMatrix {
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }
}

/// Exact propagator `exp(−iHt)` from a Hermitian eigendecomposition.
///
/// Building the decomposition once and evaluating many times is how the gate
/// simulations sample trajectories and search for swap times.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        let scale = h.matrix().camax().max(1.0);
        let err = h.hermiticity_error();
        if err >= HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(err));
        }
        let sym = (h.matrix() + h.matrix().adjoint()).unscale(2.0);
        let n = sym.nrows();
        let mut eigenvalues = vec![0.0; n];
        let mut eigenvectors = CMatrix::zeros(n, n);
        // Diagonalize each dynamically disconnected block on its own: exact
        // degeneracies between blocks otherwise let the solver mix sectors
        // that the dynamics never connects.
        for block in connected_blocks(&sym) {
            let m = block.len();
            let sub = CMatrix::from_fn(m, m, |i, j| sym[(block[i], block[j])]);
            let (vals, vecs) = hermitian_eigen(&sub);
            let residual = (&sub * &vecs - &vecs * CMatrix::from_diagonal(&vals.map(re))).camax();
            if residual > EIGEN_RESIDUAL_TOL * scale {
                return Err(Error::Integration(format!(
                    "eigendecomposition residual {residual:.3e}"
                )));
            }
            for (k, &col) in block.iter().enumerate() {
                eigenvalues[col] = vals[k];
                for (i, &row) in block.iter().enumerate() {
                    eigenvectors[(row, col)] = vecs[(i, k)];
                }
            }
        }
        Ok(Propagator {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of the generator (unsorted, matching eigenvector columns).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn phases(&self, t: f64) -> CVector {
        CVector::from_iterator(
            self.dim(),
            self.eigenvalues
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t)),
        )
    }

    /// The unitary `exp(−iHt)`.
    pub fn unitary(&self, t: f64) -> Operator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        let ph = self.phases(t);
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= ph[k];
        }
        Operator {
            matrix: scaled * v.adjoint(),
            hermitian: false,
        }
    }

    /// `exp(−iHt)|ψ⟩`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        let mut c = self.eigenvectors.adjoint() * psi.amplitudes();
        c.component_mul_assign(&self.phases(t));
        Ok(StateVector {
            amps: &self.eigenvectors * c,
            basis: psi.basis().clone(),
        })
    }

    /// Evolves one state to many times, reusing the eigenbasis projection.
    pub fn evolve_many(&self, psi: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_dim(self.dim(), psi.dim())?;
        let c0 = self.eigenvectors.adjoint() * psi.amplitudes();
        Ok(times
            .iter()
            .map(|&t| {
                let c = c0.component_mul(&self.phases(t));
                StateVector {
                    amps: &self.eigenvectors * c,
                    basis: psi.basis().clone(),
                }
            })
            .collect())
    }

    /// Matrix element `⟨i|exp(−iHt)|j⟩`.
    pub fn amplitude(&self, i: usize, j: usize, t: f64) -> C64 {
        let v = &self.eigenvectors;
        (0..self.dim())
            .map(|k| v[(i, k)] * C64::from_polar(1.0, -self.eigenvalues[k] * t) * v[(j, k)].conj())
            .sum()
    }
}

/// Largest accepted `‖HV − VΛ‖_max`, relative to `max(1, ‖H‖_max)`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Index sets of the connected components of the nonzero pattern of `m`.
fn connected_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut label = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![start];
        label[start] = id;
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for j in 0..n {
                if label[j] == usize::MAX && (m[(i, j)] != ZERO || m[(j, i)] != ZERO) {
                    label[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

/// Eigenpairs of a Hermitian matrix (eigenvalues unsorted, eigenvectors as
/// columns).
///
/// `faer`'s self-adjoint solver is used because `nalgebra`'s symmetric
/// eigensolver can return inaccurate eigenvectors for the highly degenerate
/// spectra that occur here.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = m.nrows();
    if m.iter().all(|z| z.im == 0.0) {
        let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = a.selfadjoint_eigendecomposition(faer::Side::Lower);
        let (s, u) = (eig.s().column_vector(), eig.u());
        (
            DVector::from_fn(n, |i, _| s.read(i)),
            CMatrix::from_fn(n, n, |i, j| re(u.read(i, j))),
        )
    } else {
        use faer::complex_native::c64;
        let a = faer::Mat::<c64>::from_fn(n, n, |i, j| c64::new(m[(i, j)].re, m[(i, j)].im));
        let eig = a.selfadjoint_eigendecomposition(faer::Side::Lower);
        let (s, u) = (eig.s().column_vector(), eig.u());
        (
            DVector::from_fn(n, |i, _| s.read(i).re),
            CMatrix::from_fn(n, n, |i, j| {
                let z = u.read(i, j);
                C64::new(z.re, z.im)
            }),
        )
    }
}

/// `exp(−iHt)|ψ⟩` for Hermitian `H` (ħ = 1).
pub fn propagate(h: &Operator, t: f64, psi: &StateVector) -> Result<StateVector> {
    check_dim(h.dim(), psi.dim())?;
    Propagator::new(h)?.evolve(psi, t)
}

/// Partial trace keeping the (strictly increasing) factor indices `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_matrix_unchecked(partial_trace_matrix(
        rho.matrix(),
        keep,
        dims,
    )?))
}

/// Partial trace of an arbitrary square matrix over the factors not in `keep`.
pub fn partial_trace_matrix(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.nrows() || m.nrows() != m.ncols() {
        return Err(Error::validation(format!(
            "factor dims {dims:?} inconsistent with matrix dim {}",
            m.nrows()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::validation(format!(
            "keep set {keep:?} must be increasing and in range"
        )));
    }
    // Stride of each factor in the full index (left factor most significant).
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let strides = &strides;
    let offsets = |factors: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &f in factors {
            offs = offs
                .iter()
                .flat_map(|&o| (0..dims[f]).map(move |d| o + d * strides[f]))
                .collect();
        }
        offs
    };
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let ok = offsets(keep);
    let ot = offsets(&traced);
    let n = ok.len();
    Ok(CMatrix::from_fn(n, n, |a, b| {
        ot.iter().map(|&t| m[(ok[a] + t, ok[b] + t)]).sum()
    }))
}

/// Haar-random pure state from a seeded ChaCha generator.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_state_with(dim, &mut rng)
}

/// Haar-random pure state drawn from a caller-provided generator
/// (normalized complex Gaussian vector).
pub fn random_pure_state_with<R: rand::Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::validation("dim must be >= 1"));
    }
    if dim == 1 {
        return StateVector::from_vec(vec![ONE]);
    }
    let amps: Vec<C64> = (0..dim)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            C64::new(a, b)
        })
        .collect();
    StateVector::from_vec(amps)?.normalized()
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise distance between two matrices after removing the
/// relative global phase (fixed by the largest entry of `b`).
pub fn max_abs_diff_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let (idx, _) =
        b.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, x)| {
                if x.norm() > acc.1 {
                    (i, x.norm())
                } else {
                    acc
                }
            },
        );
    let (x, y) = (a.as_slice()[idx], b.as_slice()[idx]);
    let phase = if x.norm() > 0.0 {
        (y / x) / (y / x).norm()
    } else {
        ONE
    };
    max_abs_diff(&a.map(|v| v * phase), b)
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Single-qubit Pauli matrices and rotations, shared by the logical circuits.
pub mod qubit {
    use super::*;

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    /// `exp(−i θ/2 X)`.
    pub fn rx(theta: f64) -> CMatrix {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        CMatrix::from_row_slice(2, 2, &[re(c), C64::new(0.0, -s), C64::new(0.0, -s), re(c)])
    }

    /// `exp(−i θ/2 Z)`.
    pub fn rz(theta: f64) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(1.0, -theta / 2.0),
                ZERO,
                ZERO,
                C64::from_polar(1.0, theta / 2.0),
            ],
        )
    }

    /// Hadamard gate.
    pub fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[re(h), re(h), re(h), re(-h)])
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a qubit state.
    pub fn bloch(psi: &StateVector) -> [f64; 3] {
        let a = psi.amplitudes();
        let x = 2.0 * (a[0].conj() * a[1]).re;
        let y = 2.0 * (a[0].conj() * a[1]).im;
        let z = a[0].norm_sqr() - a[1].norm_sqr();
        [x, y, z]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn op(m: CMatrix) -> Operator {
        Operator::hermitian(m).unwrap()
    }

    #[test]
    fn propagator_handles_degenerate_complex_spectra() {
        // Collective spin on four qubits: heavily degenerate, complex entries.
        let (bx, by, bz) = (-1.0, 1.1, 0.3);
        let single =
            op(qubit::pauli_x() * re(bx) + qubit::pauli_y() * re(by) + qubit::pauli_z() * re(bz));
        let id = Operator::identity(2);
        let mut h = Operator::zeros(16);
        for k in 0..4 {
            let mut term = if k == 0 { single.clone() } else { id.clone() };
            for q in 1..4 {
                term = tensor(&term, if q == k { &single } else { &id }).unwrap();
            }
            h = h.plus(&term).unwrap();
        }
        let p = Propagator::new(&h).unwrap();
        // exp(−iHt) from the eigenbasis against a product of single-qubit exponentials.
        let t = 0.7;
        let one = Propagator::new(&single).unwrap().unitary(t);
        let mut want = one.clone();
        for _ in 1..4 {
            want = tensor(&want, &one).unwrap();
        }
        assert!(max_abs_diff(p.unitary(t).matrix(), want.matrix()) < 1e-12);
    }

    #[test]
    fn propagator_keeps_disconnected_blocks_apart() {
        // Two identical uncoupled blocks: evolution must never mix them.
        let b = CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.3), re(0.3), re(-1.0)]);
        let mut m = CMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&b);
        m.view_mut((2, 2), (2, 2)).copy_from(&b);
        let p = Propagator::new(&op(m)).unwrap();
        for t in [1.0, 1e3, 1e5] {
            assert_eq!(p.amplitude(2, 0, t), ZERO);
            assert_eq!(p.amplitude(1, 3, t), ZERO);
        }
    }

    #[test]
    fn tensor_of_basis_states_indexes_msb_first() {
        let s = tensor(
            &StateVector::qubit_state("0").unwrap(),
            &StateVector::qubit_state("1").unwrap(),
        )
        .unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.amplitudes()[1], ONE);
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i4 = tensor(&Operator::identity(2), &Operator::identity(2)).unwrap();
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
    }

    #[test]
    fn x_on_first_factor_flips_only_that_factor() {
        let psi = random_pure_state(2, 7).unwrap();
        let zero = StateVector::qubit_state("0").unwrap();
        let one = StateVector::qubit_state("1").unwrap();
        let x_i = tensor(&op(qubit::pauli_x()), &Operator::identity(2)).unwrap();
        let lhs = x_i.apply(&tensor(&zero, &psi).unwrap()).unwrap();
        let rhs = tensor(&one, &psi).unwrap();
        assert!(
            max_abs_diff(
                &CMatrix::from_column_slice(4, 1, lhs.amplitudes().as_slice()),
                &CMatrix::from_column_slice(4, 1, rhs.amplitudes().as_slice())
            ) < 1e-15
        );
    }

    #[test]
    fn tensor_respects_capacity() {
        let big = Operator::identity(1024);
        assert!(matches!(
            tensor(&big, &Operator::identity(2)),
            Err(Error::Capacity { .. })
        ));
        assert!(tensor(&big, &Operator::identity(1)).is_err());
        assert!(Operator::identity(2)
            .tensor_with_cap(&Operator::identity(2), 16)
            .is_ok());
    }

    #[test]
    fn zero_generator_is_identity() {
        let psi = random_pure_state(5, 3).unwrap();
        let out = propagate(&Operator::zeros(5), 12.3, &psi).unwrap();
        assert!(out.distance_up_to_phase(&psi).unwrap() < 1e-15);
        assert!((out.inner(&psi).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn sigma_z_gives_diagonal_phase() {
        let zero = StateVector::qubit_state("0").unwrap();
        let out = propagate(&op(qubit::pauli_z()), PI / 2.0, &zero).unwrap();
        assert!((out.amplitudes()[0] - C64::from_polar(1.0, -PI / 2.0)).norm() < 1e-14);
        assert!(out.amplitudes()[1].norm() < 1e-14);
    }

    #[test]
    fn sigma_x_quarter_period_flips_with_minus_i() {
        let zero = StateVector::qubit_state("0").unwrap();
        let out = propagate(&op(qubit::pauli_x()), PI / 2.0, &zero).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-14);
        assert!((out.amplitudes()[1] + I).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_generator_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(
            Operator::hermitian(m.clone()),
            Err(Error::NotHermitian(_))
        ));
        let general = Operator::new(m).unwrap();
        let psi = StateVector::qubit_state("0").unwrap();
        assert!(matches!(
            propagate(&general, 1.0, &psi),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn partial_trace_of_product_and_bell_states() {
        let a = random_pure_state(2, 1).unwrap().to_density().unwrap();
        let b = random_pure_state(3, 2).unwrap().to_density().unwrap();
        let ab = tensor(&a, &b).unwrap();
        let ra = partial_trace(&ab, &[0], &[2, 3]).unwrap();
        let rb = partial_trace(&ab, &[1], &[2, 3]).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-14);
        assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[h, 0.0, 0.0, h])
            .unwrap()
            .to_density()
            .unwrap();
        for k in 0..2 {
            let r = partial_trace(&bell, &[k], &[2, 2]).unwrap();
            assert!(max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        let rho = random_pure_state(4, 11).unwrap().to_density().unwrap();
        let m = rho.matrix();
        let oracle = CMatrix::from_fn(2, 2, |i, j| (0..2).map(|k| m[(2 * i + k, 2 * j + k)]).sum());
        let got = partial_trace(&rho, &[0], &[2, 2]).unwrap();
        assert!(max_abs_diff(got.matrix(), &oracle) < 1e-15);
        assert!((got.trace() - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(got.into_matrix()).is_ok());
    }

    #[test]
    fn partial_trace_rejects_inconsistent_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &[0], &[2, 3]).is_err());
        assert!(partial_trace(&rho, &[1, 0], &[2, 2]).is_err());
        assert!(partial_trace(&rho, &[2], &[2, 2]).is_err());
    }

    #[test]
    fn random_states_are_deterministic_and_normalized() {
        let a = random_pure_state(6, 42).unwrap();
        let b = random_pure_state(6, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let one = random_pure_state(1, 9).unwrap();
        assert_eq!(one.amplitudes()[0], ONE);
    }

    #[test]
    fn haar_qubits_have_vanishing_mean_bloch_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut mean = [0.0; 3];
        let n = 10_000;
        for _ in 0..n {
            let b = qubit::bloch(&random_pure_state_with(2, &mut rng).unwrap());
            for k in 0..3 {
                mean[k] += b[k] / n as f64;
            }
        }
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 0.05, "mean Bloch norm {norm}");
    }

    #[test]
    fn density_validation_catches_bad_inputs() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[re(1.5), ZERO, ZERO, re(-0.5)]);
        assert!(DensityMatrix::new(neg).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[re(0.5), ONE, ZERO, re(0.5)]);
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn rotations_have_half_angle_convention() {
        let r = qubit::rz(2.0 * PI);
        assert!(max_abs_diff(&r, &CMatrix::identity(2, 2).map(|a| -a)) < 1e-15);
        let rx = qubit::rx(PI);
        assert!((rx[(1, 0)] + I).norm() < 1e-15);
    }

    fn random_hermitian(dim: usize, seed: u64) -> Operator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(dim, dim, |_, _| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            C64::new(a, b)
        });
        op((&m + m.adjoint()).unscale(2.0))
    }

    proptest! {
        #[test]
        fn propagation_is_unitary(seed in 0u64..1000, t in -5.0f64..5.0) {
            let h = random_hermitian(6, seed);
            let p = Propagator::new(&h).unwrap();
            let phi = random_pure_state(6, seed + 1).unwrap();
            let psi = random_pure_state(6, seed + 2).unwrap();
            let before = phi.inner(&psi).unwrap();
            let after = p.evolve(&phi, t).unwrap().inner(&p.evolve(&psi, t).unwrap()).unwrap();
            prop_assert!((before - after).norm() < 1e-10);
        }

        #[test]
        fn propagation_composes(seed in 0u64..1000, t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
            let h = random_hermitian(5, seed);
            let psi = random_pure_state(5, seed + 3).unwrap();
            let once = propagate(&h, t1 + t2, &psi).unwrap();
            let twice = propagate(&h, t2, &propagate(&h, t1, &psi).unwrap()).unwrap();
            prop_assert!((once.amplitudes() - twice.amplitudes()).camax() < 1e-10);
        }

        #[test]
        fn amplitude_matches_unitary(seed in 0u64..200, t in 0.0f64..4.0) {
            let h = random_hermitian(4, seed);
            let p = Propagator::new(&h).unwrap();
            let u = p.unitary(t);
            for i in 0..4 { for j in 0..4 {
                prop_assert!((u.matrix()[(i, j)] - p.amplitude(i, j, t)).norm() < 1e-12);
            }}
        }

        #[test]
        fn tensor_is_associative(s1 in 0u64..100, s2 in 0u64..100, s3 in 0u64..100) {
            let a = random_pure_state(2, s1).unwrap();
            let b = random_pure_state(3, s2 + 100).unwrap();
            let c = random_pure_state(2, s3 + 200).unwrap();
            let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
            let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
            // Same index layout; entries differ only by floating-point product order.
            prop_assert_eq!(left.dim(), 12);
            prop_assert!((left.amplitudes() - right.amplitudes()).camax() < 1e-15);
        }
    }
}
