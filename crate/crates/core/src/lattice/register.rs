//! Placement of the four register atoms on the lattice and the map between
//! Fock states and 4-qubit spin states.
//!
//! A Fock state with every atom on its home site is a plain 4-qubit basis
//! state (qubit `k` = internal state of atom `k`). For general Fock states the
//! map is first-quantized: atoms are ordered by site, and `k` atoms sharing a
//! site carry the normalized symmetric spin state with the site's number of
//! `b` atoms. A site holding one `a` and one `b` atom therefore contributes
//! `(|01⟩+|10⟩)/√2`. Distinct spatial configurations are orthogonal, so the
//! DFS leakage of a Fock state is `Σ_config ‖(1−P)χ_config‖²`.

use std::collections::BTreeMap;

use super::fock::{FockBasis, Occupation, Species};
use super::hamiltonian::HubbardParams;
use crate::dfs::{bit, physical_basis, DfsCodec, PHYSICAL_DIM};
use crate::error::{Error, Result};
use crate::quantum::{CVector, StateVector, C64, ZERO};

/// Home sites of the four register atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    sites: usize,
    atom_sites: [usize; 4],
}

impl RegisterLayout {
    pub fn new(sites: usize, atom_sites: [usize; 4]) -> Result<Self> {
        if atom_sites.windows(2).any(|w| w[0] >= w[1]) || atom_sites[3] >= sites {
            return Err(Error::validation(
                "register atom sites must be increasing and inside the lattice",
            ));
        }
        Ok(RegisterLayout { sites, atom_sites })
    }

    /// Four atoms on four adjacent sites (before the last atom is moved out).
    pub fn initialization() -> Self {
        RegisterLayout {
            sites: 4,
            atom_sites: [0, 1, 2, 3],
        }
    }

    /// Working register: atoms on sites 1, 2, 3, 5 of a five-site chain, with
    /// the free site 4 between atoms 3 and 4 hosting the ancilla.
    pub fn standard() -> Self {
        RegisterLayout {
            sites: 5,
            atom_sites: [0, 1, 2, 4],
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn atom_sites(&self) -> [usize; 4] {
        self.atom_sites
    }

    /// Fock state of the 4-qubit basis state `index` (qubit 1 = atom 1).
    pub fn occupation(&self, index: usize) -> Occupation {
        let mut o = Occupation::empty(self.sites);
        for q in 1..=4 {
            o = o.with_added(self.atom_sites[q - 1], Species::from_bit(bit(index, q)));
        }
        o
    }

    /// Exact dynamical basis: every Fock state reachable from the 16 register
    /// configurations through the nonzero hoppings of `params`.
    pub fn basis(&self, params: &HubbardParams) -> Result<FockBasis> {
        if params.sites() != self.sites {
            return Err(Error::validation(
                "parameters and layout disagree on the site count",
            ));
        }
        let seeds: Vec<Occupation> = (0..PHYSICAL_DIM).map(|i| self.occupation(i)).collect();
        FockBasis::reachable(self.sites, &seeds, &params.open_bonds())
    }

    /// Embeds a 4-qubit spin state into the Fock basis.
    pub fn embed(&self, spin: &StateVector, basis: &FockBasis) -> Result<StateVector> {
        if spin.dim() != PHYSICAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: PHYSICAL_DIM,
                found: spin.dim(),
            });
        }
        let mut amps = CVector::zeros(basis.len());
        for (i, &a) in spin.amplitudes().iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let k = basis
                .index_of(&self.occupation(i))
                .ok_or_else(|| Error::validation("register configuration missing from basis"))?;
            amps[k] = a;
        }
        StateVector::new(amps, basis.tag().clone())
    }

    /// Amplitudes of a Fock state on the 16 register configurations
    /// (not renormalized: the deficit is the weight away from home sites).
    pub fn project(&self, state: &StateVector, basis: &FockBasis) -> Result<StateVector> {
        if state.dim() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: state.dim(),
            });
        }
        let amps = CVector::from_iterator(
            PHYSICAL_DIM,
            (0..PHYSICAL_DIM).map(|i| {
                basis
                    .index_of(&self.occupation(i))
                    .map(|k| state.amplitudes()[k])
                    .unwrap_or(ZERO)
            }),
        );
        StateVector::new(amps, physical_basis())
    }
}

/// First-quantized spin components of a Fock state, keyed by the sorted list
/// of atom positions.
pub fn first_quantized(
    state: &StateVector,
    basis: &FockBasis,
) -> Result<BTreeMap<Vec<usize>, CVector>> {
    if state.dim() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: state.dim(),
        });
    }
    let mut out: BTreeMap<Vec<usize>, CVector> = BTreeMap::new();
    for (k, occ) in basis.states().iter().enumerate() {
        let c = state.amplitudes()[k];
        if c == ZERO {
            continue;
        }
        if occ.atoms() != 4 {
            return Err(Error::validation(
                "first-quantized map needs exactly four atoms",
            ));
        }
        let mut positions = Vec::with_capacity(4);
        // Spin patterns with amplitudes, built site by site (MSB = leftmost atom).
        let mut patterns: Vec<(usize, f64)> = vec![(0, 1.0)];
        for site in 0..occ.sites() {
            let [na, nb] = occ.site(site);
            let n = (na + nb) as usize;
            if n == 0 {
                continue;
            }
            positions.extend(std::iter::repeat_n(site, n));
            let local = dicke_patterns(n, nb as usize);
            let amp = 1.0 / (local.len() as f64).sqrt();
            patterns = patterns
                .iter()
                .flat_map(|&(p, a)| local.iter().map(move |&l| ((p << n) | l, a * amp)))
                .collect();
        }
        let chi = out
            .entry(positions)
            .or_insert_with(|| CVector::zeros(PHYSICAL_DIM));
        for (p, a) in patterns {
            chi[p] += c * a;
        }
    }
    Ok(out)
}

/// Bit patterns of `n` qubits with exactly `ones` ones.
fn dicke_patterns(n: usize, ones: usize) -> Vec<usize> {
    (0..1usize << n)
        .filter(|p| p.count_ones() as usize == ones)
        .collect()
}

/// DFS leakage of a (normalized) four-atom Fock state.
pub fn fock_leakage(codec: &DfsCodec, state: &StateVector, basis: &FockBasis) -> Result<f64> {
    let parts = first_quantized(state, basis)?;
    Ok(parts
        .values()
        .map(|chi| codec.leaked_weight(chi))
        .sum::<f64>()
        .min(1.0))
}

/// Overlap `⟨l_L|ψ⟩` of a Fock state with the embedded logical state `l`.
pub fn logical_overlap(
    codec: &DfsCodec,
    layout: &RegisterLayout,
    state: &StateVector,
    basis: &FockBasis,
    l: usize,
) -> Result<C64> {
    let reg = layout.project(state, basis)?;
    codec.logical(l).inner(&reg)
}
