//! Two-species Bose-Hubbard Hamiltonian and its ancilla-coupled variant.
//!
//! `H = −Σ_j Σ_α J_j^(α) (α_j† α_{j+1} + h.c.)
//!      + Σ_j [(U_a/2) n_a(n_a−1) + (U_b/2) n_b(n_b−1) + U_ab n_a n_b]`
//!
//! For the CPHASE gate a frozen ancilla at site `q` adds
//! `U^q_σ (n_a + n_b)` at that site, `σ` being the ancilla internal state.
//! Energies are in units of the recoil energy, with ħ = 1.

use serde::{Deserialize, Serialize};

use super::fock::{FockBasis, Species};
use crate::error::{Error, Result};
use crate::quantum::{re, CMatrix, Operator};

/// Hopping energies per bond and on-site interactions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    /// `J_j^(a)`: hopping of species a across bond `j` (sites `j`, `j+1`).
    pub j_a: Vec<f64>,
    /// `J_j^(b)`: hopping of species b across bond `j`.
    pub j_b: Vec<f64>,
    pub u_a: f64,
    pub u_b: f64,
    pub u_ab: f64,
}

impl HubbardParams {
    /// Same hopping `j` on every bond for both species, all interactions `u`.
    pub fn uniform(sites: usize, j: f64, u: f64) -> Self {
        let bonds = sites.saturating_sub(1);
        HubbardParams {
            j_a: vec![j; bonds],
            j_b: vec![j; bonds],
            u_a: u,
            u_b: u,
            u_ab: u,
        }
    }

    /// Species-independent hoppings per bond, all interactions `u`.
    pub fn with_bonds(bonds: &[f64], u: f64) -> Self {
        HubbardParams {
            j_a: bonds.to_vec(),
            j_b: bonds.to_vec(),
            u_a: u,
            u_b: u,
            u_ab: u,
        }
    }

    pub fn sites(&self) -> usize {
        self.j_a.len() + 1
    }

    pub fn hopping(&self, bond: usize, s: Species) -> f64 {
        match s {
            Species::A => self.j_a[bond],
            Species::B => self.j_b[bond],
        }
    }

    /// Bonds with nonzero hopping, per species.
    pub fn open_bonds(&self) -> Vec<(usize, Species)> {
        let mut out = Vec::new();
        for j in 0..self.j_a.len() {
            for s in Species::BOTH {
                if self.hopping(j, s) != 0.0 {
                    out.push((j, s));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_a.len() != self.j_b.len() {
            return Err(Error::validation(
                "J_a and J_b must have one entry per bond",
            ));
        }
        let all = self
            .j_a
            .iter()
            .chain(&self.j_b)
            .chain([&self.u_a, &self.u_b, &self.u_ab]);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::validation("Hubbard parameters must be finite"));
        }
        if self.j_a.iter().chain(&self.j_b).any(|&j| j < 0.0) {
            return Err(Error::validation("hopping energies must be non-negative"));
        }
        Ok(())
    }

    /// On-site interaction energy of `[n_a, n_b]`.
    pub fn onsite(&self, n: [u8; 2]) -> f64 {
        let (na, nb) = (n[0] as f64, n[1] as f64);
        0.5 * self.u_a * na * (na - 1.0) + 0.5 * self.u_b * nb * (nb - 1.0) + self.u_ab * na * nb
    }
}

/// Frozen ancilla atom coupled to register atoms on its site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AncillaParams {
    pub site: usize,
    /// Register–ancilla interaction for ancilla state `|0⟩_q`.
    pub u_q0: f64,
    /// Register–ancilla interaction for ancilla state `|1⟩_q`.
    pub u_q1: f64,
    /// Ancilla internal state (0 or 1); conserved by the dynamics.
    pub sigma: u8,
}

impl AncillaParams {
    /// Interaction energy for the current internal state.
    pub fn u_q(&self) -> f64 {
        if self.sigma == 0 {
            self.u_q0
        } else {
            self.u_q1
        }
    }

    pub fn with_sigma(mut self, sigma: u8) -> Self {
        self.sigma = sigma;
        self
    }
}

/// Hamiltonian on the given basis. The basis must be closed under the
/// nonzero hoppings of `params`.
pub fn build_hamiltonian(params: &HubbardParams, basis: &FockBasis) -> Result<Operator> {
    build(params, None, basis)
}

/// Hamiltonian including the ancilla interaction term.
pub fn build_cphase_hamiltonian(
    params: &HubbardParams,
    anc: &AncillaParams,
    basis: &FockBasis,
) -> Result<Operator> {
    if anc.site >= basis.sites() {
        return Err(Error::validation(format!(
            "ancilla site {} outside the lattice",
            anc.site
        )));
    }
    if anc.sigma > 1 || !anc.u_q0.is_finite() || !anc.u_q1.is_finite() {
        return Err(Error::validation("invalid ancilla parameters"));
    }
    build(params, Some(anc), basis)
}

fn build(
    params: &HubbardParams,
    anc: Option<&AncillaParams>,
    basis: &FockBasis,
) -> Result<Operator> {
    params.validate()?;
    if params.sites() != basis.sites() {
        return Err(Error::validation(format!(
            "parameters describe {} sites but the basis has {}",
            params.sites(),
            basis.sites()
        )));
    }
    let n = basis.len();
    let mut h = CMatrix::zeros(n, n);
    for (i, s) in basis.states().iter().enumerate() {
        let mut diag: f64 = (0..basis.sites()).map(|j| params.onsite(s.site(j))).sum();
        if let Some(a) = anc {
            diag += a.u_q() * s.on_site(a.site) as f64;
        }
        h[(i, i)] = re(diag);
        // Hop right (j -> j+1); the Hermitian-conjugate entry covers j+1 -> j.
        for (bond, sp) in params.open_bonds() {
            let from = s.get(bond, sp) as f64;
            if from == 0.0 {
                continue;
            }
            let to = s.get(bond + 1, sp) as f64;
            let target = s.hop(sp, bond, bond + 1).expect("occupied site");
            let k = basis.index_of(&target).ok_or_else(|| {
                Error::validation(format!(
                    "basis not closed under hopping: {target:?} missing"
                ))
            })?;
            let amp = -params.hopping(bond, sp) * (from * (to + 1.0)).sqrt();
            h[(k, i)] += re(amp);
            h[(i, k)] += re(amp);
        }
    }
    Operator::hermitian(h)
}
