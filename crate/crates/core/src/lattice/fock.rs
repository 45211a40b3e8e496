//! Two-species bosonic occupation basis `|n_a¹,n_b¹; …; n_a^M,n_b^M⟩`.
//!
//! Species `a` carries internal state `|0⟩`, species `b` carries `|1⟩`. The
//! frozen ancilla of the CPHASE gate is not a basis degree of freedom: its
//! internal state is conserved and enters the Hamiltonian as a parameter.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::quantum::{BasisTag, Operator};

/// Largest supported lattice.
pub const MAX_SITES: usize = 6;
/// Occupation bound per site and species (exact for ≤ 4 atoms).
pub const OCCUPATION_BOUND: u8 = 4;

/// Atomic species, labelled by internal state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    /// Internal state `|0⟩`.
    A,
    /// Internal state `|1⟩`.
    B,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::A, Species::B];

    pub fn index(self) -> usize {
        match self {
            Species::A => 0,
            Species::B => 1,
        }
    }

    /// Species carrying qubit value `bit`.
    pub fn from_bit(bit: usize) -> Species {
        if bit == 0 {
            Species::A
        } else {
            Species::B
        }
    }
}

/// Occupation numbers `[n_a, n_b]` of every site.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<[u8; 2]>);

impl Occupation {
    pub fn new(sites: Vec<[u8; 2]>) -> Self {
        Occupation(sites)
    }

    pub fn empty(sites: usize) -> Self {
        Occupation(vec![[0, 0]; sites])
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, site: usize, s: Species) -> u8 {
        self.0[site][s.index()]
    }

    pub fn site(&self, site: usize) -> [u8; 2] {
        self.0[site]
    }

    pub fn on_site(&self, site: usize) -> u8 {
        self.0[site][0] + self.0[site][1]
    }

    pub fn total(&self, s: Species) -> usize {
        self.0.iter().map(|n| n[s.index()] as usize).sum()
    }

    pub fn atoms(&self) -> usize {
        self.total(Species::A) + self.total(Species::B)
    }

    /// At most one atom on every site.
    pub fn is_singly_occupied(&self) -> bool {
        (0..self.sites()).all(|j| self.on_site(j) <= 1)
    }

    /// Copy with one atom of species `s` added at `site`.
    pub fn with_added(&self, site: usize, s: Species) -> Occupation {
        let mut o = self.clone();
        o.0[site][s.index()] += 1;
        o
    }

    /// Moves one atom of `s` from `from` to `to`; `None` if `from` is empty.
    pub fn hop(&self, s: Species, from: usize, to: usize) -> Option<Occupation> {
        if self.0[from][s.index()] == 0 {
            return None;
        }
        let mut o = self.clone();
        o.0[from][s.index()] -= 1;
        o.0[to][s.index()] += 1;
        Some(o)
    }
}

impl fmt::Debug for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|[a, b]| format!("{a},{b}")).collect();
        write!(f, "|{}>", parts.join(";"))
    }
}

/// Ordered list of occupation states with an inverse index.
#[derive(Clone, Debug)]
pub struct FockBasis {
    sites: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
    tag: BasisTag,
}

impl FockBasis {
    /// Every state with `n_a` atoms of species a and `n_b` of species b.
    pub fn sector(sites: usize, n_a: usize, n_b: usize) -> Result<Self> {
        check_sites(sites)?;
        if n_a > OCCUPATION_BOUND as usize * sites || n_b > OCCUPATION_BOUND as usize * sites {
            return Err(Error::validation(
                "particle number exceeds the occupation bound",
            ));
        }
        let dist_a = distributions(sites, n_a);
        let dist_b = distributions(sites, n_b);
        let mut states = Vec::with_capacity(dist_a.len() * dist_b.len());
        for da in &dist_a {
            for db in &dist_b {
                states.push(Occupation((0..sites).map(|j| [da[j], db[j]]).collect()));
            }
        }
        FockBasis::from_states(sites, states, format!("fock:M={sites},na={n_a},nb={n_b}"))
    }

    /// Every state with `n` atoms in total, any species split.
    pub fn with_total(sites: usize, n: usize) -> Result<Self> {
        check_sites(sites)?;
        let mut states = Vec::new();
        for n_b in 0..=n {
            states.extend(FockBasis::sector(sites, n - n_b, n_b)?.states);
        }
        FockBasis::from_states(sites, states, format!("fock:M={sites},n={n}"))
    }

    /// Closure of `seeds` under single-atom hops across the given bonds
    /// (`(bond j, species)` moves an atom between sites `j` and `j+1`).
    /// This is the exact dynamical subspace of a Hamiltonian whose only
    /// nonzero hoppings are those bonds; the seeds come first, in order.
    pub fn reachable(
        sites: usize,
        seeds: &[Occupation],
        bonds: &[(usize, Species)],
    ) -> Result<Self> {
        check_sites(sites)?;
        if bonds.iter().any(|&(j, _)| j + 1 >= sites) {
            return Err(Error::validation("bond index outside the lattice"));
        }
        let mut seen: HashMap<Occupation, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if s.sites() != sites {
                return Err(Error::validation(
                    "seed state has the wrong number of sites",
                ));
            }
            if !seen.contains_key(s) {
                seen.insert(s.clone(), states.len());
                states.push(s.clone());
                queue.push_back(s.clone());
            }
        }
        let mut discovered = BTreeSet::new();
        while let Some(s) = queue.pop_front() {
            for &(j, sp) in bonds {
                for (from, to) in [(j, j + 1), (j + 1, j)] {
                    if let Some(t) = s.hop(sp, from, to) {
                        if t.site(to)[sp.index()] <= OCCUPATION_BOUND && !seen.contains_key(&t) {
                            seen.insert(t.clone(), usize::MAX);
                            discovered.insert(t.clone());
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        // Seeds keep their order; the rest follow in canonical order.
        states.extend(discovered);
        FockBasis::from_states(sites, states, format!("fock:M={sites},reachable"))
    }

    /// Explicit state list (must be unique and consistent in site count).
    pub fn from_states(
        sites: usize,
        states: Vec<Occupation>,
        name: impl AsRef<str>,
    ) -> Result<Self> {
        check_sites(sites)?;
        if states.is_empty() {
            return Err(Error::validation("empty Fock basis"));
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if s.sites() != sites {
                return Err(Error::validation("state has the wrong number of sites"));
            }
            if s.0
                .iter()
                .any(|n| n[0] > OCCUPATION_BOUND || n[1] > OCCUPATION_BOUND)
            {
                return Err(Error::validation("state exceeds the occupation bound"));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate state {s:?}")));
            }
        }
        let tag = BasisTag::new(name, states.len());
        Ok(FockBasis {
            sites,
            states,
            index,
            tag,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn index_of(&self, s: &Occupation) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    /// Diagonal number operator of species `s` summed over all sites.
    pub fn number_operator(&self, s: Species) -> Operator {
        let d: Vec<f64> = self.states.iter().map(|o| o.total(s) as f64).collect();
        Operator::diagonal(&d)
    }

    /// Projector onto states with at most one atom per site.
    pub fn singly_occupied_projector(&self) -> Operator {
        let d: Vec<f64> = self
            .states
            .iter()
            .map(|o| if o.is_singly_occupied() { 1.0 } else { 0.0 })
            .collect();
        Operator::diagonal(&d)
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        Err(Error::validation(format!(
            "site count {sites} outside 1..={MAX_SITES}"
        )))
    } else {
        Ok(())
    }
}

/// All ways to put `n` identical bosons on `sites` sites (bounded per site),
/// in descending lexicographic order.
fn distributions(sites: usize, n: usize) -> Vec<Vec<u8>> {
    fn rec(site: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, sites: usize) {
        if site + 1 == sites {
            if left <= OCCUPATION_BOUND as usize {
                cur.push(left as u8);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for k in (0..=left.min(OCCUPATION_BOUND as usize)).rev() {
            cur.push(k as u8);
            rec(site + 1, left - k, cur, out, sites);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out, sites);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sector_sizes_match_combinatorics() {
        for (m, na, nb) in [(2, 1, 1), (3, 2, 1), (5, 2, 2), (4, 3, 0)] {
            let b = FockBasis::sector(m, na, nb).unwrap();
            assert_eq!(b.len(), binom(m + na - 1, na) * binom(m + nb - 1, nb));
            for (i, s) in b.states().iter().enumerate() {
                assert_eq!(b.index_of(s), Some(i));
                assert_eq!(s.total(Species::A), na);
                assert_eq!(s.total(Species::B), nb);
            }
        }
    }

    #[test]
    fn reachable_closure_is_exact() {
        // Two atoms on the first two of three sites, only bond 0 open.
        let seed = Occupation::new(vec![[1, 0], [0, 1], [0, 0]]);
        let b = FockBasis::reachable(
            3,
            std::slice::from_ref(&seed),
            &[(0, Species::A), (0, Species::B)],
        )
        .unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.index_of(&seed), Some(0));
        assert!(b.states().iter().all(|s| s.site(2) == [0, 0]));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(FockBasis::sector(0, 1, 0).is_err());
        assert!(FockBasis::sector(7, 1, 0).is_err());
        assert!(FockBasis::sector(1, 5, 0).is_err());
        let s = Occupation::new(vec![[1, 0]]);
        assert!(FockBasis::from_states(1, vec![s.clone(), s], "dup").is_err());
    }
}
