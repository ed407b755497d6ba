use crate::orderstats::Atom;
use crate::{Error, Result};

pub(crate) const UNASSIGNED: usize = usize::MAX;

/// Assignments plus the unique atoms of the live clusters.
///
/// Cluster `k` owns `atoms[k]` and `counts[k]` members. Clusters never stay
/// empty: removing the last member drops the cluster and moves the highest
/// index into its slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    assignments: Vec<usize>,
    atoms: Vec<Atom>,
    counts: Vec<usize>,
    nu: f64,
}

impl ChainState {
    pub fn new(assignments: Vec<usize>, atoms: Vec<Atom>, nu: f64) -> Result<Self> {
        let mut counts = vec![0; atoms.len()];
        for (i, &k) in assignments.iter().enumerate() {
            if k >= atoms.len() {
                return Err(Error::domain(format!(
                    "observation {i} assigned to missing cluster {k}"
                )));
            }
            counts[k] += 1;
        }
        let state = ChainState {
            assignments,
            atoms,
            counts,
            nu,
        };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn set_nu(&mut self, nu: f64) {
        self.nu = nu;
    }

    pub fn n_obs(&self) -> usize {
        self.assignments.len()
    }

    /// Number of live clusters `N*`.
    pub fn n_clusters(&self) -> usize {
        self.atoms.len()
    }

    pub fn members(&self, k: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == k).then_some(i))
            .collect()
    }

    pub(crate) fn set_atom(&mut self, k: usize, atom: Atom) {
        self.atoms[k] = atom;
    }

    /// Takes observation `i` out of its cluster. If that empties the cluster,
    /// the cluster is dropped and its atom returned.
    pub fn remove_observation(&mut self, i: usize) -> Option<Atom> {
        let k = self.assignments[i];
        assert_ne!(k, UNASSIGNED, "observation {i} already removed");
        self.assignments[i] = UNASSIGNED;
        self.counts[k] -= 1;
        if self.counts[k] > 0 {
            return None;
        }
        let last = self.atoms.len() - 1;
        let atom = self.atoms.swap_remove(k);
        self.counts.swap_remove(k);
        if k != last {
            for c in self.assignments.iter_mut().filter(|c| **c == last) {
                *c = k;
            }
        }
        Some(atom)
    }

    pub(crate) fn is_removed(&self, i: usize) -> bool {
        self.assignments[i] == UNASSIGNED
    }

    /// Puts a removed observation into live cluster `k`.
    pub fn assign(&mut self, i: usize, k: usize) {
        debug_assert!(self.is_removed(i));
        self.assignments[i] = k;
        self.counts[k] += 1;
    }

    /// Opens a new cluster holding only observation `i`.
    pub fn open_cluster(&mut self, i: usize, atom: Atom) -> usize {
        debug_assert!(self.is_removed(i));
        let k = self.atoms.len();
        self.atoms.push(atom);
        self.counts.push(1);
        self.assignments[i] = k;
        k
    }

    pub fn check_invariants(&self) -> Result<()> {
        let fail = |m: String| Err(Error::domain(format!("chain state invariant: {m}")));
        if self.counts.len() != self.atoms.len() {
            return fail("counts and atoms disagree in length".into());
        }
        let mut counts = vec![0usize; self.atoms.len()];
        for (i, &k) in self.assignments.iter().enumerate() {
            if k >= self.atoms.len() {
                return fail(format!("observation {i} points at cluster {k}"));
            }
            counts[k] += 1;
        }
        if counts != self.counts {
            return fail("cached counts are stale".into());
        }
        if let Some(k) = counts.iter().position(|&c| c == 0) {
            return fail(format!("cluster {k} is empty"));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return fail(format!("nu = {}", self.nu));
        }
        Ok(())
    }
}
