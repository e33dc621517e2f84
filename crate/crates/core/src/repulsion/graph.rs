use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest number of pairs `k(k-1)/2` for which subsets are enumerated
/// (k <= 7).
pub const MAX_ENUMERATED_PAIRS: usize = 21;

/// A set of interacting pairs `(r, s)`, `r < s`, over `k` coordinates.
///
/// Indices are zero-based. Equivalently an undirected simple graph on `k`
/// nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionSet {
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl InteractionSet {
    pub fn new(k: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(r, s) in &edges {
            if !(r < s && s < k) {
                return Err(Error::domain(format!(
                    "pair ({r}, {s}) is not an interaction over {k} coordinates"
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { k, edges })
    }

    pub fn empty(k: usize) -> Self {
        Self { k, edges: Vec::new() }
    }

    /// The complete graph `I_k`.
    pub fn complete(k: usize) -> Self {
        Self {
            k,
            edges: all_pairs(k),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// All pairs `(r, s)` with `r < s < k` in lexicographic order.
pub fn all_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for r in 0..k {
        for s in (r + 1)..k {
            out.push((r, s));
        }
    }
    out
}

pub fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

pub(crate) fn check_enumerable(k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::domain(format!("interaction sets need k >= 2, got {k}")));
    }
    let pairs = pair_count(k);
    if pairs > MAX_ENUMERATED_PAIRS {
        return Err(Error::Capacity(format!(
            "k = {k} has {pairs} pairs (limit {MAX_ENUMERATED_PAIRS}); use the Monte-Carlo estimator"
        )));
    }
    Ok(pairs)
}

/// Every non-empty subset of `I_k`, each exactly once.
pub fn enumerate_interaction_sets(k: usize) -> Result<impl Iterator<Item = InteractionSet>> {
    let pairs = check_enumerable(k)?;
    let all = all_pairs(k);
    Ok((1u32..(1u32 << pairs)).map(move |mask| {
        let edges = all
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, e)| *e)
            .collect();
        InteractionSet { k, edges }
    }))
}

/// Graph Laplacian: degrees on the diagonal, `-1` for each edge.
pub fn laplacian_of(a: &InteractionSet) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(a.k, a.k);
    for &(r, s) in &a.edges {
        l[(r, r)] += 1.0;
        l[(s, s)] += 1.0;
        l[(r, s)] -= 1.0;
        l[(s, r)] -= 1.0;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        assert_eq!(enumerate_interaction_sets(2).unwrap().count(), 1);
        assert_eq!(enumerate_interaction_sets(3).unwrap().count(), 7);
        assert_eq!(enumerate_interaction_sets(4).unwrap().count(), 63);
        let only = enumerate_interaction_sets(2).unwrap().next().unwrap();
        assert_eq!(only.edges(), &[(0, 1)]);
    }

    #[test]
    fn subsets_are_distinct() {
        let mut seen: Vec<Vec<(usize, usize)>> =
            enumerate_interaction_sets(4).unwrap().map(|a| a.edges().to_vec()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 63);
        assert!(seen.iter().all(|e| !e.is_empty()));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(enumerate_interaction_sets(7).is_ok());
        assert!(matches!(enumerate_interaction_sets(8), Err(Error::Capacity(_))));
    }

    #[test]
    fn laplacian_examples() {
        let single = InteractionSet::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(
            laplacian_of(&single),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        assert_eq!(laplacian_of(&InteractionSet::empty(3)), DMatrix::zeros(3, 3));

        let tri = laplacian_of(&InteractionSet::complete(3));
        let mut eig: Vec<f64> = tri.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!(eig[0].abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12 && (eig[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(InteractionSet::new(3, vec![(1, 1)]).is_err());
        assert!(InteractionSet::new(3, vec![(2, 1)]).is_err());
        assert!(InteractionSet::new(3, vec![(0, 3)]).is_err());
    }
}
