//! Multi-indices and regular index sets.
//!
//! An index set is *regular* when it contains, for every member `i`, all
//! indices obtained by zeroing out any subset of the coordinates of `i`
//! (the set `sigma(i)`). The validated sets additionally contain the zero
//! index, have even maximal order `2k`, and contain the top diagonal
//! indices `2k·e_axis` for every coordinate axis.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Exponent vector `i = (i_1, ..., i_n)` of a monomial `t^i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    /// Builds an index from its exponents. Panics on an empty vector;
    /// dimension zero has no meaning here.
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        MultiIndex { entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    /// `power * e_axis`.
    pub fn axis_power(dim: usize, axis: usize, power: u32) -> Self {
        let mut entries = vec![0; dim];
        entries[axis] = power;
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// The order `|i| = sum of exponents`.
    pub fn order(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (pos, e) in self.entries.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Graded-lexicographic order: first by `|i|`, then lexicographically.
/// This is the canonical layout for moment vectors and matrices.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All indices obtained from `i` by zeroing any subset of its coordinates.
///
/// The result always contains the zero index and `i` itself and has
/// cardinality `2^(number of nonzero entries)`.
pub fn sigma(i: &MultiIndex) -> BTreeSet<MultiIndex> {
    let nonzero: Vec<usize> = (0..i.dim()).filter(|&l| i.entries[l] != 0).collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << nonzero.len()) {
        let mut entries = vec![0u32; i.dim()];
        for (bit, &l) in nonzero.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                entries[l] = i.entries[l];
            }
        }
        out.insert(MultiIndex::new(entries));
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexSetError {
    #[error("index list is empty")]
    Empty,
    #[error("index {0} has dimension {1}, expected {2}")]
    DimensionMismatch(MultiIndex, usize, usize),
    #[error("index {0} appears more than once")]
    Duplicate(MultiIndex),
    #[error("the zero index is missing")]
    MissingZeroIndex,
    #[error("set is not regular: {index} requires {missing} (in sigma({index}))")]
    NotRegular { index: MultiIndex, missing: MultiIndex },
    #[error("maximal order {0} is odd; an even maximal order 2k is required")]
    OddMaxDegree(u32),
    #[error("maximal order is 0; at least one index of positive order is required")]
    ZeroMaxDegree,
    #[error("top diagonal index 2k*e_{0} is missing")]
    MissingTopDiagonal(usize),
}

/// A validated regular index set with even maximal order `2k`.
#[derive(Clone, Debug)]
pub struct IndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    half_degree: u32,
}

impl IndexSet {
    /// Validates a list of multi-indices against the regularity rules and
    /// returns the canonical graded-lexicographically sorted set.
    pub fn validate(indices: Vec<MultiIndex>) -> Result<Self, IndexSetError> {
        let first = indices.first().ok_or(IndexSetError::Empty)?;
        let dim = first.dim();
        for i in &indices {
            if i.dim() != dim {
                return Err(IndexSetError::DimensionMismatch(i.clone(), i.dim(), dim));
            }
        }

        let mut sorted = indices;
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(IndexSetError::Duplicate(w[0].clone()));
            }
        }

        let position: HashMap<MultiIndex, usize> = sorted
            .iter()
            .cloned()
            .enumerate()
            .map(|(p, i)| (i, p))
            .collect();

        if !position.contains_key(&MultiIndex::zero(dim)) {
            return Err(IndexSetError::MissingZeroIndex);
        }
        for i in &sorted {
            for j in sigma(i) {
                if !position.contains_key(&j) {
                    return Err(IndexSetError::NotRegular { index: i.clone(), missing: j });
                }
            }
        }

        let max_order = sorted.iter().map(|i| i.order()).max().unwrap();
        if max_order == 0 {
            return Err(IndexSetError::ZeroMaxDegree);
        }
        if max_order % 2 != 0 {
            return Err(IndexSetError::OddMaxDegree(max_order));
        }
        let half_degree = max_order / 2;
        for axis in 0..dim {
            let diag = MultiIndex::axis_power(dim, axis, max_order);
            if !position.contains_key(&diag) {
                return Err(IndexSetError::MissingTopDiagonal(axis));
            }
        }

        Ok(IndexSet { dim, indices: sorted, position, half_degree })
    }

    /// The full set `{ i : |i| <= 2k }` in `dim` variables.
    pub fn full(dim: usize, half_degree: u32) -> Self {
        assert!(dim >= 1 && half_degree >= 1);
        let mut indices = Vec::new();
        let mut current = vec![0u32; dim];
        loop {
            if current.iter().sum::<u32>() <= 2 * half_degree {
                indices.push(MultiIndex::new(current.clone()));
            }
            // odometer over [0, 2k]^dim
            let mut axis = 0;
            loop {
                current[axis] += 1;
                if current[axis] <= 2 * half_degree {
                    break;
                }
                current[axis] = 0;
                axis += 1;
                if axis == dim {
                    return Self::validate(indices).expect("full set is regular");
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half-degree `k`; the maximal order of the set is `2k`.
    pub fn half_degree(&self) -> u32 {
        self.half_degree
    }

    /// Number of indices `N`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated sets are nonempty by construction
    }

    /// Indices in graded-lexicographic order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, i: &MultiIndex) -> Option<usize> {
        self.position.get(i).copied()
    }

    pub fn contains(&self, i: &MultiIndex) -> bool {
        self.position.contains_key(i)
    }

    /// Position of the zero index in the canonical ordering (always 0).
    pub fn zero_position(&self) -> usize {
        0
    }

    /// Positions of the indices of maximal order `2k`.
    pub fn top_degree_positions(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| self.indices[p].order() == 2 * self.half_degree)
            .collect()
    }

    /// The top diagonal index `2k*e_axis`.
    pub fn top_diagonal(&self, axis: usize) -> MultiIndex {
        MultiIndex::axis_power(self.dim, axis, 2 * self.half_degree)
    }

    /// Deduplicated Minkowski sums `i + j` over the set, sorted, together
    /// with the `N x N` table mapping a pair of positions to the position
    /// of their sum. Orders reach `4k`; the table backs Hessian assembly.
    pub fn pairwise_sums(&self) -> (Vec<MultiIndex>, Vec<Vec<usize>>) {
        let mut sums: BTreeSet<MultiIndex> = BTreeSet::new();
        for a in &self.indices {
            for b in &self.indices {
                sums.insert(a.add(b));
            }
        }
        let sums: Vec<MultiIndex> = sums.into_iter().collect();
        let pos: HashMap<&MultiIndex, usize> =
            sums.iter().enumerate().map(|(p, i)| (i, p)).collect();
        let table = self
            .indices
            .iter()
            .map(|a| self.indices.iter().map(|b| pos[&a.add(b)]).collect())
            .collect();
        (sums, table)
    }
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
    }
}
impl Eq for IndexSet {}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    #[test]
    fn sigma_of_mixed_index() {
        let s = sigma(&mi(&[2, 1]));
        let expect: BTreeSet<MultiIndex> =
            [mi(&[0, 0]), mi(&[2, 0]), mi(&[0, 1]), mi(&[2, 1])].into_iter().collect();
        assert_eq!(s, expect);
    }

    #[test]
    fn sigma_of_zero_is_singleton() {
        let s = sigma(&mi(&[0, 0]));
        assert_eq!(s.len(), 1);
        assert!(s.contains(&mi(&[0, 0])));
    }

    #[test]
    fn sigma_three_dim() {
        let s = sigma(&mi(&[3, 0, 2]));
        assert_eq!(s.len(), 4);
        for j in [mi(&[0, 0, 0]), mi(&[3, 0, 0]), mi(&[0, 0, 2]), mi(&[3, 0, 2])] {
            assert!(s.contains(&j));
        }
    }

    #[test]
    fn validate_one_dim_full_range() {
        let set = IndexSet::validate(vec![mi(&[0]), mi(&[1]), mi(&[2])]).unwrap();
        assert_eq!(set.half_degree(), 1);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn validate_rejects_irregular() {
        let err = IndexSet::validate(vec![mi(&[0, 0]), mi(&[1, 1])]).unwrap_err();
        assert_eq!(
            err,
            IndexSetError::NotRegular { index: mi(&[1, 1]), missing: mi(&[0, 1]) }
        );
    }

    #[test]
    fn validate_full_degree_two_in_two_vars() {
        let indices = vec![
            mi(&[0, 0]),
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
            mi(&[0, 2]),
        ];
        let set = IndexSet::validate(indices).unwrap();
        assert_eq!(set.half_degree(), 1);
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn validate_rejects_odd_max_degree() {
        let err =
            IndexSet::validate(vec![mi(&[0]), mi(&[1]), mi(&[2]), mi(&[3])]).unwrap_err();
        assert_eq!(err, IndexSetError::OddMaxDegree(3));
    }

    #[test]
    fn validate_rejects_missing_zero() {
        let err = IndexSet::validate(vec![mi(&[1]), mi(&[2])]).unwrap_err();
        assert_eq!(err, IndexSetError::MissingZeroIndex);
    }

    #[test]
    fn validate_rejects_missing_top_diagonal() {
        // {(0,0),(1,0),(0,1),(2,0),(1,1)} is missing (0,2)
        let err = IndexSet::validate(vec![
            mi(&[0, 0]),
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
        ])
        .unwrap_err();
        // sigma closure holds, but the (0,2) diagonal is absent
        assert_eq!(err, IndexSetError::MissingTopDiagonal(1));
    }

    #[test]
    fn full_set_matches_manual_count() {
        let set = IndexSet::full(2, 2);
        // #{ i in Z+^2 : |i| <= 4 } = 15
        assert_eq!(set.len(), 15);
        assert_eq!(set.half_degree(), 2);
        assert_eq!(set.indices()[0], mi(&[0, 0]));
    }

    #[test]
    fn graded_lex_ordering() {
        let set = IndexSet::full(2, 1);
        let orders: Vec<u32> = set.indices().iter().map(|i| i.order()).collect();
        let mut sorted = orders.clone();
        sorted.sort();
        assert_eq!(orders, sorted);
    }

    #[test]
    fn pairwise_sums_reach_four_k() {
        let set = IndexSet::full(1, 1);
        let (sums, table) = set.pairwise_sums();
        assert_eq!(sums.len(), 5); // orders 0..=4
        let top = set.position(&mi(&[2])).unwrap();
        assert_eq!(sums[table[top][top]], mi(&[4]));
    }

    #[test]
    fn sigma_closure_reassertable_after_validation() {
        let set = IndexSet::full(2, 2);
        for i in set.indices() {
            for j in sigma(i) {
                assert!(set.contains(&j));
            }
        }
    }
}
