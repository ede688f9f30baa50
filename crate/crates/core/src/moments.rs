//! Moment vectors and the associated Riesz functional.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::index::{IndexSet, MultiIndex};
use crate::poly::Polynomial;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("moment of the zero index must be 1, got {0}")]
    ZeroMomentNotOne(f64),
    #[error("moment value count {0} does not match index set size {1}")]
    LengthMismatch(usize, usize),
    #[error("moment map key {0} is not in the index set")]
    KeyOutsideIndexSet(MultiIndex),
    #[error("moment map is missing a value for {0}")]
    MissingKey(MultiIndex),
    #[error("polynomial term {0} lies outside the index set span")]
    IndexOutOfSpan(MultiIndex),
}

/// Target moments `g = (g_i)` over a validated index set, with `g_0 = 1`.
///
/// Values are stored in the index set's canonical graded-lexicographic
/// order so vector and matrix layouts are deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec<S> {
    index_set: Arc<IndexSet>,
    values: Vec<S>,
}

impl<S: Real> MomentSpec<S> {
    /// Builds from values aligned with `index_set.indices()`.
    pub fn from_ordered(index_set: Arc<IndexSet>, values: Vec<S>) -> Result<Self, MomentError> {
        if values.len() != index_set.len() {
            return Err(MomentError::LengthMismatch(values.len(), index_set.len()));
        }
        // loose enough to admit numerically recomputed moment vectors
        let g0 = values[index_set.zero_position()];
        if (g0 - S::one()).abs() > S::of(1e-6) {
            return Err(MomentError::ZeroMomentNotOne(g0.f64()));
        }
        Ok(MomentSpec { index_set, values })
    }

    /// Builds from an index-to-value map; the key set must equal the index
    /// set exactly.
    pub fn from_map(
        index_set: Arc<IndexSet>,
        map: &BTreeMap<MultiIndex, S>,
    ) -> Result<Self, MomentError> {
        for key in map.keys() {
            if !index_set.contains(key) {
                return Err(MomentError::KeyOutsideIndexSet(key.clone()));
            }
        }
        let mut values = Vec::with_capacity(index_set.len());
        for i in index_set.indices() {
            match map.get(i) {
                Some(&v) => values.push(v),
                None => return Err(MomentError::MissingKey(i.clone())),
            }
        }
        Self::from_ordered(index_set, values)
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    /// Values aligned with the canonical index ordering.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, i: &MultiIndex) -> Option<S> {
        self.index_set.position(i).map(|p| self.values[p])
    }

    /// Applies the Riesz functional: `phi_g(p) = sum_i coeff_i(p) * g_i`.
    pub fn riesz_apply(&self, p: &Polynomial<S>) -> Result<S, MomentError> {
        let mut acc = S::zero();
        for (i, &c) in p.terms() {
            match self.index_set.position(i) {
                Some(pos) => acc = acc + c * self.values[pos],
                None => return Err(MomentError::IndexOutOfSpan(i.clone())),
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    fn gaussian_g() -> MomentSpec<f64> {
        let set = Arc::new(IndexSet::full(1, 1));
        MomentSpec::from_ordered(set, vec![1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn riesz_reads_single_moment() {
        let g = gaussian_g();
        let p = Polynomial::monomial(mi(&[2]), 1.0);
        assert_eq!(g.riesz_apply(&p).unwrap(), 1.0);
    }

    #[test]
    fn riesz_of_expanded_square() {
        // (X - a)^2 = X^2 - 2aX + a^2 maps to 1 + a^2 under g = (1, 0, 1)
        let g = gaussian_g();
        let a = 2.0;
        let p = Polynomial::from_terms(
            1,
            [(mi(&[2]), 1.0), (mi(&[1]), -2.0 * a), (mi(&[0]), a * a)],
        );
        assert_eq!(g.riesz_apply(&p).unwrap(), 1.0 + a * a);
    }

    #[test]
    fn riesz_of_zero_polynomial() {
        let g = gaussian_g();
        assert_eq!(g.riesz_apply(&Polynomial::zero(1)).unwrap(), 0.0);
    }

    #[test]
    fn riesz_rejects_out_of_span() {
        let g = gaussian_g();
        let p = Polynomial::monomial(mi(&[3]), 1.0);
        assert_eq!(g.riesz_apply(&p).unwrap_err(), MomentError::IndexOutOfSpan(mi(&[3])));
    }

    #[test]
    fn zero_moment_must_be_one() {
        let set = Arc::new(IndexSet::full(1, 1));
        let err = MomentSpec::from_ordered(set, vec![0.5, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, MomentError::ZeroMomentNotOne(_)));
    }

    #[test]
    fn map_constructor_requires_exact_key_set() {
        let set = Arc::new(IndexSet::full(1, 1));
        let mut map = BTreeMap::new();
        map.insert(mi(&[0]), 1.0);
        map.insert(mi(&[1]), 0.0);
        let err = MomentSpec::from_map(set, &map).unwrap_err();
        assert_eq!(err, MomentError::MissingKey(mi(&[2])));
    }
}
