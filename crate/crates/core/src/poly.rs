//! Polynomials in the monomial span of an index set.

use std::collections::BTreeMap;

use crate::index::MultiIndex;
use crate::scalar::Real;

/// A polynomial stored as a sparse coefficient map in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    dim: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Real> Polynomial<S> {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn monomial(index: MultiIndex, coeff: S) -> Self {
        let dim = index.dim();
        let mut p = Self::zero(dim);
        p.set(index, coeff);
        p
    }

    pub fn constant(dim: usize, value: S) -> Self {
        Self::monomial(MultiIndex::zero(dim), value)
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Self {
        let mut p = Self::zero(dim);
        for (i, c) in terms {
            p.set(i, c);
        }
        p
    }

    /// Sets one coefficient; zero coefficients are dropped from the map.
    pub fn set(&mut self, index: MultiIndex, coeff: S) {
        assert_eq!(index.dim(), self.dim, "term dimension mismatch");
        if coeff == S::zero() {
            self.terms.remove(&index);
        } else {
            self.terms.insert(index, coeff);
        }
    }

    pub fn coeff(&self, index: &MultiIndex) -> S {
        self.terms.get(index).copied().unwrap_or_else(S::zero)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn max_coeff_norm(&self) -> S {
        self.terms
            .values()
            .fold(S::zero(), |m, &c| if c.abs() > m { c.abs() } else { m })
    }

    pub fn scale(&self, factor: S) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(i, &c)| (i.clone(), c * factor)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (i, &c) in other.terms() {
            out.set(i.clone(), out.coeff(i) + c);
        }
        out
    }

    /// Exact monomial-basis evaluation at a point.
    pub fn eval(&self, t: &[S]) -> S {
        assert_eq!(t.len(), self.dim, "point dimension mismatch");
        let mut acc = S::zero();
        for (i, &c) in &self.terms {
            acc = acc + c * monomial_eval(i, t);
        }
        acc
    }
}

/// `t^i = t_1^{i_1} * ... * t_n^{i_n}`.
pub fn monomial_eval<S: Real>(i: &MultiIndex, t: &[S]) -> S {
    debug_assert_eq!(i.dim(), t.len());
    let mut acc = S::one();
    for (e, &x) in i.entries().iter().zip(t) {
        if *e > 0 {
            acc = acc * x.powi(*e as i32);
        }
    }
    acc
}
