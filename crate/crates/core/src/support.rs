//! Support regions: closed, full-dimensional subsets of R^n.
//!
//! Only kinds whose regularity (positive Lebesgue measure of every
//! neighborhood of every member point) is guaranteed by construction are
//! supported. Arbitrary indicator functions are rejected; regularity is
//! not decidable from samples.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupportError {
    #[error("dimension must be >= 1")]
    ZeroDimension,
    #[error("box bounds have mismatched lengths")]
    BoxLengthMismatch,
    #[error("box side {0} is empty or degenerate (lo >= hi)")]
    DegenerateBoxSide(usize),
    #[error("ball radius must be strictly positive")]
    NonPositiveRadius,
    #[error("half-space system is empty")]
    NoHalfSpaces,
    #[error("half-space normal {0} has wrong dimension")]
    NormalDimensionMismatch(usize),
    #[error("half-space normal {0} is the zero vector")]
    ZeroNormal(usize),
    #[error("claimed interior point violates half-space {0} (needs strict inequality)")]
    InteriorPointNotStrict(usize),
    #[error("offset count does not match normal count")]
    OffsetCountMismatch,
}

/// Per-axis extent of a region, used to set up integration coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisExtent<S> {
    /// The whole real line.
    Full,
    /// `[lo, +inf)`.
    HalfLine { lo: S },
    /// `[lo, hi]`.
    Interval { lo: S, hi: S },
}

/// A closed regular support region.
#[derive(Clone, Debug, PartialEq)]
pub enum SupportRegion<S> {
    /// All of R^n.
    FullSpace { dim: usize },
    /// The nonnegative orthant.
    Orthant { dim: usize },
    /// Axis-aligned box with strictly positive side lengths.
    Box { lo: Vec<S>, hi: Vec<S> },
    /// Closed ball of strictly positive radius centered at the origin.
    Ball { dim: usize, radius: S },
    /// Finite intersection of closed half-spaces `a_r . t <= b_r`,
    /// known full-dimensional via an interior witness point.
    HalfSpaces { normals: Vec<Vec<S>>, offsets: Vec<S>, interior: Vec<S> },
}

impl<S: Real> SupportRegion<S> {
    pub fn full_space(dim: usize) -> Result<Self, SupportError> {
        if dim == 0 {
            return Err(SupportError::ZeroDimension);
        }
        Ok(SupportRegion::FullSpace { dim })
    }

    pub fn orthant(dim: usize) -> Result<Self, SupportError> {
        if dim == 0 {
            return Err(SupportError::ZeroDimension);
        }
        Ok(SupportRegion::Orthant { dim })
    }

    pub fn hyper_box(lo: Vec<S>, hi: Vec<S>) -> Result<Self, SupportError> {
        if lo.is_empty() {
            return Err(SupportError::ZeroDimension);
        }
        if lo.len() != hi.len() {
            return Err(SupportError::BoxLengthMismatch);
        }
        for (axis, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(a < b) {
                return Err(SupportError::DegenerateBoxSide(axis));
            }
        }
        Ok(SupportRegion::Box { lo, hi })
    }

    pub fn ball(dim: usize, radius: S) -> Result<Self, SupportError> {
        if dim == 0 {
            return Err(SupportError::ZeroDimension);
        }
        if !(radius > S::zero()) {
            return Err(SupportError::NonPositiveRadius);
        }
        Ok(SupportRegion::Ball { dim, radius })
    }

    /// `a_r . t <= b_r` for every row; `interior` must satisfy every
    /// inequality strictly, which certifies full dimensionality.
    pub fn half_spaces(
        normals: Vec<Vec<S>>,
        offsets: Vec<S>,
        interior: Vec<S>,
    ) -> Result<Self, SupportError> {
        if interior.is_empty() {
            return Err(SupportError::ZeroDimension);
        }
        if normals.is_empty() {
            return Err(SupportError::NoHalfSpaces);
        }
        if normals.len() != offsets.len() {
            return Err(SupportError::OffsetCountMismatch);
        }
        let dim = interior.len();
        for (r, a) in normals.iter().enumerate() {
            if a.len() != dim {
                return Err(SupportError::NormalDimensionMismatch(r));
            }
            if a.iter().all(|&c| c == S::zero()) {
                return Err(SupportError::ZeroNormal(r));
            }
            let lhs = dot(a, &interior);
            if !(lhs < offsets[r]) {
                return Err(SupportError::InteriorPointNotStrict(r));
            }
        }
        Ok(SupportRegion::HalfSpaces { normals, offsets, interior })
    }

    pub fn dim(&self) -> usize {
        match self {
            SupportRegion::FullSpace { dim } | SupportRegion::Orthant { dim } => *dim,
            SupportRegion::Box { lo, .. } => lo.len(),
            SupportRegion::Ball { dim, .. } => *dim,
            SupportRegion::HalfSpaces { interior, .. } => interior.len(),
        }
    }

    /// Exact membership; regions are closed, so boundary points belong.
    pub fn contains(&self, t: &[S]) -> bool {
        assert_eq!(t.len(), self.dim(), "point dimension mismatch");
        match self {
            SupportRegion::FullSpace { .. } => true,
            SupportRegion::Orthant { .. } => t.iter().all(|&x| x >= S::zero()),
            SupportRegion::Box { lo, hi } => t
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&x, (&a, &b))| x >= a && x <= b),
            SupportRegion::Ball { radius, .. } => {
                let r2: S = t.iter().map(|&x| x * x).sum();
                r2 <= *radius * *radius
            }
            SupportRegion::HalfSpaces { normals, offsets, .. } => normals
                .iter()
                .zip(offsets)
                .all(|(a, &b)| dot(a, t) <= b),
        }
    }

    /// Whether the region is bounded. Half-space intersections are treated
    /// as unbounded; deciding boundedness would need a recession-cone LP.
    pub fn is_bounded(&self) -> bool {
        matches!(self, SupportRegion::Box { .. } | SupportRegion::Ball { .. })
    }

    /// Per-axis extent of the region (bounding extent for the ball and
    /// half-space kinds, whose exact shape is enforced by `contains`).
    pub fn axis_extent(&self, axis: usize) -> AxisExtent<S> {
        match self {
            SupportRegion::FullSpace { .. } => AxisExtent::Full,
            SupportRegion::Orthant { .. } => AxisExtent::HalfLine { lo: S::zero() },
            SupportRegion::Box { lo, hi } => AxisExtent::Interval { lo: lo[axis], hi: hi[axis] },
            SupportRegion::Ball { radius, .. } => {
                AxisExtent::Interval { lo: -*radius, hi: *radius }
            }
            SupportRegion::HalfSpaces { .. } => AxisExtent::Full,
        }
    }

    /// Whether integration cells need a pointwise membership check on top
    /// of the per-axis extents.
    pub fn needs_indicator(&self) -> bool {
        match self {
            SupportRegion::Ball { dim, .. } => *dim > 1,
            SupportRegion::HalfSpaces { .. } => true,
            _ => false,
        }
    }

    /// Whether the recession cone of the region contains direction `d`
    /// (for bounded regions only the zero direction recedes).
    pub fn recession_contains(&self, d: &[S]) -> bool {
        match self {
            SupportRegion::FullSpace { .. } => true,
            SupportRegion::Orthant { .. } => d.iter().all(|&x| x >= S::zero()),
            SupportRegion::Box { .. } | SupportRegion::Ball { .. } => false,
            SupportRegion::HalfSpaces { normals, .. } => {
                normals.iter().all(|a| dot(a, d) <= S::zero())
            }
        }
    }

    /// A point guaranteed to lie in the region.
    pub fn anchor_point(&self) -> Vec<S> {
        match self {
            SupportRegion::FullSpace { dim } | SupportRegion::Orthant { dim } => {
                vec![S::zero(); *dim]
            }
            SupportRegion::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&a, &b)| (a + b) / S::of(2.0))
                .collect(),
            SupportRegion::Ball { dim, .. } => vec![S::zero(); *dim],
            SupportRegion::HalfSpaces { interior, .. } => interior.clone(),
        }
    }
}

pub(crate) fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_box_boundary_is_member() {
        let b: SupportRegion<f64> =
            SupportRegion::hyper_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(b.contains(&[1.0, 1.0]));
        assert!(!b.contains(&[1.0 + 1e-12, 1.0]));
    }

    #[test]
    fn orthant_membership() {
        let o: SupportRegion<f64> = SupportRegion::orthant(2).unwrap();
        assert!(!o.contains(&[-0.1, 0.0]));
        assert!(o.contains(&[0.0, 0.0]));
    }

    #[test]
    fn full_space_contains_everything() {
        let f: SupportRegion<f64> = SupportRegion::full_space(3).unwrap();
        assert!(f.contains(&[1e30, -1e30, 0.0]));
    }

    #[test]
    fn degenerate_box_rejected() {
        let err = SupportRegion::<f64>::hyper_box(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, SupportError::DegenerateBoxSide(1));
    }

    #[test]
    fn half_spaces_require_strict_interior() {
        // t_1 <= 0 and t_1 >= 0 pinch to a hyperplane; origin is not strict
        let err = SupportRegion::<f64>::half_spaces(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .unwrap_err();
        assert_eq!(err, SupportError::InteriorPointNotStrict(0));
    }

    #[test]
    fn half_space_membership_and_recession() {
        // t_1 + t_2 <= 1 with interior origin
        let h: SupportRegion<f64> = SupportRegion::half_spaces(
            vec![vec![1.0, 1.0]],
            vec![1.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(h.contains(&[0.5, 0.5]));
        assert!(!h.contains(&[0.6, 0.5]));
        assert!(h.recession_contains(&[-1.0, 0.0]));
        assert!(!h.recession_contains(&[1.0, 1.0]));
    }

    #[test]
    fn ball_is_bounded_with_interval_extent() {
        let b: SupportRegion<f64> = SupportRegion::ball(2, 2.0).unwrap();
        assert!(b.is_bounded());
        assert_eq!(b.axis_extent(0), AxisExtent::Interval { lo: -2.0, hi: 2.0 });
        assert!(b.contains(&[2.0, 0.0]));
        assert!(!b.contains(&[2.0, 0.1]));
    }
}
