//! Reference weights: strictly positive L^1 densities on the support.
//!
//! On unbounded supports the weight must decay at least like
//! `exp(-||t||^{2k})` so every integral of a degree-`<= 4k` monomial
//! against `exp(polyism) * rho` that the solver needs stays finite away
//! from the domain boundary.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("coordinate power p = {p} must satisfy p >= 2k = {min}")]
    PowerTooSmall { p: u32, min: u32 },
    #[error("scale factor for axis {0} must be strictly positive")]
    NonPositiveScale(usize),
    #[error("scale factor count {0} does not match dimension {1}")]
    ScaleCountMismatch(usize, usize),
    #[error("constant weight requires a bounded support region")]
    ConstantOnUnboundedSupport,
}

/// Decay of the weight's exponent along a unit direction, measured on the
/// `r^{2k}` scale that the leading homogeneous exponent form lives on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SphereDecay<S> {
    /// The exponent decays like `-c * r^{2k}` with the given `c > 0`.
    Matching(S),
    /// The weight decays strictly faster than any degree-`2k` polynomial
    /// exponent can grow; the direction can never cause divergence.
    Dominating,
}

/// The built-in weight kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceWeight<S> {
    /// `exp(-||t||^{2k})`; the half-degree is fixed per instance.
    NormPower { half_degree: u32 },
    /// `exp(-sum_l scale_l * |t_l|^p)` with `p >= 2k`.
    CoordPower { p: u32, scales: Vec<S> },
    /// Constant 1; valid on bounded supports only.
    Constant,
}

impl<S: Real> ReferenceWeight<S> {
    pub fn validate(
        &self,
        dim: usize,
        half_degree: u32,
        support_bounded: bool,
    ) -> Result<(), WeightError> {
        match self {
            ReferenceWeight::NormPower { .. } => Ok(()),
            ReferenceWeight::CoordPower { p, scales } => {
                if *p < 2 * half_degree {
                    return Err(WeightError::PowerTooSmall { p: *p, min: 2 * half_degree });
                }
                if scales.len() != dim {
                    return Err(WeightError::ScaleCountMismatch(scales.len(), dim));
                }
                for (axis, &s) in scales.iter().enumerate() {
                    if !(s > S::zero()) {
                        return Err(WeightError::NonPositiveScale(axis));
                    }
                }
                Ok(())
            }
            ReferenceWeight::Constant => {
                if support_bounded {
                    Ok(())
                } else {
                    Err(WeightError::ConstantOnUnboundedSupport)
                }
            }
        }
    }

    /// `ln rho(t)`.
    pub fn log_density(&self, t: &[S]) -> S {
        match self {
            ReferenceWeight::NormPower { half_degree } => {
                let r2: S = t.iter().map(|&x| x * x).sum();
                -r2.powi(*half_degree as i32)
            }
            ReferenceWeight::CoordPower { p, scales } => {
                let mut acc = S::zero();
                for (&x, &s) in t.iter().zip(scales) {
                    acc = acc + s * x.abs().powi(*p as i32);
                }
                -acc
            }
            ReferenceWeight::Constant => S::zero(),
        }
    }

    /// `ln rho~(t) = ln rho(t) - sum_l t_l^{2k}`, the tilt that makes the
    /// base measure finite with all monomials up to order `2k` integrable.
    pub fn log_tilted_density(&self, t: &[S], half_degree: u32) -> S {
        let mut tilt = S::zero();
        for &x in t {
            tilt = tilt + x.powi(2 * half_degree as i32);
        }
        self.log_density(t) - tilt
    }

    /// Decay coefficient along a unit direction on the `r^{2k}` scale.
    pub fn sphere_decay(&self, theta: &[S], half_degree: u32) -> SphereDecay<S> {
        match self {
            ReferenceWeight::NormPower { .. } => SphereDecay::Matching(S::one()),
            ReferenceWeight::CoordPower { p, scales } => {
                if *p > 2 * half_degree {
                    SphereDecay::Dominating
                } else {
                    let mut acc = S::zero();
                    for (&x, &s) in theta.iter().zip(scales) {
                        acc = acc + s * x.abs().powi(*p as i32);
                    }
                    SphereDecay::Matching(acc)
                }
            }
            // only reachable on bounded supports, which have no recession
            // directions; treated as "no decay needed"
            ReferenceWeight::Constant => SphereDecay::Dominating,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_power_log_density() {
        let w: ReferenceWeight<f64> = ReferenceWeight::NormPower { half_degree: 2 };
        // ||t||^4 = (1 + 4)^2 = 25
        assert!((w.log_density(&[1.0, 2.0]) + 25.0).abs() < 1e-12);
    }

    #[test]
    fn coord_power_log_density_and_validation() {
        let w: ReferenceWeight<f64> =
            ReferenceWeight::CoordPower { p: 4, scales: vec![1.0, 0.5] };
        assert!((w.log_density(&[-1.0, 2.0]) + (1.0 + 0.5 * 16.0)).abs() < 1e-12);
        assert!(w.validate(2, 2, false).is_ok());
        assert_eq!(
            w.validate(2, 3, false).unwrap_err(),
            WeightError::PowerTooSmall { p: 4, min: 6 }
        );
    }

    #[test]
    fn constant_requires_bounded_support() {
        let w: ReferenceWeight<f64> = ReferenceWeight::Constant;
        assert!(w.validate(1, 1, true).is_ok());
        assert_eq!(
            w.validate(1, 1, false).unwrap_err(),
            WeightError::ConstantOnUnboundedSupport
        );
    }

    #[test]
    fn tilt_subtracts_even_powers() {
        let w: ReferenceWeight<f64> = ReferenceWeight::Constant;
        // ln rho~ = 0 - (t1^2 + t2^2) at k = 1
        assert!((w.log_tilted_density(&[1.0, -2.0], 1) + 5.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_decay_is_one_for_norm_power() {
        let w: ReferenceWeight<f64> = ReferenceWeight::NormPower { half_degree: 1 };
        assert_eq!(w.sphere_decay(&[1.0], 1), SphereDecay::Matching(1.0));
    }

    #[test]
    fn sphere_decay_dominating_for_higher_power() {
        let w: ReferenceWeight<f64> =
            ReferenceWeight::CoordPower { p: 6, scales: vec![1.0] };
        assert_eq!(w.sphere_decay(&[1.0], 1), SphereDecay::Dominating);
    }
}
