//! Nonnegative function specs: closed-form mixture densities and bounded
//! factors used for moment generation and the entropy-gap diagnostic.

use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

/// A nonnegative pointwise-evaluable function with a known supremum bound.
#[derive(Clone)]
pub struct FieldFn<S> {
    dim: usize,
    sup_bound: S,
    eval: Arc<dyn Fn(&[S]) -> S + Send + Sync>,
}

impl<S: Real> FieldFn<S> {
    pub fn new(
        dim: usize,
        sup_bound: S,
        eval: impl Fn(&[S]) -> S + Send + Sync + 'static,
    ) -> Self {
        FieldFn { dim, sup_bound, eval: Arc::new(eval) }
    }

    pub fn constant(dim: usize, value: S) -> Self {
        assert!(value >= S::zero());
        Self::new(dim, value.max(S::one()), move |_| value)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// An upper bound for the function values, used to build quadrature
    /// envelopes. Not required to be tight.
    pub fn sup_bound(&self) -> S {
        self.sup_bound
    }

    pub fn eval(&self, t: &[S]) -> S {
        (self.eval)(t).max(S::zero())
    }
}

impl<S> fmt::Debug for FieldFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFn").field("dim", &self.dim).finish()
    }
}

/// Product Gaussian component with diagonal covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussComponent<S> {
    pub weight: S,
    pub mean: Vec<S>,
    pub sigma: Vec<S>,
}

/// Gamma component on `[0, inf)` with shape >= 1 (bounded density).
#[derive(Clone, Debug, PartialEq)]
pub struct GammaComponent<S> {
    pub weight: S,
    pub shape: S,
    pub scale: S,
}

/// Uniform component on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformComponent<S> {
    pub weight: S,
    pub lo: S,
    pub hi: S,
}

/// A mixture of closed-form nonnegative components.
#[derive(Clone, Debug, PartialEq)]
pub enum MixtureDensity<S> {
    Gaussian(Vec<GaussComponent<S>>),
    Gamma(Vec<GammaComponent<S>>),
    Uniform(Vec<UniformComponent<S>>),
}

impl<S: Real> MixtureDensity<S> {
    pub fn dim(&self) -> usize {
        match self {
            MixtureDensity::Gaussian(comps) => comps[0].mean.len(),
            MixtureDensity::Gamma(_) | MixtureDensity::Uniform(_) => 1,
        }
    }

    pub fn eval(&self, t: &[S]) -> S {
        match self {
            MixtureDensity::Gaussian(comps) => {
                let mut acc = S::zero();
                for c in comps {
                    let mut log_pdf = S::zero();
                    for ((&x, &m), &s) in t.iter().zip(&c.mean).zip(&c.sigma) {
                        let z = (x - m) / s;
                        log_pdf = log_pdf
                            - z * z / S::of(2.0)
                            - s.ln()
                            - S::of(0.5 * (2.0 * std::f64::consts::PI).ln());
                    }
                    acc = acc + c.weight * log_pdf.exp();
                }
                acc
            }
            MixtureDensity::Gamma(comps) => {
                let x = t[0];
                if x < S::zero() {
                    return S::zero();
                }
                let mut acc = S::zero();
                for c in comps {
                    let a = c.shape;
                    let th = c.scale;
                    let log_pdf = if x == S::zero() {
                        if a == S::one() {
                            -th.ln()
                        } else {
                            S::neg_infinity()
                        }
                    } else {
                        (a - S::one()) * x.ln() - x / th - S::of(ln_gamma(a.f64())) - a * th.ln()
                    };
                    acc = acc + c.weight * log_pdf.exp();
                }
                acc
            }
            MixtureDensity::Uniform(comps) => {
                let x = t[0];
                let mut acc = S::zero();
                for c in comps {
                    if x >= c.lo && x <= c.hi {
                        acc = acc + c.weight / (c.hi - c.lo);
                    }
                }
                acc
            }
        }
    }

    pub fn sup_bound(&self) -> S {
        match self {
            MixtureDensity::Gaussian(comps) => {
                let mut acc = S::zero();
                for c in comps {
                    let mut peak = S::one();
                    for &s in &c.sigma {
                        peak = peak / (s * S::of((2.0 * std::f64::consts::PI).sqrt()));
                    }
                    acc = acc + c.weight * peak;
                }
                acc
            }
            MixtureDensity::Gamma(comps) => {
                let mut acc = S::zero();
                for c in comps {
                    let a = c.shape.f64();
                    let th = c.scale.f64();
                    // mode at (a-1)*theta for a >= 1
                    let mode = ((a - 1.0) * th).max(0.0);
                    let peak = if mode == 0.0 {
                        1.0 / th
                    } else {
                        ((a - 1.0) * mode.ln() - mode / th - ln_gamma(a) - a * th.ln()).exp()
                    };
                    acc = acc + c.weight * S::of(peak);
                }
                acc
            }
            MixtureDensity::Uniform(comps) => {
                let mut acc = S::zero();
                for c in comps {
                    acc = acc + c.weight / (c.hi - c.lo);
                }
                acc
            }
        }
    }

    pub fn to_field(&self) -> FieldFn<S> {
        let me = self.clone();
        FieldFn::new(self.dim(), self.sup_bound(), move |t| me.eval(t))
    }
}

/// Lanczos approximation of `ln Gamma(x)` for `x > 0` (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    assert!(x > 0.0, "ln_gamma needs a positive argument");
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}
