//! The concave objective `L(lambda) = sum_i g_i lambda_i - int exp(sum_i
//! lambda_i t^i) rho dt`, its derivatives, domain membership, and the
//! pointwise entropy-inequality diagnostic.
//!
//! Derivatives are served only strictly inside the domain as measured by
//! the leading-form margin; at inconclusive points only the value is
//! available, mirroring the fact that differentiation under the integral
//! is not justified on the domain boundary.

use thiserror::Error;

use crate::density::FieldFn;
use crate::index::MultiIndex;
use crate::instance::ProblemInstance;
use crate::linalg::SymMatrix;
use crate::quad::{
    classify_margin, exp_poly_log_base, field_envelope_coeff, integrate_exp_poly,
    leading_margin, Engine, IntegralStatus, Kernel, RunMode, WeightTerm,
    LEADING_FORM_BAND,
};
use crate::scalar::Real;
use crate::support::dot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DerivativeError {
    #[error("point is outside the objective domain (divergent integral)")]
    OutsideDomain,
    #[error("leading-form test is inconclusive; derivatives are not served near the domain boundary")]
    DomainBoundary,
    #[error("quadrature failed to reach tolerance (status {0:?})")]
    Quadrature(IntegralStatus),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FenchelError {
    #[error("tilted exponential integral diverged")]
    Divergent,
    #[error("quadrature failed to reach tolerance (status {0:?})")]
    Quadrature(IntegralStatus),
}

/// Objective value and, when available, derivatives at one point.
#[derive(Clone, Debug)]
pub struct LagrangianState<S> {
    pub lambda: Vec<S>,
    /// `L(lambda)`; negative infinity outside the domain.
    pub value: S,
    pub gradient: Option<Vec<S>>,
    pub hessian: Option<SymMatrix<S>>,
    pub in_domain: bool,
    /// Set when quadrature could not certify its tolerance; the value is
    /// still the best available estimate.
    pub precision_limited: bool,
    pub rel_error: S,
}

/// Shared per-instance tables: the deduplicated Minkowski sums `i + j`
/// (orders up to `4k`) and the pair-position table backing the Hessian.
pub struct Evaluator<'a, S: Real> {
    instance: &'a ProblemInstance<S>,
    pair_orders: Vec<MultiIndex>,
    pair_table: Vec<Vec<usize>>,
    base_positions: Vec<usize>,
}

/// Internal evaluation result that also covers band points, where the
/// public API refuses derivatives but the solver still needs the raw
/// moment integrals.
pub(crate) struct RawEval<S> {
    pub margin: S,
    pub value: S,
    pub gradient: Option<Vec<S>>,
    pub hessian: Option<SymMatrix<S>>,
    pub moment_values: Option<Vec<S>>, // aligned with instance index set
    pub status: IntegralStatus,
    pub rel_error: S,
}

impl<'a, S: Real> Evaluator<'a, S> {
    pub fn new(instance: &'a ProblemInstance<S>) -> Self {
        let set = instance.index_set();
        let (pair_orders, pair_table) = set.pairwise_sums();
        let base_positions = set
            .indices()
            .iter()
            .map(|i| pair_orders.iter().position(|o| o == i).expect("I is contained in I+I"))
            .collect();
        Evaluator { instance, pair_orders, pair_table, base_positions }
    }

    pub fn instance(&self) -> &'a ProblemInstance<S> {
        self.instance
    }

    /// Value-only evaluation; defined everywhere.
    pub fn value(&self, lambda: &[S]) -> LagrangianState<S> {
        let g = self.instance.moments().values();
        let r = integrate_exp_poly(lambda, self.instance);
        let (value, in_domain) = match r.status {
            IntegralStatus::Divergent => (S::neg_infinity(), false),
            _ => (dot(g, lambda) - r.value, true),
        };
        LagrangianState {
            lambda: lambda.to_vec(),
            value,
            gradient: None,
            hessian: None,
            in_domain,
            precision_limited: r.status == IntegralStatus::PrecisionLimited,
            rel_error: r.rel_error,
        }
    }

    /// Raw evaluation of value, gradient and Hessian from one quadrature
    /// family pass over all pairwise orders. Band points are evaluated
    /// (empirical truncation test) rather than refused.
    pub(crate) fn raw(&self, lambda: &[S]) -> RawEval<S> {
        let set = self.instance.index_set();
        let margin = leading_margin(
            lambda,
            set,
            self.instance.weight(),
            self.instance.support(),
            false,
        );
        let Some(mode) = classify_margin(margin) else {
            return RawEval {
                margin,
                value: S::neg_infinity(),
                gradient: None,
                hessian: None,
                moment_values: None,
                status: IntegralStatus::Divergent,
                rel_error: S::infinity(),
            };
        };
        let log_base = exp_poly_log_base(lambda, set, self.instance.weight());
        let kernel = Kernel {
            log_base: Box::new(log_base),
            weights: self.pair_orders.iter().map(WeightTerm::Monomial).collect(),
            envelope_order: 4 * set.half_degree(),
            envelope_coeff: S::one(),
        };
        let engine = Engine::new(self.instance.support(), self.instance.tolerances().quad_rel);
        let out = engine.run(&kernel, mode);
        if out.status == IntegralStatus::Divergent {
            return RawEval {
                margin,
                value: S::neg_infinity(),
                gradient: None,
                hessian: None,
                moment_values: None,
                status: out.status,
                rel_error: S::infinity(),
            };
        }
        let g = self.instance.moments().values();
        let n = set.len();
        let mass = out.values[self.base_positions[set.zero_position()]];
        let value = dot(g, lambda) - mass;
        let gradient: Vec<S> = (0..n)
            .map(|p| g[p] - out.values[self.base_positions[p]])
            .collect();
        let mut hessian = SymMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                hessian.set(r, c, -out.values[self.pair_table[r][c]]);
            }
        }
        let moment_values: Vec<S> =
            (0..n).map(|p| out.values[self.base_positions[p]]).collect();
        RawEval {
            margin,
            value,
            gradient: Some(gradient),
            hessian: Some(hessian),
            moment_values: Some(moment_values),
            status: out.status,
            rel_error: out.rel_error,
        }
    }

    /// Full state with derivatives; refuses points whose leading-form test
    /// is inconclusive or positive.
    pub fn full(&self, lambda: &[S]) -> Result<LagrangianState<S>, DerivativeError> {
        let set = self.instance.index_set();
        let margin = leading_margin(
            lambda,
            set,
            self.instance.weight(),
            self.instance.support(),
            false,
        );
        let band = S::of(LEADING_FORM_BAND);
        if margin > S::zero() {
            return Err(DerivativeError::OutsideDomain);
        }
        if margin >= -band {
            return Err(DerivativeError::DomainBoundary);
        }
        let raw = self.raw(lambda);
        match raw.status {
            IntegralStatus::Divergent => Err(DerivativeError::OutsideDomain),
            status => Ok(LagrangianState {
                lambda: lambda.to_vec(),
                value: raw.value,
                gradient: raw.gradient,
                hessian: raw.hessian,
                in_domain: true,
                precision_limited: status == IntegralStatus::PrecisionLimited,
                rel_error: raw.rel_error,
            }),
        }
    }
}

/// `L(lambda)`, defined everywhere (negative infinity off-domain).
pub fn eval_l<S: Real>(lambda: &[S], instance: &ProblemInstance<S>) -> LagrangianState<S> {
    Evaluator::new(instance).value(lambda)
}

/// Gradient entries `g_i - M_i(lambda)`, strictly inside the domain only.
pub fn grad_l<S: Real>(
    lambda: &[S],
    instance: &ProblemInstance<S>,
) -> Result<Vec<S>, DerivativeError> {
    let state = Evaluator::new(instance).full(lambda)?;
    if state.precision_limited {
        return Err(DerivativeError::Quadrature(IntegralStatus::PrecisionLimited));
    }
    Ok(state.gradient.expect("full state carries a gradient"))
}

/// Hessian entries `-M_{i+j}(lambda)`, strictly inside the domain only.
pub fn hess_l<S: Real>(
    lambda: &[S],
    instance: &ProblemInstance<S>,
) -> Result<SymMatrix<S>, DerivativeError> {
    let state = Evaluator::new(instance).full(lambda)?;
    if state.precision_limited {
        return Err(DerivativeError::Quadrature(IntegralStatus::PrecisionLimited));
    }
    Ok(state.hessian.expect("full state carries a Hessian"))
}

/// Integral gap of the pointwise inequality `x ln x - x >= x y - e^y`
/// applied with `x = factor(t)`, `y = sum_i lambda_i t^i` and integrated
/// against the tilted measure `d mu = rho(t) exp(-sum_l t_l^{2k}) dt`:
///
/// `[int f ln f dmu - int f dmu] - [sum_i (int t^i f dmu) lambda_i - int e^{sum lambda t^i} dmu]`
///
/// Nonnegative up to quadrature error for any bounded `factor >= 0`.
pub fn fenchel_gap<S: Real>(
    factor: &FieldFn<S>,
    lambda: &[S],
    instance: &ProblemInstance<S>,
) -> Result<S, FenchelError> {
    let set = instance.index_set();
    assert_eq!(factor.dim(), set.dim(), "factor dimension mismatch");
    assert_eq!(lambda.len(), set.len(), "coefficient vector length mismatch");
    let k = set.half_degree();
    let weight = instance.weight();
    let engine = Engine::new(instance.support(), instance.tolerances().quad_rel);

    // pass A: entropy, mass and moment terms of the factor under mu
    let tilted_base = |t: &[S]| weight.log_tilted_density(t, k);
    let mut weights: Vec<WeightTerm<S>> =
        vec![WeightTerm::FieldEntropy(factor), WeightTerm::Field(factor)];
    for i in set.indices() {
        weights.push(WeightTerm::MonomialField(i, factor));
    }
    let kernel_a = Kernel {
        log_base: Box::new(tilted_base),
        weights,
        envelope_order: 2 * k,
        envelope_coeff: field_envelope_coeff(factor.sup_bound()),
    };
    let out_a = engine.run(&kernel_a, RunMode::AssumeConvergent);
    if out_a.status != IntegralStatus::Converged {
        return Err(FenchelError::Quadrature(out_a.status));
    }

    // pass B: the conjugate term exp(sum lambda t^i) under mu
    let margin = leading_margin(lambda, set, weight, instance.support(), true);
    let Some(mode) = classify_margin(margin) else {
        return Err(FenchelError::Divergent);
    };
    let poly_tilted_base = |t: &[S]| {
        let mut s = weight.log_tilted_density(t, k);
        for (p, i) in set.indices().iter().enumerate() {
            if lambda[p] != S::zero() {
                s = s + lambda[p] * crate::poly::monomial_eval(i, t);
            }
        }
        s
    };
    let kernel_b = Kernel {
        log_base: Box::new(poly_tilted_base),
        weights: vec![WeightTerm::One],
        envelope_order: 2 * k,
        envelope_coeff: S::one(),
    };
    let out_b = engine.run(&kernel_b, mode);
    match out_b.status {
        IntegralStatus::Divergent => return Err(FenchelError::Divergent),
        IntegralStatus::PrecisionLimited => {
            return Err(FenchelError::Quadrature(out_b.status))
        }
        IntegralStatus::Converged => {}
    }

    let entropy = out_a.values[0];
    let mass = out_a.values[1];
    let moment_terms = &out_a.values[2..];
    let linear: S = moment_terms
        .iter()
        .zip(lambda)
        .map(|(&m, &l)| m * l)
        .sum();
    Ok((entropy - mass) - (linear - out_b.values[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexSet;
    use crate::instance::Tolerances;
    use crate::moments::MomentSpec;
    use crate::support::SupportRegion;
    use crate::weight::ReferenceWeight;
    use std::sync::Arc;

    const SQRT_PI: f64 = 1.7724538509055159;

    fn gaussian_instance() -> ProblemInstance<f64> {
        let set = Arc::new(IndexSet::full(1, 1));
        let moments = MomentSpec::from_ordered(set, vec![1.0, 0.0, 1.0]).unwrap();
        ProblemInstance::new(
            moments,
            SupportRegion::full_space(1).unwrap(),
            ReferenceWeight::NormPower { half_degree: 1 },
            Tolerances::default(),
        )
        .unwrap()
    }

    /// Closed-form maximizer of the Gaussian instance.
    fn lambda_star() -> [f64; 3] {
        [-0.5 * (2.0 * std::f64::consts::PI).ln(), 0.0, 0.5]
    }

    #[test]
    fn value_at_origin_is_minus_weight_mass() {
        let inst = gaussian_instance();
        let s = eval_l(&[0.0, 0.0, 0.0], &inst);
        assert!(s.in_domain);
        assert!((s.value + SQRT_PI).abs() < 1e-9, "got {}", s.value);
    }

    #[test]
    fn value_at_closed_form_maximizer() {
        let inst = gaussian_instance();
        let s = eval_l(&lambda_star(), &inst);
        let expect = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5;
        assert!((s.value - expect).abs() < 1e-9, "got {}", s.value);
    }

    #[test]
    fn value_is_minus_infinity_off_domain() {
        let inst = gaussian_instance();
        let s = eval_l(&[0.0, 0.0, 2.0], &inst);
        assert!(!s.in_domain);
        assert_eq!(s.value, f64::NEG_INFINITY);
    }

    #[test]
    fn gradient_vanishes_at_maximizer() {
        let inst = gaussian_instance();
        let g = grad_l(&lambda_star(), &inst).unwrap();
        for v in g {
            assert!(v.abs() < 1e-6, "gradient entry {v}");
        }
    }

    #[test]
    fn gradient_at_origin_matches_closed_form() {
        let inst = gaussian_instance();
        let g = grad_l(&[0.0, 0.0, 0.0], &inst).unwrap();
        assert!((g[0] - (1.0 - SQRT_PI)).abs() < 1e-9);
        assert!(g[1].abs() < 1e-10);
        assert!((g[2] - (1.0 - SQRT_PI / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = gaussian_instance();
        let ev = Evaluator::new(&inst);
        let points = [[-0.3, 0.2, -0.4], [0.1, -0.5, 0.2], [0.0, 0.0, -1.0]];
        let h = 1e-5;
        for lambda in points {
            let g = ev.full(&lambda).unwrap().gradient.unwrap();
            for p in 0..3 {
                let mut up = lambda;
                up[p] += h;
                let mut dn = lambda;
                dn[p] -= h;
                let fd = (ev.value(&up).value - ev.value(&dn).value) / (2.0 * h);
                let scale = g.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
                assert!(
                    (fd - g[p]).abs() <= 1e-5 * scale,
                    "fd {fd} vs grad {} at {lambda:?}[{p}]",
                    g[p]
                );
            }
        }
    }

    #[test]
    fn hessian_at_origin_matches_closed_form() {
        let inst = gaussian_instance();
        let h = hess_l(&[0.0, 0.0, 0.0], &inst).unwrap();
        let expect = [
            [SQRT_PI, 0.0, SQRT_PI / 2.0],
            [0.0, SQRT_PI / 2.0, 0.0],
            [SQRT_PI / 2.0, 0.0, 0.75 * SQRT_PI],
        ];
        for r in 0..3 {
            for c in 0..3 {
                assert!(
                    (h.get(r, c) + expect[r][c]).abs() < 1e-8,
                    "entry ({r},{c}) = {}",
                    h.get(r, c)
                );
            }
        }
    }

    #[test]
    fn hessian_is_negative_semidefinite() {
        let inst = gaussian_instance();
        for lambda in [[0.0, 0.0, 0.0], [0.5, -0.2, -0.6], [-1.0, 1.0, 0.3]] {
            let h = hess_l(&lambda, &inst).unwrap();
            let eigs = h.eigenvalues();
            let norm = eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
            assert!(
                *eigs.last().unwrap() <= 1e-8 * norm,
                "max eig {} at {lambda:?}",
                eigs.last().unwrap()
            );
            // diagonal entries are strictly negative
            for r in 0..3 {
                assert!(h.get(r, r) < 0.0);
            }
        }
    }

    #[test]
    fn derivatives_refused_in_band() {
        let inst = gaussian_instance();
        // lambda_2 = 1 sits exactly on the leading-form boundary
        let err = grad_l(&[0.0, 0.0, 1.0], &inst).unwrap_err();
        assert_eq!(err, DerivativeError::DomainBoundary);
        let err = grad_l(&[0.0, 0.0, 1.5], &inst).unwrap_err();
        assert_eq!(err, DerivativeError::OutsideDomain);
    }

    #[test]
    fn midpoint_concavity_on_sample_points() {
        let inst = gaussian_instance();
        let ev = Evaluator::new(&inst);
        let pairs = [
            ([0.0, 0.0, 0.0], [-1.0, 0.5, -0.5]),
            ([0.3, -0.3, -0.8], [-0.2, 0.1, -0.1]),
        ];
        for (a, b) in pairs {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let la = ev.value(&a).value;
            let lb = ev.value(&b).value;
            let lm = ev.value(&mid).value;
            assert!(lm >= 0.5 * (la + lb) - 1e-8 * (1.0 + la.abs() + lb.abs()));
        }
    }

    #[test]
    fn constant_shift_identity() {
        let inst = gaussian_instance();
        let ev = Evaluator::new(&inst);
        let lambda = [0.2, -0.1, -0.5];
        let c = 0.8;
        let base_integral = integrate_exp_poly(&lambda, &inst).value;
        let g = inst.moments().values();
        let shifted = ev.value(&[lambda[0] + c, lambda[1], lambda[2]]).value;
        let expect = dot(g, &lambda) + c - c.exp() * base_integral;
        assert!((shifted - expect).abs() < 1e-9, "{shifted} vs {expect}");
    }

    #[test]
    fn fenchel_gap_equality_case() {
        let inst = gaussian_instance();
        let one = FieldFn::constant(1, 1.0);
        let gap = fenchel_gap(&one, &[0.0, 0.0, 0.0], &inst).unwrap();
        assert!(gap.abs() < 1e-8, "gap {gap}");
    }

    #[test]
    fn fenchel_gap_constant_exponent_case() {
        let inst = gaussian_instance();
        let one = FieldFn::constant(1, 1.0);
        let gap = fenchel_gap(&one, &[1.0, 0.0, 0.0], &inst).unwrap();
        // (e - 2) * mu(T) with mu(T) = int exp(-2 t^2) = sqrt(pi/2)
        let mu = (std::f64::consts::PI / 2.0).sqrt();
        let expect = (std::f64::consts::E - 2.0) * mu;
        assert!((gap - expect).abs() < 1e-8, "gap {gap} vs {expect}");
    }

    #[test]
    fn fenchel_gap_nonnegative_for_random_pairs() {
        use crate::density::{GaussComponent, MixtureDensity};
        use rand::{Rng, SeedableRng};
        let inst = gaussian_instance();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let factor = MixtureDensity::Gaussian(vec![GaussComponent {
                weight: rng.gen_range(0.1..2.0),
                mean: vec![rng.gen_range(-1.5..1.5)],
                sigma: vec![rng.gen_range(0.3..1.5)],
            }])
            .to_field();
            let lambda = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..0.5),
            ];
            let gap = fenchel_gap(&factor, &lambda, &inst).unwrap();
            assert!(gap >= -1e-8, "gap {gap} at {lambda:?}");
        }
    }
}
