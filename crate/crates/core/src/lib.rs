//! Feasibility of truncated moment problems with integrable densities.
//!
//! Given finitely many target moments `g_i` over a regular multi-index
//! set, a closed regular support `T` and a positive reference weight
//! `rho`, this crate decides whether a nonnegative integrable density `f`
//! with `int_T t^i f(t) dt = g_i` exists. The decision runs through the
//! concave objective
//!
//! ```text
//! L(lambda) = sum_i g_i lambda_i - int_T exp(sum_i lambda_i t^i) rho(t) dt
//! ```
//!
//! whose bounded attainment characterizes feasibility: a stationary
//! maximizer reconstructs a maximum-entropy-form density
//! `f*(t) = exp(sum_i lambda*_i t^i) rho(t)`, attainment on the domain
//! boundary still certifies feasibility (with possible top-degree moment
//! deficits), and unbounded ascent yields a machine-checkable sign
//! certificate of infeasibility. Classical Hankel criteria and a
//! discretized nonnegative least-squares check provide independent
//! ground truth in one dimension.
//!
//! All numerical kernels are generic over the scalar type through
//! [`scalar::Real`] (`f64` or `f32`); the aliases at the crate root fix
//! the default double-precision types.

pub mod density;
pub mod index;
pub mod instance;
pub mod lagrangian;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod support;
pub mod weight;

pub use index::{sigma, IndexSet, IndexSetError, MultiIndex};
pub use instance::{InstanceError, InstanceFile, ProblemInstance, Tolerances};
pub use lagrangian::{eval_l, fenchel_gap, grad_l, hess_l, Evaluator, LagrangianState};
pub use moments::{MomentError, MomentSpec};
pub use poly::Polynomial;
pub use quad::{
    density_moments, integrate_exp_poly, leading_form_max, moment_integrals, IntegralResult,
    IntegralStatus,
};
pub use scalar::Real;
pub use solver::{
    maximize, reconstruct_density, verify_certificate, Certificate, OutcomeReport, SolveOutcome,
    SolveStatus,
};
pub use support::SupportRegion;
pub use weight::ReferenceWeight;

/// Default double-precision aliases.
pub type Instance = ProblemInstance<f64>;
pub type Moments = MomentSpec<f64>;
pub type Support = SupportRegion<f64>;
pub type Weight = ReferenceWeight<f64>;
pub type Outcome = SolveOutcome<f64>;
pub type Poly = Polynomial<f64>;
pub type Field = density::FieldFn<f64>;
pub type Mixture = density::MixtureDensity<f64>;
