//! Adaptive tensor-product quadrature for exponential-of-polynomial
//! integrands on regular supports, including unbounded ones, with a
//! two-stage divergence test.
//!
//! Stage one is asymptotic: the leading homogeneous exponent form is
//! scanned over recession directions of the support and compared against
//! the weight's decay. Stage two, used inside the inconclusive band, is
//! empirical: the truncation radius doubles from 8 to 1024 and the
//! partial integrals must stabilize; runaway growth or failure to
//! stabilize is reported as divergence.
//!
//! Unbounded axes are compactified by `t = u/(1-u^2)` (whole line) or
//! `t = lo + u/(1-u)` (half line). Cells carry a fixed 16-node rule per
//! axis with an embedded 8-node error estimate; adaptivity bisects cells.
//! Exponents are evaluated in shifted form `exp(s - s_max)` with the cell
//! maximum factored out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::density::FieldFn;
use crate::index::{IndexSet, MultiIndex};
use crate::instance::ProblemInstance;
use crate::moments::{MomentError, MomentSpec};
use crate::poly::monomial_eval;
use crate::sampling::unit_sphere_samples;
use crate::scalar::Real;
use crate::support::{AxisExtent, SupportRegion};
use crate::weight::{ReferenceWeight, SphereDecay};

use thiserror::Error;

// 8-point Gauss-Legendre rule on [-1, 1]
const GL8_NODES: [f64; 8] = [
    -0.9602898564975362,
    -0.7966664774136267,
    -0.525532409916329,
    -0.18343464249564978,
    0.18343464249564978,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975362,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.10122853629037669,
    0.22238103445337434,
    0.31370664587788705,
    0.36268378337836177,
    0.36268378337836177,
    0.31370664587788705,
    0.22238103445337434,
    0.10122853629037669,
];

// 16-point Gauss-Legendre rule on [-1, 1]
const GL16_NODES: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.755404408355003,
    -0.6178762444026438,
    -0.45801677765722737,
    -0.2816035507792589,
    -0.09501250983763745,
    0.09501250983763745,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 16] = [
    0.027152459411754037,
    0.062253523938647706,
    0.09515851168249259,
    0.12462897125553403,
    0.14959598881657676,
    0.16915651939500262,
    0.1826034150449236,
    0.18945061045506859,
    0.18945061045506859,
    0.1826034150449236,
    0.16915651939500262,
    0.14959598881657676,
    0.12462897125553403,
    0.09515851168249259,
    0.062253523938647706,
    0.027152459411754037,
];

/// Width of the inconclusive band of the leading-form test.
pub const LEADING_FORM_BAND: f64 = 1e-3;
/// Initial truncation radius for unbounded supports.
const TRUNCATION_START: f64 = 8.0;
/// Number of radius doublings: 8, 16, ..., 1024.
const TRUNCATION_DOUBLINGS: usize = 7;
/// Partial sums beyond this are treated as numerically non-finite.
const OVERFLOW_GUARD: f64 = 1e150;
/// Consecutive partial-sum growth beyond this factor means divergence.
const GROWTH_FACTOR: f64 = 10.0;
/// Seed breakpoints (t-space magnitudes) for initial cell edges.
const SEED_T: [f64; 8] = [0.0, 0.03125, 0.25, 1.0, 4.0, 16.0, 64.0, 256.0];
const MAX_DEPTH: u32 = 44;
const TINY: f64 = 1e-280;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralStatus {
    Converged,
    Divergent,
    PrecisionLimited,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegralResult<S> {
    pub value: S,
    pub rel_error: S,
    pub status: IntegralStatus,
}

impl<S: Real> IntegralResult<S> {
    pub fn is_converged(&self) -> bool {
        self.status == IntegralStatus::Converged
    }
}

/// Weighted monomial integrals sharing one adaptive grid.
#[derive(Clone, Debug)]
pub struct MomentIntegrals<S> {
    pub orders: Vec<MultiIndex>,
    pub values: Vec<S>,
    pub rel_error: S,
    pub status: IntegralStatus,
}

impl<S: Real> MomentIntegrals<S> {
    pub fn get(&self, i: &MultiIndex) -> Option<S> {
        self.orders.iter().position(|o| o == i).map(|p| self.values[p])
    }
}

#[derive(Debug, Error)]
pub enum DensityMomentError {
    #[error("moment integration did not converge (status {0:?})")]
    NotConverged(IntegralStatus),
    #[error("density has non-positive total mass")]
    NonPositiveMass,
    #[error(transparent)]
    Moments(#[from] MomentError),
}

/// One cell of the final grid, in original coordinates, for diagnostics.
#[derive(Clone, Debug)]
pub struct GridCellDump {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub nodes: usize,
    pub contribution: f64,
    pub depth: u32,
}

/// Snapshot of the adaptive grid after an integration pass.
#[derive(Clone, Debug)]
pub struct GridDump {
    pub cells: Vec<GridCellDump>,
    /// Outer truncation radius reached (unbounded supports only).
    pub truncation_radius: Option<f64>,
    pub total_cells: usize,
    /// Envelope integral the refinement was driven by.
    pub envelope: f64,
}

// ---------------------------------------------------------------------------
// leading homogeneous form
// ---------------------------------------------------------------------------

/// Maximum over recession directions of the support of the degree-`2k`
/// exponent coefficient minus the weight's decay coefficient, both on the
/// `r^{2k}` scale.
///
/// A positive value predicts divergence of `int exp(sum lambda_i t^i) rho`
/// (and, being a sampled lower bound of the true maximum, proves it), a
/// value below `-LEADING_FORM_BAND` predicts convergence, and the band
/// `[-LEADING_FORM_BAND, 0]` is inconclusive. Returns negative infinity
/// when no recession direction exists (bounded supports) or the weight
/// decays faster than degree `2k` in every direction.
pub fn leading_form_max<S: Real>(
    lambda: &[S],
    set: &IndexSet,
    weight: &ReferenceWeight<S>,
    support: &SupportRegion<S>,
) -> S {
    leading_margin(lambda, set, weight, support, false)
}

pub(crate) fn leading_margin<S: Real>(
    lambda: &[S],
    set: &IndexSet,
    weight: &ReferenceWeight<S>,
    support: &SupportRegion<S>,
    tilted: bool,
) -> S {
    assert_eq!(lambda.len(), set.len(), "coefficient vector length mismatch");
    let dim = set.dim();
    let k = set.half_degree();
    let top: Vec<(usize, &MultiIndex)> = set
        .top_degree_positions()
        .into_iter()
        .map(|p| (p, &set.indices()[p]))
        .collect();
    let samples = unit_sphere_samples::<S>(dim, 1000 * dim);
    let mut best = S::neg_infinity();
    for theta in &samples {
        if !support.recession_contains(theta) {
            continue;
        }
        let decay = match weight.sphere_decay(theta, k) {
            SphereDecay::Matching(c) => c,
            SphereDecay::Dominating => {
                if tilted {
                    // the tilt alone provides matching decay below
                    S::zero()
                } else {
                    continue;
                }
            }
        };
        let tilt_decay = if tilted {
            let mut acc = S::zero();
            for &x in theta.iter() {
                acc = acc + x.powi(2 * k as i32);
            }
            acc
        } else {
            S::zero()
        };
        let mut q = S::zero();
        for &(p, i) in &top {
            if lambda[p] != S::zero() {
                q = q + lambda[p] * monomial_eval(i, theta);
            }
        }
        let margin = q - decay - tilt_decay;
        if margin > best {
            best = margin;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// integrand families
// ---------------------------------------------------------------------------

pub(crate) enum WeightTerm<'a, S> {
    One,
    Monomial(&'a MultiIndex),
    Field(&'a FieldFn<S>),
    /// `f ln f` with `0 ln 0 = 0`.
    FieldEntropy(&'a FieldFn<S>),
    MonomialField(&'a MultiIndex, &'a FieldFn<S>),
}

impl<S: Real> WeightTerm<'_, S> {
    fn eval(&self, t: &[S]) -> S {
        match self {
            WeightTerm::One => S::one(),
            WeightTerm::Monomial(i) => monomial_eval(i, t),
            WeightTerm::Field(f) => f.eval(t),
            WeightTerm::FieldEntropy(f) => {
                let v = f.eval(t);
                if v > S::zero() {
                    v * v.ln()
                } else {
                    S::zero()
                }
            }
            WeightTerm::MonomialField(i, f) => monomial_eval(i, t) * f.eval(t),
        }
    }
}

pub(crate) struct Kernel<'a, S: Real> {
    pub log_base: Box<dyn Fn(&[S]) -> S + 'a>,
    pub weights: Vec<WeightTerm<'a, S>>,
    /// Envelope `coeff * (1 + sum_l t_l^{order})`; `order` is even and at
    /// least the largest requested monomial order, so the envelope
    /// dominates every weight term.
    pub envelope_order: u32,
    pub envelope_coeff: S,
}

impl<S: Real> Kernel<'_, S> {
    fn envelope(&self, t: &[S]) -> S {
        let mut acc = S::one();
        for &x in t {
            acc = acc + x.powi(self.envelope_order as i32);
        }
        self.envelope_coeff * acc
    }
}

/// Envelope coefficient that dominates a bounded factor and its entropy.
pub(crate) fn field_envelope_coeff<S: Real>(bound: S) -> S {
    let b = bound.max(S::one());
    b * b.ln().max(S::one())
}

// ---------------------------------------------------------------------------
// axis maps
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum AxisMap<S> {
    /// Bounded axis, used directly.
    Identity { lo: S, hi: S },
    /// Whole line: `t = u / (1 - u^2)`.
    RationalFull,
    /// Half line: `t = lo + u / (1 - u)`.
    RationalHalf { lo: S },
}

impl<S: Real> AxisMap<S> {
    fn from_extent(e: AxisExtent<S>) -> Self {
        match e {
            AxisExtent::Full => AxisMap::RationalFull,
            AxisExtent::HalfLine { lo } => AxisMap::RationalHalf { lo },
            AxisExtent::Interval { lo, hi } => AxisMap::Identity { lo, hi },
        }
    }

    fn unbounded(&self) -> bool {
        !matches!(self, AxisMap::Identity { .. })
    }

    fn to_t(&self, u: S) -> S {
        match *self {
            AxisMap::Identity { .. } => u,
            AxisMap::RationalFull => u / (S::one() - u * u),
            AxisMap::RationalHalf { lo } => lo + u / (S::one() - u),
        }
    }

    fn jacobian(&self, u: S) -> S {
        match *self {
            AxisMap::Identity { .. } => S::one(),
            AxisMap::RationalFull => {
                let d = S::one() - u * u;
                (S::one() + u * u) / (d * d)
            }
            AxisMap::RationalHalf { .. } => {
                let d = S::one() - u;
                S::one() / (d * d)
            }
        }
    }

    fn u_of_t(&self, t: S) -> S {
        match *self {
            AxisMap::Identity { .. } => t,
            AxisMap::RationalFull => {
                if t == S::zero() {
                    S::zero()
                } else {
                    let two = S::of(2.0);
                    (-S::one() + (S::one() + S::of(4.0) * t * t).sqrt()) / (two * t)
                }
            }
            AxisMap::RationalHalf { lo } => {
                let d = t - lo;
                d / (S::one() + d)
            }
        }
    }

    /// u-interval covering the axis out to truncation radius `r`.
    fn core_range(&self, r: S) -> (S, S) {
        match *self {
            AxisMap::Identity { lo, hi } => (lo, hi),
            AxisMap::RationalFull => {
                let u = self.u_of_t(r);
                (-u, u)
            }
            AxisMap::RationalHalf { lo } => (S::zero(), self.u_of_t(lo + r)),
        }
    }
}

// ---------------------------------------------------------------------------
// cells and regions
// ---------------------------------------------------------------------------

struct Cell<S> {
    lo: Vec<S>,
    hi: Vec<S>,
    depth: u32,
    alive: bool,
    splittable: bool,
    env: S,
    err: S,
    values: Vec<S>,
    finite: bool,
}

struct HeapEntry {
    err: f64,
    seq: u64,
    idx: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error, then oldest-first for determinism
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct RegionOut<S> {
    env: S,
    err: S,
    values: Vec<S>,
    cells: usize,
    cap_hit: bool,
    finite: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RunMode {
    /// The asymptotic test guarantees convergence; failure to stabilize is
    /// a precision problem.
    AssumeConvergent,
    /// Inconclusive leading form; growth or failure to stabilize by the
    /// final radius is reported as divergence.
    Band,
}

pub(crate) struct FamilyOutcome<S> {
    pub values: Vec<S>,
    pub envelope: S,
    pub rel_error: S,
    pub status: IntegralStatus,
    pub truncation_radius: Option<S>,
    pub cells: usize,
    pub dump: Option<Vec<GridCellDump>>,
}

pub(crate) struct Engine<'a, S: Real> {
    support: &'a SupportRegion<S>,
    tol: S,
    axes: Vec<AxisMap<S>>,
    n16: Vec<S>,
    w16: Vec<S>,
    n8: Vec<S>,
    w8: Vec<S>,
    collect_dump: bool,
}

impl<'a, S: Real> Engine<'a, S> {
    pub(crate) fn new(support: &'a SupportRegion<S>, tol: S) -> Self {
        let axes = (0..support.dim())
            .map(|a| AxisMap::from_extent(support.axis_extent(a)))
            .collect();
        Engine {
            support,
            tol,
            axes,
            n16: GL16_NODES.iter().map(|&x| S::of(x)).collect(),
            w16: GL16_WEIGHTS.iter().map(|&x| S::of(x)).collect(),
            n8: GL8_NODES.iter().map(|&x| S::of(x)).collect(),
            w8: GL8_WEIGHTS.iter().map(|&x| S::of(x)).collect(),
            collect_dump: false,
        }
    }

    pub(crate) fn with_dump(mut self) -> Self {
        self.collect_dump = true;
        self
    }

    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn cell_cap(&self) -> usize {
        match self.dim() {
            1 => 1600,
            2 => 6000,
            _ => 12000,
        }
    }

    fn slab_cap(&self) -> usize {
        self.cell_cap() / 4
    }

    /// One quadrature rule application over a cell given in u-space.
    fn eval_cell(&self, kernel: &Kernel<S>, lo: &[S], hi: &[S]) -> (S, S, Vec<S>, bool) {
        let n = self.dim();
        let half: Vec<S> = lo.iter().zip(hi).map(|(&a, &b)| (b - a) / S::of(2.0)).collect();
        let mid: Vec<S> = lo.iter().zip(hi).map(|(&a, &b)| (a + b) / S::of(2.0)).collect();
        let needs_indicator = self.support.needs_indicator();

        // first pass on the 16-rule: collect node data and the exponent max
        let count16 = 16usize.pow(n as u32);
        let mut ts: Vec<S> = Vec::with_capacity(count16 * n);
        let mut ws: Vec<S> = Vec::with_capacity(count16);
        let mut ss: Vec<S> = Vec::with_capacity(count16);
        let mut s_max = S::neg_infinity();
        let mut idx = vec![0usize; n];
        let mut t = vec![S::zero(); n];
        loop {
            let mut w = S::one();
            for a in 0..n {
                let u = mid[a] + half[a] * self.n16[idx[a]];
                t[a] = self.axes[a].to_t(u);
                w = w * self.w16[idx[a]] * half[a] * self.axes[a].jacobian(u);
            }
            let s = if needs_indicator && !self.support.contains(&t) {
                S::neg_infinity()
            } else {
                (kernel.log_base)(&t)
            };
            if s > s_max {
                s_max = s;
            }
            ts.extend_from_slice(&t);
            ws.push(w);
            ss.push(s);
            if !advance(&mut idx, 16) {
                break;
            }
        }

        let m = kernel.weights.len();
        if s_max == S::neg_infinity() {
            return (S::zero(), S::zero(), vec![S::zero(); m], true);
        }

        let mut acc_env = S::zero();
        let mut acc: Vec<S> = vec![S::zero(); m];
        for (q, (&w, &s)) in ws.iter().zip(&ss).enumerate() {
            if s == S::neg_infinity() {
                continue;
            }
            let e = (s - s_max).exp();
            let tq = &ts[q * n..(q + 1) * n];
            acc_env = acc_env + w * kernel.envelope(tq) * e;
            for (j, term) in kernel.weights.iter().enumerate() {
                acc[j] = acc[j] + w * term.eval(tq) * e;
            }
        }

        // embedded 8-rule, envelope only, sharing the exponent shift
        let mut acc_env8 = S::zero();
        let mut idx8 = vec![0usize; n];
        loop {
            let mut w = S::one();
            for a in 0..n {
                let u = mid[a] + half[a] * self.n8[idx8[a]];
                t[a] = self.axes[a].to_t(u);
                w = w * self.w8[idx8[a]] * half[a] * self.axes[a].jacobian(u);
            }
            let s = if needs_indicator && !self.support.contains(&t) {
                S::neg_infinity()
            } else {
                (kernel.log_base)(&t)
            };
            if s > S::neg_infinity() {
                acc_env8 = acc_env8 + w * kernel.envelope(&t) * (s - s_max).exp();
            }
            if !advance(&mut idx8, 8) {
                break;
            }
        }

        let scale = s_max.exp();
        let env = scale * acc_env;
        let err = (scale * (acc_env - acc_env8)).abs();
        let values: Vec<S> = acc.into_iter().map(|v| scale * v).collect();
        let finite = env.is_finite() && values.iter().all(|v| v.is_finite());
        (env, err, values, finite)
    }

    /// Seed edges for one axis of a region: fixed t-space breakpoints
    /// mapped into u, so bisection starts with a scent of both the origin
    /// neighborhood and the far field.
    fn seed_edges(&self, axis: usize, lo: S, hi: S) -> Vec<S> {
        let mut edges = vec![lo];
        let map = &self.axes[axis];
        let mut interior: Vec<S> = Vec::new();
        for &m in &SEED_T {
            for sign in [1.0, -1.0] {
                let t = S::of(sign * m);
                let u = map.u_of_t(t);
                if u > lo && u < hi {
                    interior.push(u);
                }
            }
        }
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        interior.dedup();
        edges.extend(interior);
        edges.push(hi);
        if edges.len() == 2 {
            edges.insert(1, (lo + hi) / S::of(2.0));
        }
        edges
    }

    /// Adaptive integration over one u-space box.
    fn integrate_region(
        &self,
        kernel: &Kernel<S>,
        lo: &[S],
        hi: &[S],
        cap: usize,
        abs_target_hint: S,
        dump: &mut Option<Vec<GridCellDump>>,
    ) -> RegionOut<S> {
        let n = self.dim();
        let m = kernel.weights.len();
        let mut cells: Vec<Cell<S>> = Vec::new();
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut seq = 0u64;

        // tensor the per-axis seed edges
        let axis_edges: Vec<Vec<S>> = (0..n).map(|a| self.seed_edges(a, lo[a], hi[a])).collect();
        let counts: Vec<usize> = axis_edges.iter().map(|e| e.len() - 1).collect();
        let mut idx = vec![0usize; n];
        loop {
            let c_lo: Vec<S> = (0..n).map(|a| axis_edges[a][idx[a]]).collect();
            let c_hi: Vec<S> = (0..n).map(|a| axis_edges[a][idx[a] + 1]).collect();
            let (env, err, values, finite) = self.eval_cell(kernel, &c_lo, &c_hi);
            heap.push(HeapEntry { err: err.f64(), seq, idx: cells.len() });
            seq += 1;
            cells.push(Cell {
                lo: c_lo,
                hi: c_hi,
                depth: 0,
                alive: true,
                splittable: true,
                env,
                err,
                values,
                finite,
            });
            // odometer over mixed radices
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == n {
                    break;
                }
            }
            if a == n {
                break;
            }
        }

        let mut total_env: S = cells.iter().map(|c| c.env).sum();
        let mut total_err: S = cells.iter().map(|c| c.err).sum();
        let mut total_values: Vec<S> = (0..m)
            .map(|j| cells.iter().map(|c| c.values[j]).sum())
            .collect();
        let mut finite = cells.iter().all(|c| c.finite);
        let mut cap_hit = false;

        while finite {
            let target = (self.tol * S::of(0.05))
                * total_env.abs().max(abs_target_hint).max(S::of(TINY));
            if total_err <= target {
                break;
            }
            if cells.len() >= cap {
                cap_hit = true;
                break;
            }
            let worst = loop {
                match heap.pop() {
                    Some(e) if cells[e.idx].alive && cells[e.idx].splittable => break Some(e.idx),
                    Some(_) => continue,
                    None => break None,
                }
            };
            let Some(widx) = worst else {
                cap_hit = total_err > target;
                break;
            };
            if cells[widx].depth >= MAX_DEPTH {
                cells[widx].splittable = false;
                continue;
            }
            // bisect along the widest u-extent
            let (c_lo, c_hi, depth) =
                (cells[widx].lo.clone(), cells[widx].hi.clone(), cells[widx].depth);
            let axis = (0..n)
                .max_by(|&a, &b| {
                    (c_hi[a] - c_lo[a])
                        .partial_cmp(&(c_hi[b] - c_lo[b]))
                        .unwrap_or(Ordering::Equal)
                })
                .unwrap();
            let mid = (c_lo[axis] + c_hi[axis]) / S::of(2.0);
            if !(mid > c_lo[axis] && mid < c_hi[axis]) {
                cells[widx].splittable = false;
                continue;
            }
            cells[widx].alive = false;
            total_env = total_env - cells[widx].env;
            total_err = total_err - cells[widx].err;
            for j in 0..m {
                total_values[j] = total_values[j] - cells[widx].values[j];
            }
            for half_cell in 0..2 {
                let mut lo2 = c_lo.clone();
                let mut hi2 = c_hi.clone();
                if half_cell == 0 {
                    hi2[axis] = mid;
                } else {
                    lo2[axis] = mid;
                }
                let (env, err, values, fin) = self.eval_cell(kernel, &lo2, &hi2);
                total_env = total_env + env;
                total_err = total_err + err;
                for j in 0..m {
                    total_values[j] = total_values[j] + values[j];
                }
                finite = finite && fin;
                heap.push(HeapEntry { err: err.f64(), seq, idx: cells.len() });
                seq += 1;
                cells.push(Cell {
                    lo: lo2,
                    hi: hi2,
                    depth: depth + 1,
                    alive: true,
                    splittable: true,
                    env,
                    err,
                    values,
                    finite: fin,
                });
            }
        }

        if let Some(rows) = dump.as_mut() {
            for c in cells.iter().filter(|c| c.alive) {
                let lo_t: Vec<f64> =
                    (0..n).map(|a| self.axes[a].to_t(c.lo[a]).f64()).collect();
                let hi_t: Vec<f64> =
                    (0..n).map(|a| self.axes[a].to_t(c.hi[a]).f64()).collect();
                rows.push(GridCellDump {
                    lo: lo_t,
                    hi: hi_t,
                    nodes: 16usize.pow(n as u32) + 8usize.pow(n as u32),
                    contribution: c.env.f64(),
                    depth: c.depth,
                });
            }
        }

        let alive = cells.iter().filter(|c| c.alive).count();
        RegionOut { env: total_env, err: total_err, values: total_values, cells: alive, cap_hit, finite }
    }

    /// Full integration pass: single region on bounded supports, core box
    /// plus doubling shells on unbounded ones.
    pub(crate) fn run(&self, kernel: &Kernel<S>, mode: RunMode) -> FamilyOutcome<S> {
        let n = self.dim();
        let m = kernel.weights.len();
        let mut dump = self.collect_dump.then(Vec::new);
        let guard = S::of(OVERFLOW_GUARD);

        if !self.axes.iter().any(|a| a.unbounded()) {
            let lo: Vec<S> = (0..n).map(|a| self.axes[a].core_range(S::zero()).0).collect();
            let hi: Vec<S> = (0..n).map(|a| self.axes[a].core_range(S::zero()).1).collect();
            let out =
                self.integrate_region(kernel, &lo, &hi, self.cell_cap(), S::zero(), &mut dump);
            let rel = if out.env > S::zero() { S::of(2.0) * out.err / out.env } else { S::zero() };
            let status = if !out.finite || !(out.env < guard) {
                IntegralStatus::PrecisionLimited
            } else if out.cap_hit && rel > self.tol {
                IntegralStatus::PrecisionLimited
            } else {
                IntegralStatus::Converged
            };
            return FamilyOutcome {
                values: out.values,
                envelope: out.env,
                rel_error: rel,
                status,
                truncation_radius: None,
                cells: out.cells,
                dump,
            };
        }

        let unbounded: Vec<usize> =
            (0..n).filter(|&a| self.axes[a].unbounded()).collect();
        let r0 = S::of(TRUNCATION_START);
        let lo: Vec<S> = (0..n).map(|a| self.axes[a].core_range(r0).0).collect();
        let hi: Vec<S> = (0..n).map(|a| self.axes[a].core_range(r0).1).collect();
        let core =
            self.integrate_region(kernel, &lo, &hi, self.cell_cap(), S::zero(), &mut dump);

        let mut total_env = core.env;
        let mut total_err = core.err;
        let mut total_values = core.values;
        let mut cells = core.cells;
        let mut cap_hit = core.cap_hit;
        let mut finite = core.finite && total_env < guard;

        let mut radius = r0;
        let mut growth_strikes = 0u32;
        let mut settled_strikes = 0u32;
        let mut converged = false;
        // Inside the band, early stopping is unsound: a tail that regrows
        // past the current radius (exponent barely positive at the top
        // degree) looks settled at small radii. The band therefore sweeps
        // the full radius schedule and requires the final shells to stay
        // negligible; the guaranteed-convergent mode may stop early since
        // a strictly negative leading margin rules out regrowth.
        let early_stop = mode == RunMode::AssumeConvergent;

        if finite {
            'shells: for _ in 0..TRUNCATION_DOUBLINGS {
                let r_prev = radius;
                radius = radius * S::of(2.0);
                let prev_total = total_env;
                let mut shell_env = S::zero();

                for (pos, &a) in unbounded.iter().enumerate() {
                    let sides: &[bool] = match self.axes[a] {
                        AxisMap::RationalFull => &[false, true],
                        _ => &[true],
                    };
                    for &positive in sides {
                        let mut slo = vec![S::zero(); n];
                        let mut shi = vec![S::zero(); n];
                        // axes before the slab axis stop at the previous
                        // radius, later ones extend to the current radius,
                        // so the slabs tile the shell disjointly
                        for b in 0..n {
                            if b == a {
                                continue;
                            }
                            let r_b = match unbounded.iter().position(|&x| x == b) {
                                Some(p) if p < pos => r_prev,
                                _ => radius,
                            };
                            let (l, h) = self.axes[b].core_range(r_b);
                            slo[b] = l;
                            shi[b] = h;
                        }
                        // the slab axis spans [r_prev, radius] on one side
                        let u_prev = self.axes[a].u_of_t(match self.axes[a] {
                            AxisMap::RationalHalf { lo } => lo + r_prev,
                            _ => r_prev,
                        });
                        let u_cur = self.axes[a].u_of_t(match self.axes[a] {
                            AxisMap::RationalHalf { lo } => lo + radius,
                            _ => radius,
                        });
                        if positive {
                            slo[a] = u_prev;
                            shi[a] = u_cur;
                        } else {
                            slo[a] = -u_cur;
                            shi[a] = -u_prev;
                        }
                        let out = self.integrate_region(
                            kernel,
                            &slo,
                            &shi,
                            self.slab_cap(),
                            total_env.abs(),
                            &mut dump,
                        );
                        shell_env = shell_env + out.env;
                        total_env = total_env + out.env;
                        total_err = total_err + out.err;
                        for j in 0..m {
                            total_values[j] = total_values[j] + out.values[j];
                        }
                        cells += out.cells;
                        cap_hit |= out.cap_hit;
                        if !out.finite || !(total_env < guard) {
                            finite = false;
                            break 'shells;
                        }
                    }
                }

                if shell_env <= self.tol * total_env.abs().max(S::of(TINY)) {
                    settled_strikes += 1;
                    growth_strikes = 0;
                    if settled_strikes >= 2 {
                        converged = true;
                        if early_stop {
                            break;
                        }
                    }
                } else {
                    settled_strikes = 0;
                    converged = false;
                    if prev_total > S::of(TINY) && total_env > S::of(GROWTH_FACTOR) * prev_total
                    {
                        growth_strikes += 1;
                        if mode == RunMode::Band && growth_strikes >= 2 {
                            finite = false; // treated as divergence evidence below
                            break;
                        }
                    } else {
                        growth_strikes = 0;
                    }
                }
            }
        }

        let rel = if total_env > S::zero() && finite {
            S::of(2.0) * total_err / total_env
        } else {
            S::infinity()
        };
        let status = if !finite {
            match mode {
                RunMode::Band => IntegralStatus::Divergent,
                RunMode::AssumeConvergent => IntegralStatus::PrecisionLimited,
            }
        } else if !converged {
            match mode {
                RunMode::Band => IntegralStatus::Divergent,
                RunMode::AssumeConvergent => IntegralStatus::PrecisionLimited,
            }
        } else if (cap_hit && rel > self.tol) || !(rel <= self.tol) {
            IntegralStatus::PrecisionLimited
        } else {
            IntegralStatus::Converged
        };

        FamilyOutcome {
            values: total_values,
            envelope: total_env,
            rel_error: rel,
            status,
            truncation_radius: Some(radius),
            cells,
            dump,
        }
    }
}

fn advance(idx: &mut [usize], radix: usize) -> bool {
    for a in 0..idx.len() {
        idx[a] += 1;
        if idx[a] < radix {
            return true;
        }
        idx[a] = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

/// Exponent `sum_i lambda_i t^i + ln rho(t)` of the integrand.
pub(crate) fn exp_poly_log_base<'a, S: Real>(
    lambda: &'a [S],
    set: &'a IndexSet,
    weight: &'a ReferenceWeight<S>,
) -> impl Fn(&[S]) -> S + 'a {
    move |t: &[S]| {
        let mut s = weight.log_density(t);
        for (p, i) in set.indices().iter().enumerate() {
            if lambda[p] != S::zero() {
                s = s + lambda[p] * monomial_eval(i, t);
            }
        }
        s
    }
}

// The sampled sphere maximum is a lower bound on the true leading form,
// so any strictly positive margin proves divergence: the exponent grows
// like margin * r^{2k} along the witnessing direction no matter what the
// truncation horizon sees. The inconclusive band therefore sits one-sided
// below zero, where sampling cannot rule out a boundary direction.
pub(crate) fn classify_margin<S: Real>(margin: S) -> Option<RunMode> {
    let band = S::of(LEADING_FORM_BAND);
    if margin > S::zero() {
        None
    } else if margin < -band {
        Some(RunMode::AssumeConvergent)
    } else {
        Some(RunMode::Band)
    }
}

fn divergent_result<S: Real>() -> IntegralResult<S> {
    IntegralResult {
        value: S::infinity(),
        rel_error: S::infinity(),
        status: IntegralStatus::Divergent,
    }
}

/// `int_T exp(sum_i lambda_i t^i) rho(t) dt` with divergence detection.
pub fn integrate_exp_poly<S: Real>(
    lambda: &[S],
    instance: &ProblemInstance<S>,
) -> IntegralResult<S> {
    let set = instance.index_set();
    let margin = leading_form_max(lambda, set, instance.weight(), instance.support());
    let Some(mode) = classify_margin(margin) else {
        return divergent_result();
    };
    let log_base = exp_poly_log_base(lambda, set, instance.weight());
    let kernel = Kernel {
        log_base: Box::new(log_base),
        weights: vec![WeightTerm::One],
        envelope_order: 4 * set.half_degree(),
        envelope_coeff: S::one(),
    };
    let engine = Engine::new(instance.support(), instance.tolerances().quad_rel);
    let out = engine.run(&kernel, mode);
    match out.status {
        IntegralStatus::Divergent => divergent_result(),
        status => IntegralResult { value: out.values[0], rel_error: out.rel_error, status },
    }
}

/// Weighted monomial integrals `M_i(lambda) = int t^i exp(...) rho dt` for
/// each requested order, sharing one adaptive grid driven by an envelope
/// that dominates all of them.
pub fn moment_integrals<S: Real>(
    lambda: &[S],
    instance: &ProblemInstance<S>,
    orders: &[MultiIndex],
) -> MomentIntegrals<S> {
    let set = instance.index_set();
    let max_order = orders.iter().map(|i| i.order()).max().unwrap_or(0);
    assert!(
        max_order <= 4 * set.half_degree(),
        "requested order {max_order} exceeds 4k"
    );
    let margin = leading_form_max(lambda, set, instance.weight(), instance.support());
    let Some(mode) = classify_margin(margin) else {
        return MomentIntegrals {
            orders: orders.to_vec(),
            values: vec![S::infinity(); orders.len()],
            rel_error: S::infinity(),
            status: IntegralStatus::Divergent,
        };
    };
    let log_base = exp_poly_log_base(lambda, set, instance.weight());
    let kernel = Kernel {
        log_base: Box::new(log_base),
        weights: orders.iter().map(WeightTerm::Monomial).collect(),
        envelope_order: 4 * set.half_degree(),
        envelope_coeff: S::one(),
    };
    let engine = Engine::new(instance.support(), instance.tolerances().quad_rel);
    let out = engine.run(&kernel, mode);
    MomentIntegrals {
        orders: orders.to_vec(),
        values: out.values,
        rel_error: out.rel_error,
        status: out.status,
    }
}

/// Moment vector of a nonnegative density over the instance's index set,
/// normalized so the zero-order moment is exactly 1.
pub fn density_moments<S: Real>(
    density: &FieldFn<S>,
    instance: &ProblemInstance<S>,
) -> Result<MomentSpec<S>, DensityMomentError> {
    let set = instance.index_set();
    assert_eq!(density.dim(), set.dim(), "density dimension mismatch");
    let log_base = |t: &[S]| {
        let v = density.eval(t);
        if v > S::zero() {
            v.ln()
        } else {
            S::neg_infinity()
        }
    };
    let kernel = Kernel {
        log_base: Box::new(log_base),
        weights: set.indices().iter().map(WeightTerm::Monomial).collect(),
        envelope_order: 2 * set.half_degree(),
        envelope_coeff: S::one(),
    };
    let engine = Engine::new(instance.support(), instance.tolerances().quad_rel);
    let out = engine.run(&kernel, RunMode::AssumeConvergent);
    if out.status != IntegralStatus::Converged {
        return Err(DensityMomentError::NotConverged(out.status));
    }
    let mass = out.values[set.zero_position()];
    if !(mass > S::zero()) {
        return Err(DensityMomentError::NonPositiveMass);
    }
    let values: Vec<S> = out.values.iter().map(|&v| v / mass).collect();
    Ok(MomentSpec::from_ordered(set.clone(), values)?)
}

/// Final-grid dump of the exponential integral, for diagnostics.
pub fn exp_poly_grid_dump<S: Real>(
    lambda: &[S],
    instance: &ProblemInstance<S>,
) -> (IntegralResult<S>, GridDump) {
    let set = instance.index_set();
    let margin = leading_form_max(lambda, set, instance.weight(), instance.support());
    let empty = GridDump {
        cells: Vec::new(),
        truncation_radius: None,
        total_cells: 0,
        envelope: f64::NAN,
    };
    let Some(mode) = classify_margin(margin) else {
        return (divergent_result(), empty);
    };
    let log_base = exp_poly_log_base(lambda, set, instance.weight());
    let kernel = Kernel {
        log_base: Box::new(log_base),
        weights: vec![WeightTerm::One],
        envelope_order: 4 * set.half_degree(),
        envelope_coeff: S::one(),
    };
    let engine = Engine::new(instance.support(), instance.tolerances().quad_rel).with_dump();
    let out = engine.run(&kernel, mode);
    let result = match out.status {
        IntegralStatus::Divergent => divergent_result(),
        status => IntegralResult { value: out.values[0], rel_error: out.rel_error, status },
    };
    let dump = GridDump {
        cells: out.dump.unwrap_or_default(),
        truncation_radius: out.truncation_radius.map(|r| r.f64()),
        total_cells: out.cells,
        envelope: out.envelope.f64(),
    };
    (result, dump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Tolerances;
    use crate::moments::MomentSpec;
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

    #[test]
    fn leading_form_examples() {
        let inst = gaussian_instance();
        let set = inst.index_set();
        // lambda_2 = -1 against decay 1 gives -2
        let m = leading_form_max(&[0.0, 0.0, -1.0], set, inst.weight(), inst.support());
        assert!((m + 2.0).abs() < 1e-12);
        // borderline
        let m = leading_form_max(&[0.0, 0.0, 1.0], set, inst.weight(), inst.support());
        assert!(m.abs() < 1e-12);
        // divergent
        let m = leading_form_max(&[0.0, 0.0, 2.0], set, inst.weight(), inst.support());
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn leading_form_is_neg_infinite_on_bounded_support() {
        let set = Arc::new(IndexSet::full(1, 1));
        let moments = MomentSpec::from_ordered(set, vec![1.0, 0.5, 0.4]).unwrap();
        let inst = ProblemInstance::new(
            moments,
            SupportRegion::hyper_box(vec![0.0], vec![1.0]).unwrap(),
            ReferenceWeight::Constant,
            Tolerances::default(),
        )
        .unwrap();
        let m = leading_form_max(&[0.0, 0.0, 5.0], inst.index_set(), inst.weight(), inst.support());
        assert_eq!(m, f64::NEG_INFINITY);
    }

    #[test]
    fn gaussian_integral() {
        let inst = gaussian_instance();
        let r = integrate_exp_poly(&[0.0, 0.0, 0.0], &inst);
        assert_eq!(r.status, IntegralStatus::Converged);
        assert!((r.value - SQRT_PI).abs() < 1e-9, "got {}", r.value);
    }

    #[test]
    fn tightened_gaussian_integral() {
        // exp(-2 t^2) integrates to sqrt(pi/2)
        let inst = gaussian_instance();
        let r = integrate_exp_poly(&[0.0, 0.0, -1.0], &inst);
        assert_eq!(r.status, IntegralStatus::Converged);
        assert!((r.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn flat_exponent_is_divergent() {
        // lambda_2 = +1 cancels the weight exactly; integrand is 1 on R
        let inst = gaussian_instance();
        let r = integrate_exp_poly(&[0.0, 0.0, 1.0], &inst);
        assert_eq!(r.status, IntegralStatus::Divergent);
    }

    #[test]
    fn strongly_divergent_is_flagged_without_integrating() {
        let inst = gaussian_instance();
        let r = integrate_exp_poly(&[0.0, 0.0, 2.0], &inst);
        assert_eq!(r.status, IntegralStatus::Divergent);
    }

    #[test]
    fn gaussian_moment_integrals() {
        let inst = gaussian_instance();
        let orders: Vec<MultiIndex> =
            (0..=4).map(|p| MultiIndex::new(vec![p])).collect();
        let m = moment_integrals(&[0.0, 0.0, 0.0], &inst, &orders);
        assert_eq!(m.status, IntegralStatus::Converged);
        // int t^m exp(-t^2): sqrt(pi) * {1, 0, 1/2, 0, 3/4}
        assert!((m.values[0] - SQRT_PI).abs() < 1e-9);
        assert!(m.values[1].abs() < 1e-10);
        assert!((m.values[2] - SQRT_PI / 2.0).abs() < 1e-9);
        assert!(m.values[3].abs() < 1e-10);
        assert!((m.values[4] - 0.75 * SQRT_PI).abs() < 1e-9);
    }

    #[test]
    fn moment_zero_order_matches_exp_poly() {
        let inst = gaussian_instance();
        let lambda = [0.0, 0.0, -1.0];
        let base = integrate_exp_poly(&lambda, &inst);
        let m = moment_integrals(&lambda, &inst, &[MultiIndex::new(vec![0])]);
        assert!((m.values[0] - base.value).abs() <= 1e-9 * base.value.abs());
    }

    #[test]
    fn constant_shift_scales_exactly() {
        let inst = gaussian_instance();
        let base = integrate_exp_poly(&[0.0, 0.1, -0.5], &inst);
        let c = 0.7;
        let shifted = integrate_exp_poly(&[c, 0.1, -0.5], &inst);
        let ratio = shifted.value / base.value;
        assert!(
            (ratio - c.exp()).abs() < 1e-10 * c.exp(),
            "ratio {ratio} vs {}",
            c.exp()
        );
    }

    #[test]
    fn odd_moments_vanish_for_even_integrands() {
        let inst = gaussian_instance();
        let orders = [MultiIndex::new(vec![1]), MultiIndex::new(vec![3])];
        let m = moment_integrals(&[0.3, 0.0, -0.2], &inst, &orders);
        assert_eq!(m.status, IntegralStatus::Converged);
        assert!(m.values[0].abs() < 1e-10);
        assert!(m.values[1].abs() < 1e-10);
    }

    #[test]
    fn half_line_exponential_integral() {
        // int_0^inf exp(-t) exp(-t^2)... use constant weight on a box vs
        // orthant with norm weight: check int_0^inf exp(t - t^2) dt
        let set = Arc::new(IndexSet::full(1, 1));
        let moments = MomentSpec::from_ordered(set, vec![1.0, 1.0, 2.0]).unwrap();
        let inst = ProblemInstance::new(
            moments,
            SupportRegion::orthant(1).unwrap(),
            ReferenceWeight::NormPower { half_degree: 1 },
            Tolerances::default(),
        )
        .unwrap();
        let r = integrate_exp_poly(&[0.0, 1.0, 0.0], &inst);
        assert_eq!(r.status, IntegralStatus::Converged);
        // int_0^inf e^{t-t^2} dt = e^{1/4} sqrt(pi)/2 (1 + erf(1/2))
        let expect: f64 = 1.7302344337037002; // mpmath-checked
        assert!((r.value - expect).abs() < 1e-9, "got {}", r.value);
    }

    #[test]
    fn density_moments_standard_normal() {
        use crate::density::{GaussComponent, MixtureDensity};
        let inst = gaussian_instance();
        let density = MixtureDensity::Gaussian(vec![GaussComponent {
            weight: 1.0,
            mean: vec![0.0],
            sigma: vec![1.0],
        }])
        .to_field();
        let g = density_moments(&density, &inst).unwrap();
        assert!((g.values()[0] - 1.0).abs() < 1e-12);
        assert!(g.values()[1].abs() < 1e-9);
        assert!((g.values()[2] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn density_moments_exponential_on_half_line() {
        use crate::density::{GammaComponent, MixtureDensity};
        let set = Arc::new(IndexSet::full(1, 1));
        let moments = MomentSpec::from_ordered(set, vec![1.0, 1.0, 2.0]).unwrap();
        let inst = ProblemInstance::new(
            moments,
            SupportRegion::orthant(1).unwrap(),
            ReferenceWeight::NormPower { half_degree: 1 },
            Tolerances::default(),
        )
        .unwrap();
        let density = MixtureDensity::Gamma(vec![GammaComponent {
            weight: 1.0,
            shape: 1.0,
            scale: 1.0,
        }])
        .to_field();
        let g: MomentSpec<f64> = density_moments(&density, &inst).unwrap();
        assert!((g.values()[1] - 1.0).abs() < 1e-8);
        assert!((g.values()[2] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn density_moments_narrow_spike() {
        use crate::density::{GaussComponent, MixtureDensity};
        let inst = gaussian_instance();
        let density = MixtureDensity::Gaussian(vec![GaussComponent {
            weight: 1.0,
            mean: vec![0.0],
            sigma: vec![1e-3],
        }])
        .to_field();
        let g = density_moments(&density, &inst).unwrap();
        assert!(g.values()[1].abs() < 1e-12);
        assert!((g.values()[2] - 1e-6).abs() < 1e-12, "got {}", g.values()[2]);
    }

    #[test]
    fn refinement_is_consistent_across_tolerances() {
        let inst = gaussian_instance();
        let lambda = [0.2, 0.5, -0.8];
        let loose = integrate_exp_poly(
            &lambda,
            &inst.with_tolerances(Tolerances { quad_rel: 1e-6, ..Default::default() }),
        );
        let tight = integrate_exp_poly(
            &lambda,
            &inst.with_tolerances(Tolerances { quad_rel: 5e-7, ..Default::default() }),
        );
        assert_eq!(loose.status, IntegralStatus::Converged);
        assert_eq!(tight.status, IntegralStatus::Converged);
        let budget = (loose.rel_error + tight.rel_error) * loose.value.abs();
        assert!((loose.value - tight.value).abs() <= budget.max(1e-15));
    }

    #[test]
    fn leading_form_homogeneous_in_top_block() {
        // with unit decay: (m(s*top) + 1) = s * (m(top) + 1)
        let inst = gaussian_instance();
        let set = inst.index_set();
        for s in [0.5, 2.0, 7.5] {
            for top in [-0.6, -2.5] {
                let m1 =
                    leading_form_max(&[0.3, -0.4, top], set, inst.weight(), inst.support());
                let m2 = leading_form_max(
                    &[0.3, -0.4, s * top],
                    set,
                    inst.weight(),
                    inst.support(),
                );
                assert!(((m2 + 1.0) - s * (m1 + 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn converged_integrals_are_positive() {
        let inst = gaussian_instance();
        for lambda in [[0.0, 0.0, 0.0], [-1.0, 2.0, -3.0], [2.0, -1.0, -0.1]] {
            let r = integrate_exp_poly(&lambda, &inst);
            assert_eq!(r.status, IntegralStatus::Converged);
            assert!(r.value > 0.0);
        }
    }

    #[test]
    fn two_dim_gaussian_integral() {
        let set = Arc::new(IndexSet::full(2, 1));
        let n = set.len();
        let mut g = vec![0.0; n];
        g[0] = 1.0;
        let moments = MomentSpec::from_ordered(set, g).unwrap();
        let inst = ProblemInstance::new(
            moments,
            SupportRegion::full_space(2).unwrap(),
            ReferenceWeight::NormPower { half_degree: 1 },
            Tolerances { quad_rel: 1e-9, ..Default::default() },
        )
        .unwrap();
        let lambda = vec![0.0; n];
        let r = integrate_exp_poly(&lambda, &inst);
        assert_eq!(r.status, IntegralStatus::Converged);
        assert!((r.value - std::f64::consts::PI).abs() < 1e-7, "got {}", r.value);
    }

    #[test]
    fn grid_dump_covers_integral() {
        let inst = gaussian_instance();
        let (result, dump) = exp_poly_grid_dump(&[0.0, 0.0, 0.0], &inst);
        assert!(result.is_converged());
        assert!(!dump.cells.is_empty());
        assert!(dump.truncation_radius.unwrap() >= 16.0);
        let total: f64 = dump.cells.iter().map(|c| c.contribution).sum();
        // envelope integral of (1 + t^4) e^{-t^2} = sqrt(pi) * (1 + 3/4)
        assert!((total - 1.75 * SQRT_PI).abs() < 1e-6, "got {total}");
        assert!((total - dump.envelope).abs() < 1e-9 * total);
    }
}
