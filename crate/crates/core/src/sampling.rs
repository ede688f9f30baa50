//! Deterministic low-discrepancy point sets for sign checks and sphere
//! scans. Everything here is seed-free and reproducible.

use crate::scalar::Real;
use crate::support::SupportRegion;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse in the given base.
pub(crate) fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while n > 0 {
        denom *= base as f64;
        inv += (n % base) as f64 / denom;
        n /= base;
    }
    inv
}

/// `count` Halton points in the open unit cube `(0,1)^dim`.
pub(crate) fn halton(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton dimension too large");
    (1..=count as u64)
        .map(|n| (0..dim).map(|d| radical_inverse(n, PRIMES[d])).collect())
        .collect()
}

/// Deterministic quasi-uniform sample of the unit sphere `S^{dim-1}`.
///
/// Dimension one yields `{-1, +1}`; higher dimensions map Halton points
/// through Box-Muller pairs and normalize. Coordinate axes and two-axis
/// diagonals are always appended since top-diagonal exponents make those
/// the extreme directions.
pub fn unit_sphere_samples<S: Real>(dim: usize, count: usize) -> Vec<Vec<S>> {
    assert!(dim >= 1);
    if dim == 1 {
        return vec![vec![S::one()], vec![-S::one()]];
    }
    let pairs = dim.div_ceil(2);
    let raw = halton(2 * pairs, count);
    let mut out: Vec<Vec<S>> = Vec::with_capacity(count + 4 * dim * dim);
    for u in raw {
        let mut x = Vec::with_capacity(dim);
        for p in 0..pairs {
            let (u1, u2) = (u[2 * p].max(1e-12), u[2 * p + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            x.push(r * theta.cos());
            if x.len() < dim {
                x.push(r * theta.sin());
            }
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-9 {
            out.push(x.iter().map(|&v| S::of(v / norm)).collect());
        }
    }
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![S::zero(); dim];
            e[axis] = S::of(sign);
            out.push(e);
        }
    }
    let inv_sqrt2 = S::of(std::f64::consts::FRAC_1_SQRT_2);
    for a in 0..dim {
        for b in (a + 1)..dim {
            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![S::zero(); dim];
                e[a] = S::of(sa) * inv_sqrt2;
                e[b] = S::of(sb) * inv_sqrt2;
                out.push(e);
            }
        }
    }
    out
}

/// Deterministic low-discrepancy points of a support region, with density
/// increasing toward the origin and exact points along the coordinate
/// axes. Used by certificate sign checks.
pub fn support_samples<S: Real>(support: &SupportRegion<S>, count: usize) -> Vec<Vec<S>> {
    let dim = support.dim();
    let radius = 1e3;
    let mut out: Vec<Vec<S>> = Vec::with_capacity(count + 64 * dim + 1);

    for u in halton(dim, count) {
        let t: Vec<S> = (0..dim).map(|d| S::of(stretch(u[d], radius))).collect();
        if let Some(p) = pull_inside(support, t) {
            out.push(p);
        }
    }

    // axis rays with logarithmic spacing, both signs
    for axis in 0..dim {
        for j in 0..32 {
            let r = 1e-4 * (10f64).powf(j as f64 * 7.0 / 31.0); // 1e-4 .. 1e3
            for sign in [1.0, -1.0] {
                let mut t = vec![S::zero(); dim];
                t[axis] = S::of(sign * r);
                if let Some(p) = pull_inside(support, t) {
                    out.push(p);
                }
            }
        }
    }

    let anchor = support.anchor_point();
    out.push(anchor);
    if support.contains(&vec![S::zero(); dim]) {
        out.push(vec![S::zero(); dim]);
    }
    out
}

/// Maps `u in (0,1)` to a signed log-spaced coordinate in `(-radius, radius)`,
/// clustering near zero.
fn stretch(u: f64, radius: f64) -> f64 {
    let v = 2.0 * u - 1.0;
    let a = (1.0 + radius).ln();
    v.signum() * ((a * v.abs()).exp() - 1.0)
}

/// Deterministically pulls a candidate point into the region by bisecting
/// toward the anchor point. Returns `None` if even the anchor fails
/// (cannot happen for validated regions).
fn pull_inside<S: Real>(support: &SupportRegion<S>, t: Vec<S>) -> Option<Vec<S>> {
    if support.contains(&t) {
        return Some(t);
    }
    let anchor = support.anchor_point();
    let mut lo = S::zero(); // fraction toward t: anchor at 0, t at 1
    let mut hi = S::one();
    // shrink [anchor, t] until the candidate enters the closed region
    for _ in 0..64 {
        let mid = (lo + hi) / S::of(2.0);
        let cand: Vec<S> = anchor
            .iter()
            .zip(&t)
            .map(|(&a, &x)| a + mid * (x - a))
            .collect();
        if support.contains(&cand) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cand: Vec<S> = anchor
        .iter()
        .zip(&t)
        .map(|(&a, &x)| a + lo * (x - a))
        .collect();
    support.contains(&cand).then_some(cand)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples_have_unit_norm() {
        let pts = unit_sphere_samples::<f64>(3, 500);
        assert!(pts.len() >= 500);
        for p in &pts {
            let n: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9, "norm {n}");
        }
    }

    #[test]
    fn sphere_dimension_one_is_pm_one() {
        let pts = unit_sphere_samples::<f64>(1, 1000);
        assert_eq!(pts, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn support_samples_stay_inside() {
        let regions: Vec<SupportRegion<f64>> = vec![
            SupportRegion::orthant(2).unwrap(),
            SupportRegion::ball(2, 1.5).unwrap(),
            SupportRegion::hyper_box(vec![-1.0, 0.0], vec![2.0, 3.0]).unwrap(),
            SupportRegion::half_spaces(vec![vec![1.0, 1.0]], vec![1.0], vec![0.0, 0.0]).unwrap(),
        ];
        for region in &regions {
            let pts = support_samples(region, 512);
            assert!(pts.len() >= 512, "lost too many samples");
            for p in &pts {
                assert!(region.contains(p));
            }
        }
    }

    #[test]
    fn halton_is_deterministic() {
        assert_eq!(halton(2, 16), halton(2, 16));
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}
