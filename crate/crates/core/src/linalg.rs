//! Small dense symmetric linear algebra: cyclic Jacobi eigenvalues and
//! Cholesky solves. Matrices here stay tiny (at most a few dozen rows),
//! so simplicity and determinism beat asymptotics.

use crate::scalar::Real;

/// Row-major dense symmetric matrix view helpers.
#[derive(Clone, Debug)]
pub struct SymMatrix<S> {
    pub n: usize,
    pub data: Vec<S>, // row-major, length n*n
}

impl<S: Real> SymMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![S::zero(); n * n] }
    }

    pub fn from_rows(n: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), n * n);
        SymMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.n + c] = v;
    }

    pub fn trace(&self) -> S {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn scale(&self, factor: S) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|&v| v * factor).collect() }
    }

    /// Eigenvalues by cyclic Jacobi sweeps, ascending. Exact symmetry of
    /// the input is assumed (the caller constructs symmetric data).
    pub fn eigenvalues(&self) -> Vec<S> {
        let n = self.n;
        let mut a = self.data.clone();
        if n == 1 {
            return vec![a[0]];
        }
        let eps = S::of(1e-14);
        for _sweep in 0..64 {
            let mut off = S::zero();
            for r in 0..n {
                for c in (r + 1)..n {
                    off = off + a[r * n + c] * a[r * n + c];
                }
            }
            let scale = self.max_abs() + S::of(1e-300);
            if off.sqrt() <= eps * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= eps * scale * S::of(1e-2) {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (S::of(2.0) * apq);
                    let t = {
                        let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                        sign / (theta.abs() + (S::one() + theta * theta).sqrt())
                    };
                    let c = S::one() / (S::one() + t * t).sqrt();
                    let s = t * c;
                    // rotate rows/columns p and q
                    for i in 0..n {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        a[i * n + p] = c * aip - s * aiq;
                        a[i * n + q] = s * aip + c * aiq;
                    }
                    for i in 0..n {
                        let api = a[p * n + i];
                        let aqi = a[q * n + i];
                        a[p * n + i] = c * api - s * aqi;
                        a[q * n + i] = s * api + c * aqi;
                    }
                }
            }
        }
        let mut eigs: Vec<S> = (0..n).map(|i| a[i * n + i]).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    /// Solves `A x = b` by Cholesky; returns `None` when the matrix is not
    /// (numerically) positive definite.
    pub fn cholesky_solve(&self, b: &[S]) -> Option<Vec<S>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut l = vec![S::zero(); n * n];
        for r in 0..n {
            for c in 0..=r {
                let mut sum = self.get(r, c);
                for k in 0..c {
                    sum = sum - l[r * n + k] * l[c * n + k];
                }
                if r == c {
                    if !(sum > S::zero()) || !sum.is_finite() {
                        return None;
                    }
                    l[r * n + c] = sum.sqrt();
                } else {
                    l[r * n + c] = sum / l[c * n + c];
                }
            }
        }
        // forward then back substitution
        let mut y = vec![S::zero(); n];
        for r in 0..n {
            let mut sum = b[r];
            for k in 0..r {
                sum = sum - l[r * n + k] * y[k];
            }
            y[r] = sum / l[r * n + r];
        }
        let mut x = vec![S::zero(); n];
        for r in (0..n).rev() {
            let mut sum = y[r];
            for k in (r + 1)..n {
                sum = sum - l[k * n + r] * x[k];
            }
            x[r] = sum / l[r * n + r];
        }
        Some(x)
    }
}

pub fn norm_inf<S: Real>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |m, &x| if x.abs() > m { x.abs() } else { m })
}

pub fn norm_2<S: Real>(v: &[S]) -> S {
    v.iter().map(|&x| x * x).sum::<S>().sqrt()
}
