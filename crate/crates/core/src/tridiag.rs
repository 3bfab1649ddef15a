//! Tridiagonal matrices: direct solves and a Sturm-sequence eigensolver for
//! the symmetric case.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. Row `i` is
/// `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriDiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TriDiag {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::config(format!(
                "inconsistent tridiagonal lengths {}/{}/{}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        if lower
            .iter()
            .chain(&diag)
            .chain(&upper)
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("tridiagonal entries must be finite"));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i > 0 {
                m[(i, i - 1)] = self.lower[i - 1];
            }
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
            }
        }
        m
    }

    /// Thomas elimination without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 {
            return Err(Error::SingularJacobian { row: 0 });
        }
        if n > 1 {
            c[0] = self.upper[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularJacobian { row: i });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// LU with partial pivoting, for nearly singular shifted systems.
    /// Exact zero pivots are replaced by a tiny multiple of the matrix norm.
    pub fn solve_pivoted(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(rhs.len(), n);
        let tiny = f64::EPSILON * self.norm_inf().max(f64::MIN_POSITIVE);
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut dl = self.lower.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut b = rhs.to_vec();

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
                b[i + 1] -= f * b[i];
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                // swap rows i and i+1
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                b.swap(i, i + 1);
                b[i + 1] -= f * b[i];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = b;
        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `a` strictly below
/// `sigma`, from the signs of the LDL^T pivots of `a - sigma I`.
pub fn sturm_count(a: &TriDiag, sigma: f64) -> usize {
    let n = a.n();
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = a.diag[0] - sigma;
    for i in 0..n {
        if i > 0 {
            let e = a.upper[i - 1];
            let q_safe = if q.abs() < guard {
                guard.copysign(q)
            } else {
                q
            };
            q = (a.diag[i] - sigma) - e * e / q_safe;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(a: &TriDiag) -> (f64, f64) {
    let n = a.n();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += a.upper[i - 1].abs();
        }
        if i + 1 < n {
            r += a.upper[i].abs();
        }
        lo = lo.min(a.diag[i] - r);
        hi = hi.max(a.diag[i] + r);
    }
    let pad = f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// Smallest `m` eigenvalues of a symmetric tridiagonal matrix, ascending, by
/// bisection on Sturm counts. Each is resolved to adjacent floating point
/// numbers.
pub fn eigen_smallest(a: &TriDiag, m: usize) -> Result<Vec<f64>> {
    if !a.is_symmetric() {
        return Err(Error::config("eigen_smallest needs a symmetric matrix"));
    }
    if m > a.n() {
        return Err(Error::config(format!(
            "asked for {m} eigenvalues of a {}x{} matrix",
            a.n(),
            a.n()
        )));
    }
    let (glo, ghi) = gershgorin(a);
    let mut out = Vec::with_capacity(m);
    let mut lo = glo;
    for index in 0..m {
        // invariant: lo <= lambda_index < hi
        let mut hi = ghi;
        let mut iterations = 0;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            iterations += 1;
            if iterations > 4000 {
                return Err(Error::IterationLimit { index });
            }
            if sturm_count(a, mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(lo);
    }
    Ok(out)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvectors for the given eigenvalues by shifted inverse iteration, with
/// Gram-Schmidt against earlier vectors. Vectors have unit Euclidean norm.
pub fn eigenvectors(a: &TriDiag, eigenvalues: &[f64]) -> Vec<Vec<f64>> {
    let n = a.n();
    let scale = a.norm_inf().max(f64::MIN_POSITIVE);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let mut shifted = a.clone();
        shifted.diag.iter_mut().for_each(|d| *d -= lambda);
        // deterministic start not orthogonal to any eigenvector in practice
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i * 7 + j * 13) % 11) as f64 / 11.0)
            .collect();
        normalize(&mut v);
        for _ in 0..6 {
            let mut w = shifted.solve_pivoted(&v);
            for prev in &vecs {
                let c = dot(&w, prev);
                w.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
            normalize(&mut w);
            v = w;
            let av = a.matvec(&v);
            let res = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - lambda * y).powi(2))
                .sum::<f64>()
                .sqrt();
            if res <= 1e-12 * scale {
                break;
            }
        }
        vecs.push(v);
    }
    vecs
}
