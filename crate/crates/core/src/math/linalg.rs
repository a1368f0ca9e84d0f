//! Small dense linear algebra: Cholesky factorization and least squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix (row-major).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    jitter: f64,
}

impl Cholesky {
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        Self::factor_jittered(a, n, 0.0).ok_or(Error::NotPositiveDefinite { jitter: 0.0 })
    }

    /// Factor, adding `jitter * mean(diag)` to the diagonal on failure, escalating from 1e-12
    /// to 1e-8 in decades.
    pub fn factor_with_jitter(a: &[f64], n: usize) -> Result<Self> {
        if let Some(c) = Self::factor_jittered(a, n, 0.0) {
            return Ok(c);
        }
        let scale = (0..n).map(|i| a[i * n + i]).sum::<f64>() / n.max(1) as f64;
        let mut j = 1e-12;
        while j <= 1.000_001e-8 {
            if let Some(c) = Self::factor_jittered(a, n, j * scale) {
                return Ok(c);
            }
            j *= 10.0;
        }
        Err(Error::NotPositiveDefinite { jitter: 1e-8 * scale })
    }

    fn factor_jittered(a: &[f64], n: usize, jitter: f64) -> Option<Self> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                if i == j {
                    s += jitter;
                }
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * n + i] = libm::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l, jitter })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that was needed for the factorization to succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// y = L z
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i + 1];
            out[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// Solve L y = b in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(a, c)| a * c).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solve L^T x = y in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }
}

/// Least squares fit produced by [`least_squares`].
#[derive(Debug, Clone, PartialEq)]
pub struct LsFit {
    pub coef: Vec<f64>,
    /// Columns removed as (numerically) collinear with earlier ones; their coefficient is 0.
    pub dropped: Vec<bool>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub rank: usize,
}

impl LsFit {
    /// Residual variance with degrees-of-freedom correction.
    pub fn sigma2(&self) -> f64 {
        let dof = self.residuals.len().saturating_sub(self.rank);
        if dof == 0 {
            0.0
        } else {
            self.rss / dof as f64
        }
    }
}

/// Ordinary least squares on a row-major `rows x p` design by modified Gram-Schmidt.
///
/// Columns whose residual norm after projection falls below `1e-10` of their own norm are
/// dropped. Fails only when every column is dropped.
pub fn least_squares(x: &[f64], y: &[f64], p: usize) -> Result<LsFit> {
    let rows = y.len();
    assert_eq!(x.len(), rows * p);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut r = vec![0.0; p * p];
    let mut kept: Vec<usize> = Vec::with_capacity(p);
    let mut dropped = vec![false; p];
    for j in 0..p {
        let mut v: Vec<f64> = (0..rows).map(|i| x[i * p + j]).collect();
        let norm0 = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        for _pass in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let d: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
                r[kept[k] * p + j] += d;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= d * qi;
                }
            }
        }
        let norm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if norm0 == 0.0 || norm <= 1e-10 * norm0 {
            dropped[j] = true;
            continue;
        }
        r[j * p + j] = norm;
        v.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
        kept.push(j);
    }
    if kept.is_empty() {
        return Err(Error::RankDeficient("all regressors are degenerate".into()));
    }
    let qty: Vec<f64> = q.iter().map(|qk| qk.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut coef = vec![0.0; p];
    for (k, &j) in kept.iter().enumerate().rev() {
        let mut s = qty[k];
        for &jj in &kept[k + 1..] {
            s -= r[j * p + jj] * coef[jj];
        }
        coef[j] = s / r[j * p + j];
    }
    let residuals: Vec<f64> = (0..rows)
        .map(|i| y[i] - (0..p).map(|j| x[i * p + j] * coef[j]).sum::<f64>())
        .collect();
    let rss = residuals.iter().map(|e| e * e).sum();
    Ok(LsFit { coef, dropped, residuals, rss, rank: kept.len() })
}

/// Simple linear regression `y = a + b x`, returning `(a, b)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}
