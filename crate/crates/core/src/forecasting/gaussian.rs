//! Conditional Gaussian forecasts and the lognormal correction.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels_acf::{AcfTable, ModelSpec};
use crate::math::linalg::Cholesky;

/// Conditional mean and variance of x_{t+h} given the last m+1 observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalForecast {
    pub mu: f64,
    pub xi2: f64,
    /// Weights on (x_t, x_{t-1}, ..., x_{t-m}).
    pub weights: Vec<f64>,
    /// ξ² came out negative and was set to zero.
    pub clamped: bool,
}

/// Factorized correlation matrix of (x_t, ..., x_{t-m}), reusable across horizons.
#[derive(Debug, Clone)]
pub struct GaussianConditioner {
    chol: Cholesky,
    rho: Vec<f64>,
    depth: usize,
}

impl GaussianConditioner {
    /// `rho[k]` is the correlation at lag k; it must cover lags 0..depth+max_h-1.
    pub fn new(rho: &[f64], depth: usize) -> Result<Self> {
        if depth == 0 || rho.len() < depth {
            return Err(Error::SingularConditioning);
        }
        let mut g = vec![0.0; depth * depth];
        for i in 0..depth {
            for j in 0..depth {
                g[i * depth + j] = rho[i.abs_diff(j)];
            }
        }
        let chol = Cholesky::factor_with_jitter(&g, depth).map_err(|_| Error::SingularConditioning)?;
        Ok(GaussianConditioner { chol, rho: rho.to_vec(), depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter()
    }

    /// Γ₁₂Γ₂₂⁻¹ and Γ₁₂Γ₂₂⁻¹Γ₂₁ for horizon h.
    pub fn weights(&self, h: usize) -> Result<(Vec<f64>, f64)> {
        if h + self.depth > self.rho.len() {
            return Err(Error::SingularConditioning);
        }
        let g12: Vec<f64> = (0..self.depth).map(|j| self.rho[h + j]).collect();
        let w = self.chol.solve(&g12);
        let q = w.iter().zip(&g12).map(|(a, b)| a * b).sum();
        Ok((w, q))
    }

    /// `recent_first` holds (x_t, x_{t-1}, ...), de-meaned.
    pub fn forecast(&self, recent_first: &[f64], h: usize, variance: f64) -> Result<ConditionalForecast> {
        if recent_first.len() < self.depth {
            return Err(Error::SeriesTooShort { needed: self.depth, got: recent_first.len() });
        }
        let (w, q) = self.weights(h)?;
        let mu = w.iter().zip(recent_first).map(|(a, b)| a * b).sum();
        let raw = variance * (1.0 - q);
        Ok(ConditionalForecast { mu, xi2: raw.max(0.0), weights: w, clamped: raw < 0.0 })
    }
}

/// Forecast x_{t+h} from chronological `history` (last element x_t, already de-meaned) using
/// the last `depth` = m+1 values and the model ACF at lags k·dt.
pub fn gaussian_conditional_forecast(
    spec: &ModelSpec,
    history: &[f64],
    depth: usize,
    h: usize,
    dt: f64,
) -> Result<ConditionalForecast> {
    if history.len() < depth {
        return Err(Error::SeriesTooShort { needed: depth, got: history.len() });
    }
    if history.iter().rev().take(depth).any(|v| !v.is_finite()) {
        return Err(Error::Domain("history must be finite".into()));
    }
    let table = AcfTable::new(spec, dt, depth + h);
    let cond = GaussianConditioner::new(table.as_slice(), depth)?;
    let recent: Vec<f64> = history.iter().rev().take(depth).copied().collect();
    cond.forecast(&recent, h, spec.variance)
}

/// E[exp X] for X ~ N(mu, xi2).
pub fn lognormal_correct(mu: f64, xi2: f64) -> f64 {
    libm::exp(mu + 0.5 * xi2)
}
