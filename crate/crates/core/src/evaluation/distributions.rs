//! Gaussian and normal-inverse Gaussian fits to log-volatility increments.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::optim::nelder_mead;
use crate::math::quad::{integrate, Tolerance};
use crate::math::special::{bessel_k_scaled_any, normal_quantile};
use crate::math::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    pub log_likelihood: f64,
}

/// NIG(α, β, δ, μ) with density
/// α δ K₁(α q) / (π q) · exp(δ√(α²-β²) + β(x-μ)), q = √(δ² + (x-μ)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

impl NigParams {
    pub fn is_valid(&self) -> bool {
        self.alpha > 0.0 && self.beta.abs() < self.alpha && self.delta > 0.0 && self.mu.is_finite()
    }

    pub fn gamma(&self) -> f64 {
        libm::sqrt(self.alpha * self.alpha - self.beta * self.beta)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let d = x - self.mu;
        let q = libm::sqrt(self.delta * self.delta + d * d);
        let z = self.alpha * q;
        libm::log(self.alpha * self.delta / (PI * q)) + libm::log(bessel_k_scaled_any(1.0, z)) - z
            + self.delta * self.gamma()
            + self.beta * d
    }

    pub fn mean(&self) -> f64 {
        self.mu + self.delta * self.beta / self.gamma()
    }

    pub fn variance(&self) -> f64 {
        let g = self.gamma();
        self.delta * self.alpha * self.alpha / (g * g * g)
    }

    /// Location-scale image under x -> a + s x.
    pub fn affine(&self, a: f64, s: f64) -> NigParams {
        NigParams { alpha: self.alpha / s, beta: self.beta / s, delta: self.delta * s, mu: a + s * self.mu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigFit {
    pub params: NigParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub start: NigParams,
    pub start_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub prob: f64,
    pub sample: f64,
    pub gaussian: f64,
    pub nig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementFits {
    pub n: usize,
    pub gaussian: GaussianFit,
    pub nig: NigFit,
    pub qq: Vec<QqPoint>,
}

pub const MIN_INCREMENTS: usize = 50;

pub fn gaussian_fit(x: &[f64]) -> Result<GaussianFit> {
    let mean = stats::mean(x);
    let var = stats::variance(x);
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let ll = -0.5 * n * (libm::log(2.0 * PI * var) + 1.0);
    Ok(GaussianFit { mean, std: libm::sqrt(var), log_likelihood: ll })
}

fn nig_loglik(p: &NigParams, x: &[f64]) -> f64 {
    if !p.is_valid() {
        return f64::NEG_INFINITY;
    }
    x.iter().map(|v| p.ln_pdf(*v)).sum()
}

/// Moment-matched NIG for standardized data with the given skewness and excess kurtosis.
fn moment_start(skew: f64, exkurt: f64) -> NigParams {
    let k = if exkurt > 0.01 { exkurt } else { 0.01 };
    let r = (skew * skew / k).min(0.5);
    let rho = libm::sqrt(r / (3.0 - 4.0 * r)).copysign(skew);
    let zeta = 3.0 * (1.0 + 4.0 * rho * rho) / k;
    let one = 1.0 - rho * rho;
    let alpha = libm::sqrt(zeta) / one;
    let beta = rho * alpha;
    let g = alpha * libm::sqrt(one);
    let delta = zeta / g;
    NigParams { alpha, beta, delta, mu: -delta * beta / g }
}

fn to_theta(p: &NigParams) -> [f64; 4] {
    [p.mu, libm::log(p.delta), libm::log(p.alpha), libm::atanh(p.beta / p.alpha)]
}

fn from_theta(t: &[f64]) -> NigParams {
    let alpha = libm::exp(t[2]);
    NigParams { alpha, beta: alpha * libm::tanh(t[3]), delta: libm::exp(t[1]), mu: t[0] }
}

/// Maximum likelihood NIG fit started from the moment-matched parameters.
///
/// When the simplex fails to converge the start point is returned with `converged = false`.
pub fn fit_nig(x: &[f64]) -> Result<NigFit> {
    let m = stats::mean(x);
    let s = libm::sqrt(stats::variance(x));
    if !(s > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let y: Vec<f64> = x.iter().map(|v| (v - m) / s).collect();
    let n = y.len() as f64;
    let skew = y.iter().map(|v| v * v * v).sum::<f64>() / n;
    let exkurt = y.iter().map(|v| v * v * v * v).sum::<f64>() / n - 3.0;
    let start = moment_start(skew, exkurt);
    let start_ll = nig_loglik(&start, &y);
    let obj = |t: &[f64]| -nig_loglik(&from_theta(t), &y);
    let mut theta = to_theta(&start).to_vec();
    let mut best = -start_ll;
    let mut converged = false;
    for _ in 0..4 {
        let r = nelder_mead(obj, &theta, &[0.1, 0.3, 0.3, 0.2], 1e-12, 4000);
        let improved = r.fx < best - 1e-9;
        if r.fx <= best {
            theta = r.x;
            best = r.fx;
        }
        if r.converged && !improved {
            converged = true;
            break;
        }
        converged = r.converged;
    }
    let log_jac = -n * libm::log(s);
    let start_x = start.affine(m, s);
    if !converged || !best.is_finite() {
        return Ok(NigFit {
            params: start_x,
            log_likelihood: start_ll + log_jac,
            converged: false,
            start: start_x,
            start_log_likelihood: start_ll + log_jac,
        });
    }
    Ok(NigFit {
        params: from_theta(&theta).affine(m, s),
        log_likelihood: -best + log_jac,
        converged: true,
        start: start_x,
        start_log_likelihood: start_ll + log_jac,
    })
}

/// NIG quantiles at sorted probabilities via a tabulated CDF.
fn nig_quantiles(p: &NigParams, probs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    const CELLS: usize = 4000;
    let h = (hi - lo) / CELLS as f64;
    let tol = Tolerance::relative(1e-10);
    let mut grid = Vec::with_capacity(CELLS + 1);
    let mut cdf = Vec::with_capacity(CELLS + 1);
    let left = integrate(|x| libm::exp(p.ln_pdf(x)), lo - 50.0 * (hi - lo), lo, tol).value;
    let mut acc = left;
    grid.push(lo);
    cdf.push(acc);
    for i in 0..CELLS {
        let a = lo + i as f64 * h;
        acc += integrate(|x| libm::exp(p.ln_pdf(x)), a, a + h, tol).value;
        grid.push(a + h);
        cdf.push(acc);
    }
    let total = acc + integrate(|x| libm::exp(p.ln_pdf(x)), hi, hi + 50.0 * (hi - lo), tol).value;
    probs
        .iter()
        .map(|&q| {
            let target = q * total;
            match cdf.iter().position(|c| *c >= target) {
                Some(0) => lo,
                Some(k) => {
                    let w = (target - cdf[k - 1]) / (cdf[k] - cdf[k - 1]).max(f64::MIN_POSITIVE);
                    grid[k - 1] + w * h
                }
                None => hi,
            }
        })
        .collect()
}

/// Gaussian and NIG fits to the increments of a log-proxy series, with QQ data.
pub fn fit_increment_distributions(z: &[f64]) -> Result<IncrementFits> {
    let y: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).filter(|v| v.is_finite()).collect();
    fit_distributions(&y)
}

/// Gaussian and NIG fits to a sample, with QQ data.
pub fn fit_distributions(y: &[f64]) -> Result<IncrementFits> {
    if y.len() < MIN_INCREMENTS {
        return Err(Error::SeriesTooShort { needed: MIN_INCREMENTS, got: y.len() });
    }
    let gaussian = gaussian_fit(y)?;
    let nig = fit_nig(y)?;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let probs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let spread = sorted[n - 1] - sorted[0];
    let nq = nig_quantiles(&nig.params, &probs, sorted[0] - spread, sorted[n - 1] + spread);
    let qq = probs
        .iter()
        .zip(&sorted)
        .zip(nq)
        .map(|((p, s), q)| QqPoint { prob: *p, sample: *s, gaussian: gaussian.mean + gaussian.std * normal_quantile(*p), nig: q })
        .collect();
    Ok(IncrementFits { n, gaussian, nig, qq })
}
