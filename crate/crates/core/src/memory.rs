//! Long-memory estimation: sample ACF, log-log tail regression and ACF matching.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels_acf::{acf, power_gamma_to_beta, Family, ModelSpec};
use crate::math::linalg::fit_line;
use crate::math::optim::grid_refine;
use crate::math::{rng_stream, sq, stats};
use crate::roughness::{day_index, default_block_len};

/// Sample autocorrelations at lags 1..=L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAcf {
    pub lags: Vec<usize>,
    pub rho_hat: Vec<f64>,
    pub n: usize,
}

impl EmpiricalAcf {
    pub fn max_lag(&self) -> usize {
        self.lags.len()
    }
}

/// Default maximum lag ⌈n^{1/3}⌉.
pub fn default_max_lag(n: usize) -> usize {
    default_block_len(n)
}

/// Biased sample ACF. Non-finite cells are skipped, as are pairs crossing a day boundary when
/// boundaries are given.
pub fn empirical_acf(z: &[f64], max_lag: usize, day_boundaries: Option<&[usize]>) -> Result<EmpiricalAcf> {
    if max_lag < 1 {
        return Err(invalid("max lag must be at least 1"));
    }
    let valid: Vec<f64> = z.iter().copied().filter(|v| v.is_finite()).collect();
    if valid.len() <= max_lag {
        return Err(Error::SeriesTooShort { needed: max_lag + 1, got: valid.len() });
    }
    let n = valid.len() as f64;
    let mu = stats::mean(&valid);
    let c0 = valid.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    if !(c0 > 1e-300 * (1.0 + mu * mu)) {
        return Err(Error::ZeroVariance);
    }
    let days = day_boundaries.map(|b| day_index(z.len(), b));
    let mut rho = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let mut s = 0.0;
        for j in 0..z.len().saturating_sub(k) {
            let (a, b) = (z[j], z[j + k]);
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            if let Some(d) = &days {
                if d[j] != d[j + k] {
                    continue;
                }
            }
            s += (a - mu) * (b - mu);
        }
        rho.push((s / n / c0).clamp(-1.0, 1.0));
    }
    Ok(EmpiricalAcf { lags: (1..=max_lag).collect(), rho_hat: rho, n: valid.len() })
}

/// Tail regression log ρ̂(k) = a + b log k over k = lo..=hi, β̂ = -b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta_hat: f64,
    pub intercept: f64,
    pub lag_lo: usize,
    pub lag_hi: usize,
    pub n_effective: usize,
}

/// Default regression window (⌊n^{1/4}⌋, ⌊n^{1/3}⌋).
pub fn default_beta_window(n: usize) -> (usize, usize) {
    let lo = (libm::floor(libm::pow(n as f64, 0.25)) as usize).max(1);
    let hi = libm::floor(libm::cbrt(n as f64)) as usize;
    (lo, hi.max(lo + 1))
}

pub fn ols_beta(acf: &EmpiricalAcf, lag_lo: Option<usize>, lag_hi: Option<usize>) -> Result<BetaFit> {
    let (dlo, dhi) = default_beta_window(acf.n);
    let lo = lag_lo.unwrap_or(dlo).max(1);
    let hi = lag_hi.unwrap_or(dhi).min(acf.max_lag());
    if hi <= lo {
        return Err(invalid(alloc::format!("lag window {lo}..={hi} needs at least two lags")));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for k in lo..=hi {
        let r = acf.rho_hat[k - 1];
        if !(r > 0.0) {
            return Err(Error::NonPositiveAcf { lag: k });
        }
        x.push(libm::log(k as f64));
        y.push(libm::log(r));
    }
    let (a, b) = fit_line(&x, &y);
    Ok(BetaFit { beta_hat: -b, intercept: a, lag_lo: lo, lag_hi: hi, n_effective: acf.n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryFit {
    pub family: Family,
    pub alpha_in: f64,
    pub memory_hat: f64,
    pub noise_scale_c: f64,
    /// Implied long-memory exponent (β for Cauchy, mapped γ for PowerBSS).
    pub beta_equivalent: Option<f64>,
    pub objective_value: f64,
    pub robust: bool,
    /// Lags excluded because ρ̂ was not positive.
    pub dropped_lags: Vec<usize>,
    pub at_bound: bool,
    pub ci: Option<(f64, f64)>,
}

impl MemoryFit {
    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.family, self.alpha_in, self.memory_hat, 1.0, 1.0)
    }
}

/// Search range of the transformed memory parameter.
fn search_range(family: Family) -> (f64, f64) {
    match family {
        Family::Cauchy => (libm::log(1e-4), libm::log(50.0)),
        Family::PowerBss => (libm::log(1e-4), libm::log(50.0)),
        Family::GammaBss => (libm::log(1e-6), libm::log(50.0)),
    }
}

fn from_search(family: Family, u: f64) -> f64 {
    match family {
        Family::PowerBss => 0.5 + libm::exp(u),
        _ => libm::exp(u),
    }
}

pub const MOM_GRID_POINTS: usize = 25;

/// Match log ρ̂ to log(c ρ_model) over lags 1..=L with α fixed.
pub fn mom_fit(acf: &EmpiricalAcf, family: Family, alpha_in: f64, robust: bool) -> Result<MemoryFit> {
    mom_fit_with_grid(acf, family, alpha_in, robust, MOM_GRID_POINTS)
}

pub fn mom_fit_with_grid(acf_in: &EmpiricalAcf, family: Family, alpha_in: f64, robust: bool, grid: usize) -> Result<MemoryFit> {
    if !(alpha_in > -0.5 && alpha_in < 0.5) {
        return Err(invalid(alloc::format!("alpha = {alpha_in} outside (-0.5, 0.5)")));
    }
    let needed = if robust { 3 } else { 2 };
    if acf_in.max_lag() < needed {
        return Err(invalid(alloc::format!("at least {needed} lags are required")));
    }
    let mut lags = Vec::new();
    let mut ly = Vec::new();
    let mut dropped = Vec::new();
    for (k, r) in acf_in.lags.iter().zip(&acf_in.rho_hat) {
        if *r > 0.0 {
            lags.push(*k as f64);
            ly.push(libm::log(*r));
        } else {
            dropped.push(*k);
        }
    }
    if lags.len() < needed {
        return Err(Error::NonPositiveAcf { lag: dropped.first().copied().unwrap_or(1) });
    }
    let profile = |u: f64| -> (f64, f64) {
        let spec = ModelSpec { family, alpha: alpha_in, memory: from_search(family, u), variance: 1.0, xi: 1.0 };
        let lm: Vec<f64> = lags.iter().map(|h| libm::log(acf(&spec, *h))).collect();
        if lm.iter().any(|v| !v.is_finite()) {
            return (f64::INFINITY, 0.0);
        }
        let lc = if robust {
            (ly.iter().zip(&lm).map(|(a, b)| a - b).sum::<f64>() / lm.len() as f64).min(0.0)
        } else {
            0.0
        };
        let obj = ly.iter().zip(&lm).map(|(a, b)| sq(a - lc - b)).sum();
        (obj, lc)
    };
    let (lo, hi) = search_range(family);
    let r = grid_refine(|u| profile(u).0, lo, hi, grid, 1e-10);
    if !r.fx.is_finite() {
        return Err(Error::OptimizerNoConverge { best: from_search(family, r.x), grad_norm: f64::NAN });
    }
    let (obj, lc) = profile(r.x);
    let memory = from_search(family, r.x);
    let beta_equivalent = match family {
        Family::Cauchy => Some(memory),
        Family::PowerBss => power_gamma_to_beta(memory).ok(),
        Family::GammaBss => None,
    };
    Ok(MemoryFit {
        family,
        alpha_in,
        memory_hat: memory,
        noise_scale_c: libm::exp(lc),
        beta_equivalent,
        objective_value: obj,
        robust,
        dropped_lags: dropped,
        at_bound: r.at_bound,
        ci: None,
    })
}

/// Fitted and empirical ACF side by side.
pub fn fitted_acf(fit: &MemoryFit, acf_in: &EmpiricalAcf) -> Vec<(usize, f64, f64)> {
    let spec = ModelSpec { family: fit.family, alpha: fit.alpha_in, memory: fit.memory_hat, variance: 1.0, xi: 1.0 };
    acf_in
        .lags
        .iter()
        .zip(&acf_in.rho_hat)
        .map(|(k, r)| (*k, *r, fit.noise_scale_c * acf(&spec, *k as f64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryBootstrap {
    pub replications: usize,
    pub block_len: Option<usize>,
    pub seed: u64,
    pub level: f64,
}

impl Default for MemoryBootstrap {
    fn default() -> Self {
        MemoryBootstrap { replications: 199, block_len: None, seed: 0, level: 0.95 }
    }
}

/// Moving-block bootstrap of the series itself, α held fixed. Replicates whose fit fails are skipped.
pub fn mom_bootstrap_ci(
    z: &[f64],
    max_lag: usize,
    family: Family,
    alpha_in: f64,
    robust: bool,
    cfg: &MemoryBootstrap,
) -> Result<(f64, f64)> {
    if cfg.replications < 2 {
        return Err(invalid("at least two replications are required"));
    }
    let x: Vec<f64> = z.iter().copied().filter(|v| v.is_finite()).collect();
    let n = x.len();
    if n <= max_lag + 1 {
        return Err(Error::SeriesTooShort { needed: max_lag + 2, got: n });
    }
    let b = cfg.block_len.unwrap_or_else(|| default_block_len(n)).clamp(1, n);
    let mut est = Vec::with_capacity(cfg.replications);
    let mut y = vec![0.0; n];
    for rep in 0..cfg.replications {
        let mut rng = rng_stream(cfg.seed, rep as u64);
        let mut filled = 0;
        while filled < n {
            let s = rng.random_range(0..=n - b);
            let take = b.min(n - filled);
            y[filled..filled + take].copy_from_slice(&x[s..s + take]);
            filled += take;
        }
        if let Ok(f) = empirical_acf(&y, max_lag, None).and_then(|a| mom_fit(&a, family, alpha_in, robust)) {
            est.push(f.memory_hat);
        }
    }
    if est.len() < 2 {
        return Err(Error::Numerical("bootstrap replicates all failed".into()));
    }
    est.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - cfg.level);
    Ok((stats::quantile_sorted(&est, tail), stats::quantile_sorted(&est, 1.0 - tail)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(f: impl Fn(f64) -> f64, l: usize) -> EmpiricalAcf {
        EmpiricalAcf { lags: (1..=l).collect(), rho_hat: (1..=l).map(|k| f(k as f64)).collect(), n: 100_000 }
    }

    #[test]
    fn acf_of_constant_is_error() {
        assert_eq!(empirical_acf(&[2.0; 50], 3, None), Err(Error::ZeroVariance));
        assert!(matches!(empirical_acf(&[1.0, 2.0], 3, None), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn acf_alternating() {
        let z: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a = empirical_acf(&z, 4, None).unwrap();
        assert!((a.rho_hat[0] + 0.999).abs() < 1e-12);
        assert!((a.rho_hat[1] - 0.998).abs() < 1e-12);
    }

    #[test]
    fn ols_beta_exact_and_scaled() {
        let a = exact(|h| libm::pow(h, -0.25), 30);
        let f = ols_beta(&a, Some(2), Some(30)).unwrap();
        assert!((f.beta_hat - 0.25).abs() < 1e-12);
        let b = exact(|h| 0.5 * libm::pow(h, -0.25), 30);
        let g = ols_beta(&b, Some(2), Some(30)).unwrap();
        assert!((g.beta_hat - 0.25).abs() < 1e-12);
        let mut c = a.clone();
        c.rho_hat[4] = -0.1;
        assert_eq!(ols_beta(&c, Some(2), Some(30)), Err(Error::NonPositiveAcf { lag: 5 }));
    }

    #[test]
    fn mom_recovers_cauchy() {
        let spec = ModelSpec::cauchy(-0.3, 0.3).unwrap();
        let a = exact(|h| spec.acf(h), 24);
        let f = mom_fit(&a, Family::Cauchy, -0.3, false).unwrap();
        assert!((f.memory_hat - 0.3).abs() < 1e-6);
        assert_eq!(f.noise_scale_c, 1.0);
        let r = mom_fit(&a, Family::Cauchy, -0.3, true).unwrap();
        assert!((r.memory_hat - 0.3).abs() < 1e-6 && (r.noise_scale_c - 1.0).abs() < 1e-6);
        let d = exact(|h| 0.8 * spec.acf(h), 24);
        let r = mom_fit(&d, Family::Cauchy, -0.3, true).unwrap();
        assert!((r.memory_hat - 0.3).abs() < 1e-6);
        assert!((r.noise_scale_c - 0.8).abs() < 1e-6);
    }

    #[test]
    fn mom_recovers_bss() {
        let g = ModelSpec::gamma_bss(-0.34, 0.19).unwrap();
        let f = mom_fit(&exact(|h| g.acf(h), 10), Family::GammaBss, -0.34, false).unwrap();
        assert!((f.memory_hat - 0.19).abs() < 1e-6);
        assert_eq!(f.beta_equivalent, None);
        let p = ModelSpec::power_bss(-0.2, 1.4).unwrap();
        let f = mom_fit(&exact(|h| p.acf(h), 10), Family::PowerBss, -0.2, false).unwrap();
        assert!((f.memory_hat - 1.4).abs() < 1e-5, "{}", f.memory_hat);
        assert!((f.beta_equivalent.unwrap() - f.memory_hat).abs() < 1e-15);
    }

    #[test]
    fn mom_drops_negative_lags() {
        let spec = ModelSpec::cauchy(0.1, 0.5).unwrap();
        let mut a = exact(|h| spec.acf(h), 8);
        a.rho_hat[6] = -0.01;
        let f = mom_fit(&a, Family::Cauchy, 0.1, false).unwrap();
        assert_eq!(f.dropped_lags, vec![7]);
        assert!((f.memory_hat - 0.5).abs() < 1e-6);
        let bad = exact(|_| -0.1, 5);
        assert!(matches!(mom_fit(&bad, Family::Cauchy, 0.1, false), Err(Error::NonPositiveAcf { lag: 1 })));
    }
}
