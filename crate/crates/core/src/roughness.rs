//! Roughness index estimation from log-proxy variograms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::linalg::fit_line;
use crate::math::optim::grid_refine;
use crate::math::{rng_stream, sq, stats};

/// Empirical variogram of a series at lags 1..=m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variogram {
    pub lags: Vec<usize>,
    /// Grid spacing that converts a lag index into a time lag.
    pub delta: f64,
    pub values: Vec<f64>,
    pub pair_counts: Vec<usize>,
    /// Number of observations the variogram was computed from.
    pub n: usize,
}

impl Variogram {
    pub fn m(&self) -> usize {
        self.lags.len()
    }

    pub fn time_lags(&self) -> Vec<f64> {
        self.lags.iter().map(|k| *k as f64 * self.delta).collect()
    }
}

/// Index of the day each observation belongs to.
pub(crate) fn day_index(n: usize, boundaries: &[usize]) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut d = 0;
    for (i, o) in out.iter_mut().enumerate() {
        while d + 1 < boundaries.len() && boundaries[d + 1] <= i {
            d += 1;
        }
        *o = d;
    }
    out
}

/// γ̂(k) = mean of |z_{j+k} - z_j|² over valid pairs, k = 1..=m.
///
/// Non-finite entries mark missing cells. With `no_straddle`, pairs from different days
/// (as given by `day_boundaries`) are skipped.
pub fn empirical_variogram(z: &[f64], m: usize, delta: f64, day_boundaries: Option<&[usize]>) -> Result<Variogram> {
    if m < 2 {
        return Err(invalid("bandwidth must be at least 2"));
    }
    if z.len() <= m {
        return Err(Error::SeriesTooShort { needed: m + 1, got: z.len() });
    }
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    let days = day_boundaries.map(|b| day_index(z.len(), b));
    let mut values = Vec::with_capacity(m);
    let mut counts = Vec::with_capacity(m);
    for k in 1..=m {
        let (mut s, mut c) = (0.0, 0usize);
        for j in 0..z.len() - k {
            let (a, b) = (z[j], z[j + k]);
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            if let Some(d) = &days {
                if d[j] != d[j + k] {
                    continue;
                }
            }
            s += (b - a) * (b - a);
            c += 1;
        }
        if c == 0 {
            return Err(Error::SeriesTooShort { needed: m + 1, got: 0 });
        }
        values.push(s / c as f64);
        counts.push(c);
    }
    Ok(Variogram { lags: (1..=m).collect(), delta, values, pair_counts: counts, n: z.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoughnessMethod {
    Ols,
    Nlls,
}

impl fmt::Display for RoughnessMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoughnessMethod::Ols => "ols",
            RoughnessMethod::Nlls => "nlls",
        })
    }
}

impl FromStr for RoughnessMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(RoughnessMethod::Ols),
            "nlls" => Ok(RoughnessMethod::Nlls),
            o => Err(invalid(alloc::format!("unknown roughness method '{o}'"))),
        }
    }
}

/// Result of a roughness fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: RoughnessMethod,
    pub alpha_hat: f64,
    /// OLS: intercept of the log-log regression. NLLS: the noise floor â.
    pub intercept: f64,
    /// OLS: fitted slope. NLLS: 2α̂+1.
    pub slope: f64,
    /// NLLS scale ĉ of the power term.
    pub scale_hat: Option<f64>,
    /// NLLS â ≈ 2σ²_ε.
    pub noise_floor_hat: Option<f64>,
    pub bandwidth: usize,
    pub delta: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_effective: usize,
    pub objective: f64,
    /// α̂ was clamped to (or found at) the edge of the admissible range.
    pub at_bound: bool,
}

pub const ALPHA_LO: f64 = -0.499;
pub const ALPHA_HI: f64 = 0.499;

pub fn ols_alpha(vg: &Variogram) -> Result<FitReport> {
    if vg.m() < 2 {
        return Err(invalid("OLS needs at least two lags"));
    }
    if let Some(k) = vg.values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonPositiveVariogram { lag: vg.lags[k] });
    }
    let x: Vec<f64> = vg.time_lags().iter().map(|h| libm::log(*h)).collect();
    let y: Vec<f64> = vg.values.iter().map(|v| libm::log(*v)).collect();
    let (b, a) = fit_line(&x, &y);
    let raw = (a - 1.0) / 2.0;
    let alpha = raw.clamp(-0.5 + 1e-9, 0.5);
    let objective = x.iter().zip(&y).map(|(xi, yi)| sq(yi - b - a * xi)).sum();
    Ok(FitReport {
        method: RoughnessMethod::Ols,
        alpha_hat: alpha,
        intercept: b,
        slope: a,
        scale_hat: None,
        noise_floor_hat: None,
        bandwidth: vg.m(),
        delta: vg.delta,
        ci_low: None,
        ci_high: None,
        n_effective: vg.n,
        objective,
        at_bound: alpha != raw,
    })
}

/// Best (a, c) for fixed α within the box, with its residual sum of squares.
fn profile_ac(g: &[f64], x: &[f64], a_max: f64, c_max: f64) -> (f64, f64, f64) {
    let n = g.len() as f64;
    let rss = |a: f64, c: f64| g.iter().zip(x).map(|(gi, xi)| sq(gi - a - c * xi)).sum::<f64>();
    let c_min = 1e-15 * c_max;
    let sx: f64 = x.iter().sum();
    let sg: f64 = g.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxg: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    if det.abs() > 1e-300 {
        let c = (n * sxg - sx * sg) / det;
        let a = (sg - c * sx) / n;
        if a >= 0.0 && a <= a_max && c >= c_min && c <= c_max {
            return (a, c, rss(a, c));
        }
    }
    let mut best = (0.0, c_min, f64::INFINITY);
    let mut consider = |a: f64, c: f64| {
        let r = rss(a, c);
        if r < best.2 {
            best = (a, c, r);
        }
    };
    for a in [0.0, a_max] {
        let c = (g.iter().zip(x).map(|(gi, xi)| (gi - a) * xi).sum::<f64>() / sxx).clamp(c_min, c_max);
        consider(a, c);
    }
    for c in [c_min, c_max] {
        let a = ((sg - c * sx) / n).clamp(0.0, a_max);
        consider(a, c);
    }
    best
}

/// Noise-robust fit of γ̂(h) = a + c h^{2α+1}, profiling (a, c) for each α.
pub fn nlls_alpha(vg: &Variogram, init: Option<f64>) -> Result<FitReport> {
    if vg.m() < 3 {
        return Err(invalid("NLLS needs a bandwidth of at least three"));
    }
    let h = vg.time_lags();
    let g = &vg.values;
    let gmax = g.iter().cloned().fold(0.0, f64::max);
    if !(gmax > 0.0) {
        return Err(Error::NonPositiveVariogram { lag: 1 });
    }
    let a_max = 10.0 * gmax;
    let xs = |alpha: f64| -> Vec<f64> { h.iter().map(|hk| libm::pow(*hk, 2.0 * alpha + 1.0)).collect() };
    let objective = |alpha: f64| {
        let x = xs(alpha);
        let xmin = x.iter().cloned().fold(f64::INFINITY, f64::min);
        profile_ac(g, &x, a_max, 10.0 * gmax / xmin).2
    };
    let mut r = grid_refine(objective, ALPHA_LO, ALPHA_HI, 21, 1e-10);
    if let Some(a0) = init {
        if a0 > ALPHA_LO && a0 < ALPHA_HI {
            let lo = (a0 - 0.05).max(ALPHA_LO);
            let hi = (a0 + 0.05).min(ALPHA_HI);
            let local = grid_refine(objective, lo, hi, 5, 1e-10);
            if local.fx < r.fx {
                r = local;
            }
        }
    }
    if !r.fx.is_finite() {
        return Err(Error::OptimizerNoConverge { best: r.x, grad_norm: f64::NAN });
    }
    let x = xs(r.x);
    let xmin = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let (a, c, rss) = profile_ac(g, &x, a_max, 10.0 * gmax / xmin);
    Ok(FitReport {
        method: RoughnessMethod::Nlls,
        alpha_hat: r.x,
        intercept: a,
        slope: 2.0 * r.x + 1.0,
        scale_hat: Some(c),
        noise_floor_hat: Some(a),
        bandwidth: vg.m(),
        delta: vg.delta,
        ci_low: None,
        ci_high: None,
        n_effective: vg.n,
        objective: rss,
        at_bound: r.x <= ALPHA_LO + 1e-6 || r.x >= ALPHA_HI - 1e-6,
    })
}

pub fn fit_alpha(vg: &Variogram, method: RoughnessMethod) -> Result<FitReport> {
    match method {
        RoughnessMethod::Ols => ols_alpha(vg),
        RoughnessMethod::Nlls => nlls_alpha(vg, None),
    }
}

/// Default moving-block length ⌈n^{1/3}⌉.
pub fn default_block_len(n: usize) -> usize {
    (libm::ceil(libm::cbrt(n as f64)) as usize).max(1)
}

/// Moving-block bootstrap of the increments, recumulated into paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub block_len: Option<usize>,
    pub seed: u64,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { replications: 999, block_len: None, seed: 0, level: 0.95 }
    }
}

/// Percentile bootstrap interval for α̂.
pub fn bootstrap_ci(z: &[f64], m: usize, delta: f64, method: RoughnessMethod, cfg: &BootstrapConfig) -> Result<(f64, f64)> {
    if cfg.replications < 100 {
        return Err(invalid("at least 100 bootstrap replications are required"));
    }
    let inc: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).filter(|d| d.is_finite()).collect();
    if inc.len() <= m + 1 {
        return Err(Error::SeriesTooShort { needed: m + 2, got: inc.len() });
    }
    let n = inc.len();
    let b = cfg.block_len.unwrap_or_else(|| default_block_len(n)).clamp(1, n);
    let mut est = Vec::with_capacity(cfg.replications);
    let mut path = vec![0.0; n + 1];
    for rep in 0..cfg.replications {
        let mut rng = rng_stream(cfg.seed, rep as u64);
        let mut filled = 0;
        while filled < n {
            let start = rng.random_range(0..=n - b);
            for d in &inc[start..start + b] {
                if filled == n {
                    break;
                }
                path[filled + 1] = path[filled] + d;
                filled += 1;
            }
        }
        let vg = empirical_variogram(&path, m, delta, None)?;
        est.push(fit_alpha(&vg, method)?.alpha_hat);
    }
    est.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - cfg.level);
    Ok((stats::quantile_sorted(&est, tail), stats::quantile_sorted(&est, 1.0 - tail)))
}

/// Rolling OLS α̂ over windows of whole days, stepping one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingAlpha {
    /// First day index of each window.
    pub start_day: Vec<usize>,
    pub alpha: Vec<f64>,
    pub smoothed: Vec<f64>,
}

pub const ROLLING_SMOOTH_HALF_WIDTH: usize = 75;

pub fn rolling_alpha(z: &[f64], cells_per_day: usize, window_days: usize, m: usize, delta: f64) -> Result<RollingAlpha> {
    if cells_per_day == 0 || window_days == 0 {
        return Err(invalid("window and cells per day must be positive"));
    }
    let days = z.len() / cells_per_day;
    if days < window_days {
        return Err(Error::SeriesTooShort { needed: window_days * cells_per_day, got: z.len() });
    }
    let mut start_day = Vec::new();
    let mut alpha = Vec::new();
    for d in 0..=days - window_days {
        let seg = &z[d * cells_per_day..(d + window_days) * cells_per_day];
        let a = empirical_variogram(seg, m, delta, None)
            .and_then(|vg| ols_alpha(&vg))
            .map(|f| f.alpha_hat)
            .unwrap_or(f64::NAN);
        start_day.push(d);
        alpha.push(a);
    }
    let smoothed = moving_average(&alpha, ROLLING_SMOOTH_HALF_WIDTH);
    Ok(RollingAlpha { start_day, alpha, smoothed })
}

/// Centered moving average over the finite values within `half` positions on each side.
pub fn moving_average(x: &[f64], half: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            let v: Vec<f64> = x[lo..hi].iter().copied().filter(|v| v.is_finite()).collect();
            if v.is_empty() {
                f64::NAN
            } else {
                stats::mean(&v)
            }
        })
        .collect()
}
