//! Benchmark forecasters: RFSV, intraday log-HAR, AR(p) and random walk.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::math::linalg::least_squares;
use crate::math::quad::{integrate, Tolerance};
use crate::math::special::gamma;

/// Weights on log σ² at lags 0, 1, ..., n-1 (most recent first) for an h-step RFSV forecast.
pub fn rfsv_weights(hurst: f64, h: usize, n: usize) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 0.5) {
        return Err(domain(alloc::format!("H = {hurst} outside (0, 0.5)")));
    }
    if h == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    let a = hurst + 0.5;
    let hf = h as f64;
    let pre = libm::cos(hurst * PI) / PI * libm::pow(hf, a);
    let tol = Tolerance::relative(1e-12);
    let e = 1.0 / (0.5 - hurst);
    let mut w = Vec::with_capacity(n);
    for j in 1..=n {
        let v = if j == 1 {
            e * integrate(|s| 1.0 / (libm::pow(s, e) + hf), 0.0, 1.0, tol).value
        } else {
            let lo = (j - 1) as f64;
            integrate(|v| 1.0 / ((v + hf) * libm::pow(v, a)), lo, lo + 1.0, tol).value
        };
        w.push(pre * v);
    }
    Ok(w)
}

/// h-step forecast of log σ² from a chronological log-variance history (last = time t).
pub fn rfsv_forecast(history: &[f64], hurst: f64, h: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }
    let w = rfsv_weights(hurst, h, history.len())?;
    Ok(w.iter().zip(history.iter().rev()).map(|(a, b)| a * b).sum())
}

/// Variance term added to the RFSV log forecast before exponentiating: 2cν²(hΔ)^{2H}, with ν²
/// the log-volatility variogram scale, so that E|log σ_{t+s} - log σ_t|² ≈ ν² s^{2H}.
pub fn rfsv_variance_correction(hurst: f64, nu2: f64, horizon_time: f64) -> f64 {
    let c = gamma(1.5 - hurst) / (gamma(hurst + 0.5) * gamma(2.0 - 2.0 * hurst));
    2.0 * c * nu2 * libm::pow(horizon_time, 2.0 * hurst)
}

/// Aggregation lengths (day, week, month) in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarLags {
    pub day: usize,
    pub week: usize,
    pub month: usize,
}

pub const WEEK_DAYS: usize = 5;
pub const MONTH_DAYS: usize = 22;

impl HarLags {
    pub fn for_cells_per_day(cpd: usize) -> Self {
        HarLags { day: cpd, week: WEEK_DAYS * cpd, month: MONTH_DAYS * cpd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarFit {
    /// (a0, a1 level, a2 day, a3 week, a4 month); collinear columns carry 0.
    pub coef: Vec<f64>,
    pub dropped: Vec<bool>,
    pub residual_variance: f64,
    pub log_forecast: f64,
    /// exp(log_forecast + residual_variance / 2).
    pub forecast: f64,
}

fn har_row(prefix: &[f64], s: usize, lags: &HarLags) -> [f64; 5] {
    let avg = |q: usize| libm::log((prefix[s + 1] - prefix[s + 1 - q]) / q as f64);
    [1.0, libm::log((prefix[s + 1] - prefix[s]).max(f64::MIN_POSITIVE)), avg(lags.day), avg(lags.week), avg(lags.month)]
}

/// Number of observations needed to fit a direct h-step log-HAR on `window` rows.
pub fn har_required(h: usize, window: usize, lags: &HarLags) -> usize {
    window + h + lags.month - 1
}

/// Direct h-step log-HAR on positive variance proxies `v` (last = time t), using the most recent
/// `window` regression rows.
pub fn log_har_fit_forecast(v: &[f64], h: usize, window: usize, lags: &HarLags) -> Result<HarFit> {
    if h == 0 || window < 2 || lags.day == 0 || lags.week < lags.day || lags.month < lags.week {
        return Err(invalid("invalid log-HAR configuration"));
    }
    let need = har_required(h, window, lags);
    if v.len() < need {
        return Err(Error::SeriesTooShort { needed: need, got: v.len() });
    }
    let v = &v[v.len() - need..];
    if let Some(i) = v.iter().position(|x| !(*x > 0.0)) {
        return Err(domain(alloc::format!("non-positive proxy at offset {i}")));
    }
    let mut prefix = Vec::with_capacity(v.len() + 1);
    prefix.push(0.0);
    for x in v {
        prefix.push(prefix.last().unwrap() + x);
    }
    let t = v.len() - 1;
    let mut x = Vec::with_capacity(window * 5);
    let mut y = Vec::with_capacity(window);
    for s in t + 1 - h - window..=t - h {
        x.extend_from_slice(&har_row(&prefix, s, lags));
        y.push(libm::log(v[s + h]));
    }
    let fit = least_squares(&x, &y, 5)?;
    let r = har_row(&prefix, t, lags);
    let lf: f64 = r.iter().zip(&fit.coef).map(|(a, b)| a * b).sum();
    let s2 = fit.sigma2();
    Ok(HarFit { coef: fit.coef, dropped: fit.dropped, residual_variance: s2, log_forecast: lf, forecast: libm::exp(lf + 0.5 * s2) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArForecast {
    /// (intercept, φ_1, ..., φ_p).
    pub coef: Vec<f64>,
    /// Iterated forecasts for steps 1..=h.
    pub path: Vec<f64>,
}

/// AR(p) with intercept fitted by OLS on the last `window` observations of `z`, iterated h steps.
pub fn ar_forecast(z: &[f64], p: usize, h: usize, window: usize) -> Result<ArForecast> {
    if p == 0 || h == 0 {
        return Err(invalid("AR order and horizon must be positive"));
    }
    if window < p + 2 || z.len() < window {
        return Err(Error::SeriesTooShort { needed: window.max(p + 2), got: z.len() });
    }
    let w = &z[z.len() - window..];
    let mut x = Vec::with_capacity((window - p) * (p + 1));
    let mut y = Vec::with_capacity(window - p);
    for s in p..window {
        x.push(1.0);
        for l in 1..=p {
            x.push(w[s - l]);
        }
        y.push(w[s]);
    }
    let fit = least_squares(&x, &y, p + 1)?;
    let mut state: Vec<f64> = w[window - p..].to_vec();
    let mut path = Vec::with_capacity(h);
    for _ in 0..h {
        let next = fit.coef[0] + (1..=p).map(|l| fit.coef[l] * state[state.len() - l]).sum::<f64>();
        path.push(next);
        state.push(next);
    }
    Ok(ArForecast { coef: fit.coef, path })
}

/// Random walk: the last value, for every step.
pub fn rw_forecast(z: &[f64], h: usize) -> Result<Vec<f64>> {
    match z.last() {
        Some(v) => Ok(alloc::vec![*v; h]),
        None => Err(Error::SeriesTooShort { needed: 1, got: 0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_weight_closed_form() {
        let w = rfsv_weights(0.14, 1, 1).unwrap();
        assert!((w[0] - 0.661314450114733201).abs() < 1e-11);
        let w = rfsv_weights(0.3, 5, 1).unwrap();
        assert!((w[0] - 0.657593858810895638).abs() < 1e-11);
        assert!((rfsv_forecast(&[2.0], 0.14, 1).unwrap() - 2.0 * 0.661314450114733201).abs() < 1e-10);
    }

    #[test]
    fn weights_match_riemann_sums() {
        let (hh, h) = (0.2, 2usize);
        let w = rfsv_weights(hh, h, 6).unwrap();
        let a = hh + 0.5;
        let pre = libm::cos(hh * PI) / PI * libm::pow(h as f64, a);
        for j in 2..=6 {
            let n = 200_000;
            let lo = (j - 1) as f64;
            let s: f64 = (0..n)
                .map(|i| {
                    let v = lo + (i as f64 + 0.5) / n as f64;
                    1.0 / ((v + h as f64) * libm::pow(v, a))
                })
                .sum::<f64>()
                / n as f64;
            assert!((w[j - 1] - pre * s).abs() < 1e-9, "{j}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let w = rfsv_weights(0.14, 1, 10_000).unwrap();
        let s: f64 = w.iter().sum();
        assert!(s < 1.0 && s > 0.99, "{s}");
        let c = -3.0;
        let f = rfsv_forecast(&alloc::vec![c; 10_000], 0.14, 1).unwrap();
        assert!((f - c).abs() < 0.01 * c.abs());
        assert!(rfsv_weights(0.5, 1, 3).is_err());
    }

    #[test]
    fn har_lag_counts() {
        let l = HarLags::for_cells_per_day(6);
        assert_eq!((l.day, l.week, l.month), (6, 30, 132));
    }

    #[test]
    fn har_constant_series() {
        let l = HarLags::for_cells_per_day(2);
        let v = alloc::vec![0.04; 200];
        let f = log_har_fit_forecast(&v, 3, 50, &l).unwrap();
        assert!((f.forecast - 0.04).abs() < 1e-14);
        assert_eq!(f.dropped, [false, true, true, true, true]);
    }

    #[test]
    fn ar_recovers_exact_recursion() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::math::rng_stream(7, 0);
        let mut z = alloc::vec![1.25];
        for i in 1..5000 {
            let e: f64 = StandardNormal.sample(&mut rng);
            z.push(0.5 + 0.6 * z[i - 1] + 0.1 * e);
        }
        let f = ar_forecast(&z, 1, 3, 5000).unwrap();
        assert!((f.coef[1] - 0.6).abs() < 0.05, "{:?}", f.coef);
        let x = *z.last().unwrap();
        assert!((f.path[0] - (f.coef[0] + f.coef[1] * x)).abs() < 1e-12);
        assert!((f.path[1] - (f.coef[0] + f.coef[1] * f.path[0])).abs() < 1e-12);
        assert_eq!(rw_forecast(&z, 2).unwrap(), alloc::vec![x, x]);
    }
}
