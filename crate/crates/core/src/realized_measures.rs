//! Pre-averaged realized measures, spot-variance proxies and intraday seasonality.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::market_data::TickSeries;
use crate::math::linalg::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreAvgConfig {
    pub theta: f64,
    pub k_override: Option<usize>,
}

impl Default for PreAvgConfig {
    fn default() -> Self {
        PreAvgConfig { theta: 1.0, k_override: None }
    }
}

impl PreAvgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(invalid("theta must be positive"));
        }
        if let Some(k) = self.k_override {
            if k < 2 || k % 2 != 0 {
                return Err(invalid("k_override must be even and at least 2"));
            }
        }
        Ok(())
    }

    /// Pre-averaging window K for N returns.
    pub fn window_len(&self, n: usize) -> usize {
        if let Some(k) = self.k_override {
            return k;
        }
        let k = (libm::floor(self.theta * libm::sqrt(n as f64)) as usize).max(1);
        if k % 2 == 0 {
            k
        } else {
            k + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "rv")]
    RvStar,
    #[serde(rename = "bv")]
    BvStar,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::RvStar => "rv",
            Estimator::BvStar => "bv",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rv" | "rv*" | "rvstar" => Ok(Estimator::RvStar),
            "bv" | "bv*" | "bvstar" => Ok(Estimator::BvStar),
            o => Err(invalid(format!("unknown estimator '{o}'"))),
        }
    }
}

pub fn psi_k(k: usize) -> f64 {
    let k = k as f64;
    (1.0 + 2.0 / (k * k)) / 12.0
}

/// Pre-averaged returns of the log prices `z` (N+1 observations) with window `k`.
///
/// Produces the N-K+2 values r*_j, j = 0..=N-K+1.
pub fn pre_average(z: &[f64], k: usize) -> Vec<f64> {
    let half = k / 2;
    if z.len() < k {
        return Vec::new();
    }
    let count = z.len() - k + 1;
    // Running sums keep this O(N).
    let mut lower: f64 = z[..half].iter().sum();
    let mut upper: f64 = z[half..k].iter().sum();
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        out.push((upper - lower) / k as f64);
        if j + 1 < count {
            lower += z[j + half] - z[j];
            upper += z[j + k] - z[j + half];
        }
    }
    out
}

pub fn pre_averaged_returns(day: &TickSeries, window: (f64, f64), cfg: &PreAvgConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let r = day.window(window.0, window.1);
    let z = &day.log_prices[r];
    if z.len() < 4 {
        return Err(Error::TooFewTicks { needed: 4, got: z.len() });
    }
    let k = cfg.window_len(z.len() - 1);
    if k > z.len() - 1 {
        return Err(Error::TooFewTicks { needed: k + 1, got: z.len() });
    }
    Ok(pre_average(z, k))
}

/// First-order autocovariance noise-variance estimator over a whole day.
pub fn noise_variance_ac(day: &TickSeries) -> Result<f64> {
    noise_variance_ac_prices(&day.log_prices)
}

pub fn noise_variance_ac_prices(z: &[f64]) -> Result<f64> {
    if z.len() < 3 {
        return Err(Error::TooFewTicks { needed: 3, got: z.len() });
    }
    let n = z.len() - 1;
    let mut s = 0.0;
    for i in 2..=n {
        s += (z[i] - z[i - 1]) * (z[i - 1] - z[i - 2]);
    }
    Ok((-s / (n - 1) as f64).max(0.0))
}

/// Interval IV estimate and whether bias correction drove it negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvEstimate {
    pub value: f64,
    pub negative: bool,
    pub k: usize,
    pub n_returns: usize,
}

/// Noise-robust RV* / BV* over a tick window, with a given noise variance.
pub fn preavg_iv_with_noise(z: &[f64], cfg: &PreAvgConfig, estimator: Estimator, omega2: f64) -> Result<IvEstimate> {
    cfg.validate()?;
    if z.len() < 4 {
        return Err(Error::TooFewTicks { needed: 4, got: z.len() });
    }
    let n = z.len() - 1;
    let k = cfg.window_len(n);
    let needed = match estimator {
        Estimator::RvStar => k,
        Estimator::BvStar => 2 * k,
    };
    if n < needed {
        return Err(Error::TooFewTicks { needed: needed + 1, got: z.len() });
    }
    let r = pre_average(z, k);
    let psi = psi_k(k);
    let kf = k as f64;
    let nf = n as f64;
    let bias = omega2 / (cfg.theta * cfg.theta * psi);
    let raw = match estimator {
        Estimator::RvStar => {
            let s: f64 = r.iter().map(|x| x * x).sum();
            nf / (nf - kf + 2.0) / (kf * psi) * s
        }
        Estimator::BvStar => {
            let s: f64 = r.iter().zip(&r[k..]).map(|(a, b)| a.abs() * b.abs()).sum();
            nf / (nf - 2.0 * kf + 2.0) / (kf * psi) * (PI / 2.0) * s
        }
    };
    let value = raw - bias;
    Ok(IvEstimate { value, negative: value < 0.0, k, n_returns: n })
}

/// RV* / BV* on `window`, with the noise variance estimated from the whole day.
pub fn preavg_iv(day: &TickSeries, window: (f64, f64), cfg: &PreAvgConfig, estimator: Estimator) -> Result<IvEstimate> {
    let omega2 = noise_variance_ac(day)?;
    let r = day.window(window.0, window.1);
    preavg_iv_with_noise(&day.log_prices[r], cfg, estimator, omega2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFlag {
    Ok,
    /// Negative bias-corrected estimate replaced by the day's smallest positive value.
    NegativeImputed,
    /// Not enough ticks in the cell.
    Missing,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::NegativeImputed => "negative-imputed",
            CellFlag::Missing => "missing",
        }
    }
}

impl FromStr for CellFlag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(CellFlag::Ok),
            "negative-imputed" => Ok(CellFlag::NegativeImputed),
            "missing" => Ok(CellFlag::Missing),
            o => Err(invalid(format!("unknown cell flag '{o}'"))),
        }
    }
}

/// Equidistant spot-variance proxies on a Δ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxySeries {
    pub delta_s: f64,
    pub session_length: f64,
    pub cells_per_day: usize,
    pub days: Vec<NaiveDate>,
    /// De-seasonalized spot variance per second; NaN where missing.
    pub values: Vec<f64>,
    /// Interval IV estimates; NaN where missing.
    pub iv_values: Vec<f64>,
    pub seasonal_factors: Vec<f64>,
    pub day_boundaries: Vec<usize>,
    pub estimator: Estimator,
    pub flags: Vec<CellFlag>,
    pub fourier_order: usize,
}

impl ProxySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Log proxies with NaN for missing cells.
    pub fn log_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| if *v > 0.0 { libm::log(*v) } else { f64::NAN }).collect()
    }

    pub fn negative_count(&self) -> usize {
        self.flags.iter().filter(|f| **f == CellFlag::NegativeImputed).count()
    }

    pub fn missing_count(&self) -> usize {
        self.flags.iter().filter(|f| **f == CellFlag::Missing).count()
    }

    /// Proxy built directly from interval IV values (e.g. simulated), with unit seasonality.
    pub fn from_iv(
        iv_values: Vec<f64>,
        delta_s: f64,
        cells_per_day: usize,
        days: Vec<NaiveDate>,
        estimator: Estimator,
    ) -> Result<Self> {
        if cells_per_day == 0 || iv_values.len() != cells_per_day * days.len() {
            return Err(invalid("iv length must equal cells_per_day * days"));
        }
        let n = iv_values.len();
        let flags = iv_values.iter().map(|v| if v.is_finite() { CellFlag::Ok } else { CellFlag::Missing }).collect();
        Ok(ProxySeries {
            delta_s,
            session_length: delta_s * cells_per_day as f64,
            cells_per_day,
            values: iv_values.iter().map(|v| v / delta_s).collect(),
            iv_values,
            seasonal_factors: vec![1.0; n],
            day_boundaries: (0..days.len()).map(|d| d * cells_per_day).collect(),
            days,
            estimator,
            flags,
            fourier_order: 0,
        })
    }

    /// Recompute `values` and `seasonal_factors` from `iv_values` with a per-cell profile.
    pub fn apply_seasonality(&mut self, per_cell: &[f64]) {
        let c = self.cells_per_day;
        for i in 0..self.iv_values.len() {
            let f = per_cell[i % c];
            self.seasonal_factors[i] = f;
            self.values[i] = self.iv_values[i] / (self.delta_s * f);
        }
    }
}

/// Number of cells per day, checking that Δ divides the session.
pub fn cells_per_day(session_length: f64, delta_s: f64) -> Result<usize> {
    if !(delta_s > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    let c = libm::round(session_length / delta_s);
    if c < 1.0 || (c * delta_s - session_length).abs() > 1e-6 * session_length {
        return Err(invalid(format!("delta {delta_s}s does not divide the session length {session_length}s")));
    }
    Ok(c as usize)
}

pub fn build_proxy(days: &[TickSeries], delta_s: f64, cfg: &PreAvgConfig, estimator: Estimator) -> Result<ProxySeries> {
    build_proxy_with_order(days, delta_s, cfg, estimator, DEFAULT_FOURIER_ORDER)
}

pub fn build_proxy_with_order(
    days: &[TickSeries],
    delta_s: f64,
    cfg: &PreAvgConfig,
    estimator: Estimator,
    fourier_order: usize,
) -> Result<ProxySeries> {
    cfg.validate()?;
    if days.is_empty() {
        return Err(invalid("no days supplied"));
    }
    let session = days[0].session_length;
    if days.iter().any(|d| d.session_length != session) {
        return Err(invalid("days have different session lengths"));
    }
    let cpd = cells_per_day(session, delta_s)?;
    let mut iv = Vec::with_capacity(cpd * days.len());
    let mut flags = Vec::with_capacity(cpd * days.len());
    for day in days {
        let omega2 = noise_variance_ac(day).unwrap_or(0.0);
        let start = iv.len();
        for c in 0..cpd {
            let r = day.window(c as f64 * delta_s, (c + 1) as f64 * delta_s);
            match preavg_iv_with_noise(&day.log_prices[r], cfg, estimator, omega2) {
                Ok(e) if e.value > 0.0 => {
                    iv.push(e.value);
                    flags.push(CellFlag::Ok);
                }
                Ok(_) => {
                    iv.push(f64::NAN);
                    flags.push(CellFlag::NegativeImputed);
                }
                Err(Error::TooFewTicks { .. }) => {
                    iv.push(f64::NAN);
                    flags.push(CellFlag::Missing);
                }
                Err(e) => return Err(e),
            }
        }
        let floor = iv[start..].iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        for i in start..iv.len() {
            if flags[i] == CellFlag::NegativeImputed {
                if floor.is_finite() {
                    iv[i] = floor;
                } else {
                    flags[i] = CellFlag::Missing;
                }
            }
        }
    }
    let mut proxy = ProxySeries {
        delta_s,
        session_length: session,
        cells_per_day: cpd,
        days: days.iter().map(|d| d.day).collect(),
        values: vec![f64::NAN; iv.len()],
        seasonal_factors: vec![1.0; iv.len()],
        iv_values: iv,
        day_boundaries: (0..days.len()).map(|d| d * cpd).collect(),
        estimator,
        flags,
        fourier_order: 0,
    };
    let fit = if days.len() >= 2 {
        fit_seasonal_from_iv(&proxy.iv_values, cpd, delta_s, fourier_order)?
    } else {
        SeasonalFit { factors: vec![1.0; cpd], fourier_order: 0, degenerate: true }
    };
    proxy.fourier_order = fit.fourier_order;
    proxy.apply_seasonality(&fit.factors);
    Ok(proxy)
}

pub const DEFAULT_FOURIER_ORDER: usize = 4;

/// Intraday seasonal profile on the cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalFit {
    /// Multiplicative factor per intraday cell, geometric mean one.
    pub factors: Vec<f64>,
    /// Fourier order actually used after rank reduction.
    pub fourier_order: usize,
    /// True when no regression could be fitted and factors are all one.
    pub degenerate: bool,
}

fn fff_row(tau: f64, poly: usize, k: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(1 + poly + 2 * k);
    row.push(1.0);
    if poly >= 1 {
        row.push(tau);
    }
    if poly >= 2 {
        row.push(tau * tau);
    }
    for j in 1..=k {
        let a = 2.0 * PI * j as f64 * tau;
        row.push(libm::cos(a));
        row.push(libm::sin(a));
    }
    row
}

/// Flexible Fourier form fit of log proxies grouped by intraday cell.
///
/// `by_cell[c]` holds the log proxies observed in cell `c` across days.
pub fn fit_fff_seasonality(by_cell: &[Vec<f64>], fourier_order: usize) -> Result<SeasonalFit> {
    let cpd = by_cell.len();
    let days = by_cell.iter().map(|v| v.len()).max().unwrap_or(0);
    if days < 2 {
        return Err(Error::RankDeficient("seasonality needs at least two days".into()));
    }
    if cpd < 2 {
        return Ok(SeasonalFit { factors: vec![1.0; cpd], fourier_order: 0, degenerate: true });
    }
    let taus: Vec<f64> = (0..cpd).map(|c| (c as f64 + 0.5) / cpd as f64).collect();
    let mut candidates: Vec<(usize, usize)> = (0..=fourier_order).rev().map(|k| (2, k)).collect();
    candidates.push((1, 0));
    for (poly, k) in candidates {
        let p = 1 + poly + 2 * k;
        if p > cpd {
            continue;
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, vals) in by_cell.iter().enumerate() {
            let row = fff_row(taus[c], poly, k);
            for v in vals.iter().filter(|v| v.is_finite()) {
                x.extend_from_slice(&row);
                y.push(*v);
            }
        }
        let fit = least_squares(&x, &y, p)?;
        if fit.dropped.iter().any(|d| *d) {
            continue;
        }
        let fitted: Vec<f64> = taus
            .iter()
            .map(|&t| fff_row(t, poly, k).iter().zip(&fit.coef).map(|(a, b)| a * b).sum())
            .collect();
        let m = fitted.iter().sum::<f64>() / cpd as f64;
        let factors = fitted.iter().map(|f| libm::exp(f - m)).collect();
        return Ok(SeasonalFit { factors, fourier_order: k, degenerate: false });
    }
    Ok(SeasonalFit { factors: vec![1.0; cpd], fourier_order: 0, degenerate: true })
}

/// Seasonal profile from interval IV values laid out day after day.
pub fn fit_seasonal_from_iv(iv: &[f64], cpd: usize, delta_s: f64, fourier_order: usize) -> Result<SeasonalFit> {
    let mut by_cell: Vec<Vec<f64>> = vec![Vec::new(); cpd];
    for (i, v) in iv.iter().enumerate() {
        if *v > 0.0 && v.is_finite() {
            by_cell[i % cpd].push(libm::log(v / delta_s));
        }
    }
    fit_fff_seasonality(&by_cell, fourier_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_rounding() {
        let c = PreAvgConfig::default();
        assert_eq!(c.window_len(100), 10);
        assert_eq!(c.window_len(99), 10);
        assert_eq!(c.window_len(81), 10);
        assert_eq!(c.window_len(64), 8);
        assert!(PreAvgConfig { theta: 1.0, k_override: Some(3) }.validate().is_err());
    }

    #[test]
    fn linear_price_gives_constant_returns() {
        let c = 0.37;
        let z: Vec<f64> = (0..=8).map(|i| c * i as f64).collect();
        let r = pre_average(&z, 4);
        assert_eq!(r.len(), 8 - 4 + 2);
        for v in r {
            assert!((v - c).abs() < 1e-14);
        }
        assert!(pre_average(&[1.5; 9], 4).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pre_average_matches_definition() {
        let z: Vec<f64> = (0..30).map(|i| libm::sin(i as f64 * 0.9) + 0.01 * (i * i) as f64).collect();
        let k = 6;
        let r = pre_average(&z, k);
        for (j, v) in r.iter().enumerate() {
            let up: f64 = (k / 2..k).map(|i| z[j + i]).sum();
            let lo: f64 = (0..k / 2).map(|i| z[j + i]).sum();
            assert!((v - (up - lo) / k as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn noise_estimator_edge_cases() {
        assert!(matches!(noise_variance_ac_prices(&[0.0, 1.0]), Err(Error::TooFewTicks { .. })));
        let z: Vec<f64> = (0..50).map(|i| 0.001 * i as f64).collect();
        assert_eq!(noise_variance_ac_prices(&z).unwrap(), 0.0);
    }

    #[test]
    fn constant_price_zero_iv() {
        let z = [2.0; 40];
        let e = preavg_iv_with_noise(&z, &PreAvgConfig::default(), Estimator::BvStar, 0.0).unwrap();
        assert_eq!(e.value, 0.0);
        let short = [2.0; 4];
        assert!(matches!(
            preavg_iv_with_noise(&short, &PreAvgConfig::default(), Estimator::BvStar, 0.0),
            Err(Error::TooFewTicks { .. })
        ));
    }

    #[test]
    fn fff_flat_and_exact_cosine() {
        let cpd = 26;
        let flat: Vec<Vec<f64>> = (0..cpd).map(|_| vec![-3.0; 5]).collect();
        let f = fit_fff_seasonality(&flat, 4).unwrap();
        assert!(f.factors.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let cos: Vec<Vec<f64>> = (0..cpd)
            .map(|c| vec![1.0 + libm::cos(2.0 * PI * (c as f64 + 0.5) / cpd as f64); 3])
            .collect();
        let f = fit_fff_seasonality(&cos, 4).unwrap();
        assert_eq!(f.fourier_order, 4);
        let m: f64 = (0..cpd).map(|c| libm::cos(2.0 * PI * (c as f64 + 0.5) / cpd as f64)).sum::<f64>() / cpd as f64;
        for c in 0..cpd {
            let want = libm::exp(libm::cos(2.0 * PI * (c as f64 + 0.5) / cpd as f64) - m);
            assert!((f.factors[c] - want).abs() < 1e-6);
        }
        let gm: f64 = f.factors.iter().map(|v| libm::log(*v)).sum::<f64>();
        assert!(gm.abs() < 1e-10);
    }

    #[test]
    fn fff_reduces_order_and_rejects_single_day() {
        let few: Vec<Vec<f64>> = (0..6).map(|c| vec![c as f64 * 0.1; 4]).collect();
        let f = fit_fff_seasonality(&few, 4).unwrap();
        assert!(f.fourier_order < 4 && !f.degenerate);
        let one: Vec<Vec<f64>> = (0..26).map(|_| vec![0.0]).collect();
        assert!(matches!(fit_fff_seasonality(&one, 4), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn delta_must_divide_session() {
        assert_eq!(cells_per_day(23_400.0, 900.0).unwrap(), 26);
        assert_eq!(cells_per_day(23_400.0, 3900.0).unwrap(), 6);
        assert!(cells_per_day(23_400.0, 700.0).is_err());
    }
}
