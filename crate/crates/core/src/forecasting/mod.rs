//! Volatility forecasting and the rolling out-of-sample engine.

mod benchmarks;
mod gaussian;

pub use benchmarks::*;
pub use gaussian::*;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels_acf::{AcfTable, Family, ModelSpec};
use crate::math::stats;
use crate::memory::{default_max_lag, empirical_acf, mom_fit};
use crate::realized_measures::{fit_seasonal_from_iv, ProxySeries};
use crate::roughness::{empirical_variogram, ols_alpha};

/// Forecasting model identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Rw,
    Ar(usize),
    Har,
    Rfsv,
    Gaussian(Family),
}

impl ModelId {
    pub fn defaults() -> Vec<ModelId> {
        vec![
            ModelId::Rw,
            ModelId::Ar(5),
            ModelId::Har,
            ModelId::Rfsv,
            ModelId::Gaussian(Family::Cauchy),
            ModelId::Gaussian(Family::PowerBss),
            ModelId::Gaussian(Family::GammaBss),
        ]
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Rw => f.write_str("rw"),
            ModelId::Ar(p) => write!(f, "ar{p}"),
            ModelId::Har => f.write_str("har"),
            ModelId::Rfsv => f.write_str("rfsv"),
            ModelId::Gaussian(fam) => f.write_str(fam.name()),
        }
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "rw" => return Ok(ModelId::Rw),
            "har" | "log-har" | "loghar" => return Ok(ModelId::Har),
            "rfsv" => return Ok(ModelId::Rfsv),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("ar") {
            return match p.parse::<usize>() {
                Ok(p) if p > 0 => Ok(ModelId::Ar(p)),
                _ => Err(invalid(format!("bad AR order in '{s}'"))),
            };
        }
        s.parse::<Family>().map(ModelId::Gaussian).map_err(|_| invalid(format!("unknown model '{s}'")))
    }
}

impl Serialize for ModelId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// When the intraday seasonal profile is re-estimated inside the out-of-sample loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeasonalRefresh {
    /// Refit once per day on completed days only.
    Daily,
    /// Use the factors stored in the proxy series as they are.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub horizons: Vec<usize>,
    pub window: usize,
    /// m+1; defaults to min(window, 200).
    pub cond_depth: Option<usize>,
    pub models: Vec<ModelId>,
    /// Variogram bandwidth for α̂.
    pub variogram_m: usize,
    /// ACF lags for the memory fit; defaults to ⌈window^{1/3}⌉.
    pub acf_lags: Option<usize>,
    pub robust_memory: bool,
    pub seasonal: SeasonalRefresh,
    pub fourier_order: usize,
    /// Earliest origin index; the engine never starts before every model is warmed up.
    pub first_origin: Option<usize>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            horizons: vec![1, 2, 5, 10, 20],
            window: 200,
            cond_depth: None,
            models: ModelId::defaults(),
            variogram_m: 6,
            acf_lags: None,
            robust_memory: false,
            seasonal: SeasonalRefresh::Daily,
            fourier_order: crate::realized_measures::DEFAULT_FOURIER_ORDER,
            first_origin: None,
        }
    }
}

pub const MAX_COND_DEPTH: usize = 200;

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(invalid("horizons must be non-empty and at least 1"));
        }
        if self.window < 30 {
            return Err(invalid("window must be at least 30"));
        }
        if self.cond_depth == Some(0) {
            return Err(invalid("cond_depth must be at least 1"));
        }
        if self.variogram_m < 2 {
            return Err(invalid("variogram bandwidth must be at least 2"));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.cond_depth.unwrap_or(self.window.min(MAX_COND_DEPTH))
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(1)
    }

    pub fn memory_lags(&self) -> usize {
        self.acf_lags.unwrap_or_else(|| default_max_lag(self.window))
    }
}

/// Data visible to a forecaster at origin t.
#[derive(Debug, Clone, Copy)]
pub struct OriginContext<'a> {
    pub t: usize,
    /// De-seasonalized spot-variance proxies for cells 0..=t.
    pub values: &'a [f64],
    /// Their logarithms.
    pub log_values: &'a [f64],
    pub cells_per_day: usize,
}

impl<'a> OriginContext<'a> {
    pub fn window(&self, len: usize) -> Result<&'a [f64]> {
        tail(self.values, len)
    }

    pub fn log_window(&self, len: usize) -> Result<&'a [f64]> {
        tail(self.log_values, len)
    }
}

fn tail(x: &[f64], len: usize) -> Result<&[f64]> {
    if x.len() < len {
        return Err(Error::SeriesTooShort { needed: len, got: x.len() });
    }
    let w = &x[x.len() - len..];
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("window contains missing cells".into()));
    }
    Ok(w)
}

/// Forecast path of the de-seasonalized spot variance for steps 1..=H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathForecast {
    pub sigma2: Vec<f64>,
    /// Log-domain mean where the model works in logs, NaN otherwise.
    pub log_mu: Vec<f64>,
    /// Variance term used in the exponential correction, NaN where not applicable.
    pub xi2: Vec<f64>,
    pub floored: Vec<bool>,
}

impl PathForecast {
    pub fn raw(sigma2: Vec<f64>) -> Self {
        let n = sigma2.len();
        PathForecast { sigma2, log_mu: vec![f64::NAN; n], xi2: vec![f64::NAN; n], floored: vec![false; n] }
    }

    fn floor_nonpositive(&mut self, floor: f64) {
        for (v, f) in self.sigma2.iter_mut().zip(&mut self.floored) {
            if !(*v > 0.0) {
                *v = floor;
                *f = true;
            }
        }
    }
}

pub trait Forecaster {
    fn id(&self) -> String;
    /// Minimum number of observations (t+1) needed before the first forecast.
    fn required_history(&self, cfg: &ForecastConfig, cells_per_day: usize) -> usize;
    fn forecast(&mut self, ctx: &OriginContext<'_>, cfg: &ForecastConfig, steps: usize) -> Result<PathForecast>;
}

/// Roughness fit on a log window: (α̂, OLS intercept) with unit lag spacing.
fn window_alpha(z: &[f64], m: usize) -> Result<(f64, f64)> {
    let vg = empirical_variogram(z, m, 1.0, None)?;
    let f = ols_alpha(&vg)?;
    Ok((f.alpha_hat, f.intercept))
}

pub const ALPHA_FIT_CLAMP: f64 = 0.49;
pub const RFSV_H_MIN: f64 = 0.01;
pub const RFSV_H_MAX: f64 = 0.49;

/// Fitted model and conditioner for the Gaussian forecasters at one origin.
#[derive(Debug, Clone)]
pub struct GaussianFitState {
    pub spec: ModelSpec,
    pub mean: f64,
    pub conditioner: GaussianConditioner,
}

/// Re-estimate α (OLS) and the memory parameter on the window, then factor the conditioning matrix.
pub fn fit_gaussian_state(family: Family, z: &[f64], cfg: &ForecastConfig, steps: usize) -> Result<GaussianFitState> {
    let (alpha, _) = window_alpha(z, cfg.variogram_m)?;
    let alpha = alpha.clamp(-ALPHA_FIT_CLAMP, ALPHA_FIT_CLAMP);
    let acf = empirical_acf(z, cfg.memory_lags(), None)?;
    let fit = mom_fit(&acf, family, alpha, cfg.robust_memory)?;
    let mean = stats::mean(z);
    let var = stats::variance(z);
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let spec = ModelSpec::new(family, alpha, fit.memory_hat, var, 1.0)?;
    let depth = cfg.depth();
    let table = AcfTable::new(&spec, 1.0, depth + steps);
    let conditioner = GaussianConditioner::new(table.as_slice(), depth)?;
    Ok(GaussianFitState { spec, mean, conditioner })
}

/// The built-in models.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub model: ModelId,
    pub last_state: Option<GaussianFitState>,
}

impl Builtin {
    pub fn new(model: ModelId) -> Self {
        Builtin { model, last_state: None }
    }
}

impl Forecaster for Builtin {
    fn id(&self) -> String {
        self.model.to_string()
    }

    fn required_history(&self, cfg: &ForecastConfig, cpd: usize) -> usize {
        match self.model {
            ModelId::Har => har_required(cfg.max_horizon(), cfg.window, &HarLags::for_cells_per_day(cpd)),
            ModelId::Gaussian(_) => cfg.window.max(cfg.depth()),
            _ => cfg.window,
        }
    }

    fn forecast(&mut self, ctx: &OriginContext<'_>, cfg: &ForecastConfig, steps: usize) -> Result<PathForecast> {
        match self.model {
            ModelId::Rw => Ok(PathForecast::raw(rw_forecast(ctx.window(1)?, steps)?)),
            ModelId::Ar(p) => {
                let w = ctx.window(cfg.window)?;
                let mut out = PathForecast::raw(ar_forecast(w, p, steps, cfg.window)?.path);
                let floor = w.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
                out.floor_nonpositive(floor);
                Ok(out)
            }
            ModelId::Har => {
                let lags = HarLags::for_cells_per_day(ctx.cells_per_day);
                let need = har_required(steps, cfg.window, &lags);
                let v = ctx.window(need)?;
                let mut out = PathForecast::raw(vec![0.0; steps]);
                for k in 1..=steps {
                    let f = log_har_fit_forecast(v, k, cfg.window, &lags)?;
                    out.sigma2[k - 1] = f.forecast;
                    out.log_mu[k - 1] = f.log_forecast;
                    out.xi2[k - 1] = f.residual_variance;
                }
                Ok(out)
            }
            ModelId::Rfsv => {
                let z = ctx.log_window(cfg.window)?;
                let (alpha, intercept) = window_alpha(z, cfg.variogram_m)?;
                let hurst = (alpha + 0.5).clamp(RFSV_H_MIN, RFSV_H_MAX);
                let mean = stats::mean(z);
                let centered: Vec<f64> = z.iter().map(|v| v - mean).collect();
                let nu2 = libm::exp(intercept) / 4.0;
                let mut out = PathForecast::raw(vec![0.0; steps]);
                for k in 1..=steps {
                    let mu = mean + rfsv_forecast(&centered, hurst, k)?;
                    let corr = rfsv_variance_correction(hurst, nu2, k as f64);
                    out.sigma2[k - 1] = libm::exp(mu + corr);
                    out.log_mu[k - 1] = mu;
                    out.xi2[k - 1] = 2.0 * corr;
                }
                Ok(out)
            }
            ModelId::Gaussian(family) => {
                let z = ctx.log_window(cfg.window)?;
                let state = fit_gaussian_state(family, z, cfg, steps)?;
                let depth = state.conditioner.depth();
                let recent: Vec<f64> = ctx.log_window(depth)?.iter().rev().map(|v| v - state.mean).collect();
                let mut out = PathForecast::raw(vec![0.0; steps]);
                for k in 1..=steps {
                    let c = state.conditioner.forecast(&recent, k, state.spec.variance)?;
                    out.sigma2[k - 1] = lognormal_correct(state.mean + c.mu, c.xi2);
                    out.log_mu[k - 1] = state.mean + c.mu;
                    out.xi2[k - 1] = c.xi2;
                }
                self.last_state = Some(state);
                Ok(out)
            }
        }
    }
}

pub fn builtin_forecasters(models: &[ModelId]) -> Vec<Box<dyn Forecaster>> {
    models.iter().map(|m| Box::new(Builtin::new(*m)) as Box<dyn Forecaster>).collect()
}

/// One forecast of the forecast object FO_t(Δ, h) = Σ_{k=1..h} IV_{t+k}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub origin: usize,
    pub h: usize,
    pub model: String,
    pub fo_hat: f64,
    pub fo_realized: f64,
    pub log_mu: f64,
    pub xi2: f64,
    pub floored: bool,
    pub error: Option<String>,
}

/// Forward-fill missing values; leading gaps stay missing.
fn locf(x: &mut [f64]) {
    let mut last = f64::NAN;
    for v in x.iter_mut() {
        if v.is_finite() {
            last = *v;
        } else {
            *v = last;
        }
    }
}

/// Proxy re-expressed with a seasonal profile estimated from days before `day`.
fn deseasonalized(proxy: &ProxySeries, cfg: &ForecastConfig, day: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let cpd = proxy.cells_per_day;
    let factors = match cfg.seasonal {
        SeasonalRefresh::Off => return Ok((proxy.values.clone(), proxy.seasonal_factors.clone())),
        SeasonalRefresh::Daily if day >= 2 && cpd > 1 => {
            fit_seasonal_from_iv(&proxy.iv_values[..day * cpd], cpd, proxy.delta_s, cfg.fourier_order)?.factors
        }
        SeasonalRefresh::Daily => vec![1.0; cpd],
    };
    let mut sf = Vec::with_capacity(proxy.len());
    let mut v = Vec::with_capacity(proxy.len());
    for i in 0..proxy.len() {
        let f = factors[i % cpd];
        let iv = proxy.values[i] * proxy.seasonal_factors[i] * proxy.delta_s;
        sf.push(f);
        v.push(iv / (proxy.delta_s * f));
    }
    Ok((v, sf))
}

/// First origin at which every forecaster has enough history.
pub fn first_origin(cfg: &ForecastConfig, forecasters: &[Box<dyn Forecaster>], cells_per_day: usize) -> usize {
    let req = forecasters.iter().map(|f| f.required_history(cfg, cells_per_day)).max().unwrap_or(1);
    (req.max(1) - 1).max(cfg.first_origin.unwrap_or(0))
}

/// Rolling out-of-sample forecasts. Each forecaster sees only cells 0..=t at origin t.
pub fn run_oos(proxy: &ProxySeries, cfg: &ForecastConfig, forecasters: &mut [Box<dyn Forecaster>]) -> Result<Vec<ForecastRecord>> {
    cfg.validate()?;
    if forecasters.is_empty() {
        return Err(invalid("no models to forecast"));
    }
    let cpd = proxy.cells_per_day;
    let n = proxy.len();
    let steps = cfg.max_horizon();
    let t0 = first_origin(cfg, forecasters, cpd);
    if t0 + steps >= n {
        return Err(Error::SeriesTooShort { needed: t0 + steps + 1, got: n });
    }
    let mut horizons = cfg.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let ids: Vec<String> = forecasters.iter().map(|f| f.id()).collect();
    let mut records = Vec::new();
    let mut cached_day = usize::MAX;
    let (mut v, mut lv, mut sf) = (Vec::new(), Vec::new(), Vec::new());
    for t in t0..n - steps {
        let day = t / cpd;
        if day != cached_day {
            let (mut nv, nsf) = deseasonalized(proxy, cfg, day)?;
            locf(&mut nv);
            lv = nv.iter().map(|x| if *x > 0.0 { libm::log(*x) } else { f64::NAN }).collect();
            v = nv;
            sf = nsf;
            cached_day = day;
        }
        let ctx = OriginContext { t, values: &v[..=t], log_values: &lv[..=t], cells_per_day: cpd };
        for (f, id) in forecasters.iter_mut().zip(&ids) {
            let res = f.forecast(&ctx, cfg, steps);
            for &h in &horizons {
                let fo_realized: f64 = proxy.iv_values[t + 1..=t + h].iter().sum();
                let rec = match &res {
                    Ok(p) => {
                        let fo_hat: f64 = (1..=h).map(|k| proxy.delta_s * sf[t + k] * p.sigma2[k - 1]).sum();
                        ForecastRecord {
                            origin: t,
                            h,
                            model: id.clone(),
                            fo_hat,
                            fo_realized,
                            log_mu: p.log_mu[h - 1],
                            xi2: p.xi2[h - 1],
                            floored: p.floored[..h].iter().any(|b| *b),
                            error: None,
                        }
                    }
                    Err(e) => ForecastRecord {
                        origin: t,
                        h,
                        model: id.clone(),
                        fo_hat: f64::NAN,
                        fo_realized,
                        log_mu: f64::NAN,
                        xi2: f64::NAN,
                        floored: false,
                        error: Some(e.to_string()),
                    },
                };
                records.push(rec);
            }
        }
    }
    Ok(records)
}
