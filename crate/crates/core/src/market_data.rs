//! Tick data containers and the synthetic tick generator.

use alloc::format;
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels_acf::ModelSpec;
use crate::math::rng_stream;
use crate::simulation::CirculantSampler;

pub const DEFAULT_SESSION_LENGTH: f64 = 23_400.0;

/// One trading day of (possibly noisy) log-price observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    pub day: NaiveDate,
    /// Seconds since the session open.
    pub times: Vec<f64>,
    pub log_prices: Vec<f64>,
    pub session_length: f64,
}

impl TickSeries {
    pub fn new(day: NaiveDate, times: Vec<f64>, log_prices: Vec<f64>, session_length: f64) -> Result<Self> {
        let t = TickSeries { day, times, log_prices, session_length };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.log_prices.len() {
            return Err(invalid("times and log_prices differ in length"));
        }
        if self.times.len() < 2 {
            return Err(invalid(format!("day {} has fewer than two ticks", self.day)));
        }
        if !(self.session_length > 0.0) {
            return Err(invalid("session length must be positive"));
        }
        for (i, w) in self.times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(invalid(format!("day {}: time not increasing at tick {}", self.day, i + 1)));
            }
        }
        if self.times[0] < 0.0 || *self.times.last().unwrap() > self.session_length {
            return Err(invalid(format!("day {}: times outside the session", self.day)));
        }
        if self.log_prices.iter().any(|p| !p.is_finite()) {
            return Err(invalid(format!("day {}: non-finite log price", self.day)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index range of ticks with `t0 <= time <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> core::ops::Range<usize> {
        let a = self.times.partition_point(|&t| t < t0);
        let b = self.times.partition_point(|&t| t <= t1);
        a..b.max(a)
    }
}

/// Multiplicative intraday profile applied to spot variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntradayProfile {
    /// Quadratic U shape: `edge` at open and close, `mid` at midday.
    UShape { edge: f64, mid: f64 },
}

impl IntradayProfile {
    pub fn factor(&self, tau: f64) -> f64 {
        match *self {
            IntradayProfile::UShape { edge, mid } => {
                let u = 2.0 * tau - 1.0;
                mid + (edge - mid) * u * u
            }
        }
    }
}

/// Parameters of the synthetic tick generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Log-volatility model; `None` gives constant volatility.
    pub model: Option<ModelSpec>,
    /// Volatility scale per square-root second.
    pub xi: f64,
    pub noise_std: f64,
    /// Expected number of jumps per day.
    pub jump_intensity: f64,
    pub jump_std: f64,
    pub leverage_rho: f64,
    pub ticks_per_day: usize,
    pub days: usize,
    pub seed: u64,
    /// Seconds per unit of the model's lag axis.
    #[serde(default = "default_lag_unit")]
    pub lag_unit_s: f64,
    #[serde(default = "default_session")]
    pub session_length: f64,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    #[serde(default)]
    pub intraday: Option<IntradayProfile>,
    #[serde(default = "default_log_price0")]
    pub log_price0: f64,
}

fn default_lag_unit() -> f64 {
    900.0
}
fn default_session() -> f64 {
    DEFAULT_SESSION_LENGTH
}
fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 2).unwrap()
}
fn default_log_price0() -> f64 {
    libm::log(3000.0)
}

impl SyntheticSpec {
    /// Constant-volatility spec with the defaults for everything else.
    pub fn new(model: Option<ModelSpec>, xi: f64, ticks_per_day: usize, days: usize, seed: u64) -> Self {
        SyntheticSpec {
            model,
            xi,
            noise_std: 0.0,
            jump_intensity: 0.0,
            jump_std: 0.0,
            leverage_rho: 0.0,
            ticks_per_day,
            days,
            seed,
            lag_unit_s: default_lag_unit(),
            session_length: default_session(),
            start_date: default_start(),
            intraday: None,
            log_price0: default_log_price0(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.model {
            m.validate()?;
        }
        let checks = [
            (self.xi > 0.0 && self.xi.is_finite(), "xi must be positive"),
            (self.noise_std >= 0.0, "noise_std must be non-negative"),
            (self.jump_intensity >= 0.0, "jump_intensity must be non-negative"),
            (self.jump_std >= 0.0, "jump_std must be non-negative"),
            (self.leverage_rho.abs() <= 1.0, "leverage_rho must lie in [-1, 1]"),
            (self.ticks_per_day >= 2, "ticks_per_day must be at least 2"),
            (self.days >= 1, "days must be positive"),
            (self.lag_unit_s > 0.0, "lag_unit_s must be positive"),
            (self.session_length > 0.0, "session_length must be positive"),
            (self.log_price0.is_finite(), "log_price0 must be finite"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(invalid(msg));
            }
        }
        if let Some(IntradayProfile::UShape { edge, mid }) = self.intraday {
            if !(edge > 0.0 && mid > 0.0) {
                return Err(invalid("intraday profile must be positive"));
            }
        }
        Ok(())
    }

    /// Seconds between consecutive ticks.
    pub fn tick_spacing(&self) -> f64 {
        self.session_length / (self.ticks_per_day - 1) as f64
    }
}

/// Consecutive weekdays starting at `start` (inclusive, moved forward off weekends).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date overflow");
    }
    out
}

/// Simulated tick data together with the latent paths behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDay {
    pub ticks: TickSeries,
    /// Efficient (noise free) log price at each tick.
    pub efficient: Vec<f64>,
    /// Spot variance per second at each tick, including the intraday profile.
    pub spot_variance: Vec<f64>,
    pub jumps: Vec<(f64, f64)>,
}

pub fn synthesize_ticks(spec: &SyntheticSpec) -> Result<Vec<TickSeries>> {
    Ok(synthesize_detailed(spec)?.into_iter().map(|d| d.ticks).collect())
}

/// As [`synthesize_ticks`], keeping efficient prices, spot variances and jumps.
pub fn synthesize_detailed(spec: &SyntheticSpec) -> Result<Vec<SyntheticDay>> {
    spec.validate()?;
    let tpd = spec.ticks_per_day;
    let n = tpd * spec.days;
    let dt_s = spec.tick_spacing();
    let (x, eps) = match &spec.model {
        Some(m) => {
            let sampler = CirculantSampler::new(m, n, dt_s / spec.lag_unit_s);
            sampler.sample_with_innovations(&mut rng_stream(spec.seed, 0))
        }
        None => {
            let mut r = rng_stream(spec.seed, 0);
            (alloc::vec![0.0; n], (0..n + 1).map(|_| r.sample(StandardNormal)).collect())
        }
    };
    let rho = spec.leverage_rho;
    let rho_c = libm::sqrt(1.0 - rho * rho);
    let sd = libm::sqrt(dt_s);
    let times: Vec<f64> = (0..tpd).map(|i| i as f64 * dt_s).collect();
    let profile: Vec<f64> = times
        .iter()
        .map(|t| spec.intraday.map_or(1.0, |p| p.factor(t / spec.session_length)))
        .collect();
    let dates = business_days(spec.start_date, spec.days);
    let mut out = Vec::with_capacity(spec.days);
    let mut y = spec.log_price0;
    for (d, date) in dates.into_iter().enumerate() {
        let stream = 1 + 4 * d as u64;
        let mut rb = rng_stream(spec.seed, stream);
        let mut rj = rng_stream(spec.seed, stream + 1);
        let mut ru = rng_stream(spec.seed, stream + 2);

        let mut jumps: Vec<(f64, f64)> = Vec::new();
        if spec.jump_intensity > 0.0 {
            let k: f64 = Poisson::new(spec.jump_intensity).map_err(|_| invalid("bad jump intensity"))?.sample(&mut rj);
            for _ in 0..k as usize {
                let t = rj.random::<f64>() * spec.session_length;
                let z: f64 = rj.sample(StandardNormal);
                jumps.push((t, spec.jump_std * z));
            }
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        }

        let base = d * tpd;
        let spot: Vec<f64> = (0..tpd)
            .map(|i| {
                let s = spec.xi * libm::exp(x[base + i]);
                s * s * profile[i]
            })
            .collect();
        let mut eff = Vec::with_capacity(tpd);
        let mut jump_idx = 0;
        eff.push(y);
        for i in 0..tpd - 1 {
            let z: f64 = rb.sample(StandardNormal);
            let e = eps[(base + i + 1) % eps.len()];
            let db = sd * (rho * e + rho_c * z);
            y += libm::sqrt(spot[i]) * db - 0.5 * spot[i] * dt_s;
            while jump_idx < jumps.len() && jumps[jump_idx].0 <= times[i + 1] {
                y += jumps[jump_idx].1;
                jump_idx += 1;
            }
            eff.push(y);
        }
        let obs: Vec<f64> = eff
            .iter()
            .map(|v| {
                if spec.noise_std > 0.0 {
                    let u: f64 = ru.sample(StandardNormal);
                    v + spec.noise_std * u
                } else {
                    *v
                }
            })
            .collect();
        let ticks = TickSeries::new(date, times.clone(), obs, spec.session_length)?;
        out.push(SyntheticDay { ticks, efficient: eff, spot_variance: spot, jumps });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_series_validation() {
        let d = NaiveDate::from_ymd_opt(2021, 3, 4).unwrap();
        assert!(TickSeries::new(d, alloc::vec![0.0, 1.0], alloc::vec![0.0, 0.1], 10.0).is_ok());
        assert!(TickSeries::new(d, alloc::vec![0.0], alloc::vec![0.0], 10.0).is_err());
        assert!(TickSeries::new(d, alloc::vec![1.0, 0.5], alloc::vec![0.0, 0.1], 10.0).is_err());
        assert!(TickSeries::new(d, alloc::vec![0.0, 11.0], alloc::vec![0.0, 0.1], 10.0).is_err());
    }

    #[test]
    fn window_is_inclusive() {
        let d = NaiveDate::from_ymd_opt(2021, 3, 4).unwrap();
        let t = TickSeries::new(d, alloc::vec![0.0, 1.0, 2.0, 3.0], alloc::vec![0.0; 4], 3.0).unwrap();
        assert_eq!(t.window(1.0, 2.0), 1..3);
        assert_eq!(t.window(0.0, 3.0), 0..4);
    }

    #[test]
    fn business_days_skip_weekends() {
        let d = business_days(NaiveDate::from_ymd_opt(2020, 1, 3).unwrap(), 3);
        assert_eq!(d[1], NaiveDate::from_ymd_opt(2020, 1, 6).unwrap());
    }

    #[test]
    fn spec_rejects_bad_values() {
        let mut s = SyntheticSpec::new(None, 1e-4, 100, 2, 1);
        assert!(s.validate().is_ok());
        s.leverage_rho = 1.5;
        assert!(s.validate().is_err());
        let mut s = SyntheticSpec::new(None, 1e-4, 1, 2, 1);
        assert!(s.validate().is_err());
        s.ticks_per_day = 10;
        s.xi = 0.0;
        assert!(synthesize_ticks(&s).is_err());
    }

    #[test]
    fn same_seed_same_output() {
        let mut s = SyntheticSpec::new(Some(ModelSpec::gamma_bss(-0.3, 0.2).unwrap().with_variance(0.3).unwrap()), 1e-4, 200, 3, 9);
        s.noise_std = 1e-4;
        s.jump_intensity = 1.0;
        s.jump_std = 1e-3;
        s.leverage_rho = -0.5;
        assert_eq!(synthesize_ticks(&s).unwrap(), synthesize_ticks(&s).unwrap());
        let mut s2 = s.clone();
        s2.seed = 10;
        assert_ne!(synthesize_ticks(&s).unwrap(), synthesize_ticks(&s2).unwrap());
    }
}
