//! Model specifications, BSS kernels and autocorrelation functions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::quad::{integrate_with_breaks, Tolerance};
use crate::math::special::{beta, gamma, ln_beta};

pub use crate::math::special::bessel_k;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cauchy,
    PowerBss,
    GammaBss,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Cauchy, Family::PowerBss, Family::GammaBss];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cauchy => "cauchy",
            Family::PowerBss => "power-bss",
            Family::GammaBss => "gamma-bss",
        }
    }

    /// Name of the memory parameter (β, γ or λ).
    pub fn memory_name(self) -> &'static str {
        match self {
            Family::Cauchy => "beta",
            Family::PowerBss => "gamma",
            Family::GammaBss => "lambda",
        }
    }

    pub fn memory_in_domain(self, m: f64) -> bool {
        match self {
            Family::Cauchy | Family::GammaBss => m > 0.0 && m.is_finite(),
            Family::PowerBss => m > 0.5 && m.is_finite(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cauchy" => Ok(Family::Cauchy),
            "power-bss" | "powerbss" | "power" => Ok(Family::PowerBss),
            "gamma-bss" | "gammabss" | "gamma" => Ok(Family::GammaBss),
            other => Err(invalid(format!("unknown family '{other}'"))),
        }
    }
}

/// Parametric model for the log-volatility process X with σ = ξ exp(X).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub alpha: f64,
    /// β (Cauchy), γ (PowerBSS) or λ (GammaBSS).
    pub memory: f64,
    /// Stationary variance of X.
    pub variance: f64,
    pub xi: f64,
}

impl ModelSpec {
    pub fn new(family: Family, alpha: f64, memory: f64, variance: f64, xi: f64) -> Result<Self> {
        let s = ModelSpec { family, alpha, memory, variance, xi };
        s.validate()?;
        Ok(s)
    }

    pub fn cauchy(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Cauchy, alpha, beta, 1.0, 1.0)
    }

    pub fn power_bss(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::PowerBss, alpha, gamma, 1.0, 1.0)
    }

    pub fn gamma_bss(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(Family::GammaBss, alpha, lambda, 1.0, 1.0)
    }

    pub fn with_variance(mut self, variance: f64) -> Result<Self> {
        self.variance = variance;
        self.validate()?;
        Ok(self)
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        self.xi = xi;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -0.5 && self.alpha < 0.5) {
            return Err(invalid(format!("alpha = {} outside (-0.5, 0.5)", self.alpha)));
        }
        if !self.family.memory_in_domain(self.memory) {
            return Err(invalid(format!("{} = {} outside its domain", self.family.memory_name(), self.memory)));
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(invalid("variance must be positive"));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(invalid("xi must be positive"));
        }
        Ok(())
    }

    /// Hurst-type index H = α + 1/2.
    pub fn hurst(&self) -> f64 {
        self.alpha + 0.5
    }

    pub fn acf(&self, h: f64) -> f64 {
        acf(self, h)
    }

    pub fn autocovariance(&self, h: f64) -> f64 {
        self.variance * acf(self, h)
    }
}

/// Kernel g(x) of the Brownian semistationary representation.
pub fn kernel_value(spec: &ModelSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(crate::error::domain("kernel argument must be positive"));
    }
    match spec.family {
        Family::PowerBss => Ok(power_kernel(spec.alpha, spec.memory, x)),
        Family::GammaBss => Ok(libm::pow(x, spec.alpha) * libm::exp(-spec.memory * x)),
        Family::Cauchy => Err(Error::UnsupportedFamily("the Cauchy class has no kernel".into())),
    }
}

fn power_kernel(alpha: f64, gam: f64, x: f64) -> f64 {
    libm::exp(alpha * libm::log(x) - (gam + alpha) * libm::log1p(x))
}

/// ∫g² for the BSS families, in units where the driving volatility is one.
pub fn variance_closed_form(spec: &ModelSpec, vol_of_vol_sq: f64) -> Result<f64> {
    let a = spec.alpha;
    match spec.family {
        Family::PowerBss => Ok(vol_of_vol_sq * beta(2.0 * a + 1.0, 2.0 * spec.memory - 1.0)),
        Family::GammaBss => {
            Ok(vol_of_vol_sq * libm::pow(2.0 * spec.memory, -2.0 * a - 1.0) * gamma(2.0 * a + 1.0))
        }
        Family::Cauchy => Err(Error::UnsupportedFamily("the Cauchy class has no kernel".into())),
    }
}

/// Autocorrelation ρ(h) of X.
pub fn acf(spec: &ModelSpec, h: f64) -> f64 {
    let h = h.abs();
    if h == 0.0 {
        return 1.0;
    }
    match spec.family {
        Family::Cauchy => {
            let a = 2.0 * spec.alpha + 1.0;
            libm::exp(-(spec.memory / a) * libm::log1p(libm::pow(h, a)))
        }
        Family::GammaBss => {
            let nu = spec.alpha + 0.5;
            let z = spec.memory * h;
            if z < 1.0 {
                1.0 - matern_one_minus_series(nu, z)
            } else {
                matern_rho(nu, z)
            }
        }
        Family::PowerBss => {
            if h < 1.0 {
                1.0 - power_one_minus_acf(spec.alpha, spec.memory, h)
            } else {
                power_cross_integral(spec.alpha, spec.memory, h) / libm::exp(ln_beta(2.0 * spec.alpha + 1.0, 2.0 * spec.memory - 1.0))
            }
        }
    }
}

/// 1 - ρ(h), computed without cancellation for small lags.
pub fn one_minus_acf(spec: &ModelSpec, h: f64) -> f64 {
    let h = h.abs();
    if h == 0.0 {
        return 0.0;
    }
    match spec.family {
        Family::Cauchy => {
            let a = 2.0 * spec.alpha + 1.0;
            -libm::expm1(-(spec.memory / a) * libm::log1p(libm::pow(h, a)))
        }
        Family::GammaBss => {
            let nu = spec.alpha + 0.5;
            let z = spec.memory * h;
            if z < 1.0 {
                matern_one_minus_series(nu, z)
            } else {
                1.0 - matern_rho(nu, z)
            }
        }
        Family::PowerBss => {
            if h < 1.0 {
                power_one_minus_acf(spec.alpha, spec.memory, h)
            } else {
                1.0 - acf(spec, h)
            }
        }
    }
}

/// Matérn correlation 2^{1-ν}/Γ(ν) z^ν K_ν(z), evaluated in logs to survive large z.
fn matern_rho(nu: f64, z: f64) -> f64 {
    let ln = (1.0 - nu) * core::f64::consts::LN_2 - libm::lgamma(nu) + nu * libm::log(z)
        + crate::math::special::ln_bessel_k(nu, z);
    libm::exp(ln)
}

/// 1 - ρ from the ascending series of I_{±ν}.
fn matern_one_minus_series(nu: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let g1m = gamma(1.0 - nu);
    let mut t1 = 1.0;
    let mut t2 = libm::exp(2.0 * nu * libm::log(0.5 * z)) * g1m / gamma(1.0 + nu);
    let mut sum = t2;
    for k in 1..200 {
        let kf = k as f64;
        t1 *= q / (kf * (kf - nu));
        t2 *= q / (kf * (kf + nu));
        let d = t2 - t1;
        sum += d;
        if d.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

const PQ_TOL: f64 = 1e-10;

/// ∫₀^∞ g(x) g(x+h) dx for the power-law kernel.
fn power_cross_integral(alpha: f64, gam: f64, h: f64) -> f64 {
    let eps = 1e-10 * h.min(1.0);
    let big = 1e12 * h.max(1.0);
    let gh = power_kernel(alpha, gam, h);
    let head = gh * libm::pow(eps, 1.0 + alpha) / (1.0 + alpha);
    let tail = libm::pow(big, 1.0 - 2.0 * gam) / (2.0 * gam - 1.0);
    let ga = gam + alpha;
    let f = |s: f64| {
        let x = libm::exp(s);
        libm::exp((1.0 + alpha) * s - ga * libm::log1p(x) + alpha * libm::log(x + h) - ga * libm::log1p(x + h))
    };
    let pts = log_breaks(eps, big, h);
    let r = integrate_with_breaks(f, &pts, Tolerance { abs: 0.0, rel: PQ_TOL, max_intervals: 4000 });
    head + r.value + tail
}

/// 1 - ρ(h) = ∫ g(x)(g(x) - g(x+h)) dx / ∫ g².
fn power_one_minus_acf(alpha: f64, gam: f64, h: f64) -> f64 {
    let eps = 1e-10 * h.min(1.0);
    let big = 1e12 * h.max(1.0);
    let gh = power_kernel(alpha, gam, h);
    let head = libm::pow(eps, 1.0 + 2.0 * alpha) / (1.0 + 2.0 * alpha)
        - gh * libm::pow(eps, 1.0 + alpha) / (1.0 + alpha);
    let tail = gam * h * libm::pow(big, -2.0 * gam) / (2.0 * gam);
    let f = |s: f64| {
        let x = libm::exp(s);
        let gx = power_kernel(alpha, gam, x);
        // g(x) - g(x+h) = -g(x) expm1(α log1p(h/x) - (γ+α) log1p(h/(1+x)))
        let e = alpha * libm::log1p(h / x) - (gam + alpha) * libm::log1p(h / (1.0 + x));
        x * gx * gx * -libm::expm1(e)
    };
    let pts = log_breaks(eps, big, h);
    let r = integrate_with_breaks(f, &pts, Tolerance { abs: 0.0, rel: PQ_TOL, max_intervals: 4000 });
    (head + r.value + tail) / libm::exp(ln_beta(2.0 * alpha + 1.0, 2.0 * gam - 1.0))
}

fn log_breaks(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let (a, b) = (libm::log(lo), libm::log(hi));
    let mut pts: Vec<f64> = Vec::with_capacity(8);
    pts.push(a);
    let mut cands = [libm::log(h) - 2.0, libm::log(h), libm::log(h) + 2.0, 0.0];
    cands.sort_by(f64::total_cmp);
    for c in cands {
        if c > *pts.last().unwrap() + 1e-9 && c < b {
            pts.push(c);
        }
    }
    pts.push(b);
    pts
}

/// Long-lag behaviour of an autocorrelation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "kebab-case")]
pub enum LongMemory {
    /// ρ(h) ~ h^{-exponent}
    Polynomial(f64),
    /// ρ(h) ~ e^{-rate h} up to polynomial factors
    Exponential(f64),
}

/// Short-lag slope 2α+1 of log(1-ρ(h)) and the long-lag decay mode.
pub fn asymptotic_slopes(spec: &ModelSpec) -> Result<(f64, LongMemory)> {
    let short = 2.0 * spec.alpha + 1.0;
    let long = match spec.family {
        Family::Cauchy => LongMemory::Polynomial(spec.memory),
        Family::PowerBss => LongMemory::Polynomial(power_gamma_to_beta(spec.memory)?),
        Family::GammaBss => LongMemory::Exponential(spec.memory),
    };
    Ok((short, long))
}

/// Decay exponent implied by the power-law kernel's γ.
pub fn power_gamma_to_beta(gam: f64) -> Result<f64> {
    if gam == 1.0 {
        Err(Error::CriticalGamma)
    } else if gam > 1.0 {
        Ok(gam)
    } else {
        Ok(2.0 * gam - 1.0)
    }
}

/// ACF of exp(X) for Gaussian X with correlation `rho_x` and variance `var_x`.
pub fn lognormal_acf_transform(rho_x: f64, var_x: f64) -> f64 {
    libm::expm1(var_x * rho_x) / libm::expm1(var_x)
}

/// ACF evaluated on the lag grid {0, dt, 2dt, ..., max_lag dt}.
///
/// Holding the table avoids repeated quadrature for the power-law family.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfTable {
    pub spec: ModelSpec,
    pub dt: f64,
    rho: Vec<f64>,
}

impl AcfTable {
    pub fn new(spec: &ModelSpec, dt: f64, max_lag: usize) -> Self {
        let rho = (0..=max_lag).map(|k| acf(spec, k as f64 * dt)).collect();
        AcfTable { spec: *spec, dt, rho }
    }

    pub fn get(&self, k: usize) -> f64 {
        self.rho[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }

    pub fn max_lag(&self) -> usize {
        self.rho.len() - 1
    }
}

pub fn describe(spec: &ModelSpec) -> String {
    format!(
        "{}(alpha={}, {}={}, variance={}, xi={})",
        spec.family,
        spec.alpha,
        spec.family.memory_name(),
        spec.memory,
        spec.variance,
        spec.xi
    )
}
