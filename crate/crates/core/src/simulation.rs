//! Exact Gaussian simulation on regular grids and price-path assembly.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels_acf::ModelSpec;
use crate::math::fft::FftPlan;
use crate::math::linalg::Cholesky;
use crate::math::rng_stream;

/// Stationary autocovariance as a function of the (time) lag.
pub trait Autocovariance {
    fn autocovariance(&self, lag: f64) -> f64;
}

impl Autocovariance for ModelSpec {
    fn autocovariance(&self, lag: f64) -> f64 {
        ModelSpec::autocovariance(self, lag)
    }
}

/// Increments of fractional Brownian motion over steps of length `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalNoise {
    pub hurst: f64,
    pub dt: f64,
}

impl Autocovariance for FractionalNoise {
    fn autocovariance(&self, lag: f64) -> f64 {
        let k = libm::round(lag.abs() / self.dt);
        let p = 2.0 * self.hurst;
        let f = |x: f64| libm::pow(x.abs(), p);
        0.5 * libm::pow(self.dt, p) * (f(k + 1.0) - 2.0 * f(k) + f(k - 1.0))
    }
}

impl<F: Fn(f64) -> f64> Autocovariance for F {
    fn autocovariance(&self, lag: f64) -> f64 {
        self(lag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub n_points: usize,
    pub dt: f64,
    pub seed: u64,
}

impl SimGrid {
    pub fn new(n_points: usize, dt: f64, seed: u64) -> Result<Self> {
        let g = SimGrid { n_points, dt, seed };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 1 {
            return Err(invalid("grid needs at least one point"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("grid spacing must be positive"));
        }
        Ok(())
    }
}

/// Reusable exact sampler from the Cholesky factor of the grid covariance.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    chol: Cholesky,
}

impl CholeskySampler {
    pub fn new<C: Autocovariance + ?Sized>(cov: &C, n: usize, dt: f64, max_points: usize) -> Result<Self> {
        if n > max_points {
            return Err(invalid("grid too large for Cholesky simulation"));
        }
        let lags: Vec<f64> = (0..n).map(|k| cov.autocovariance(k as f64 * dt)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = lags[i.abs_diff(j)];
            }
        }
        Ok(CholeskySampler { chol: Cholesky::factor_with_jitter(&a, n)? })
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.chol.dim();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n];
        self.chol.mul_lower(&z, &mut out);
        out
    }
}

/// Default cost guard for Cholesky simulation.
pub const CHOLESKY_MAX_POINTS: usize = 10_000;

pub fn simulate_gaussian_cholesky<C: Autocovariance + ?Sized>(cov: &C, grid: &SimGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    let s = CholeskySampler::new(cov, grid.n_points, grid.dt, CHOLESKY_MAX_POINTS)?;
    Ok(s.sample(&mut rng_stream(grid.seed, 0)))
}

/// Circulant-embedding sampler for a fixed covariance and grid length.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    n: usize,
    plan: FftPlan,
    /// sqrt of the (clipped) eigenvalues of the embedding circulant
    sqrt_eig: Vec<f64>,
    approximate: bool,
    clipped_fraction: f64,
}

impl CirculantSampler {
    pub fn new<C: Autocovariance + ?Sized>(cov: &C, n: usize, dt: f64) -> Self {
        let m = (2 * n.saturating_sub(1)).max(2).next_power_of_two();
        let half = m / 2;
        let mut c: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..=half {
            let v = cov.autocovariance(j as f64 * dt);
            c[j] = Complex64::new(v, 0.0);
            if j > 0 && j < half {
                c[m - j] = c[j];
            }
        }
        let plan = FftPlan::new(m);
        plan.process(&mut c, false);
        let (mut neg, mut tot) = (0.0, 0.0);
        let sqrt_eig = c
            .iter()
            .map(|l| {
                tot += l.re.abs();
                if l.re < 0.0 {
                    neg += -l.re;
                    0.0
                } else {
                    libm::sqrt(l.re)
                }
            })
            .collect();
        // Round-off level negatives do not make the embedding approximate.
        let clipped_fraction = if tot > 0.0 { neg / tot } else { 0.0 };
        let approximate = clipped_fraction > 1e-13;
        CirculantSampler { n, plan, sqrt_eig, approximate, clipped_fraction }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn embedding_size(&self) -> usize {
        self.plan.len()
    }

    pub fn approximate(&self) -> bool {
        self.approximate
    }

    pub fn clipped_fraction(&self) -> f64 {
        self.clipped_fraction
    }

    /// Two independent paths from one complex transform.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let m = self.plan.len();
        let scale = 1.0 / libm::sqrt(m as f64);
        let mut w: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) * (s * scale)
            })
            .collect();
        self.plan.process(&mut w, false);
        (w[..self.n].iter().map(|z| z.re).collect(), w[..self.n].iter().map(|z| z.im).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_pair(rng).0
    }

    /// Path X = C^{1/2} ε driven by real white noise ε, returned together with ε.
    pub fn sample_with_innovations<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let m = self.plan.len();
        let eps: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut w: Vec<Complex64> = eps.iter().map(|&e| Complex64::new(e, 0.0)).collect();
        self.plan.process(&mut w, false);
        for (z, s) in w.iter_mut().zip(&self.sqrt_eig) {
            *z *= *s;
        }
        self.plan.process(&mut w, true);
        let x = w[..self.n].iter().map(|z| z.re / m as f64).collect();
        (x, eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantPath {
    pub path: Vec<f64>,
    pub approximate: bool,
    pub clipped_fraction: f64,
}

pub fn simulate_gaussian_circulant<C: Autocovariance + ?Sized>(cov: &C, grid: &SimGrid) -> Result<CirculantPath> {
    grid.validate()?;
    let s = CirculantSampler::new(cov, grid.n_points, grid.dt);
    let path = s.sample(&mut rng_stream(grid.seed, 0));
    Ok(CirculantPath { path, approximate: s.approximate(), clipped_fraction: s.clipped_fraction() })
}

/// Fractional Brownian motion on `n + 1` points starting at zero.
pub fn simulate_fbm<R: Rng + ?Sized>(hurst: f64, n: usize, dt: f64, rng: &mut R) -> Vec<f64> {
    let s = CirculantSampler::new(&FractionalNoise { hurst, dt }, n, dt);
    let inc = s.sample(rng);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for d in inc {
        acc += d;
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBundle {
    pub x_path: Vec<f64>,
    pub sigma_path: Vec<f64>,
    /// Price Brownian increments; entry j drives the step from point j to j+1.
    pub b_increments: Vec<f64>,
    pub log_price_path: Vec<f64>,
    pub approximate: bool,
}

impl PathBundle {
    pub fn price_path(&self) -> Vec<f64> {
        self.log_price_path.iter().map(|v| libm::exp(*v)).collect()
    }
}

/// Log-volatility path with innovations, and price increments correlated to them.
///
/// The increment over step j is paired with the innovation that enters X at point j+1.
pub(crate) fn leveraged_drivers<R: Rng + ?Sized>(
    sampler: &CirculantSampler,
    n: usize,
    dt: f64,
    leverage_rho: f64,
    rng_x: &mut R,
    rng_b: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let (x, eps) = sampler.sample_with_innovations(rng_x);
    let m = eps.len();
    let sd = libm::sqrt(dt);
    let r2 = libm::sqrt(1.0 - leverage_rho * leverage_rho);
    let db = (0..n.saturating_sub(1))
        .map(|j| {
            let z: f64 = rng_b.sample(StandardNormal);
            sd * (leverage_rho * eps[(j + 1) % m] + r2 * z)
        })
        .collect();
    (x, db)
}

pub fn simulate_price(spec: &ModelSpec, grid: &SimGrid, leverage_rho: f64, s0: f64) -> Result<PathBundle> {
    spec.validate()?;
    grid.validate()?;
    if !(leverage_rho.abs() <= 1.0) {
        return Err(invalid("leverage correlation must lie in [-1, 1]"));
    }
    if !(s0 > 0.0) {
        return Err(invalid("initial price must be positive"));
    }
    let n = grid.n_points;
    let sampler = CirculantSampler::new(spec, n, grid.dt);
    let mut rx = rng_stream(grid.seed, 0);
    let mut rb = rng_stream(grid.seed, 1);
    let (x_path, b_increments) = leveraged_drivers(&sampler, n, grid.dt, leverage_rho, &mut rx, &mut rb);
    let sigma_path: Vec<f64> = x_path.iter().map(|x| spec.xi * libm::exp(*x)).collect();
    let mut log_price_path = Vec::with_capacity(n);
    let mut y = libm::log(s0);
    log_price_path.push(y);
    for j in 0..n - 1 {
        let s = sigma_path[j];
        y += s * b_increments[j] - 0.5 * s * s * grid.dt;
        log_price_path.push(y);
    }
    Ok(PathBundle { x_path, sigma_path, b_increments, log_price_path, approximate: sampler.approximate() })
}
