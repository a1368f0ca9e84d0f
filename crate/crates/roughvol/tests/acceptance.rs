//! Acceptance checks. Each test prints one PASS or FAIL line.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use roughvol_core::kernels_acf::{acf, lognormal_acf_transform, one_minus_acf, Family, ModelSpec};
use roughvol_core::math::linalg::fit_line;
use roughvol_core::math::quad::{integrate_with_breaks, Tolerance};
use roughvol_core::math::rng_stream;

fn report(n: usize, name: &str, pass: bool, detail: &str, t0: Instant) {
    println!(
        "criterion {n:>2} {}: {name} ({detail}; {:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

/// ρ(h) of the gamma kernel by direct quadrature of ∫g(x)g(x+h)dx / ∫g(x)²dx, in log-x.
fn gamma_acf_by_quadrature(alpha: f64, lambda: f64, h: f64) -> f64 {
    let eps = 1e-14 * h.min(1.0);
    let top = h + 60.0 / lambda;
    let mut pts = vec![eps.ln(), top.ln()];
    for c in [h.ln() - 3.0, h.ln(), h.ln() + 3.0, -lambda.ln(), 0.0] {
        if c > pts[0] && c < pts[1] {
            pts.push(c);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 5000 };
    let num = integrate_with_breaks(
        |s| ((alpha + 1.0) * s + alpha * (s.exp() + h).ln() - lambda * (2.0 * s.exp() + h)).exp(),
        &pts,
        tol,
    );
    let den = integrate_with_breaks(|s| ((2.0 * alpha + 1.0) * s - 2.0 * lambda * s.exp()).exp(), &pts, tol);
    let num_head = h.powf(alpha) * (-lambda * h).exp() * eps.powf(alpha + 1.0) / (alpha + 1.0);
    let den_head = eps.powf(2.0 * alpha + 1.0) / (2.0 * alpha + 1.0);
    (num.value + num_head) / (den.value + den_head)
}

#[test]
fn c01_gamma_closed_form_vs_quadrature() {
    let t0 = Instant::now();
    let mut rng = rng_stream(101, 0);
    let hs: Vec<f64> = (0..60).map(|i| 0.01 * (5000f64).powf(i as f64 / 59.0)).collect();
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let a = rng.random_range(-0.45..0.45);
        let l = (rng.random_range((0.02f64).ln()..(5f64).ln())).exp();
        let spec = ModelSpec::gamma_bss(a, l).unwrap();
        for &h in &hs {
            let e = (acf(&spec, h) - gamma_acf_by_quadrature(a, l, h)).abs();
            if e > worst {
                worst = e;
                at = (a, l, h);
            }
        }
    }
    let detail = format!("max abs error {worst:.2e} at alpha={:.3} lambda={:.3} h={:.3}", at.0, at.1, at.2);
    report(1, "gamma ACF closed form vs quadrature", worst < 1e-8 && t0.elapsed().as_secs() < 60, &detail, t0);
}

fn random_spec<R: Rng>(rng: &mut R, family: Family) -> ModelSpec {
    let a = rng.random_range(-0.45..0.45);
    let m = match family {
        Family::Cauchy => rng.random_range(0.05..2.0),
        Family::PowerBss => {
            if rng.random_bool(0.5) {
                rng.random_range(0.55..0.75)
            } else {
                rng.random_range(1.4..2.5)
            }
        }
        Family::GammaBss => (rng.random_range((0.01f64).ln()..(2f64).ln())).exp(),
    };
    ModelSpec::new(family, a, m, 1.0, 1.0).unwrap()
}

fn log_slope(hs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = hs.iter().map(|h| f(*h).ln()).collect();
    fit_line(&x, &y).1
}

#[test]
fn c02_roughness_and_memory_slopes() {
    let t0 = Instant::now();
    let small: Vec<f64> = (50..=60).map(|k| 2f64.powi(-k)).collect();
    let spec_window: Vec<f64> = (6..=10).map(|k| 2f64.powi(-k)).collect();
    let mut rng = rng_stream(202, 0);
    let mut worst_small: f64 = 0.0;
    let mut worst_spec_window: f64 = 0.0;
    let mut worst_long: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for family in Family::ALL {
        for _ in 0..50 {
            let s = random_spec(&mut rng, family);
            let target = 2.0 * s.alpha + 1.0;
            worst_small = worst_small.max((log_slope(&small, |h| one_minus_acf(&s, h)) - target).abs());
            worst_spec_window = worst_spec_window.max((log_slope(&spec_window, |h| one_minus_acf(&s, h)) - target).abs());
            match family {
                Family::Cauchy | Family::PowerBss => {
                    let beta = match family {
                        Family::Cauchy => s.memory,
                        _ if s.memory > 1.0 => s.memory,
                        _ => 2.0 * s.memory - 1.0,
                    };
                    // Cauchy converges at rate h^{-(2α+1)}, so its window sits far out.
                    let hs: Vec<f64> = match family {
                        Family::Cauchy => (0..=10).map(|k| 1e40 * 10f64.powf(k as f64 / 10.0)).collect(),
                        _ => (0..=10).map(|k| 1e3 * 10f64.powf(k as f64 / 10.0)).collect(),
                    };
                    worst_long = worst_long.max((log_slope(&hs, |h| acf(&s, h)) + beta).abs());
                }
                Family::GammaBss => {
                    let h1 = 100.0 / s.memory;
                    let h2 = 200.0 / s.memory;
                    let rate = -(acf(&s, h2).ln() - acf(&s, h1).ln()) / (h2 - h1);
                    worst_rate = worst_rate.max((rate / s.memory - 1.0).abs());
                }
            }
        }
    }
    let pass = worst_small < 0.02 && worst_long < 0.05 && worst_rate < 0.01 && t0.elapsed().as_secs() < 120;
    let detail = format!(
        "small-h slope err {worst_small:.2e} over h in 2^-60..2^-50 (2^-10..2^-6 gives {worst_spec_window:.3}), \
         long-lag exponent err {worst_long:.3}, gamma rate rel err {worst_rate:.2e}"
    );
    report(2, "roughness and memory slopes", pass, &detail, t0);
}

#[test]
fn c03_nlls_consistency_under_noise() {
    use rand_distr::StandardNormal;
    use roughvol_core::roughness::{empirical_variogram, nlls_alpha, ols_alpha};
    use roughvol_core::simulation::simulate_fbm;
    let t0 = Instant::now();
    let (reps, n, su2) = (100u64, 100_000, 0.25f64);
    let (mut nlls, mut ols, mut a_hat) = (0.0, 0.0, 0.0);
    for r in 0..reps {
        let mut rng = rng_stream(303, r);
        let x = simulate_fbm(0.2, n, 1.0, &mut rng);
        let y: Vec<f64> = x
            .iter()
            .map(|v| {
                let e: f64 = rng.sample(StandardNormal);
                v + su2.sqrt() * e
            })
            .collect();
        let vg = empirical_variogram(&y, 6, 1.0, None).unwrap();
        let fit = nlls_alpha(&vg, None).unwrap();
        nlls += fit.alpha_hat / reps as f64;
        a_hat += fit.noise_floor_hat.unwrap() / reps as f64;
        ols += ols_alpha(&vg).unwrap().alpha_hat / reps as f64;
    }
    let a_err = (a_hat - 2.0 * su2).abs() / (2.0 * su2);
    let pass = (nlls + 0.3).abs() < 0.03 && a_err < 0.10 && ols < nlls - 0.02 && t0.elapsed().as_secs() < 600;
    let detail = format!("mean NLLS alpha {nlls:.4}, mean OLS alpha {ols:.4}, noise floor rel err {a_err:.3}");
    report(3, "NLLS consistency under noise", pass, &detail, t0);
}

#[test]
fn c04_robust_beta_under_deflation() {
    use roughvol_core::memory::{mom_fit, ols_beta, EmpiricalAcf};
    let t0 = Instant::now();
    let spec = ModelSpec::cauchy(-0.3, 0.4).unwrap();
    let lags: Vec<usize> = (1..=20).collect();
    let exact = EmpiricalAcf { lags: lags.clone(), rho_hat: lags.iter().map(|k| acf(&spec, *k as f64)).collect(), n: 8000 };
    let scaled = EmpiricalAcf { rho_hat: exact.rho_hat.iter().map(|r| 0.8 * r).collect(), ..exact.clone() };
    let b0 = ols_beta(&exact, None, None).unwrap().beta_hat;
    let b1 = ols_beta(&scaled, None, None).unwrap().beta_hat;
    let m0 = mom_fit(&exact, Family::Cauchy, -0.3, true).unwrap();
    let m1 = mom_fit(&scaled, Family::Cauchy, -0.3, true).unwrap();
    let d_ols = (b0 - b1).abs();
    let d_mom = (m0.memory_hat - m1.memory_hat).abs();
    let d_c = (m1.noise_scale_c - 0.8).abs();
    let d_true = (m1.memory_hat - 0.4).abs();
    let pass = d_ols < 1e-6 && d_mom < 1e-6 && d_c < 1e-6 && d_true < 1e-6 && t0.elapsed().as_secs_f64() < 1.0;
    let detail = format!(
        "OLS beta shift {d_ols:.1e}, robust MoM beta shift {d_mom:.1e}, |c-0.8| {d_c:.1e}, |beta-0.4| {d_true:.1e}"
    );
    report(4, "noise-robust beta", pass, &detail, t0);
}

fn ols_alpha_of(z: &[f64]) -> f64 {
    use roughvol_core::roughness::{empirical_variogram, ols_alpha};
    ols_alpha(&empirical_variogram(z, 6, 1.0, None).unwrap()).unwrap().alpha_hat
}

#[test]
fn c05_lognormal_inherits_roughness() {
    use roughvol_core::market_data::{synthesize_detailed, SyntheticSpec};
    use roughvol_core::roughness::{ols_alpha, Variogram};
    use roughvol_core::simulation::CirculantSampler;
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    // Exact variograms of X and exp(X) from the lognormal ACF map.
    for spec in [
        ModelSpec::cauchy(-0.34, 0.3).unwrap(),
        ModelSpec::power_bss(-0.34, 0.7).unwrap(),
        ModelSpec::gamma_bss(-0.34, 0.19).unwrap(),
    ] {
        let dt = 1e-3;
        let lags: Vec<usize> = (1..=6).collect();
        let vg = |f: &dyn Fn(f64) -> f64| Variogram {
            lags: lags.clone(),
            delta: dt,
            values: lags.iter().map(|k| f(*k as f64 * dt)).collect(),
            pair_counts: vec![1_000_000; 6],
            n: 1_000_000,
        };
        let ax = ols_alpha(&vg(&|h| one_minus_acf(&spec, h))).unwrap().alpha_hat;
        let asig = ols_alpha(&vg(&|h| 1.0 - lognormal_acf_transform(acf(&spec, h), 1.0))).unwrap().alpha_hat;
        worst = worst.max((ax - asig).abs());
        lines.push(format!("{} exact {:.3}/{:.3}", spec.family, ax, asig));
    }
    // 10^6 simulated draws of X, compared on σ = exp(X) and log σ.
    for spec in [ModelSpec::cauchy(-0.34, 0.3).unwrap(), ModelSpec::gamma_bss(-0.34, 0.19).unwrap()] {
        let x = CirculantSampler::new(&spec, 1_000_000, 0.01).sample(&mut rng_stream(505, 0));
        let sigma: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let (a_log, a_sig) = (ols_alpha_of(&x), ols_alpha_of(&sigma));
        worst = worst.max((a_log - a_sig).abs());
        lines.push(format!("{} sim {:.3}/{:.3}", spec.family, a_log, a_sig));
    }
    // σ-paths from the tick generator.
    let model = ModelSpec::gamma_bss(-0.34, 0.19).unwrap();
    let syn = SyntheticSpec::new(Some(model), 1e-4, 50_000, 20, 505);
    let days = synthesize_detailed(&syn).unwrap();
    let sigma: Vec<f64> = days.iter().flat_map(|d| d.spot_variance.iter().map(|v| v.sqrt())).collect();
    let log_sigma: Vec<f64> = sigma.iter().map(|s| s.ln()).collect();
    let (a_log, a_sig) = (ols_alpha_of(&log_sigma), ols_alpha_of(&sigma));
    worst = worst.max((a_log - a_sig).abs());
    lines.push(format!("tick sigma path {:.3}/{:.3}", a_log, a_sig));
    let pass = worst < 0.05 && t0.elapsed().as_secs() < 300;
    let detail = format!("max |alpha(log sigma) - alpha(sigma)| {worst:.4}; {}", lines.join(", "));
    report(5, "lognormal transform inherits roughness", pass, &detail, t0);
}

fn sample_acf(paths: &[Vec<f64>], max_lag: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_lag + 1];
    for p in paths {
        let n = p.len() as f64;
        let m = p.iter().sum::<f64>() / n;
        let c0: f64 = p.iter().map(|v| (v - m) * (v - m)).sum();
        for (k, o) in out.iter_mut().enumerate() {
            let ck: f64 = p.iter().zip(&p[k..]).map(|(a, b)| (a - m) * (b - m)).sum();
            *o += ck / c0 / paths.len() as f64;
        }
    }
    out
}

#[test]
fn c06_simulation_exactness() {
    use roughvol_core::simulation::{CholeskySampler, CirculantSampler};
    let t0 = Instant::now();
    let spec = ModelSpec::gamma_bss(-0.34, 0.19).unwrap().with_variance(0.7).unwrap();
    let dt = 0.05;
    let chol = CholeskySampler::new(&spec, 3, dt, 100).unwrap();
    let mut rng = rng_stream(606, 0);
    let draws = 1_000_000;
    let mut s = [[0.0f64; 3]; 3];
    for _ in 0..draws {
        let x = chol.sample(&mut rng);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += x[i] * x[j];
            }
        }
    }
    let mut cov_err: f64 = 0.0;
    for (i, row) in s.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = spec.autocovariance(i.abs_diff(j) as f64 * dt);
            cov_err = cov_err.max((v / draws as f64 - want).abs() / want);
        }
    }

    let (n, reps, lags) = (1024, 400, 20);
    let circ = CirculantSampler::new(&spec, n, 1.0);
    let ch = CholeskySampler::new(&spec, n, 1.0, 2000).unwrap();
    let mut r1 = rng_stream(606, 1);
    let mut r2 = rng_stream(606, 2);
    let pc: Vec<Vec<f64>> = (0..reps).map(|_| circ.sample(&mut r1)).collect();
    let pk: Vec<Vec<f64>> = (0..reps).map(|_| ch.sample(&mut r2)).collect();
    let (ac, ak) = (sample_acf(&pc, lags), sample_acf(&pk, lags));
    let dist = ac.iter().zip(&ak).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let t_big = Instant::now();
    let big = CirculantSampler::new(&spec, 1 << 20, 1.0);
    let path = big.sample(&mut rng_stream(606, 3));
    let big_s = t_big.elapsed().as_secs_f64();
    let pass = cov_err < 0.005 && dist < 0.02 && path.len() == 1 << 20 && !big.approximate() && big_s < 10.0
        && t0.elapsed().as_secs() < 300;
    let detail = format!(
        "3x3 covariance max rel err {cov_err:.2e}, circulant vs Cholesky ACF distance {dist:.4}, 2^20 path in {big_s:.2}s"
    );
    report(6, "simulation exactness", pass, &detail, t0);
}

#[test]
fn c08_ar1_markov_weights() {
    use roughvol_core::forecasting::{gaussian_conditional_forecast, GaussianConditioner};
    let t0 = Instant::now();
    // ν = 1/2 gives the exponential ACF, an exact AR(1) on any grid.
    let spec = ModelSpec::gamma_bss(0.0, 0.4).unwrap();
    let dt = 0.5;
    let phi = (-0.4f64 * dt).exp();
    let history: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let mut worst: f64 = 0.0;
    for h in 1..=10 {
        let f = gaussian_conditional_forecast(&spec, &history, 6, h, dt).unwrap();
        let mut want = vec![0.0; 6];
        want[0] = phi.powi(h as i32);
        worst = f.weights.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        worst = worst.max((f.mu - want[0] * history[49]).abs());
        let rho: Vec<f64> = (0..6 + h).map(|k| phi.powi(k as i32)).collect();
        let (w, _) = GaussianConditioner::new(&rho, 6).unwrap().weights(h).unwrap();
        worst = w.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    let pass = worst < 1e-10 && t0.elapsed().as_secs_f64() < 1.0;
    report(8, "AR(1) conditioning weights", pass, &format!("max weight error {worst:.1e}"), t0);
}

#[test]
fn c09_loss_identities() {
    use roughvol_core::evaluation::{qlike_term, score};
    use roughvol_core::forecasting::ForecastRecord;
    let t0 = Instant::now();
    let fo: Vec<f64> = (0..200).map(|i| 1e-4 * (1.5 + ((i * 7919) % 101) as f64 / 50.0)).collect();
    let rec = |o: usize, m: &str, hat: f64| ForecastRecord {
        origin: o,
        h: 1,
        model: m.into(),
        fo_hat: hat,
        fo_realized: fo[o],
        log_mu: f64::NAN,
        xi2: f64::NAN,
        floored: false,
        error: None,
    };
    let mut records: Vec<ForecastRecord> = (0..fo.len()).map(|o| rec(o, "oracle", fo[o])).collect();
    records.extend((0..fo.len()).map(|o| rec(o, "flat", 2e-4)));
    let table = score(&records).unwrap();
    let e = table.entry("oracle", 1).unwrap();
    let want = fo.iter().map(|v| v.ln() + 1.0).sum::<f64>() / fo.len() as f64;
    let q_err = (e.qlike - want).abs();
    let mut argmin_ok = true;
    for &target in &[1e-4, 3.3e-3, 0.7, 12.0] {
        let grid: Vec<f64> = (0..2001).map(|i| target * (0.5 + i as f64 / 2000.0)).collect();
        let best = grid.iter().copied().min_by(|a, b| qlike_term(*a, target).total_cmp(&qlike_term(*b, target))).unwrap();
        argmin_ok &= (best - target).abs() <= target * 1e-12;
    }
    let pass = e.mse == 0.0 && q_err < 1e-12 * want.abs() && argmin_ok && t0.elapsed().as_secs_f64() < 1.0;
    let detail = format!("oracle MSE {:e}, QLIKE error {q_err:.1e}, grid argmin at truth {argmin_ok}", e.mse);
    report(9, "loss identities", pass, &detail, t0);
}

#[test]
fn c10_mcs_sanity() {
    use rand_distr::StandardNormal;
    use roughvol_core::evaluation::{model_confidence_set, McsConfig};
    let t0 = Instant::now();
    let (n, k) = (1000, 5);
    let names: Vec<String> = (0..k).map(|i| format!("m{i}")).collect();
    let mut separated = 0;
    let mut identical_ok = 0;
    for seed in 0..20u64 {
        let mut rng = rng_stream(1010, seed);
        let common: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let gap = 5.0 * (2.0 / n as f64).sqrt();
        let losses: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let shift = if i == 2 { -gap } else { 0.0 };
                common.iter().map(|c| 3.0 + c + shift + rng.sample::<f64, _>(StandardNormal)).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = losses.iter().map(|v| v.as_slice()).collect();
        let cfg = McsConfig { replications: 2000, seed, ..McsConfig::default() };
        let r = model_confidence_set(&names, &refs, &cfg).unwrap();
        if r.surviving(0.75).unwrap() == ["m2".to_string()] {
            separated += 1;
        }
        let same: Vec<&[f64]> = (0..k).map(|_| common.as_slice()).collect();
        let r = model_confidence_set(&names, &same, &cfg).unwrap();
        if r.surviving(0.75).unwrap().len() == k && r.steps.iter().all(|s| s.mcs_p_value == 1.0) {
            identical_ok += 1;
        }
    }
    let d = McsConfig::default();
    let pass = separated == 20
        && identical_ok == 20
        && d.replications == 25_000
        && d.block_len == 6
        && t0.elapsed().as_secs() < 300;
    let detail = format!("dominant model alone at 75% in {separated}/20 seeds, identical losses all kept with p=1 in {identical_ok}/20");
    report(10, "MCS sanity", pass, &detail, t0);
}

#[test]
fn c11_pipeline_determinism() {
    use roughvol::config::PipelineConfig;
    use roughvol::pipeline::{run_pipeline, ARTIFACTS};
    let t0 = Instant::now();
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("pipeline.toml");
    let cfg = PipelineConfig::load(&cfg_path).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_pipeline(&cfg, d.path()).unwrap();
    }
    let mut differing = Vec::new();
    for name in ARTIFACTS.iter().chain(["manifest.json"].iter()) {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        if a != b {
            differing.push(*name);
        }
    }
    let pass = differing.is_empty() && t0.elapsed().as_secs() < 120;
    let detail = format!("{} artifacts compared, differing: {:?}", ARTIFACTS.len() + 1, differing);
    report(11, "end-to-end determinism", pass, &detail, t0);
}

#[test]
fn c07_forecast_tournament() {
    use roughvol_core::evaluation::{model_confidence_set, score, LossKind, McsConfig};
    use roughvol_core::forecasting::{builtin_forecasters, run_oos, ForecastConfig, ModelId, SeasonalRefresh};
    use roughvol_core::market_data::business_days;
    use roughvol_core::realized_measures::{Estimator, ProxySeries};
    use roughvol_core::simulation::CirculantSampler;
    let t0 = Instant::now();
    let (cpd, window, n_oos) = (26usize, 200usize, 2000usize);
    let warm = window + 22 * cpd;
    let days = (warm + n_oos + 1).div_ceil(cpd) + 1;
    let n = days * cpd;
    let spec = ModelSpec::gamma_bss(-0.34, 0.19).unwrap();
    let sampler = CirculantSampler::new(&spec, n, 1.0);
    let cfg = ForecastConfig {
        horizons: vec![1],
        window,
        models: ModelId::defaults(),
        seasonal: SeasonalRefresh::Off,
        ..ForecastConfig::default()
    };
    let dates = business_days(chrono::NaiveDate::from_ymd_opt(2020, 1, 2).unwrap(), days);
    let (mut wins, mut rw_in, mut min_oos) = (0, 0, usize::MAX);
    let mut losers = Vec::new();
    for seed in 1..=20u64 {
        let x = sampler.sample(&mut rng_stream(seed, 0));
        let iv: Vec<f64> = x.iter().map(|v| 900.0 * 1e-5 * v.exp()).collect();
        let proxy = ProxySeries::from_iv(iv, 900.0, cpd, dates.clone(), Estimator::BvStar).unwrap();
        let mut models = builtin_forecasters(&cfg.models);
        let records = run_oos(&proxy, &cfg, &mut models).unwrap();
        let table = score(&records).unwrap();
        let best = table.best(1, LossKind::Qlike).unwrap().to_string();
        if best == "gamma-bss" {
            wins += 1;
        } else {
            losers.push((seed, best));
        }
        let series: Vec<_> = table.series.iter().filter(|s| s.h == 1).collect();
        let oos = series[0].origins.len();
        min_oos = min_oos.min(oos);
        let names: Vec<String> = series.iter().map(|s| s.model.clone()).collect();
        let losses: Vec<&[f64]> = series.iter().map(|s| s.get(LossKind::Qlike)).collect();
        let mcs = model_confidence_set(&names, &losses, &McsConfig { replications: 2000, seed, ..McsConfig::default() }).unwrap();
        if oos >= 2000 && mcs.surviving(0.75).unwrap().iter().any(|m| m == "rw") {
            rw_in += 1;
        }
    }
    let pass = wins >= 16 && rw_in == 0 && min_oos >= 2000 && t0.elapsed().as_secs() < 1800;
    let detail = format!(
        "gamma-bss lowest QLIKE in {wins}/20 seeds (others: {losers:?}), RW in 75% MCS in {rw_in} seeds, min n_oos {min_oos}"
    );
    report(7, "forecast tournament", pass, &detail, t0);
}
