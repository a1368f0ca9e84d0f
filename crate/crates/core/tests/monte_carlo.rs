use rand::Rng;
use rand_distr::StandardNormal;
use roughvol_core::forecasting::lognormal_correct;
use roughvol_core::kernels_acf::{Family, ModelSpec};
use roughvol_core::market_data::{synthesize_detailed, synthesize_ticks, SyntheticSpec};
use roughvol_core::math::rng_stream;
use roughvol_core::memory::{default_max_lag, empirical_acf, mom_fit};
use roughvol_core::realized_measures::{noise_variance_ac_prices, preavg_iv, preavg_iv_with_noise, Estimator, PreAvgConfig};
use roughvol_core::roughness::{empirical_variogram, ols_alpha, rolling_alpha};
use roughvol_core::simulation::{simulate_fbm, simulate_gaussian_circulant, SimGrid};

fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng_stream(seed, 7);
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

#[test]
fn fbm_variogram_scales_as_power() {
    let mut rng = rng_stream(11, 0);
    let path = simulate_fbm(0.2, 100_000, 1.0, &mut rng);
    let vg = empirical_variogram(&path, 6, 1.0, None).unwrap();
    let ratios: Vec<f64> = vg.values.iter().zip(&vg.lags).map(|(g, k)| g / (*k as f64).powf(0.4)).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    for r in &ratios {
        assert!((r / mean - 1.0).abs() < 0.03, "{ratios:?}");
    }
}

#[test]
fn iid_acf_is_small() {
    let z = normals(3, 100_000);
    let acf = empirical_acf(&z, 10, None).unwrap();
    for r in &acf.rho_hat {
        assert!(r.abs() < 0.01, "{:?}", acf.rho_hat);
    }
}

#[test]
fn ar1_acf_is_geometric() {
    let e = normals(5, 100_000);
    let phi: f64 = 0.6;
    let mut z = vec![0.0; e.len()];
    for i in 1..e.len() {
        z[i] = phi * z[i - 1] + e[i];
    }
    let acf = empirical_acf(&z, 8, None).unwrap();
    for (k, r) in acf.lags.iter().zip(&acf.rho_hat) {
        assert!((r - phi.powi(*k as i32)).abs() < 0.02, "lag {k}: {r}");
    }
}

#[test]
fn gamma_bss_memory_recovered() {
    let spec = ModelSpec::gamma_bss(-0.34, 0.19).unwrap();
    let mut inside = 0;
    for seed in 0..5 {
        let x = simulate_gaussian_circulant(&spec, &SimGrid::new(13_000, 1.0, seed).unwrap()).unwrap().path;
        let alpha = ols_alpha(&empirical_variogram(&x, 6, 1.0, None).unwrap()).unwrap().alpha_hat;
        let acf = empirical_acf(&x, default_max_lag(x.len()), None).unwrap();
        let fit = mom_fit(&acf, Family::GammaBss, alpha, false).unwrap();
        if fit.memory_hat > 0.12 && fit.memory_hat < 0.26 {
            inside += 1;
        }
    }
    assert!(inside >= 4, "{inside}/5");
}

#[test]
fn rolling_alpha_fluctuates_around_truth() {
    let spec = ModelSpec::gamma_bss(-0.3, 0.05).unwrap();
    let x = simulate_gaussian_circulant(&spec, &SimGrid::new(40 * 500, 1.0, 9).unwrap()).unwrap().path;
    let r = rolling_alpha(&x, 40, 50, 6, 1.0).unwrap();
    let n = r.alpha.len() as f64;
    let mean = r.alpha.iter().sum::<f64>() / n;
    let sd = (r.alpha.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!(sd < 0.1, "sd {sd}");
    assert!((mean + 0.3).abs() < 0.1, "mean {mean}");
}

#[test]
fn noise_variance_from_pure_noise() {
    let omega = 1e-3;
    let z: Vec<f64> = normals(17, 100_001).iter().map(|e| 8.0 + omega * e).collect();
    let w2 = noise_variance_ac_prices(&z).unwrap();
    assert!((w2 / (omega * omega) - 1.0).abs() < 0.05, "{w2}");
}

fn brownian(seed: u64, n: usize, sigma2: f64) -> Vec<f64> {
    let sd = (sigma2 / n as f64).sqrt();
    let mut acc = 0.0;
    let mut z = vec![0.0];
    for e in normals(seed, n) {
        acc += sd * e;
        z.push(acc);
    }
    z
}

#[test]
fn preaveraged_measures_on_clean_brownian_day() {
    let sigma2 = 1e-4;
    let cfg = PreAvgConfig::default();
    let (mut rv, mut bv) = (0.0, 0.0);
    let reps = 20;
    for seed in 0..reps {
        let z = brownian(seed, 100_000, sigma2);
        rv += preavg_iv_with_noise(&z, &cfg, Estimator::RvStar, 0.0).unwrap().value;
        bv += preavg_iv_with_noise(&z, &cfg, Estimator::BvStar, 0.0).unwrap().value;
    }
    let (rv, bv) = (rv / reps as f64, bv / reps as f64);
    assert!((rv / sigma2 - 1.0).abs() < 0.05, "rv {rv}");
    assert!((bv / sigma2 - 1.0).abs() < 0.05, "bv {bv}");
}

#[test]
fn bipower_ignores_a_jump() {
    let sigma2 = 1e-4;
    let jump = 0.005;
    let cfg = PreAvgConfig::default();
    let mut z = brownian(21, 100_000, sigma2);
    let clean_rv = preavg_iv_with_noise(&z, &cfg, Estimator::RvStar, 0.0).unwrap().value;
    let clean_bv = preavg_iv_with_noise(&z, &cfg, Estimator::BvStar, 0.0).unwrap().value;
    for v in &mut z[50_000..] {
        *v += jump;
    }
    let rv = preavg_iv_with_noise(&z, &cfg, Estimator::RvStar, 0.0).unwrap().value;
    let bv = preavg_iv_with_noise(&z, &cfg, Estimator::BvStar, 0.0).unwrap().value;
    assert!((bv / clean_bv - 1.0).abs() < 0.1, "bv {clean_bv} -> {bv}");
    assert!(((rv - clean_rv) / (jump * jump) - 1.0).abs() < 0.25, "rv {clean_rv} -> {rv}");
}

#[test]
fn rv_and_bv_agree_without_jumps() {
    let mut spec = SyntheticSpec::new(None, 1e-4, 2000, 200, 4);
    spec.noise_std = 2e-5;
    let days = synthesize_ticks(&spec).unwrap();
    let cfg = PreAvgConfig::default();
    let mut ratio = 0.0;
    for d in &days {
        let w = (0.0, d.session_length);
        let rv = preavg_iv(d, w, &cfg, Estimator::RvStar).unwrap().value;
        let bv = preavg_iv(d, w, &cfg, Estimator::BvStar).unwrap().value;
        ratio += bv / rv;
    }
    ratio /= days.len() as f64;
    assert!((0.95..=1.05).contains(&ratio), "{ratio}");
}

#[test]
fn synthetic_quadratic_variation_matches_integrated_variance() {
    let model = ModelSpec::gamma_bss(-0.3, 0.2).unwrap().with_variance(0.3).unwrap();
    let spec = SyntheticSpec::new(Some(model), 1e-4, 100_000, 2, 8);
    for day in synthesize_detailed(&spec).unwrap() {
        let dt = spec.tick_spacing();
        let qv: f64 = day.efficient.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        let iv: f64 = day.spot_variance[..day.spot_variance.len() - 1].iter().map(|s| s * dt).sum();
        assert!((qv / iv - 1.0).abs() < 0.01, "qv {qv} iv {iv}");
    }
}

#[test]
fn lognormal_mean_correction() {
    let (mu, xi2) = (0.3f64, 0.5f64);
    let n = 1_000_000;
    let m = normals(23, n).iter().map(|e| (mu + xi2.sqrt() * e).exp()).sum::<f64>() / n as f64;
    let target = lognormal_correct(mu, xi2);
    assert!((target - 0.55f64.exp()).abs() < 1e-12);
    assert!((m / target - 1.0).abs() < 0.01, "{m} vs {target}");
}
