//! Stage functions and the end-to-end pipeline.

use std::path::{Path, PathBuf};

use roughvol_core::evaluation::{
    cumulative_relative_loss, fit_increment_distributions, model_confidence_set, score, IncrementFits, LossKind,
    LossTable, McsConfig, McsResult,
};
use roughvol_core::forecasting::{builtin_forecasters, run_oos, ForecastConfig, ForecastRecord};
use roughvol_core::kernels_acf::Family;
use roughvol_core::market_data::{synthesize_ticks, TickSeries};
use roughvol_core::memory::{empirical_acf, fitted_acf, mom_fit, ols_beta, BetaFit, EmpiricalAcf, MemoryFit};
use roughvol_core::realized_measures::{build_proxy_with_order, ProxySeries};
use roughvol_core::roughness::{
    bootstrap_ci, empirical_variogram, fit_alpha, BootstrapConfig, FitReport, RoughnessMethod, Variogram,
};
use serde::{Deserialize, Serialize};

use crate::config::{MemoryConfig, PipelineConfig, ProxyConfig, RoughnessConfig};
use crate::error::{Result, StageExt};
use crate::io;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn load_input(cfg: &PipelineConfig) -> Result<Vec<TickSeries>> {
    match (&cfg.input.ticks, &cfg.input.synthetic) {
        (Some(p), _) => io::load_ticks(p, cfg.session_length),
        (None, Some(s)) => Ok(synthesize_ticks(s)?),
        (None, None) => Err(crate::error::Error::Config("no input configured".into())),
    }
}

pub fn proxy_stage(ticks: &[TickSeries], cfg: &ProxyConfig) -> Result<ProxySeries> {
    let session = ticks.first().map(|d| d.session_length).unwrap_or(roughvol_core::market_data::DEFAULT_SESSION_LENGTH);
    let delta = cfg.delta.seconds(session);
    Ok(build_proxy_with_order(ticks, delta, &cfg.preavg(), cfg.estimator, cfg.fourier_order)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramPoint {
    pub lag: usize,
    pub gamma: f64,
    pub pairs: usize,
}

/// Roughness estimates on the log proxy, lags in units of Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub delta_s: f64,
    pub n: usize,
    pub ols: FitReport,
    pub nlls: FitReport,
    pub variogram: Vec<VariogramPoint>,
}

impl AlphaReport {
    pub fn get(&self, method: RoughnessMethod) -> &FitReport {
        match method {
            RoughnessMethod::Ols => &self.ols,
            RoughnessMethod::Nlls => &self.nlls,
        }
    }
}

fn with_ci(mut r: FitReport, z: &[f64], cfg: &RoughnessConfig, seed: u64) -> Result<FitReport> {
    if cfg.bootstrap_replications > 0 {
        let b = BootstrapConfig {
            replications: cfg.bootstrap_replications,
            block_len: cfg.block_len,
            seed,
            ..BootstrapConfig::default()
        };
        let (lo, hi) = bootstrap_ci(z, cfg.m, 1.0, r.method, &b)?;
        r.ci_low = Some(lo);
        r.ci_high = Some(hi);
    }
    Ok(r)
}

pub fn alpha_stage(proxy: &ProxySeries, cfg: &RoughnessConfig, seed: u64) -> Result<AlphaReport> {
    let z = proxy.log_values();
    let bounds = cfg.no_straddle.then_some(proxy.day_boundaries.as_slice());
    let vg: Variogram = empirical_variogram(&z, cfg.m, 1.0, bounds)?;
    let ols = with_ci(fit_alpha(&vg, RoughnessMethod::Ols)?, &z, cfg, seed)?;
    let nlls = with_ci(fit_alpha(&vg, RoughnessMethod::Nlls)?, &z, cfg, seed)?;
    let variogram = vg
        .lags
        .iter()
        .zip(&vg.values)
        .zip(&vg.pair_counts)
        .map(|((l, g), c)| VariogramPoint { lag: *l, gamma: *g, pairs: *c })
        .collect();
    Ok(AlphaReport { delta_s: proxy.delta_s, n: vg.n, ols, nlls, variogram })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub alpha_in: f64,
    pub acf: EmpiricalAcf,
    pub beta_ols: Option<BetaFit>,
    pub beta_ols_error: Option<String>,
    pub fits: Vec<MemoryFit>,
    pub fit_errors: Vec<(Family, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfFitRow {
    pub family: Family,
    pub lag: usize,
    pub rho_hat: f64,
    pub rho_fit: f64,
}

impl MemoryReport {
    pub fn fit_rows(&self) -> Vec<AcfFitRow> {
        self.fits
            .iter()
            .flat_map(|f| {
                fitted_acf(f, &self.acf).into_iter().map(move |(lag, rho_hat, rho_fit)| AcfFitRow {
                    family: f.family,
                    lag,
                    rho_hat,
                    rho_fit,
                })
            })
            .collect()
    }
}

pub fn memory_stage(proxy: &ProxySeries, alpha_in: f64, cfg: &MemoryConfig) -> Result<MemoryReport> {
    let z = proxy.log_values();
    let n = z.iter().filter(|v| v.is_finite()).count();
    let lags = cfg.lags.unwrap_or_else(|| roughvol_core::memory::default_max_lag(n));
    let acf = empirical_acf(&z, lags, Some(&proxy.day_boundaries))?;
    let (beta_ols, beta_ols_error) = match ols_beta(&acf, cfg.beta_lag_lo, cfg.beta_lag_hi) {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut fits = Vec::new();
    let mut fit_errors = Vec::new();
    for fam in &cfg.families {
        match mom_fit(&acf, *fam, alpha_in, cfg.robust) {
            Ok(f) => fits.push(f),
            Err(e) => fit_errors.push((*fam, e.to_string())),
        }
    }
    if fits.is_empty() && !cfg.families.is_empty() {
        return Err(roughvol_core::Error::Numerical(format!("no memory fit succeeded: {}", fit_errors[0].1)).into());
    }
    Ok(MemoryReport { alpha_in, acf, beta_ols, beta_ols_error, fits, fit_errors })
}

pub fn increments_stage(proxy: &ProxySeries) -> Result<IncrementFits> {
    Ok(fit_increment_distributions(&proxy.log_values())?)
}

pub fn forecast_stage(proxy: &ProxySeries, cfg: &ForecastConfig) -> Result<Vec<ForecastRecord>> {
    let mut models = builtin_forecasters(&cfg.models);
    Ok(run_oos(proxy, cfg, &mut models)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsReport {
    pub h: usize,
    pub loss: LossKind,
    pub n_oos: usize,
    pub result: McsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumRow {
    pub h: usize,
    pub model: String,
    pub origin: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub table: LossTable,
    pub mcs: Vec<McsReport>,
    pub cumulative: Vec<CumRow>,
}

pub fn evaluate_stage(
    records: &[ForecastRecord],
    mcs: Option<&McsConfig>,
    baseline: &str,
    kind: LossKind,
) -> Result<Evaluation> {
    let table = score(records)?;
    let mut reports = Vec::new();
    let mut cumulative = Vec::new();
    for h in table.horizons() {
        if let Some(mcfg) = mcs {
            let series: Vec<_> = table.series.iter().filter(|s| s.h == h).collect();
            let names: Vec<String> = series.iter().map(|s| s.model.clone()).collect();
            let losses: Vec<&[f64]> = series.iter().map(|s| s.get(kind)).collect();
            let result = model_confidence_set(&names, &losses, mcfg)?;
            reports.push(McsReport { h, loss: kind, n_oos: series[0].origins.len(), result });
        }
        if table.series(baseline, h).is_some() {
            for c in cumulative_relative_loss(&table, baseline, h, kind)? {
                for (o, v) in c.origins.iter().zip(&c.values) {
                    cumulative.push(CumRow { h, model: c.model.clone(), origin: *o, value: *v });
                }
            }
        }
    }
    Ok(Evaluation { table, mcs: reports, cumulative })
}

pub fn write_evaluation(ev: &Evaluation, losses: &Path, mcs: Option<&Path>, cumrel: Option<&Path>) -> Result<()> {
    io::write_csv(losses, &ev.table.entries)?;
    if let Some(p) = mcs {
        io::write_json(p, &ev.mcs)?;
    }
    if let Some(p) = cumrel {
        io::write_csv(p, &ev.cumulative)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub input_sha256: String,
    pub artifacts: Vec<Artifact>,
}

/// Files written by [`run_pipeline`], in order.
pub const ARTIFACTS: [&str; 10] = [
    "proxy.csv",
    "alpha.json",
    "memory.json",
    "acf_fit.csv",
    "increments.json",
    "qq.csv",
    "records.csv",
    "losses.csv",
    "mcs.json",
    "cumrel.csv",
];

fn input_hash(cfg: &PipelineConfig) -> Result<String> {
    match &cfg.input.ticks {
        Some(p) => io::sha256_file(p),
        None => Ok(io::sha256_bytes(serde_json::to_string(&cfg.input.synthetic).expect("serializable").as_bytes())),
    }
}

/// Run every stage and write the artifacts and `manifest.json` into `out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate().stage("config")?;
    let path = |name: &str| -> PathBuf { out_dir.join(name) };
    let input_sha256 = input_hash(cfg).stage("input")?;
    let ticks = load_input(cfg).stage("input")?;

    let proxy = proxy_stage(&ticks, &cfg.proxy).stage("proxy")?;
    io::write_proxy(&path("proxy.csv"), &proxy).stage("proxy")?;

    let alpha = alpha_stage(&proxy, &cfg.roughness, cfg.seed).stage("alpha")?;
    io::write_json(&path("alpha.json"), &alpha).stage("alpha")?;

    let alpha_in = alpha.get(cfg.roughness.plug_in).alpha_hat;
    let memory = memory_stage(&proxy, alpha_in, &cfg.memory).stage("memory")?;
    io::write_json(&path("memory.json"), &memory).stage("memory")?;
    io::write_csv(&path("acf_fit.csv"), memory.fit_rows()).stage("memory")?;

    let inc = increments_stage(&proxy).stage("increments")?;
    io::write_json(&path("increments.json"), &IncrementSummary::from(&inc)).stage("increments")?;
    io::write_csv(&path("qq.csv"), &inc.qq).stage("increments")?;

    let records = forecast_stage(&proxy, &cfg.forecast).stage("forecast")?;
    io::write_records(&path("records.csv"), &records).stage("forecast")?;

    let ev = &cfg.evaluation;
    let mcs_cfg = ev.mcs_config(cfg.seed);
    let evaluation = evaluate_stage(&records, ev.mcs.then_some(&mcs_cfg), &ev.baseline, ev.loss).stage("evaluate")?;
    write_evaluation(&evaluation, &path("losses.csv"), Some(&path("mcs.json")), Some(&path("cumrel.csv")))
        .stage("evaluate")?;

    let artifacts = ARTIFACTS
        .iter()
        .map(|n| Ok(Artifact { name: n.to_string(), sha256: io::sha256_file(&path(n))? }))
        .collect::<Result<Vec<_>>>()
        .stage("manifest")?;
    let manifest = Manifest {
        tool: "roughvol".into(),
        version: VERSION.into(),
        seed: cfg.seed,
        config_sha256: io::sha256_bytes(cfg.canonical_json().as_bytes()),
        input_sha256,
        artifacts,
    };
    io::write_json(&path("manifest.json"), &manifest).stage("manifest")?;
    Ok(manifest)
}

/// Distribution fits without the QQ table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSummary {
    pub n: usize,
    pub gaussian: roughvol_core::evaluation::GaussianFit,
    pub nig: roughvol_core::evaluation::NigFit,
}

impl From<&IncrementFits> for IncrementSummary {
    fn from(f: &IncrementFits) -> Self {
        IncrementSummary { n: f.n, gaussian: f.gaussian, nig: f.nig }
    }
}
