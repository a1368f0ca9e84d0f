//! Re-estimation across sampling intervals.

use roughvol_core::kernels_acf::Family;
use roughvol_core::market_data::TickSeries;
use roughvol_core::roughness::RoughnessMethod;
use serde::{Deserialize, Serialize};

use crate::config::{MemoryConfig, ProxyConfig, RoughnessConfig};
use crate::error::Result;
use crate::pipeline::{alpha_stage, memory_stage, proxy_stage};
use crate::units::Interval;

/// One row per Δ. Missing estimates are empty; `error` holds the first failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureRow {
    pub delta: String,
    pub delta_s: f64,
    pub n: Option<usize>,
    pub alpha_ols: Option<f64>,
    pub alpha_nlls: Option<f64>,
    pub ols_ci_low: Option<f64>,
    pub ols_ci_high: Option<f64>,
    pub nlls_ci_low: Option<f64>,
    pub nlls_ci_high: Option<f64>,
    pub beta_ols: Option<f64>,
    pub beta_cauchy: Option<f64>,
    pub beta_power_bss: Option<f64>,
    pub error: Option<String>,
}

impl SignatureRow {
    fn empty(delta: &Interval, delta_s: f64) -> Self {
        SignatureRow {
            delta: delta.to_string(),
            delta_s,
            n: None,
            alpha_ols: None,
            alpha_nlls: None,
            ols_ci_low: None,
            ols_ci_high: None,
            nlls_ci_low: None,
            nlls_ci_high: None,
            beta_ols: None,
            beta_cauchy: None,
            beta_power_bss: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub proxy: ProxyConfig,
    pub roughness: RoughnessConfig,
    pub memory: MemoryConfig,
    /// Estimate whose α feeds the β fits.
    pub plug_in: RoughnessMethod,
    pub seed: u64,
}

fn one(ticks: &[TickSeries], delta: &Interval, cfg: &SweepConfig, row: &mut SignatureRow) -> Result<()> {
    let proxy = proxy_stage(ticks, &ProxyConfig { delta: *delta, ..cfg.proxy.clone() })?;
    let a = alpha_stage(&proxy, &cfg.roughness, cfg.seed)?;
    row.n = Some(a.n);
    row.alpha_ols = Some(a.ols.alpha_hat);
    row.alpha_nlls = Some(a.nlls.alpha_hat);
    row.ols_ci_low = a.ols.ci_low;
    row.ols_ci_high = a.ols.ci_high;
    row.nlls_ci_low = a.nlls.ci_low;
    row.nlls_ci_high = a.nlls.ci_high;
    let mem = MemoryConfig { families: vec![Family::Cauchy, Family::PowerBss], ..cfg.memory.clone() };
    let m = memory_stage(&proxy, a.get(cfg.plug_in).alpha_hat, &mem)?;
    row.beta_ols = m.beta_ols.as_ref().map(|b| b.beta_hat);
    for f in &m.fits {
        match f.family {
            Family::Cauchy => row.beta_cauchy = f.beta_equivalent,
            Family::PowerBss => row.beta_power_bss = f.beta_equivalent,
            Family::GammaBss => {}
        }
    }
    if row.error.is_none() {
        row.error = m.beta_ols_error.clone().or_else(|| m.fit_errors.first().map(|(f, e)| format!("{f}: {e}")));
    }
    Ok(())
}

/// Rebuild the proxy and re-estimate α and β for every Δ.
pub fn signature_sweep(ticks: &[TickSeries], deltas: &[Interval], cfg: &SweepConfig) -> Vec<SignatureRow> {
    let session = ticks.first().map(|d| d.session_length).unwrap_or(roughvol_core::market_data::DEFAULT_SESSION_LENGTH);
    deltas
        .iter()
        .map(|d| {
            let mut row = SignatureRow::empty(d, d.seconds(session));
            if let Err(e) = one(ticks, d, cfg, &mut row) {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect()
}
