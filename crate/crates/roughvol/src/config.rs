//! Declarative pipeline configuration (TOML).

use std::path::{Path, PathBuf};

use roughvol_core::evaluation::{LossKind, McsConfig};
use roughvol_core::forecasting::ForecastConfig;
use roughvol_core::kernels_acf::Family;
use roughvol_core::market_data::{SyntheticSpec, DEFAULT_SESSION_LENGTH};
use roughvol_core::realized_measures::{Estimator, PreAvgConfig, DEFAULT_FOURIER_ORDER};
use roughvol_core::roughness::RoughnessMethod;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for every bootstrap in the run.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_session")]
    pub session_length: f64,
    pub input: InputConfig,
    #[serde(default)]
    pub proxy: ProxyConfig,
    #[serde(default)]
    pub roughness: RoughnessConfig,
    #[serde(default)]
    pub memory: MemoryConfig,
    #[serde(default)]
    pub forecast: ForecastConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

fn default_session() -> f64 {
    DEFAULT_SESSION_LENGTH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Tick CSV; relative paths are resolved against the config file's directory.
    pub ticks: Option<PathBuf>,
    /// Generate ticks instead of reading them.
    pub synthetic: Option<SyntheticSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxyConfig {
    pub delta: Interval,
    pub estimator: Estimator,
    pub theta: f64,
    pub k_override: Option<usize>,
    pub fourier_order: usize,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig {
            delta: Interval::Seconds(900.0),
            estimator: Estimator::BvStar,
            theta: PreAvgConfig::default().theta,
            k_override: None,
            fourier_order: DEFAULT_FOURIER_ORDER,
        }
    }
}

impl ProxyConfig {
    pub fn preavg(&self) -> PreAvgConfig {
        PreAvgConfig { theta: self.theta, k_override: self.k_override }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    pub m: usize,
    /// Method whose estimate feeds the memory fits.
    pub plug_in: RoughnessMethod,
    /// Bootstrap replications for the α interval; 0 skips the bootstrap.
    pub bootstrap_replications: usize,
    pub block_len: Option<usize>,
    pub no_straddle: bool,
}

impl Default for RoughnessConfig {
    fn default() -> Self {
        RoughnessConfig { m: 6, plug_in: RoughnessMethod::Ols, bootstrap_replications: 0, block_len: None, no_straddle: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryConfig {
    pub families: Vec<Family>,
    /// Number of ACF lags L; defaults to ⌈n^{1/3}⌉.
    pub lags: Option<usize>,
    /// Tail-regression window; defaults to ⌊n^{1/4}⌋ and ⌊n^{1/3}⌋.
    pub beta_lag_lo: Option<usize>,
    pub beta_lag_hi: Option<usize>,
    pub robust: bool,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig { families: Family::ALL.to_vec(), lags: None, beta_lag_lo: None, beta_lag_hi: None, robust: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub mcs: bool,
    pub replications: usize,
    pub block_len: usize,
    pub levels: Vec<f64>,
    pub baseline: String,
    pub loss: LossKind,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        let m = McsConfig::default();
        EvaluationConfig {
            mcs: true,
            replications: m.replications,
            block_len: m.block_len,
            levels: m.levels,
            baseline: "gamma-bss".into(),
            loss: LossKind::Qlike,
        }
    }
}

impl EvaluationConfig {
    pub fn mcs_config(&self, seed: u64) -> McsConfig {
        McsConfig { replications: self.replications, block_len: self.block_len, seed, levels: self.levels.clone() }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a config file; a relative tick path is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(t), Some(dir)) = (&cfg.input.ticks, path.parent()) {
            if t.is_relative() {
                cfg.input.ticks = Some(dir.join(t));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input.ticks, &self.input.synthetic) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("exactly one of input.ticks and input.synthetic is required".into())),
        }
        if let Some(s) = &self.input.synthetic {
            s.validate()?;
        }
        if !(self.session_length > 0.0) {
            return Err(Error::Config("session_length must be positive".into()));
        }
        self.proxy.preavg().validate()?;
        if self.roughness.m < 2 {
            return Err(Error::Config("roughness.m must be at least 2".into()));
        }
        if self.roughness.bootstrap_replications != 0 && self.roughness.bootstrap_replications < 100 {
            return Err(Error::Config("roughness.bootstrap_replications must be 0 or at least 100".into()));
        }
        self.forecast.validate()?;
        if self.evaluation.mcs && self.evaluation.replications < 100 {
            return Err(Error::Config("evaluation.replications must be at least 100".into()));
        }
        Ok(())
    }

    /// Canonical JSON form used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
seed = 7

[input]
ticks = "ticks.csv"

[proxy]
delta = "10m"
estimator = "bv"

[forecast]
window = 60
horizons = [1, 2]
models = ["rw", "ar5", "gamma-bss"]
seasonal = "off"
"#;

    #[test]
    fn parse_and_round_trip() {
        let c = PipelineConfig::from_toml(EXAMPLE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.proxy.delta.seconds(23400.0), 600.0);
        assert_eq!(c.forecast.window, 60);
        assert_eq!(c.roughness.m, 6);
        let back = PipelineConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_and_ambiguous() {
        assert!(PipelineConfig::from_toml("[input]\nticks='a'\n[proxy]\nbogus=1\n").is_err());
        let c = PipelineConfig::from_toml("[input]\n").unwrap();
        assert!(c.validate().is_err());
    }
}
