//! Command-line interface.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use roughvol_core::evaluation::{LossKind, McsConfig};
use roughvol_core::forecasting::{ForecastConfig, ModelId, SeasonalRefresh};
use roughvol_core::kernels_acf::{Family, ModelSpec};
use roughvol_core::market_data::{synthesize_ticks, SyntheticSpec, DEFAULT_SESSION_LENGTH};
use roughvol_core::math::rng_stream;
use roughvol_core::realized_measures::Estimator;
use roughvol_core::roughness::{FitReport, RoughnessMethod};
use roughvol_core::simulation::{CholeskySampler, CirculantSampler};
use serde::Serialize;

use crate::config::{MemoryConfig, PipelineConfig, ProxyConfig, RoughnessConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::{self, AlphaReport};
use crate::signature::{signature_sweep, SweepConfig};
use crate::units::Interval;

#[derive(Debug, Parser)]
#[command(name = "roughvol", version, about = "Rough volatility measurement, modelling and forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the spot-variance proxy from ticks.
    Proxy(ProxyArgs),
    /// Estimate the roughness index α.
    Alpha(AlphaArgs),
    /// Fit the memory parameter of a model family.
    Memory(MemoryArgs),
    /// Tabulate a model autocorrelation function.
    Acf(AcfArgs),
    /// Simulate log-volatility paths.
    Simulate(SimulateArgs),
    /// Rolling out-of-sample forecasts.
    Forecast(ForecastArgs),
    /// Losses, model confidence set and cumulative relative losses.
    Evaluate(EvaluateArgs),
    /// Re-estimate α and β across sampling intervals.
    Signature(SignatureArgs),
    /// Generate synthetic ticks.
    Synth(SynthArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct ProxyInput {
    /// Proxy CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SESSION_LENGTH)]
    pub session_length: f64,
}

impl ProxyInput {
    fn load(&self) -> Result<roughvol_core::realized_measures::ProxySeries> {
        io::read_proxy(&self.input, self.session_length, Estimator::BvStar)
    }
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    #[arg(long, default_value = "15m")]
    pub delta: Interval,
    #[arg(long, default_value = "bv")]
    pub estimator: String,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = roughvol_core::realized_measures::DEFAULT_FOURIER_ORDER)]
    pub fourier_order: usize,
    #[arg(long, default_value_t = DEFAULT_SESSION_LENGTH)]
    pub session_length: f64,
    /// Tick CSV with columns day,time_s,log_price.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub proxy: ProxyInput,
    #[arg(long, default_value = "ols")]
    pub method: String,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Bootstrap replications for the interval; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ignore pairs that straddle a day boundary.
    #[arg(long)]
    pub no_straddle: bool,
    /// FitReport JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Variogram CSV (lag, gamma, pairs).
    #[arg(long)]
    pub variogram_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MemoryArgs {
    #[command(flatten)]
    pub proxy: ProxyInput,
    #[arg(long, default_value = "cauchy")]
    pub family: String,
    #[arg(long)]
    pub robust: bool,
    /// α to hold fixed.
    #[arg(long, conflicts_with = "alpha_from")]
    pub alpha: Option<f64>,
    /// Read α from a JSON written by `alpha` or `run`.
    #[arg(long)]
    pub alpha_from: Option<PathBuf>,
    #[arg(long)]
    pub lags: Option<usize>,
    #[arg(long)]
    pub beta_lag_lo: Option<usize>,
    #[arg(long)]
    pub beta_lag_hi: Option<usize>,
    /// MemoryReport JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fitted versus empirical ACF CSV.
    #[arg(long)]
    pub acf_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, group = "mem")]
    pub beta: Option<f64>,
    #[arg(long, group = "mem")]
    pub gamma: Option<f64>,
    #[arg(long, group = "mem")]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        let family = parse::<Family>(&self.family)?;
        let (name, value) = match family {
            Family::Cauchy => ("beta", self.beta),
            Family::PowerBss => ("gamma", self.gamma),
            Family::GammaBss => ("lambda", self.lambda),
        };
        let memory = value.ok_or_else(|| Error::Config(format!("--{name} is required for {family}")))?;
        Ok(ModelSpec::new(family, self.alpha, memory, self.variance, 1.0)?)
    }
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100.0)]
    pub hmax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dh: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// cholesky or circulant.
    #[arg(long, default_value = "circulant")]
    pub method: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated model list.
    #[arg(long)]
    pub models: Option<String>,
    /// Proxy sampling interval; with the cells per day it fixes the session length.
    #[arg(long)]
    pub delta: Option<Interval>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Comma-separated horizons.
    #[arg(long)]
    pub horizons: Option<String>,
    #[arg(long)]
    pub cond_depth: Option<usize>,
    /// daily or off.
    #[arg(long)]
    pub seasonal: Option<String>,
    #[arg(long)]
    pub robust: bool,
    /// TOML file with forecast settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub mcs: bool,
    #[arg(long = "B", default_value_t = McsConfig::default().replications)]
    pub replications: usize,
    #[arg(long, default_value_t = McsConfig::default().block_len)]
    pub block: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "0.75,0.9")]
    pub levels: String,
    #[arg(long, default_value = "gamma-bss")]
    pub baseline: String,
    #[arg(long, default_value = "qlike")]
    pub loss: String,
    /// losses.csv[,mcs.json[,cumrel.csv]].
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    /// Tick CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SESSION_LENGTH)]
    pub session_length: f64,
    #[arg(long, default_value = "5m,10m,15m,30m,65m")]
    pub deltas: String,
    #[arg(long, default_value = "bv")]
    pub estimator: String,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "ols")]
    pub plug_in: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML file holding a synthetic tick specification; flags are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.34)]
    pub alpha: f64,
    /// β, γ or λ of the chosen family.
    #[arg(long, default_value_t = 0.19)]
    pub memory: f64,
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub xi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 1000)]
    pub ticks_per_day: usize,
    #[arg(long, default_value_t = 5)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| Error::Config(e.to_string()))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse).collect()
}

fn emit<T: Serialize>(out: Option<&Path>, v: &T) -> Result<()> {
    match out {
        Some(p) => io::write_json(p, v),
        None => {
            println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
            Ok(())
        }
    }
}

fn read_alpha(path: &Path) -> Result<f64> {
    let v: serde_json::Value = io::read_json(path)?;
    if let Ok(r) = serde_json::from_value::<FitReport>(v.clone()) {
        return Ok(r.alpha_hat);
    }
    if let Ok(r) = serde_json::from_value::<AlphaReport>(v) {
        return Ok(r.ols.alpha_hat);
    }
    Err(Error::Parse { path: path.into(), row: 1, msg: "no alpha estimate found".into() })
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Proxy(a) => {
            let ticks = io::load_ticks(&a.input, a.session_length)?;
            let cfg = ProxyConfig {
                delta: a.delta,
                estimator: parse(&a.estimator)?,
                theta: a.theta,
                k_override: None,
                fourier_order: a.fourier_order,
            };
            let p = pipeline::proxy_stage(&ticks, &cfg)?;
            io::write_proxy(&a.output, &p)
        }
        Command::Alpha(a) => {
            let proxy = a.proxy.load()?;
            let method: RoughnessMethod = parse(&a.method)?;
            let cfg = RoughnessConfig {
                m: a.m,
                plug_in: method,
                bootstrap_replications: a.bootstrap,
                block_len: a.block,
                no_straddle: a.no_straddle,
            };
            let r = pipeline::alpha_stage(&proxy, &cfg, a.seed)?;
            if let Some(p) = &a.variogram_out {
                io::write_csv(p, &r.variogram)?;
            }
            emit(a.out.as_deref(), r.get(method))
        }
        Command::Memory(a) => {
            let proxy = a.proxy.load()?;
            let alpha = match (a.alpha, &a.alpha_from) {
                (Some(x), _) => x,
                (None, Some(p)) => read_alpha(p)?,
                (None, None) => return Err(Error::Config("one of --alpha and --alpha-from is required".into())),
            };
            let cfg = MemoryConfig {
                families: vec![parse(&a.family)?],
                lags: a.lags,
                beta_lag_lo: a.beta_lag_lo,
                beta_lag_hi: a.beta_lag_hi,
                robust: a.robust,
            };
            let r = pipeline::memory_stage(&proxy, alpha, &cfg)?;
            if let Some(p) = &a.acf_out {
                io::write_csv(p, r.fit_rows())?;
            }
            emit(a.out.as_deref(), &r)
        }
        Command::Acf(a) => {
            let spec = a.model.spec()?;
            if !(a.dh > 0.0 && a.hmax >= 0.0) {
                return Err(Error::Config("--dh must be positive and --hmax non-negative".into()));
            }
            #[derive(Serialize)]
            struct Row {
                h: f64,
                rho: f64,
            }
            let n = (a.hmax / a.dh + 1e-9).floor() as usize;
            io::write_csv(&a.out, (0..=n).map(|i| {
                let h = i as f64 * a.dh;
                Row { h, rho: spec.acf(h) }
            }))
        }
        Command::Simulate(a) => {
            let spec = a.model.spec()?;
            if a.n < 2 || !(a.dt > 0.0) || a.paths == 0 {
                return Err(Error::Config("need --n >= 2, --dt > 0 and --paths >= 1".into()));
            }
            #[derive(Serialize)]
            struct Row {
                path: usize,
                i: usize,
                t: f64,
                x: f64,
            }
            let mut rng = rng_stream(a.seed, 0);
            let paths: Vec<Vec<f64>> = match a.method.as_str() {
                "circulant" => {
                    let s = CirculantSampler::new(&spec, a.n, a.dt);
                    if s.approximate() {
                        eprintln!("warning: circulant embedding clipped {:.3e} of its spectrum", s.clipped_fraction());
                    }
                    (0..a.paths).map(|_| s.sample(&mut rng)).collect()
                }
                "cholesky" => {
                    let s = CholeskySampler::new(&spec, a.n, a.dt, 20_000)?;
                    (0..a.paths).map(|_| s.sample(&mut rng)).collect()
                }
                o => return Err(Error::Config(format!("unknown simulation method '{o}'"))),
            };
            io::write_csv(
                &a.out,
                paths.iter().enumerate().flat_map(|(p, x)| {
                    x.iter().enumerate().map(move |(i, v)| Row { path: p, i, t: i as f64 * a.dt, x: *v })
                }),
            )
        }
        Command::Forecast(a) => {
            let mut cfg = match &a.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str::<ForecastConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                }
                None => ForecastConfig::default(),
            };
            if let Some(m) = &a.models {
                cfg.models = parse_list::<ModelId>(m)?;
            }
            if let Some(w) = a.window {
                cfg.window = w;
            }
            if let Some(h) = &a.horizons {
                cfg.horizons = parse_list(h)?;
            }
            if a.cond_depth.is_some() {
                cfg.cond_depth = a.cond_depth;
            }
            if let Some(s) = &a.seasonal {
                cfg.seasonal = match s.as_str() {
                    "daily" => SeasonalRefresh::Daily,
                    "off" => SeasonalRefresh::Off,
                    o => return Err(Error::Config(format!("unknown seasonal mode '{o}'"))),
                };
            }
            cfg.robust_memory |= a.robust;
            cfg.validate()?;
            let mut proxy = io::read_proxy(&a.input, DEFAULT_SESSION_LENGTH, Estimator::BvStar)?;
            if let Some(d) = a.delta {
                let ds = d.seconds(DEFAULT_SESSION_LENGTH);
                proxy.delta_s = ds;
                proxy.session_length = ds * proxy.cells_per_day as f64;
            }
            let records = pipeline::forecast_stage(&proxy, &cfg)?;
            io::write_records(&a.out, &records)
        }
        Command::Evaluate(a) => {
            let records = io::read_records(&a.records)?;
            let outs: Vec<PathBuf> = a.out.split(',').map(|s| PathBuf::from(s.trim())).collect();
            let mcs = McsConfig {
                replications: a.replications,
                block_len: a.block,
                seed: a.seed,
                levels: parse_list(&a.levels)?,
            };
            let ev = pipeline::evaluate_stage(&records, a.mcs.then_some(&mcs), &a.baseline, parse::<LossKind>(&a.loss)?)?;
            pipeline::write_evaluation(&ev, &outs[0], outs.get(1).map(|p| p.as_path()), outs.get(2).map(|p| p.as_path()))
        }
        Command::Signature(a) => {
            let ticks = io::load_ticks(&a.input, a.session_length)?;
            let deltas: Vec<Interval> = parse_list(&a.deltas)?;
            let cfg = SweepConfig {
                proxy: ProxyConfig { estimator: parse(&a.estimator)?, ..ProxyConfig::default() },
                roughness: RoughnessConfig { m: a.m, bootstrap_replications: a.bootstrap, ..RoughnessConfig::default() },
                memory: MemoryConfig::default(),
                plug_in: parse(&a.plug_in)?,
                seed: a.seed,
            };
            io::write_csv(&a.out, signature_sweep(&ticks, &deltas, &cfg))
        }
        Command::Synth(a) => {
            let spec = match &a.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str::<SyntheticSpec>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                }
                None => {
                    let model = match &a.family {
                        Some(f) => Some(ModelSpec::new(parse(f)?, a.alpha, a.memory, a.variance, 1.0)?),
                        None => None,
                    };
                    let mut s = SyntheticSpec::new(model, a.xi, a.ticks_per_day, a.days, a.seed);
                    s.noise_std = a.noise_std;
                    s
                }
            };
            io::save_ticks(&a.out, &synthesize_ticks(&spec)?)
        }
        Command::Run(a) => {
            let mut cfg = PipelineConfig::load(&a.config)?;
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            let m = pipeline::run_pipeline(&cfg, &a.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&m).expect("serializable"));
            Ok(())
        }
    }
}
