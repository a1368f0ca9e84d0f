//! Model confidence set with a circular block bootstrap.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::rng_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsConfig {
    pub replications: usize,
    pub block_len: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
}

impl Default for McsConfig {
    fn default() -> Self {
        McsConfig { replications: 25_000, block_len: 6, seed: 0, levels: vec![0.75, 0.90] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsStep {
    pub model: String,
    /// p-value of the equivalence test at the step the model was removed.
    pub p_value: f64,
    /// Running maximum of the elimination p-values.
    pub mcs_p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsLevel {
    pub level: f64,
    pub surviving: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsResult {
    /// Elimination order; the last entry is the final survivor with MCS p-value 1.
    pub steps: Vec<McsStep>,
    pub levels: Vec<McsLevel>,
    pub replications: usize,
    pub block_len: usize,
    pub seed: u64,
    pub statistic: String,
}

impl McsResult {
    pub fn p_value(&self, model: &str) -> Option<f64> {
        self.steps.iter().find(|s| s.model == model).map(|s| s.mcs_p_value)
    }

    pub fn surviving(&self, level: f64) -> Option<&[String]> {
        self.levels.iter().find(|l| (l.level - level).abs() < 1e-12).map(|l| l.surviving.as_slice())
    }
}

/// Bootstrap means of every model's loss, `means[b * m + i]`.
fn bootstrap_means(losses: &[&[f64]], cfg: &McsConfig) -> Vec<f64> {
    let m = losses.len();
    let n = losses[0].len();
    let bl = cfg.block_len.clamp(1, n);
    let prefix: Vec<Vec<f64>> = losses
        .iter()
        .map(|l| {
            let mut p = Vec::with_capacity(2 * n + 1);
            p.push(0.0);
            for k in 0..2 * n {
                p.push(p[k] + l[k % n]);
            }
            p
        })
        .collect();
    let mut rng = rng_stream(cfg.seed, 0);
    let mut out = vec![0.0; cfg.replications * m];
    let mut starts = Vec::with_capacity(n / bl + 1);
    for b in 0..cfg.replications {
        starts.clear();
        let mut left = n;
        while left > 0 {
            let len = bl.min(left);
            starts.push((rng.random_range(0..n), len));
            left -= len;
        }
        for (i, p) in prefix.iter().enumerate() {
            let s: f64 = starts.iter().map(|(s, len)| p[s + len] - p[*s]).sum();
            out[b * m + i] = s / n as f64;
        }
    }
    out
}

/// Iterative elimination with the range statistic max_{i,j} |t_ij|, removing argmax_i max_j t_ij.
pub fn model_confidence_set(names: &[String], losses: &[&[f64]], cfg: &McsConfig) -> Result<McsResult> {
    let m = losses.len();
    if m < 2 || names.len() != m {
        return Err(invalid("at least two named loss series are required"));
    }
    let n = losses[0].len();
    if n < 2 || losses.iter().any(|l| l.len() != n) {
        return Err(Error::MisalignedRecords("loss series must have equal length of at least 2".into()));
    }
    if losses.iter().any(|l| l.iter().any(|v| !v.is_finite())) {
        return Err(Error::Domain("losses must be finite".into()));
    }
    if cfg.replications < 100 {
        return Err(invalid("at least 100 bootstrap replications are required"));
    }
    if cfg.block_len == 0 || cfg.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(invalid("block length must be positive and levels inside (0, 1)"));
    }
    let means: Vec<f64> = losses.iter().map(|l| l.iter().sum::<f64>() / n as f64).collect();
    let boot = bootstrap_means(losses, cfg);
    let nb = cfg.replications;
    let mut var = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = means[i] - means[j];
            let mut s = 0.0;
            for b in 0..nb {
                let e = boot[b * m + i] - boot[b * m + j] - d;
                s += e * e;
            }
            var[i * m + j] = s / nb as f64;
            var[j * m + i] = var[i * m + j];
        }
    }
    let t_of = |i: usize, j: usize, num: f64| -> f64 {
        let v = var[i * m + j];
        if v > 0.0 {
            num / libm::sqrt(v)
        } else if num == 0.0 {
            0.0
        } else {
            num.signum() * f64::INFINITY
        }
    };
    let mut alive: Vec<usize> = (0..m).collect();
    let mut steps = Vec::new();
    let mut running = 0.0f64;
    while alive.len() > 1 {
        let mut stat = 0.0f64;
        let mut worst = (alive[0], f64::NEG_INFINITY);
        for &i in &alive {
            let mut row = f64::NEG_INFINITY;
            for &j in &alive {
                if i != j {
                    let t = t_of(i, j, means[i] - means[j]);
                    stat = stat.max(t.abs());
                    row = row.max(t);
                }
            }
            if row > worst.1 {
                worst = (i, row);
            }
        }
        let mut exceed = 0usize;
        for b in 0..nb {
            let mut tb = 0.0f64;
            for (a, &i) in alive.iter().enumerate() {
                for &j in &alive[a + 1..] {
                    let num = boot[b * m + i] - boot[b * m + j] - (means[i] - means[j]);
                    tb = tb.max(t_of(i, j, num).abs());
                }
            }
            if tb >= stat {
                exceed += 1;
            }
        }
        let p = exceed as f64 / nb as f64;
        running = running.max(p);
        steps.push(McsStep { model: names[worst.0].clone(), p_value: p, mcs_p_value: running });
        alive.retain(|k| *k != worst.0);
    }
    steps.push(McsStep { model: names[alive[0]].clone(), p_value: 1.0, mcs_p_value: 1.0 });
    let levels = cfg
        .levels
        .iter()
        .map(|&level| McsLevel {
            level,
            surviving: steps.iter().filter(|s| s.mcs_p_value >= 1.0 - level).map(|s| s.model.clone()).collect(),
        })
        .collect();
    Ok(McsResult {
        steps,
        levels,
        replications: nb,
        block_len: cfg.block_len,
        seed: cfg.seed,
        statistic: String::from("range"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| alloc::format!("m{i}")).collect()
    }

    fn cfg(seed: u64) -> McsConfig {
        McsConfig { replications: 500, block_len: 6, seed, levels: vec![0.75, 0.9] }
    }

    #[test]
    fn identical_losses_all_survive() {
        let l = [1.0, 2.0, 0.5, 3.0, 1.5, 0.7];
        let r = model_confidence_set(&names(3), &[&l, &l, &l], &cfg(1)).unwrap();
        assert!(r.steps.iter().all(|s| s.mcs_p_value == 1.0));
        assert_eq!(r.surviving(0.75).unwrap().len(), 3);
    }

    #[test]
    fn large_constant_gap_is_eliminated() {
        let mut rng = rng_stream(3, 0);
        let a: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 10.0).collect();
        let r = model_confidence_set(&names(2), &[&a, &b], &cfg(2)).unwrap();
        assert_eq!(r.surviving(0.75).unwrap(), ["m0"]);
        assert_eq!(r.surviving(0.9).unwrap(), ["m0"]);
        assert_eq!(r.steps[0].model, "m1");
    }

    #[test]
    fn nested_levels_and_determinism() {
        let mut rng = rng_stream(4, 0);
        let series: Vec<Vec<f64>> = (0..5)
            .map(|k| (0..200).map(|_| 0.02 * k as f64 + { let e: f64 = StandardNormal.sample(&mut rng); e }).collect())
            .collect();
        let refs: Vec<&[f64]> = series.iter().map(|s| s.as_slice()).collect();
        let r = model_confidence_set(&names(5), &refs, &cfg(9)).unwrap();
        let s75 = r.surviving(0.75).unwrap();
        let s90 = r.surviving(0.9).unwrap();
        assert!(!s75.is_empty());
        assert!(s75.iter().all(|m| s90.contains(m)));
        assert_eq!(r, model_confidence_set(&names(5), &refs, &cfg(9)).unwrap());
        let mut last = 0.0;
        for s in &r.steps {
            assert!(s.mcs_p_value >= last);
            last = s.mcs_p_value;
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = [1.0, 2.0, 3.0];
        assert!(model_confidence_set(&names(1), &[&a], &cfg(0)).is_err());
        assert!(model_confidence_set(&names(2), &[&a, &a[..2]], &cfg(0)).is_err());
        let few = McsConfig { replications: 10, ..cfg(0) };
        assert!(model_confidence_set(&names(2), &[&a, &a], &few).is_err());
    }
}
