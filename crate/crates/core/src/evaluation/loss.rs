//! MSE / QLIKE scoring of forecast records.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::forecasting::ForecastRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Qlike,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::Qlike => "qlike",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "qlike" => Ok(LossKind::Qlike),
            o => Err(invalid(alloc::format!("unknown loss '{o}'"))),
        }
    }
}

pub fn mse_term(fo_hat: f64, fo: f64) -> f64 {
    (fo_hat - fo) * (fo_hat - fo)
}

pub fn qlike_term(fo_hat: f64, fo: f64) -> f64 {
    libm::log(fo_hat) + fo / fo_hat
}

/// Per-origin losses of one model at one horizon, on the common origin set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSeries {
    pub model: String,
    pub h: usize,
    pub origins: Vec<usize>,
    pub mse: Vec<f64>,
    pub qlike: Vec<f64>,
    pub floored: usize,
}

impl LossSeries {
    pub fn get(&self, kind: LossKind) -> &[f64] {
        match kind {
            LossKind::Mse => &self.mse,
            LossKind::Qlike => &self.qlike,
        }
    }

    pub fn mean(&self, kind: LossKind) -> f64 {
        let v = self.get(kind);
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossEntry {
    pub model: String,
    pub h: usize,
    pub mse: f64,
    pub qlike: f64,
    pub count: usize,
    pub floored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub entries: Vec<LossEntry>,
    pub series: Vec<LossSeries>,
}

impl LossTable {
    pub fn horizons(&self) -> Vec<usize> {
        self.series.iter().map(|s| s.h).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn models(&self, h: usize) -> Vec<&str> {
        self.series.iter().filter(|s| s.h == h).map(|s| s.model.as_str()).collect()
    }

    pub fn series(&self, model: &str, h: usize) -> Option<&LossSeries> {
        self.series.iter().find(|s| s.model == model && s.h == h)
    }

    pub fn entry(&self, model: &str, h: usize) -> Option<&LossEntry> {
        self.entries.iter().find(|s| s.model == model && s.h == h)
    }

    /// Model with the lowest mean loss at horizon h.
    pub fn best(&self, h: usize, kind: LossKind) -> Option<&str> {
        self.series
            .iter()
            .filter(|s| s.h == h)
            .min_by(|a, b| a.mean(kind).total_cmp(&b.mean(kind)))
            .map(|s| s.model.as_str())
    }
}

/// Mean losses per (model, h) over the origins where every model has a finite forecast and the
/// realized value is finite. Non-positive forecasts are floored at the smallest positive realized
/// value at that horizon.
pub fn score(records: &[ForecastRecord]) -> Result<LossTable> {
    let mut by_h: BTreeMap<usize, BTreeMap<&str, BTreeMap<usize, &ForecastRecord>>> = BTreeMap::new();
    for r in records {
        by_h.entry(r.h).or_default().entry(r.model.as_str()).or_default().insert(r.origin, r);
    }
    let mut entries = Vec::new();
    let mut series = Vec::new();
    for (h, models) in &by_h {
        let mut common: Option<BTreeSet<usize>> = None;
        for recs in models.values() {
            let ok: BTreeSet<usize> = recs
                .iter()
                .filter(|(_, r)| r.fo_hat.is_finite() && r.fo_realized.is_finite())
                .map(|(o, _)| *o)
                .collect();
            common = Some(match common {
                None => ok,
                Some(c) => c.intersection(&ok).copied().collect(),
            });
        }
        let origins: Vec<usize> = common.unwrap_or_default().into_iter().collect();
        if origins.is_empty() {
            return Err(Error::MisalignedRecords(alloc::format!("no common origins at h = {h}")));
        }
        let first = models.values().next().unwrap();
        let floor = origins
            .iter()
            .map(|o| first[o].fo_realized)
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        for (model, recs) in models {
            let mut s = LossSeries {
                model: String::from(*model),
                h: *h,
                origins: origins.clone(),
                mse: Vec::with_capacity(origins.len()),
                qlike: Vec::with_capacity(origins.len()),
                floored: 0,
            };
            for o in &origins {
                let r = recs[o];
                let mut f = r.fo_hat;
                if !(f > 0.0) {
                    if !floor.is_finite() {
                        return Err(Error::NonPositiveForecast { model: r.model.clone(), value: f });
                    }
                    f = floor;
                    s.floored += 1;
                }
                s.mse.push(mse_term(r.fo_hat, r.fo_realized));
                s.qlike.push(qlike_term(f, r.fo_realized));
            }
            entries.push(LossEntry {
                model: s.model.clone(),
                h: *h,
                mse: s.mean(LossKind::Mse),
                qlike: s.mean(LossKind::Qlike),
                count: origins.len(),
                floored: s.floored,
            });
            series.push(s);
        }
    }
    Ok(LossTable { entries, series })
}

/// Running sum of loss(model) - loss(baseline).
pub fn cumulative_difference(loss: &[f64], baseline: &[f64]) -> Result<Vec<f64>> {
    if loss.len() != baseline.len() {
        return Err(Error::MisalignedRecords(alloc::format!("{} vs {} losses", loss.len(), baseline.len())));
    }
    let mut acc = 0.0;
    Ok(loss
        .iter()
        .zip(baseline)
        .map(|(a, b)| {
            acc += a - b;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeLoss {
    pub model: String,
    pub origins: Vec<usize>,
    pub values: Vec<f64>,
}

/// Cumulative loss of every model relative to `baseline` at horizon h; positive means worse.
pub fn cumulative_relative_loss(table: &LossTable, baseline: &str, h: usize, kind: LossKind) -> Result<Vec<CumulativeLoss>> {
    let base = table
        .series(baseline, h)
        .ok_or_else(|| Error::MisalignedRecords(alloc::format!("baseline '{baseline}' has no records at h = {h}")))?;
    table
        .series
        .iter()
        .filter(|s| s.h == h)
        .map(|s| {
            if s.origins != base.origins {
                return Err(Error::MisalignedRecords(alloc::format!("{} and {baseline} differ in origins", s.model)));
            }
            Ok(CumulativeLoss {
                model: s.model.clone(),
                origins: s.origins.clone(),
                values: cumulative_difference(s.get(kind), base.get(kind))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(o: usize, model: &str, fo_hat: f64, fo: f64) -> ForecastRecord {
        ForecastRecord {
            origin: o,
            h: 1,
            model: model.into(),
            fo_hat,
            fo_realized: fo,
            log_mu: f64::NAN,
            xi2: f64::NAN,
            floored: false,
            error: None,
        }
    }

    #[test]
    fn perfect_forecast_identities() {
        let fo = [0.3, 1.2, 0.05, 2.0];
        let recs: Vec<_> = fo.iter().enumerate().map(|(i, v)| rec(i, "a", *v, *v)).collect();
        let t = score(&recs).unwrap();
        let e = t.entry("a", 1).unwrap();
        assert_eq!(e.mse, 0.0);
        let q = fo.iter().map(|v| libm::log(*v) + 1.0).sum::<f64>() / 4.0;
        assert_eq!(e.qlike, q);
    }

    #[test]
    fn doubled_forecast() {
        let recs = [rec(0, "a", 2.0, 1.0)];
        let s = score(&recs).unwrap();
        assert!((s.series[0].qlike[0] - (libm::log(2.0) + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn qlike_minimized_at_truth() {
        let fo = 0.7;
        let grid: Vec<f64> = (1..2000).map(|i| i as f64 * 0.001).collect();
        let best = grid.iter().copied().min_by(|a, b| qlike_term(*a, fo).total_cmp(&qlike_term(*b, fo))).unwrap();
        assert!((best - fo).abs() < 1e-9);
    }

    #[test]
    fn alignment_and_flooring() {
        let recs = [
            rec(0, "a", 1.0, 1.0),
            rec(1, "a", f64::NAN, 1.0),
            rec(2, "a", -1.0, 0.5),
            rec(0, "b", 1.0, 1.0),
            rec(1, "b", 1.0, 1.0),
            rec(2, "b", 1.0, 0.5),
        ];
        let t = score(&recs).unwrap();
        let a = t.series("a", 1).unwrap();
        assert_eq!(a.origins, [0, 2]);
        assert_eq!(a.floored, 1);
        assert_eq!(a.qlike[1], qlike_term(0.5, 0.5));
        assert_eq!(t.series("b", 1).unwrap().origins, [0, 2]);
    }

    #[test]
    fn cumulative_identities() {
        let base = [1.0, 2.0, 0.5, 0.25];
        let worse: Vec<f64> = base.iter().map(|v| v + 0.3).collect();
        assert!(cumulative_difference(&base, &base).unwrap().iter().all(|v| *v == 0.0));
        let c = cumulative_difference(&worse, &base).unwrap();
        for (i, v) in c.iter().enumerate() {
            assert!((v - 0.3 * (i + 1) as f64).abs() < 1e-12);
        }
        assert!(cumulative_difference(&base[..2], &base).is_err());
    }
}
