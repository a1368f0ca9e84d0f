//! CSV and JSON file formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use roughvol_core::forecasting::ForecastRecord;
use roughvol_core::market_data::TickSeries;
use roughvol_core::realized_measures::{CellFlag, Estimator, ProxySeries};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?))
}

fn parse_err(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse { path: path.into(), row, msg: format!("{kind:?}") },
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(|e| parse_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct TickRow {
    day: NaiveDate,
    time_s: f64,
    log_price: f64,
}

/// Read a tick file with columns `day,time_s,log_price`, one series per day.
pub fn load_ticks(path: &Path, session_length: f64) -> Result<Vec<TickSeries>> {
    let mut rdr = csv_reader(path)?;
    let mut out: Vec<TickSeries> = Vec::new();
    let mut cur: Option<(NaiveDate, Vec<f64>, Vec<f64>)> = None;
    let finish = |c: (NaiveDate, Vec<f64>, Vec<f64>), out: &mut Vec<TickSeries>| -> Result<()> {
        out.push(TickSeries::new(c.0, c.1, c.2, session_length)?);
        Ok(())
    };
    let headers = rdr.headers().map_err(|e| parse_err(path, e))?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let r: TickRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::Parse { path: path.into(), row: line, msg: e.to_string() })?;
        if !r.time_s.is_finite() || !r.log_price.is_finite() {
            return Err(Error::Parse { path: path.into(), row: line, msg: "non-finite value".into() });
        }
        if r.time_s < 0.0 || r.time_s > session_length {
            return Err(Error::Parse { path: path.into(), row: line, msg: format!("time {} outside the session", r.time_s) });
        }
        match &mut cur {
            Some(c) if c.0 == r.day => {
                if r.time_s <= *c.1.last().unwrap() {
                    return Err(Error::Order { path: path.into(), row: line, day: r.day.to_string() });
                }
                c.1.push(r.time_s);
                c.2.push(r.log_price);
            }
            _ => {
                let prev = cur.as_ref().map(|c| c.0).or(out.last().map(|d| d.day));
                if let Some(p) = prev {
                    if r.day <= p {
                        return Err(Error::Order { path: path.into(), row: line, day: r.day.to_string() });
                    }
                }
                if let Some(c) = cur.take() {
                    finish(c, &mut out)?;
                }
                cur = Some((r.day, vec![r.time_s], vec![r.log_price]));
            }
        }
    }
    if let Some(c) = cur.take() {
        finish(c, &mut out)?;
    }
    if out.is_empty() {
        return Err(Error::Parse { path: path.into(), row: 1, msg: "no tick rows".into() });
    }
    Ok(out)
}

pub fn save_ticks(path: &Path, days: &[TickSeries]) -> Result<()> {
    write_rows(
        path,
        days.iter().flat_map(|d| {
            d.times.iter().zip(&d.log_prices).map(move |(t, p)| TickRow { day: d.day, time_s: *t, log_price: *p })
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct ProxyRow {
    day: NaiveDate,
    cell_index: usize,
    iv_raw: f64,
    seasonal_factor: f64,
    sigma2_hat: f64,
    flag: String,
}

pub fn write_proxy(path: &Path, p: &ProxySeries) -> Result<()> {
    let c = p.cells_per_day;
    write_rows(
        path,
        (0..p.len()).map(|i| ProxyRow {
            day: p.days[i / c],
            cell_index: i % c,
            iv_raw: p.iv_values[i],
            seasonal_factor: p.seasonal_factors[i],
            sigma2_hat: p.values[i],
            flag: p.flags[i].as_str().to_string(),
        }),
    )
}

/// Read a proxy file. Δ is the session length divided by the number of cells per day.
pub fn read_proxy(path: &Path, session_length: f64, estimator: Estimator) -> Result<ProxySeries> {
    let mut rdr = csv_reader(path)?;
    let mut rows = Vec::new();
    for r in rdr.deserialize::<ProxyRow>() {
        rows.push(r.map_err(|e| parse_err(path, e))?);
    }
    if rows.is_empty() {
        return Err(Error::Parse { path: path.into(), row: 1, msg: "no proxy rows".into() });
    }
    let cpd = rows.iter().map(|r| r.cell_index).max().unwrap() + 1;
    if rows.len() % cpd != 0 {
        return Err(Error::Parse { path: path.into(), row: rows.len() + 1, msg: "incomplete final day".into() });
    }
    let mut days = Vec::new();
    let mut flags = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        if r.cell_index != i % cpd || (i % cpd != 0 && r.day != rows[i - 1].day) {
            return Err(Error::Parse { path: path.into(), row: line, msg: "cells must be complete and in order".into() });
        }
        if i % cpd == 0 {
            if days.last().is_some_and(|d| *d >= r.day) {
                return Err(Error::Order { path: path.into(), row: line, day: r.day.to_string() });
            }
            days.push(r.day);
        }
        flags.push(r.flag.parse::<CellFlag>().map_err(|e| Error::Parse { path: path.into(), row: line, msg: e.to_string() })?);
    }
    let delta_s = session_length / cpd as f64;
    Ok(ProxySeries {
        delta_s,
        session_length,
        cells_per_day: cpd,
        day_boundaries: (0..days.len()).map(|d| d * cpd).collect(),
        days,
        values: rows.iter().map(|r| r.sigma2_hat).collect(),
        iv_values: rows.iter().map(|r| r.iv_raw).collect(),
        seasonal_factors: rows.iter().map(|r| r.seasonal_factor).collect(),
        estimator,
        flags,
        fourier_order: 0,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    origin: usize,
    h: usize,
    model: String,
    fo_hat: f64,
    fo_realized: f64,
    #[serde(default = "nan")]
    log_mu: f64,
    #[serde(default = "nan")]
    xi2: f64,
    #[serde(default)]
    floored: bool,
    #[serde(default)]
    error: String,
}

fn nan() -> f64 {
    f64::NAN
}

pub fn write_records(path: &Path, records: &[ForecastRecord]) -> Result<()> {
    write_rows(
        path,
        records.iter().map(|r| RecordRow {
            origin: r.origin,
            h: r.h,
            model: r.model.clone(),
            fo_hat: r.fo_hat,
            fo_realized: r.fo_realized,
            log_mu: r.log_mu,
            xi2: r.xi2,
            floored: r.floored,
            error: r.error.clone().unwrap_or_default(),
        }),
    )
}

pub fn read_records(path: &Path) -> Result<Vec<ForecastRecord>> {
    let mut rdr = csv_reader(path)?;
    let mut out = Vec::new();
    for r in rdr.deserialize::<RecordRow>() {
        let r = r.map_err(|e| parse_err(path, e))?;
        out.push(ForecastRecord {
            origin: r.origin,
            h: r.h,
            model: r.model,
            fo_hat: r.fo_hat,
            fo_realized: r.fo_realized,
            log_mu: r.log_mu,
            xi2: r.xi2,
            floored: r.floored,
            error: if r.error.is_empty() { None } else { Some(r.error) },
        });
    }
    Ok(out)
}

/// Write any serializable row type as CSV with a header.
pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    write_rows(path, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let r = open(path)?;
    serde_json::from_reader(r).map_err(|e| Error::Parse { path: path.into(), row: e.line(), msg: e.to_string() })
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut buf = Vec::new();
    open(path)?.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(sha256_bytes(&buf))
}
