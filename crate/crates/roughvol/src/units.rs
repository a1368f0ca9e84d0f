//! Sampling-interval strings such as `15m`, `65m`, `1d`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A sampling interval, either in seconds or in whole trading days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Seconds(f64),
    Days(u32),
}

impl Interval {
    /// Length in seconds given the session length of one trading day.
    pub fn seconds(&self, session_length: f64) -> f64 {
        match self {
            Interval::Seconds(s) => *s,
            Interval::Days(d) => *d as f64 * session_length,
        }
    }
}

impl FromStr for Interval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse interval '{s}' (use e.g. 900s, 15m, 1h, 1d)"));
        let split = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let v: f64 = num.trim().parse().map_err(|_| bad())?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad());
        }
        match unit {
            "" | "s" => Ok(Interval::Seconds(v)),
            "m" | "min" => Ok(Interval::Seconds(60.0 * v)),
            "h" => Ok(Interval::Seconds(3600.0 * v)),
            "d" if v.fract() == 0.0 => Ok(Interval::Days(v as u32)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Days(d) => write!(f, "{d}d"),
            Interval::Seconds(s) if s % 60.0 == 0.0 => write!(f, "{}m", s / 60.0),
            Interval::Seconds(s) => write!(f, "{s}s"),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!("10m".parse::<Interval>().unwrap().seconds(23400.0), 600.0);
        assert_eq!("65m".parse::<Interval>().unwrap().seconds(23400.0), 3900.0);
        assert_eq!("1d".parse::<Interval>().unwrap().seconds(23400.0), 23400.0);
        assert_eq!("900".parse::<Interval>().unwrap().seconds(1.0), 900.0);
        assert_eq!("2h".parse::<Interval>().unwrap(), Interval::Seconds(7200.0));
        for bad in ["", "m", "-5m", "1.5d", "3w"] {
            assert!(bad.parse::<Interval>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trip() {
        for s in ["15m", "65m", "1d", "90s"] {
            assert_eq!(s.parse::<Interval>().unwrap().to_string(), s);
        }
    }
}
