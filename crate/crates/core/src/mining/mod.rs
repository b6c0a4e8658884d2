//! Periodic-frequent spatial patterns and multidimensional patterns.

mod multidim;
mod spatial;

pub use multidim::{expand_hierarchies, mine_multidimensional, ExpandedTransaction, Tuple};
pub use spatial::{mine_spatial, Closeness};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{NodeId, TimeInterval};

/// Maximum inter-arrival time, in units of the temporal scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gap {
    Finite(i64),
    /// Disables the periodicity condition (static mining).
    Infinite,
}

impl Gap {
    pub fn admits(self, gap: i64) -> bool {
        match self {
            Gap::Finite(iota) => gap <= iota,
            Gap::Infinite => true,
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gap::Finite(i) => write!(f, "{i}"),
            Gap::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Gap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Gap::Infinite);
        }
        match s.parse::<i64>() {
            Ok(i) if i >= 1 => Ok(Gap::Finite(i)),
            _ => Err(Error::Config(format!("iota must be a positive integer or inf, got {s:?}"))),
        }
    }
}

impl Serialize for Gap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gap::Finite(i) => s.serialize_i64(*i),
            Gap::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Gap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match Scalar::deserialize(deserializer)? {
            Scalar::Int(i) => i.to_string().parse(),
            Scalar::Float(f) if f.is_infinite() && f > 0.0 => Ok(Gap::Infinite),
            Scalar::Float(f) => Err(Error::Config(format!("iota must be an integer, got {f}"))),
            Scalar::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Str(String),
}

/// Minimum period-support (or support, in static mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSupport {
    Count(usize),
    /// Fraction of the possible gaps, in (0, 1].
    Fraction(f64),
}

impl MinSupport {
    /// Absolute threshold for a database of `transactions` transactions.
    /// Fractions scale the number of gaps, `transactions - 1`, or the number
    /// of transactions when the gap is infinite.
    pub fn threshold(self, transactions: usize, iota: Gap) -> usize {
        match self {
            MinSupport::Count(c) => c,
            MinSupport::Fraction(f) => {
                let base = match iota {
                    Gap::Finite(_) => transactions.saturating_sub(1),
                    Gap::Infinite => transactions,
                };
                ((f * base as f64 + 0.5).floor() as usize).max(1)
            }
        }
    }
}

impl fmt::Display for MinSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSupport::Count(c) => write!(f, "{c}"),
            MinSupport::Fraction(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for MinSupport {
    type Err = Error;

    /// Integers are counts, decimals are fractions.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("rho must be a positive count or a fraction in (0, 1], got {s:?}"));
        if let Ok(c) = s.parse::<usize>() {
            return if c >= 1 { Ok(MinSupport::Count(c)) } else { Err(bad()) };
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f <= 1.0 => Ok(MinSupport::Fraction(f)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for MinSupport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MinSupport::Count(c) => s.serialize_u64(*c as u64),
            MinSupport::Fraction(f) => s.serialize_f64(*f),
        }
    }
}

impl<'de> Deserialize<'de> for MinSupport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match Scalar::deserialize(deserializer)? {
            Scalar::Int(i) => i.to_string().parse(),
            Scalar::Float(f) if f > 0.0 && f <= 1.0 => Ok(MinSupport::Fraction(f)),
            Scalar::Float(f) => Err(Error::Config(format!("rho fraction must lie in (0, 1], got {f}"))),
            Scalar::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiningParams {
    pub iota: Gap,
    pub rho: MinSupport,
    /// Distance bound for spatial patterns; unused by multidimensional mining.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_km: Option<f64>,
}

impl MiningParams {
    pub fn new(iota: Gap, rho: MinSupport) -> Self {
        MiningParams {
            iota,
            rho,
            alpha_km: None,
        }
    }

    fn passes(&self, occurrences: &[i64], support: usize, threshold: usize) -> bool {
        match self.iota {
            Gap::Finite(_) => period_support(occurrences, self.iota) >= threshold,
            Gap::Infinite => support >= threshold,
        }
    }
}

/// Number of consecutive inter-arrival gaps no larger than `iota`.
pub fn period_support(occurrences: &[i64], iota: Gap) -> usize {
    occurrences.windows(2).filter(|w| iota.admits(w[1] - w[0])).count()
}

/// All gaps, including those from the horizon start to the first occurrence
/// and from the last occurrence to the horizon end, are at most `iota`.
pub fn is_full_periodic(occurrences: &[i64], iota: Gap, horizon: (i64, i64)) -> bool {
    let (Some(&first), Some(&last)) = (occurrences.first(), occurrences.last()) else {
        return false;
    };
    iota.admits(first - horizon.0)
        && iota.admits(horizon.1 - last)
        && occurrences.windows(2).all(|w| iota.admits(w[1] - w[0]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternItems {
    Spatial(Vec<NodeId>),
    Tuple(Tuple),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternResult {
    #[serde(skip)]
    pub items: PatternItems,
    /// Items joined with `-` (spatial) or `|` (tuples), by label.
    pub label: String,
    /// Node keys of the items.
    pub keys: Vec<String>,
    pub support: usize,
    pub period_support: usize,
    pub full_periodic: bool,
    pub occurrences: Vec<TimeInterval>,
}

impl PatternResult {
    pub fn len(&self) -> usize {
        match &self.items {
            PatternItems::Spatial(v) => v.len(),
            PatternItems::Tuple(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MiningMode {
    Spatial,
    Multidimensional,
}

/// Mined patterns together with the parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternSet {
    pub mode: MiningMode,
    pub params: MiningParams,
    /// Absolute minimum (period-)support derived from `params.rho`.
    pub threshold: usize,
    pub transactions: usize,
    pub horizon: Option<(TimeInterval, TimeInterval)>,
    pub patterns: Vec<PatternResult>,
}

impl PatternSet {
    pub fn full_periodic(&self) -> impl Iterator<Item = &PatternResult> {
        self.patterns.iter().filter(|p| p.full_periodic)
    }

    pub fn find(&self, label: &str) -> Option<&PatternResult> {
        self.patterns.iter().find(|p| p.label == label)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["items", "support", "period_support", "full_periodic"])?;
        for p in &self.patterns {
            w.write_record([
                p.label.as_str(),
                &p.support.to_string(),
                &p.period_support.to_string(),
                &p.full_periodic.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<patterns>", e))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}
