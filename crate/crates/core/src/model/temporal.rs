use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Temporal granularities, from coarse to fine. Weeks follow ISO numbering
/// and hang directly under years; bi-weeks pair consecutive weeks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalScale {
    Year,
    Month,
    Biweek,
    Week,
    Day,
}

impl TemporalScale {
    pub fn as_str(self) -> &'static str {
        match self {
            TemporalScale::Year => "year",
            TemporalScale::Month => "month",
            TemporalScale::Biweek => "biweek",
            TemporalScale::Week => "week",
            TemporalScale::Day => "day",
        }
    }

    pub fn is_finer_than(self, other: TemporalScale) -> bool {
        self > other
    }
}

impl fmt::Display for TemporalScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemporalScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "year" => Ok(TemporalScale::Year),
            "month" => Ok(TemporalScale::Month),
            "biweek" | "bi-week" => Ok(TemporalScale::Biweek),
            "week" => Ok(TemporalScale::Week),
            "day" => Ok(TemporalScale::Day),
            other => Err(Error::Config(format!("unknown temporal scale {other:?}"))),
        }
    }
}

// 0001-01-01 is a Monday, so offsets from it align with ISO weeks.
fn day_offset(date: NaiveDate) -> i64 {
    i64::from(date.num_days_from_ce()) - 1
}

fn from_day_offset(offset: i64) -> NaiveDate {
    NaiveDate::from_num_days_from_ce_opt((offset + 1) as i32).expect("date in chrono range")
}

/// A time interval at a fixed scale, identified by its ordinal. Consecutive
/// intervals of the same scale have consecutive ordinals, so ordinal
/// differences are inter-arrival times in units of the scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeInterval {
    pub scale: TemporalScale,
    pub ordinal: i64,
}

impl TimeInterval {
    pub fn of(date: NaiveDate, scale: TemporalScale) -> Self {
        let ordinal = match scale {
            TemporalScale::Year => i64::from(date.year()),
            TemporalScale::Month => i64::from(date.year()) * 12 + i64::from(date.month0()),
            TemporalScale::Biweek => day_offset(date).div_euclid(14),
            TemporalScale::Week => day_offset(date).div_euclid(7),
            TemporalScale::Day => day_offset(date),
        };
        TimeInterval { scale, ordinal }
    }

    pub fn start(&self) -> NaiveDate {
        match self.scale {
            TemporalScale::Year => NaiveDate::from_ymd_opt(self.ordinal as i32, 1, 1).expect("valid year"),
            TemporalScale::Month => NaiveDate::from_ymd_opt(
                self.ordinal.div_euclid(12) as i32,
                self.ordinal.rem_euclid(12) as u32 + 1,
                1,
            )
            .expect("valid month"),
            TemporalScale::Biweek => from_day_offset(self.ordinal * 14),
            TemporalScale::Week => from_day_offset(self.ordinal * 7),
            TemporalScale::Day => from_day_offset(self.ordinal),
        }
    }

    /// Last day of the interval (inclusive).
    pub fn end(&self) -> NaiveDate {
        let next = TimeInterval {
            scale: self.scale,
            ordinal: self.ordinal + 1,
        };
        next.start() - Days::new(1)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        TimeInterval::of(date, self.scale) == *self
    }

    /// True when `other` lies entirely inside this interval.
    pub fn covers(&self, other: &TimeInterval) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    pub fn offset(&self, delta: i64) -> TimeInterval {
        TimeInterval {
            scale: self.scale,
            ordinal: self.ordinal + delta,
        }
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let start = self.start();
        match self.scale {
            TemporalScale::Year => write!(f, "{}", start.year()),
            TemporalScale::Month => write!(f, "{}-{:02}", start.year(), start.month()),
            TemporalScale::Biweek => write!(f, "{}/P2W", start.format("%Y-%m-%d")),
            TemporalScale::Week => {
                let iso = start.iso_week();
                write!(f, "{}-W{:02}", iso.year(), iso.week())
            }
            TemporalScale::Day => write!(f, "{}", start.format("%Y-%m-%d")),
        }
    }
}

impl FromStr for TimeInterval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse time interval {s:?}"));
        if let Some(start) = s.strip_suffix("/P2W") {
            let d = NaiveDate::parse_from_str(start, "%Y-%m-%d").map_err(|_| bad())?;
            if d.weekday() != Weekday::Mon {
                return Err(bad());
            }
            let interval = TimeInterval::of(d, TemporalScale::Biweek);
            return if interval.start() == d { Ok(interval) } else { Err(bad()) };
        }
        if let Some((year, week)) = s.split_once("-W") {
            let year: i32 = year.parse().map_err(|_| bad())?;
            let week: u32 = week.parse().map_err(|_| bad())?;
            let d = NaiveDate::from_isoywd_opt(year, week, Weekday::Mon).ok_or_else(bad)?;
            return Ok(TimeInterval::of(d, TemporalScale::Week));
        }
        let parts: Vec<&str> = s.split('-').collect();
        match parts.as_slice() {
            [y] => {
                let y: i32 = y.parse().map_err(|_| bad())?;
                let d = NaiveDate::from_ymd_opt(y, 1, 1).ok_or_else(bad)?;
                Ok(TimeInterval::of(d, TemporalScale::Year))
            }
            [y, m] => {
                let d = NaiveDate::from_ymd_opt(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?, 1)
                    .ok_or_else(bad)?;
                Ok(TimeInterval::of(d, TemporalScale::Month))
            }
            [_, _, _] => {
                let d = NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad())?;
                Ok(TimeInterval::of(d, TemporalScale::Day))
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for TimeInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A calendar day together with the granularity it is actually known to.
/// Coarse dates store the first day of their interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DayInterval {
    pub start: NaiveDate,
    pub precision: TemporalScale,
}

impl DayInterval {
    pub fn day(date: NaiveDate) -> Self {
        DayInterval {
            start: date,
            precision: TemporalScale::Day,
        }
    }

    pub fn interval(&self) -> TimeInterval {
        TimeInterval::of(self.start, self.precision)
    }
}

impl fmt::Display for DayInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.interval())
    }
}
