use std::sync::LazyLock;

use chrono::{Datelike, NaiveDate};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DayInterval, TemporalScale};

/// Order of day and month in numeric dates such as `03-04-2021`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateOrder {
    #[default]
    DayMonth,
    MonthDay,
}

static NUMERIC: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{1,2})[-/.](\d{1,2})[-/.](\d{4})\b").unwrap());

/// Guesses the order from the numeric dates of a corpus: a first field
/// above 12 can only be a day, a second field above 12 only a day. Ties,
/// including corpora without evidence, go to day-month.
pub fn infer_date_order<'a>(texts: impl IntoIterator<Item = &'a str>) -> DateOrder {
    let (mut dm, mut md) = (0usize, 0usize);
    for t in texts {
        for c in NUMERIC.captures_iter(t) {
            let a: u32 = c[1].parse().unwrap_or(0);
            let b: u32 = c[2].parse().unwrap_or(0);
            if a > 12 && b <= 12 {
                dm += 1;
            } else if b > 12 && a <= 12 {
                md += 1;
            }
        }
    }
    if md > dm {
        DateOrder::MonthDay
    } else {
        DateOrder::DayMonth
    }
}

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

fn month_number(name: &str) -> Option<u32> {
    let n = name.to_lowercase();
    let n = n.trim_end_matches('.');
    MONTHS
        .iter()
        .position(|m| *m == n || (n.len() >= 3 && m.starts_with(n) && (n.len() == 3 || n == "sept")))
        .map(|i| i as u32 + 1)
}

const MONTH_RE: &str = r"(January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec)\.?";

static ISO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap());
static DAY_MONTH: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?(?:\s+of)?\s+{MONTH_RE}(?:,?\s+(\d{{4}}))?\b")).unwrap()
});
static MONTH_DAY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b{MONTH_RE}\s+(\d{{1,2}})(?:st|nd|rd|th)?\b(?:,?\s+(\d{{4}})\b)?")).unwrap()
});
static MONTH_YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"(?i)\b{MONTH_RE}\s+(\d{{4}})\b")).unwrap());

fn day_of(y: i32, m: u32, d: u32) -> Option<DayInterval> {
    NaiveDate::from_ymd_opt(y, m, d).map(DayInterval::day)
}

// A date without a year takes the publication year, or the year before if
// it would otherwise fall after publication.
fn with_year(m: u32, d: u32, year: Option<&str>, published: Option<NaiveDate>) -> Option<DayInterval> {
    if let Some(y) = year {
        return day_of(y.parse().ok()?, m, d);
    }
    let p = published?;
    let this = day_of(p.year(), m, d)?;
    if this.start > p {
        day_of(p.year() - 1, m, d)
    } else {
        Some(this)
    }
}

/// First date expression in `text` with its byte offset, if any.
pub fn find_date(text: &str, order: DateOrder, published: Option<NaiveDate>) -> Option<(usize, DayInterval)> {
    let mut found: Vec<(usize, DayInterval)> = Vec::new();
    for c in ISO.captures_iter(text) {
        if let Some(d) = day_of(c[1].parse().ok()?, c[2].parse().ok()?, c[3].parse().ok()?) {
            found.push((c.get(0)?.start(), d));
        }
    }
    for c in NUMERIC.captures_iter(text) {
        let (a, b): (u32, u32) = (c[1].parse().ok()?, c[2].parse().ok()?);
        let (d, m) = match order {
            DateOrder::DayMonth => (a, b),
            DateOrder::MonthDay => (b, a),
        };
        if let Some(x) = day_of(c[3].parse().ok()?, m, d) {
            found.push((c.get(0)?.start(), x));
        }
    }
    for c in DAY_MONTH.captures_iter(text) {
        let m = month_number(&c[2])?;
        if let Some(x) = with_year(m, c[1].parse().ok()?, c.get(3).map(|y| y.as_str()), published) {
            found.push((c.get(0)?.start(), x));
        }
    }
    for c in MONTH_DAY.captures_iter(text) {
        let m = month_number(&c[1])?;
        if let Some(x) = with_year(m, c[2].parse().ok()?, c.get(3).map(|y| y.as_str()), published) {
            found.push((c.get(0)?.start(), x));
        }
    }
    for c in MONTH_YEAR.captures_iter(text) {
        let m = month_number(&c[1])?;
        let start = c.get(0)?.start();
        if found.iter().any(|(s, _)| *s == start) {
            continue;
        }
        if let Some(x) = NaiveDate::from_ymd_opt(c[2].parse().ok()?, m, 1) {
            found.push((
                start,
                DayInterval {
                    start: x,
                    precision: TemporalScale::Month,
                },
            ));
        }
    }
    found.into_iter().min_by_key(|(s, d)| (*s, std::cmp::Reverse(d.precision)))
}

/// Normalizes a date field. Accepts ISO days, months (`2021-03`, `03-2021`)
/// and years, numeric days in the given order, and written-out dates.
pub fn normalize_date(raw: &str, order: DateOrder, published: Option<NaiveDate>) -> Result<DayInterval> {
    let s = raw.trim();
    let bad = || Error::UnparseableDate(raw.to_owned());
    if let Some(d) = crate::model::parse_iso_day_interval(s) {
        return Ok(d);
    }
    let parts: Vec<&str> = s.split(['-', '/', '.']).collect();
    if let [m, y] = parts.as_slice() {
        if y.len() == 4 && m.len() <= 2 {
            let date = NaiveDate::from_ymd_opt(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?, 1)
                .ok_or_else(bad)?;
            return Ok(DayInterval {
                start: date,
                precision: TemporalScale::Month,
            });
        }
    }
    match find_date(s, order, published) {
        Some((0, d)) => Ok(d),
        _ => Err(bad()),
    }
}
