use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::EventDatabase;
use crate::similarity::Matching;

/// Reporting lag of one matched pair, first (candidate) minus second
/// (reference) system, in days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairLag {
    pub first_record: String,
    pub second_record: String,
    pub first_date: NaiveDate,
    pub second_date: NaiveDate,
    pub lag_days: i64,
}

/// Counts and averages in the layout of a pairwise timeliness table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelinessSummary {
    pub pairs: usize,
    pub first_earlier: usize,
    pub first_earlier_pct: f64,
    /// First system earlier by at least `advance_days`.
    pub first_earlier_by_advance: usize,
    pub second_earlier: usize,
    pub second_earlier_pct: f64,
    pub second_earlier_by_advance: usize,
    pub advance_days: i64,
    /// Mean delay of the first system over the pairs where it is late.
    pub first_average_delay: Option<f64>,
    pub second_average_delay: Option<f64>,
    /// Delay score of the first system against the second.
    pub first_delay_score: f64,
    pub second_delay_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeliness {
    pub decay_days: f64,
    /// Mean of `1 - exp(-delay / L)`: 0 when never late.
    pub delay_score: f64,
    /// `1 - delay_score`: 1 when never late.
    pub timeliness: f64,
    pub summary: TimelinessSummary,
    pub lags: Vec<PairLag>,
}

/// Mean of `1 - exp(-max(0, d) / L)` over the lags.
pub fn delay_score(lags: impl IntoIterator<Item = i64>, decay_days: f64) -> f64 {
    let (sum, n) = lags
        .into_iter()
        .fold((0.0, 0usize), |(s, n), d| (s + 1.0 - (-(d.max(0) as f64) / decay_days).exp(), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn mean(v: impl Iterator<Item = i64>) -> Option<f64> {
    let (s, n) = v.fold((0i64, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s as f64 / n as f64)
}

/// Timeliness of `first` (the matching's first database) against `second`.
pub fn timeliness(
    matching: &Matching,
    first: &EventDatabase,
    second: &EventDatabase,
    decay_days: f64,
    advance_days: i64,
) -> Result<Timeliness> {
    if matching.is_empty() {
        return Err(Error::Undefined("timeliness needs at least one matched pair".into()));
    }
    if !(decay_days > 0.0) {
        return Err(Error::Config(format!("decay window must be positive, got {decay_days}")));
    }
    let lags: Vec<PairLag> = matching
        .pairs
        .iter()
        .map(|p| {
            let a = &first.events()[p.db1];
            let b = &second.events()[p.db2];
            PairLag {
                first_record: a.record_id.clone(),
                second_record: b.record_id.clone(),
                first_date: a.day(),
                second_date: b.day(),
                lag_days: (a.day() - b.day()).num_days(),
            }
        })
        .collect();
    let n = lags.len();
    let lag = || lags.iter().map(|l| l.lag_days);
    let first_earlier = lag().filter(|&d| d < 0).count();
    let second_earlier = lag().filter(|&d| d > 0).count();
    let first_score = delay_score(lag(), decay_days);
    let summary = TimelinessSummary {
        pairs: n,
        first_earlier,
        first_earlier_pct: 100.0 * first_earlier as f64 / n as f64,
        first_earlier_by_advance: lag().filter(|&d| d <= -advance_days).count(),
        second_earlier,
        second_earlier_pct: 100.0 * second_earlier as f64 / n as f64,
        second_earlier_by_advance: lag().filter(|&d| d >= advance_days).count(),
        advance_days,
        first_average_delay: mean(lag().filter(|&d| d > 0)),
        second_average_delay: mean(lag().filter(|&d| d < 0).map(|d| -d)),
        first_delay_score: first_score,
        second_delay_score: delay_score(lag().map(|d| -d), decay_days),
    };
    Ok(Timeliness {
        decay_days,
        delay_score: first_score,
        timeliness: 1.0 - first_score,
        summary,
        lags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DayInterval, Dimension, Event, Hierarchies, Hierarchy, Report};
    use crate::similarity::{MatchedPair, SimilarityMatrix};
    use std::sync::Arc;

    fn setup(first_days: &[i64], second_days: &[i64]) -> (EventDatabase, EventDatabase, Matching) {
        let h = Arc::new(
            Hierarchies::new(
                Hierarchy::flat(Dimension::Location, ["z"]).unwrap(),
                Hierarchy::flat(Dimension::Disease, ["d"]).unwrap(),
                Hierarchy::flat(Dimension::Host, ["h"]).unwrap(),
                Hierarchy::flat(Dimension::Source, ["s"]).unwrap(),
            )
            .unwrap(),
        );
        let base = NaiveDate::from_ymd_opt(2021, 6, 1).unwrap();
        let mk = |days: &[i64], sys: &str| {
            let events = days
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let day = base.checked_add_signed(chrono::Duration::days(d)).unwrap();
                    Event {
                        system: sys.into(),
                        record_id: format!("{sys}{i}"),
                        location: h.location.get("z").unwrap(),
                        date: DayInterval::day(day),
                        disease: h.disease.get("d").unwrap(),
                        host: h.host.get("h").unwrap(),
                        source: h.source.get("s").unwrap(),
                        reports: vec![Report {
                            outlet: h.source.get("s").unwrap(),
                            date: day,
                        }],
                    }
                })
                .collect();
            EventDatabase::new(sys, h.clone(), events).unwrap()
        };
        let a = mk(first_days, "a");
        let b = mk(second_days, "b");
        let n = first_days.len();
        let mut m = Matching::solve(&SimilarityMatrix::from_scores(vec![0.0; n * n], n, n), f64::NEG_INFINITY);
        m.pairs = (0..n).map(|i| MatchedPair { db1: i, db2: i, score: 1.0 }).collect();
        (a, b, m)
    }

    #[test]
    fn all_early_is_zero() {
        let (a, b, m) = setup(&[0, 3, 10], &[0, 5, 40]);
        let t = timeliness(&m, &a, &b, 21.0, 30).unwrap();
        assert_eq!(t.delay_score, 0.0);
        assert_eq!(t.timeliness, 1.0);
        assert_eq!(t.summary.first_earlier, 2);
        assert_eq!(t.summary.first_earlier_by_advance, 1);
        assert_eq!(t.summary.first_average_delay, None);
    }

    #[test]
    fn one_window_of_delay() {
        let (a, b, m) = setup(&[21], &[0]);
        let t = timeliness(&m, &a, &b, 21.0, 30).unwrap();
        assert!((t.delay_score - (1.0 - (-1f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn hand_set_summary() {
        // lags: -40, -5, 0, +10, +35
        let (a, b, m) = setup(&[0, 10, 20, 40, 75], &[40, 15, 20, 30, 40]);
        let s = timeliness(&m, &a, &b, 21.0, 30).unwrap().summary;
        assert_eq!((s.pairs, s.first_earlier, s.first_earlier_by_advance), (5, 2, 1));
        assert_eq!((s.second_earlier, s.second_earlier_by_advance), (2, 1));
        assert_eq!(s.first_earlier_pct, 40.0);
        assert_eq!(s.first_average_delay, Some(22.5));
        assert_eq!(s.second_average_delay, Some(22.5));
        let expect_first = ((1.0 - (-10f64 / 21.0).exp()) + (1.0 - (-35f64 / 21.0).exp())) / 5.0;
        assert!((s.first_delay_score - expect_first).abs() < 1e-15);
    }

    #[test]
    fn empty_matching_is_an_error() {
        let (a, b, mut m) = setup(&[0], &[0]);
        m.pairs.clear();
        assert!(timeliness(&m, &a, &b, 21.0, 30).is_err());
    }

    #[test]
    fn delay_score_is_monotone() {
        let mut prev = 0.0;
        for d in 0..100 {
            let s = delay_score([d], 21.0);
            assert!(s >= prev);
            assert!(delay_score([d], 10.0) >= s);
            prev = s;
        }
    }
}
