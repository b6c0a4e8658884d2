//! Event similarity and event matching.

mod hungarian;
mod matching;

pub use hungarian::{assignment_value, max_weight_assignment};
pub use matching::{match_events, Matching, MatchedPair, SimilarityMatrix};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Event, Hierarchies, Hierarchy, NodeId};

/// Penalties for unlinked values and the date window, in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityParams {
    pub sigma_location: f64,
    pub sigma_disease: f64,
    pub sigma_host: f64,
    pub window_days: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            sigma_location: 1.0,
            sigma_disease: 1.0,
            sigma_host: 1.0,
            window_days: 21.0,
        }
    }
}

impl SimilarityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_location", self.sigma_location),
            ("sigma_disease", self.sigma_disease),
            ("sigma_host", self.sigma_host),
            ("window_days", self.window_days),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a positive number, got {v}")));
            }
        }
        Ok(())
    }
}

/// Depth-based similarity of two nodes of one hierarchy: the depth of their
/// common ancestor relative to their mean depth when one subsumes the
/// other, `-sigma` otherwise.
pub fn semantic_similarity(h: &Hierarchy, x: NodeId, y: NodeId, sigma: f64) -> Result<f64> {
    h.check(x)?;
    h.check(y)?;
    if x == y {
        return Ok(1.0);
    }
    if !h.linked(x, y) {
        return Ok(-sigma);
    }
    let (dx, dy) = (h.depth(x), h.depth(y));
    let common = dx.min(dy);
    Ok(2.0 * f64::from(common) / f64::from(dx + dy))
}

/// `1 - |t2 - t1| / L`, unclamped.
pub fn date_similarity(t1: NaiveDate, t2: NaiveDate, window_days: f64) -> f64 {
    let gap = (t2 - t1).num_days().abs() as f64;
    1.0 - gap / window_days
}

/// Sum of the location, date, disease and host similarities. Sources are
/// not compared.
pub fn event_similarity(h: &Hierarchies, a: &Event, b: &Event, params: &SimilarityParams) -> Result<f64> {
    Ok(semantic_similarity(&h.location, a.location, b.location, params.sigma_location)?
        + date_similarity(a.day(), b.day(), params.window_days)
        + semantic_similarity(&h.disease, a.disease, b.disease, params.sigma_disease)?
        + semantic_similarity(&h.host, a.host, b.host, params.sigma_host)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DayInterval, Dimension, NodeSpec};
    use proptest::prelude::*;

    fn diseases() -> Hierarchy {
        Hierarchy::from_specs(
            Dimension::Disease,
            vec![
                NodeSpec::new("ALL_D", "ALL_D", None),
                NodeSpec::new("ai", "avian flu", Some("ALL_D")),
                NodeSpec::new("hpai", "highly pathogenic", Some("ai")),
                NodeSpec::new("h7n9", "H7N9", Some("hpai")),
                NodeSpec::new("h5n1", "H5N1", Some("hpai")),
                NodeSpec::new("wnv", "West Nile", Some("ALL_D")),
            ],
        )
        .unwrap()
    }

    fn day(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn semantic_examples() {
        let h = diseases();
        let n = |k| h.get(k).unwrap();
        assert_eq!(semantic_similarity(&h, n("h7n9"), n("h7n9"), 1.0).unwrap(), 1.0);
        assert!((semantic_similarity(&h, n("h7n9"), n("hpai"), 1.0).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(semantic_similarity(&h, n("h7n9"), n("wnv"), 1.0).unwrap(), -1.0);
        assert_eq!(semantic_similarity(&h, n("h7n9"), n("h5n1"), 2.5).unwrap(), -2.5);
        assert_eq!(semantic_similarity(&h, n("ALL_D"), n("h7n9"), 1.0).unwrap(), 0.0);
        assert_eq!(semantic_similarity(&h, n("ALL_D"), n("ALL_D"), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn nodes_of_other_hierarchies_are_rejected() {
        let h = diseases();
        let hosts = Hierarchy::flat(Dimension::Host, ["bird"]).unwrap();
        let err = semantic_similarity(&h, h.root(), hosts.root(), 1.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn date_examples() {
        assert_eq!(date_similarity(day("2021-03-01"), day("2021-03-01"), 21.0), 1.0);
        assert_eq!(date_similarity(day("2021-03-01"), day("2021-03-22"), 21.0), 0.0);
        assert_eq!(date_similarity(day("2021-03-22"), day("2021-02-08"), 21.0), -1.0);
    }

    fn hierarchies() -> Hierarchies {
        let loc = Hierarchy::flat(Dimension::Location, ["Lyon"]).unwrap();
        let host = Hierarchy::flat(Dimension::Host, ["bird"]).unwrap();
        let src = Hierarchy::flat(Dimension::Source, ["a", "b"]).unwrap();
        Hierarchies::new(loc, diseases(), host, src).unwrap()
    }

    fn event(h: &Hierarchies, disease: &str, date: &str, source: &str) -> Event {
        let outlet = h.source.get(source).unwrap();
        Event {
            system: "x".into(),
            record_id: "1".into(),
            location: h.location.get("Lyon").unwrap(),
            date: DayInterval::day(day(date)),
            disease: h.disease.get(disease).unwrap(),
            host: h.host.get("bird").unwrap(),
            source: outlet,
            reports: vec![crate::model::Report { outlet, date: day(date) }],
        }
    }

    #[test]
    fn event_examples() {
        let h = hierarchies();
        let p = SimilarityParams::default();
        let e = event(&h, "h7n9", "2021-03-01", "a");
        assert_eq!(event_similarity(&h, &e, &e, &p).unwrap(), 4.0);
        let later = event(&h, "h7n9", "2021-03-22", "b");
        assert_eq!(event_similarity(&h, &e, &later, &p).unwrap(), 3.0);
        let other = event(&h, "wnv", "2021-03-01", "a");
        assert_eq!(event_similarity(&h, &e, &other, &p).unwrap(), 2.0);
    }

    #[test]
    fn params_validation() {
        assert!(SimilarityParams::default().validate().is_ok());
        let bad = SimilarityParams {
            window_days: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn semantic_similarity_is_symmetric(a in 0usize..6, b in 0usize..6, sigma in 0.1f64..5.0) {
            let h = diseases();
            let ids: Vec<NodeId> = h.ids().collect();
            let s1 = semantic_similarity(&h, ids[a], ids[b], sigma).unwrap();
            let s2 = semantic_similarity(&h, ids[b], ids[a], sigma).unwrap();
            prop_assert_eq!(s1, s2);
            prop_assert!(s1 == -sigma || (0.0..=1.0).contains(&s1));
        }
    }
}
