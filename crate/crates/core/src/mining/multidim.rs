use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::{is_full_periodic, period_support, MiningMode, MiningParams, PatternItems, PatternResult, PatternSet};
use crate::error::{Error, Result};
use crate::model::{EventDatabase, Hierarchies, Hierarchy, NodeId, TemporalScale, TimeInterval};

/// A (location, disease, host) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    pub location: NodeId,
    pub disease: NodeId,
    pub host: NodeId,
}

impl Tuple {
    pub fn label(&self, h: &Hierarchies) -> String {
        format!(
            "{}|{}|{}",
            h.location.label(self.location),
            h.disease.label(self.disease),
            h.host.label(self.host)
        )
    }

    pub fn keys(&self, h: &Hierarchies) -> Vec<String> {
        vec![
            h.location.key(self.location).to_owned(),
            h.disease.key(self.disease).to_owned(),
            h.host.key(self.host).to_owned(),
        ]
    }
}

/// One event with every generalisation of its (location, disease, host).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedTransaction {
    pub event: usize,
    pub day: NaiveDate,
    pub tuples: Vec<Tuple>,
}

// The value and its ancestors below the root; the root itself only when the
// value is the root.
fn generalisations(h: &Hierarchy, id: NodeId) -> Vec<NodeId> {
    let v: Vec<NodeId> = h.ancestors_or_self(id).filter(|&a| a != h.root()).collect();
    if v.is_empty() {
        vec![id]
    } else {
        v
    }
}

/// Adds to every event all tuples obtained by replacing components with
/// their non-root ancestors. Tuples are listed host-major, then disease,
/// then location, each from specific to general.
pub fn expand_hierarchies(db: &EventDatabase) -> Vec<ExpandedTransaction> {
    let h = db.hierarchies();
    db.events()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let zs = generalisations(&h.location, e.location);
            let ds = generalisations(&h.disease, e.disease);
            let hs = generalisations(&h.host, e.host);
            let mut tuples = Vec::with_capacity(zs.len() * ds.len() * hs.len());
            for &host in &hs {
                for &disease in &ds {
                    for &location in &zs {
                        tuples.push(Tuple {
                            location,
                            disease,
                            host,
                        });
                    }
                }
            }
            ExpandedTransaction {
                event: i,
                day: e.day(),
                tuples,
            }
        })
        .collect()
}

/// Counts each expanded tuple as an item. Support is the number of events
/// containing it; period-support is computed over its distinct time stamps
/// at `unit`. An infinite gap mines static patterns by support alone.
/// Results are sorted by support, then period-support, descending, then by
/// label.
pub fn mine_multidimensional(db: &EventDatabase, params: &MiningParams, unit: TemporalScale) -> Result<PatternSet> {
    let h = db.hierarchies();
    let expanded = expand_hierarchies(db);
    let threshold = params.rho.threshold(expanded.len(), params.iota);
    if threshold == 0 {
        return Err(Error::Config("rho must be positive".into()));
    }
    let mut stats: BTreeMap<Tuple, (usize, BTreeSet<i64>)> = BTreeMap::new();
    for t in &expanded {
        let stamp = TimeInterval::of(t.day, unit).ordinal;
        for tuple in &t.tuples {
            let entry = stats.entry(*tuple).or_default();
            entry.0 += 1;
            entry.1.insert(stamp);
        }
    }
    let stamps: BTreeSet<i64> = expanded.iter().map(|t| TimeInterval::of(t.day, unit).ordinal).collect();
    let span = stamps.first().copied().zip(stamps.last().copied());
    let mut patterns: Vec<PatternResult> = stats
        .into_iter()
        .filter_map(|(tuple, (support, occ))| {
            let occ: Vec<i64> = occ.into_iter().collect();
            if !params.passes(&occ, support, threshold) {
                return None;
            }
            Some(PatternResult {
                items: PatternItems::Tuple(tuple),
                label: tuple.label(h),
                keys: tuple.keys(h),
                support,
                period_support: period_support(&occ, params.iota),
                full_periodic: span.is_some_and(|s| is_full_periodic(&occ, params.iota, s)),
                occurrences: occ
                    .iter()
                    .map(|&o| TimeInterval {
                        scale: unit,
                        ordinal: o,
                    })
                    .collect(),
            })
        })
        .collect();
    patterns.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then_with(|| b.period_support.cmp(&a.period_support))
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.keys.cmp(&b.keys))
    });
    Ok(PatternSet {
        mode: MiningMode::Multidimensional,
        params: MiningParams {
            alpha_km: None,
            ..*params
        },
        threshold,
        transactions: expanded.len(),
        horizon: span.map(|(f, l)| {
            (
                TimeInterval {
                    scale: unit,
                    ordinal: f,
                },
                TimeInterval {
                    scale: unit,
                    ordinal: l,
                },
            )
        }),
        patterns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::{Gap, MinSupport};
    use crate::model::{Dimension, EventRecord, NodeSpec};
    use std::sync::Arc;

    fn expansion_hierarchies() -> Arc<Hierarchies> {
        let location = Hierarchy::from_specs(
            Dimension::Location,
            vec![
                NodeSpec::new("ALL_Z", "ALL_Z", None),
                NodeSpec::new("FR", "France", Some("ALL_Z")),
                NodeSpec::new("IDF", "Île de France", Some("FR")),
                NodeSpec::new("PAR", "Paris", Some("IDF")),
                NodeSpec::new("IT", "Italy", Some("ALL_Z")),
                NodeSpec::new("ES", "Spain", Some("ALL_Z")),
            ],
        )
        .unwrap();
        let disease = Hierarchy::from_specs(
            Dimension::Disease,
            vec![
                NodeSpec::new("ALL_D", "ALL_D", None),
                NodeSpec::new("AI", "AI", Some("ALL_D")),
                NodeSpec::new("HPAI", "HPAI", Some("AI")),
                NodeSpec::new("H5N1", "H5N1", Some("HPAI")),
            ],
        )
        .unwrap();
        let host = Hierarchy::from_specs(
            Dimension::Host,
            vec![
                NodeSpec::new("ALL_H", "ALL_H", None),
                NodeSpec::new("bird", "bird", Some("ALL_H")),
                NodeSpec::new("wild", "wild bird", Some("bird")),
            ],
        )
        .unwrap();
        let source = Hierarchy::flat(Dimension::Source, ["s"]).unwrap();
        Arc::new(Hierarchies::new(location, disease, host, source).unwrap())
    }

    fn rec(id: &str, loc: &str, disease: &str, host: &str, date: &str) -> EventRecord {
        EventRecord {
            system: "t6".into(),
            record_id: id.into(),
            location_id: loc.into(),
            date: date.into(),
            disease_id: disease.into(),
            host_id: host.into(),
            source_id: "s".into(),
            precision: None,
            report_date: None,
            origin: None,
        }
    }

    fn expansion_db() -> EventDatabase {
        let records = [
            rec("1", "PAR", "AI", "bird", "2021-01-01"),
            rec("2", "IT", "AI", "wild", "2021-01-02"),
            rec("3", "ES", "H5N1", "wild", "2021-01-03"),
        ];
        EventDatabase::from_records("t6", expansion_hierarchies(), &records, None).unwrap()
    }

    #[test]
    fn expansion_rows() {
        let db = expansion_db();
        let h = db.hierarchies();
        let rows: Vec<Vec<String>> = expand_hierarchies(&db)
            .iter()
            .map(|t| t.tuples.iter().map(|x| x.label(h)).collect())
            .collect();
        assert_eq!(rows[0], ["Paris|AI|bird", "Île de France|AI|bird", "France|AI|bird"]);
        assert_eq!(rows[1], ["Italy|AI|wild bird", "Italy|AI|bird"]);
        assert_eq!(
            rows[2],
            [
                "Spain|H5N1|wild bird",
                "Spain|HPAI|wild bird",
                "Spain|AI|wild bird",
                "Spain|H5N1|bird",
                "Spain|HPAI|bird",
                "Spain|AI|bird"
            ]
        );
    }

    #[test]
    fn static_mining_on_expansion_sample() {
        let db = expansion_db();
        let static2 = mine_multidimensional(&db, &MiningParams::new(Gap::Infinite, MinSupport::Count(2)), TemporalScale::Day)
            .unwrap();
        assert!(static2.patterns.is_empty());
        let static1 = mine_multidimensional(&db, &MiningParams::new(Gap::Infinite, MinSupport::Count(1)), TemporalScale::Day)
            .unwrap();
        assert_eq!(static1.patterns.len(), 11);
        assert!(static1.patterns.iter().all(|p| p.support == 1));
    }

    #[test]
    fn duplicated_event_period_support() {
        let h = expansion_hierarchies();
        let records = [
            rec("1", "ES", "AI", "bird", "2021-01-01"),
            rec("2", "ES", "AI", "bird", "2021-01-06"),
        ];
        let db = EventDatabase::from_records("d", h, &records, None).unwrap();
        let set = mine_multidimensional(&db, &MiningParams::new(Gap::Finite(10), MinSupport::Count(1)), TemporalScale::Day)
            .unwrap();
        assert_eq!(set.patterns.len(), 1);
        assert_eq!(set.patterns[0].support, 2);
        assert_eq!(set.patterns[0].period_support, 1);
        assert!(set.patterns[0].full_periodic);
    }

    #[test]
    fn expansion_size_is_product_of_chain_lengths() {
        let db = expansion_db();
        let h = db.hierarchies();
        for (t, e) in expand_hierarchies(&db).iter().zip(db.events()) {
            let chain = |hh: &Hierarchy, id| hh.depth(id) as usize;
            let expect = chain(&h.location, e.location) * chain(&h.disease, e.disease) * chain(&h.host, e.host);
            assert_eq!(t.tuples.len(), expect);
            let distinct: BTreeSet<&Tuple> = t.tuples.iter().collect();
            assert_eq!(distinct.len(), expect);
        }
    }
}
