use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::Result;
use crate::model::{sort_reports, Event, EventDatabase, Hierarchies, Hierarchy, NodeId};
use crate::similarity::{event_similarity, SimilarityParams};

const MAX_PASSES: usize = 32;

/// Overlapping clusters as (seed, members). Seeds are visited from the
/// most specific location depth down; a seed gathers the events at the
/// same or a coarser depth whose similarity to it exceeds `threshold`.
/// Clusters contained in another one are dropped.
pub fn clusters(
    h: &Hierarchies,
    events: &[Event],
    params: &SimilarityParams,
    threshold: f64,
) -> Result<Vec<(usize, BTreeSet<usize>)>> {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(h.location.depth(events[i].location)));
    let mut found: Vec<(usize, BTreeSet<usize>)> = Vec::new();
    for &seed in &order {
        let depth = h.location.depth(events[seed].location);
        let mut members = BTreeSet::from([seed]);
        for (j, e) in events.iter().enumerate() {
            if j != seed
                && h.location.depth(e.location) <= depth
                && event_similarity(h, &events[seed], e, params)? > threshold
            {
                members.insert(j);
            }
        }
        if found.iter().any(|(_, f)| members.is_subset(f)) {
            continue;
        }
        found.retain(|(_, f)| !f.is_subset(&members));
        found.push((seed, members));
    }
    found.sort_by_key(|(seed, _)| *seed);
    Ok(found)
}

// Majority value; ties go to the deepest node, then the smallest key.
fn vote(h: &Hierarchy, values: impl Iterator<Item = NodeId>) -> NodeId {
    let mut counts: HashMap<NodeId, usize> = HashMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|(a, ca), (b, cb)| {
            ca.cmp(cb)
                .then_with(|| h.depth(*a).cmp(&h.depth(*b)))
                .then_with(|| h.key(*b).cmp(h.key(*a)))
        })
        .map(|(n, _)| n)
        .expect("clusters are never empty")
}

/// One event from a cluster: majority location, disease and host, the
/// oldest date, every report, and the seed's system and record id.
pub fn fuse(h: &Hierarchies, events: &[Event], seed: usize, members: &BTreeSet<usize>) -> Event {
    let group = || members.iter().map(|&i| &events[i]);
    let mut fused = Event {
        system: events[seed].system.clone(),
        record_id: events[seed].record_id.clone(),
        location: vote(&h.location, group().map(|e| e.location)),
        date: group().map(|e| e.date).min().expect("non-empty"),
        disease: vote(&h.disease, group().map(|e| e.disease)),
        host: vote(&h.host, group().map(|e| e.host)),
        source: events[seed].source,
        reports: group().flat_map(|e| e.reports.iter().copied()).collect(),
    };
    sort_reports(&h.source, &mut fused);
    fused
}

fn pass(h: &Hierarchies, events: &[Event], params: &SimilarityParams, threshold: f64) -> Result<Vec<Event>> {
    Ok(clusters(h, events, params, threshold)?
        .iter()
        .map(|(seed, members)| fuse(h, events, *seed, members))
        .collect())
}

/// Clusters and fuses document events into corpus events, repeating until
/// a pass changes nothing. Events of different systems never merge.
pub fn build_corpus_events(
    name: &str,
    hierarchies: Arc<Hierarchies>,
    document_events: Vec<Event>,
    params: &SimilarityParams,
    cluster_threshold: f64,
) -> Result<EventDatabase> {
    params.validate()?;
    let h = &*hierarchies;
    let mut systems: Vec<(String, Vec<Event>)> = Vec::new();
    for e in document_events {
        match systems.iter_mut().find(|(s, _)| *s == e.system) {
            Some((_, v)) => v.push(e),
            None => systems.push((e.system.clone(), vec![e])),
        }
    }
    let mut out = Vec::new();
    for (system, mut events) in systems {
        let mut passes = 0;
        loop {
            let next = pass(h, &events, params, cluster_threshold)?;
            passes += 1;
            if next == events {
                break;
            }
            events = next;
            if passes == MAX_PASSES {
                log::warn!("clustering of {system} stopped after {MAX_PASSES} passes without settling");
                break;
            }
        }
        out.extend(events);
    }
    EventDatabase::new(name, hierarchies, out)
}

#[cfg(test)]
mod tests {
    use super::super::fixture;
    use super::*;
    use crate::model::{DayInterval, Report};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn event(h: &Hierarchies, id: &str, loc: &str, date: NaiveDate, dis: &str, host: &str, outlet: &str) -> Event {
        let outlet = h.source.get(outlet).unwrap();
        Event {
            system: "padiweb".into(),
            record_id: id.into(),
            location: h.location.get(loc).unwrap(),
            date: DayInterval::day(date),
            disease: h.disease.get(dis).unwrap(),
            host: h.host.get(host).unwrap(),
            source: outlet,
            reports: vec![Report { outlet, date }],
        }
    }

    fn build(h: &Arc<Hierarchies>, events: Vec<Event>) -> EventDatabase {
        build_corpus_events("corpus", h.clone(), events, &SimilarityParams::default(), 2.0).unwrap()
    }

    #[test]
    fn duplicates_collapse() {
        let h = fixture::hierarchies();
        let a = event(&h, "a", "SKEL", d(2021, 3, 31), "h7n9", "captive", "echo");
        let mut b = a.clone();
        b.record_id = "b".into();
        let db = build(&h, vec![a.clone(), b]);
        assert_eq!(db.len(), 1);
        assert_eq!(db.events()[0].record_id, "a");
    }

    #[test]
    fn specific_and_general_reports_fuse() {
        let h = fixture::hierarchies();
        let a = event(&h, "a", "SKEL", d(2021, 3, 31), "h7n9", "captive", "echo");
        let b = event(&h, "b", "GB", d(2021, 4, 1), "ai", "bird", "bbc");
        let a_b = event_similarity(&h, &a, &b, &SimilarityParams::default()).unwrap();
        // 2*2/(2+6) + (1 - 1/21) + 1/2 + 2/3
        assert!((a_b - (0.5 + 20.0 / 21.0 + 0.5 + 2.0 / 3.0)).abs() < 1e-12);
        let db = build(&h, vec![b, a]);
        assert_eq!(db.len(), 1);
        let e = &db.events()[0];
        assert_eq!(
            (h.location.key(e.location), e.date, h.disease.key(e.disease), h.host.key(e.host)),
            ("SKEL", DayInterval::day(d(2021, 3, 31)), "h7n9", "captive")
        );
        assert_eq!(e.reports.len(), 2);
        assert_eq!(h.source.key(e.source), "echo");
    }

    #[test]
    fn unlinked_countries_stay_apart() {
        let h = fixture::hierarchies();
        let a = event(&h, "a", "GB", d(2021, 3, 31), "h7n9", "captive", "echo");
        let b = event(&h, "b", "FR", d(2021, 3, 31), "h7n9", "captive", "echo");
        assert_eq!(build(&h, vec![a, b]).len(), 2);
    }

    #[test]
    fn majority_then_specificity() {
        let h = fixture::hierarchies();
        let members = [
            event(&h, "a", "ENG", d(2021, 3, 31), "ai", "bird", "echo"),
            event(&h, "b", "ENG", d(2021, 3, 29), "ai", "captive", "bbc"),
            event(&h, "c", "SKEL", d(2021, 4, 1), "h7n9", "bird", "echo"),
        ];
        let fused = fuse(&h, &members, 2, &BTreeSet::from([0, 1, 2]));
        assert_eq!(h.location.key(fused.location), "ENG");
        assert_eq!(h.disease.key(fused.disease), "ai");
        assert_eq!(h.host.key(fused.host), "bird");
        assert_eq!(fused.date.start, d(2021, 3, 29));
        assert_eq!(fused.record_id, "c");
        let tie = fuse(&h, &members[1..], 1, &BTreeSet::from([0, 1]));
        assert_eq!(
            (h.location.key(tie.location), h.disease.key(tie.disease), h.host.key(tie.host)),
            ("SKEL", "h7n9", "captive")
        );
    }

    fn arb_events() -> impl Strategy<Value = Vec<(usize, i64, usize, usize, usize)>> {
        prop::collection::vec((0..6usize, 0..40i64, 0..4usize, 0..3usize, 0..2usize), 0..12)
    }

    fn materialize(h: &Hierarchies, raw: &[(usize, i64, usize, usize, usize)]) -> Vec<Event> {
        const LOCS: [&str; 6] = ["GB", "ENG", "SKEL", "FR", "AVIGNON_FR", "LAN"];
        const DIS: [&str; 4] = ["ai", "hpai", "h7n9", "h5n1"];
        const HOSTS: [&str; 3] = ["bird", "captive", "poultry"];
        const OUTLETS: [&str; 2] = ["echo", "bbc"];
        raw.iter()
            .enumerate()
            .map(|(i, &(l, day, dis, host, o))| {
                event(
                    h,
                    &format!("r{i}"),
                    LOCS[l],
                    d(2021, 3, 1) + chrono::Days::new(day as u64),
                    DIS[dis],
                    HOSTS[host],
                    OUTLETS[o],
                )
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fusion_properties(raw in arb_events()) {
            let h = fixture::hierarchies();
            let events = materialize(&h, &raw);
            let params = SimilarityParams::default();
            for (seed, members) in clusters(&h, &events, &params, 2.0).unwrap() {
                let fused = fuse(&h, &events, seed, &members);
                let group: Vec<&Event> = members.iter().map(|&i| &events[i]).collect();
                prop_assert!(group.iter().any(|e| e.location == fused.location));
                prop_assert!(group.iter().any(|e| e.disease == fused.disease));
                prop_assert!(group.iter().any(|e| e.host == fused.host));
                prop_assert_eq!(fused.date, group.iter().map(|e| e.date).min().unwrap());
            }
            let db = build(&h, events.clone());
            prop_assert!(db.len() <= events.len());
            let again = build(&h, db.events().to_vec());
            prop_assert_eq!(again.events(), db.events());
        }
    }
}
