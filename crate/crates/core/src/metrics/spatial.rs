use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{fix_scale, EventDatabase, NodeId, ScaledEventDatabase, SpatialLevel, TemporalScale};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneScore {
    #[serde(skip)]
    pub zone: NodeId,
    pub key: String,
    pub label: String,
    /// Reference intervals in which the zone has an event.
    pub reference_intervals: usize,
    /// Of those, intervals the candidate covers within one interval.
    pub covered: usize,
    pub score: f64,
}

/// Spatio-temporal representativeness at one pair of scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representativeness {
    pub spatial_level: String,
    pub temporal_scale: TemporalScale,
    /// Number of reference intervals, `|T|`.
    pub intervals: usize,
    pub zones: Vec<ZoneScore>,
    pub phi: f64,
}

/// Per-zone fraction of reference intervals not missed by the candidate,
/// where an occurrence at `t` is matched by a candidate occurrence at `t-1`,
/// `t` or `t+1`. Neighbours are calendar intervals, clamped to the
/// reference horizon.
pub fn representativeness_scaled(
    candidate: &ScaledEventDatabase,
    reference: &ScaledEventDatabase,
) -> Result<Representativeness> {
    if reference.is_empty() {
        return Err(Error::Config(format!(
            "reference {} has no events at ({}, {}); representativeness is undefined",
            reference.name(),
            reference.spatial_level(),
            reference.temporal_scale()
        )));
    }
    if candidate.temporal_scale() != reference.temporal_scale() || candidate.spatial_level() != reference.spatial_level() {
        return Err(Error::Config("candidate and reference are fixed at different scales".into()));
    }
    let zones_h = reference.zones();
    let first = reference.transactions()[0].interval;
    let last = reference.transactions()[reference.len() - 1].interval;
    let t_count = reference.len();
    let mut zones: Vec<ZoneScore> = reference
        .zone_domain()
        .into_iter()
        .map(|z| {
            let mut reference_intervals = 0;
            let mut covered = 0;
            for t in reference.transactions() {
                if !t.zones.contains(&z) {
                    continue;
                }
                reference_intervals += 1;
                let hit = (-1..=1)
                    .map(|d| t.interval.offset(d))
                    .filter(|n| *n >= first && *n <= last)
                    .any(|n| candidate.zones_at(&n).is_some_and(|zs| zs.contains(&z)));
                if hit {
                    covered += 1;
                }
            }
            ZoneScore {
                zone: z,
                key: zones_h.key(z).to_owned(),
                label: zones_h.label(z).to_owned(),
                reference_intervals,
                covered,
                score: 1.0 - (reference_intervals - covered) as f64 / t_count as f64,
            }
        })
        .collect();
    zones.sort_by(|a, b| a.key.cmp(&b.key));
    let phi = zones.iter().map(|z| z.score).sum::<f64>() / zones.len() as f64;
    Ok(Representativeness {
        spatial_level: reference.spatial_level().to_string(),
        temporal_scale: reference.temporal_scale(),
        intervals: t_count,
        zones,
        phi,
    })
}

pub fn representativeness(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    lz: SpatialLevel,
    lt: TemporalScale,
) -> Result<Representativeness> {
    candidate.ensure_comparable(reference)?;
    representativeness_scaled(&fix_scale(candidate, lz, lt)?, &fix_scale(reference, lz, lt)?)
}

/// Mean representativeness over every combination of scales.
pub fn representativeness_multi(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    lzs: &[SpatialLevel],
    lts: &[TemporalScale],
) -> Result<(f64, Vec<Representativeness>)> {
    if lzs.is_empty() || lts.is_empty() {
        return Err(Error::Config("at least one spatial and one temporal scale are required".into()));
    }
    let mut cells = Vec::new();
    for &lz in lzs {
        for &lt in lts {
            cells.push(representativeness(candidate, reference, lz, lt)?);
        }
    }
    let mean = cells.iter().map(|c| c.phi).sum::<f64>() / cells.len() as f64;
    Ok((mean, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use crate::model::{
        AdminLevel, DayInterval, Dimension, Event, Hierarchies, Hierarchy, NodeSpec, Report, TimeInterval,
    };
    use chrono::{Days, NaiveDate};
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::sync::Arc;

    const COUNTRIES: [&str; 8] = ["France", "Italy", "Spain", "Portugal", "China", "India", "Nepal", "Pakistan"];
    const OUTBREAKS: [(u64, &[&str]); 8] = [
        (1, &["France", "Italy", "China", "India"]),
        (2, &["France", "Italy", "Spain", "China", "India", "Nepal"]),
        (4, &["France", "Spain", "Portugal", "India", "Nepal"]),
        (6, &["Spain", "Portugal", "India"]),
        (7, &["Spain", "Portugal", "India"]),
        (8, &["Portugal", "India", "Pakistan"]),
        (10, &["India", "Pakistan"]),
        (11, &["Italy", "India", "Pakistan"]),
    ];

    fn hierarchies() -> Arc<Hierarchies> {
        let mut specs = vec![NodeSpec::new("ALL_Z", "ALL_Z", None)];
        for c in COUNTRIES {
            specs.push(NodeSpec::new(c, c, Some("ALL_Z")).admin(AdminLevel::Country));
        }
        Arc::new(
            Hierarchies::new(
                Hierarchy::from_specs(Dimension::Location, specs).unwrap(),
                Hierarchy::flat(Dimension::Disease, ["ai"]).unwrap(),
                Hierarchy::flat(Dimension::Host, ["bird"]).unwrap(),
                Hierarchy::flat(Dimension::Source, ["s"]).unwrap(),
            )
            .unwrap(),
        )
    }

    fn week(w: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 1, 4).unwrap() + Days::new(7 * (w - 1))
    }

    fn event(h: &Hierarchies, zone: &str, day: NaiveDate) -> Event {
        let s = h.source.get("s").unwrap();
        Event {
            system: "t".into(),
            record_id: format!("{zone}-{day}"),
            location: h.location.get(zone).unwrap(),
            date: DayInterval::day(day),
            disease: h.disease.get("ai").unwrap(),
            host: h.host.get("bird").unwrap(),
            source: s,
            reports: vec![Report { outlet: s, date: day }],
        }
    }

    fn db(h: &Arc<Hierarchies>, keep: impl Fn(u64, &str) -> bool) -> EventDatabase {
        let events = OUTBREAKS
            .iter()
            .flat_map(|(w, cs)| cs.iter().filter(|c| keep(*w, c)).map(|c| event(h, c, week(*w))))
            .collect();
        EventDatabase::new("t", h.clone(), events).unwrap()
    }

    fn score(r: &Representativeness, key: &str) -> f64 {
        r.zones.iter().find(|z| z.key == key).unwrap().score
    }

    const COUNTRY: SpatialLevel = SpatialLevel::Admin(AdminLevel::Country);

    #[test]
    fn identical_databases() {
        let h = hierarchies();
        let r = representativeness(&db(&h, |_, _| true), &db(&h, |_, _| true), COUNTRY, TemporalScale::Week).unwrap();
        assert_eq!(r.phi, 1.0);
        assert!(r.zones.iter().all(|z| z.score == 1.0));
        assert_eq!(r.zones.len(), 8);
    }

    #[test]
    fn removing_a_zone() {
        let h = hierarchies();
        let r = representativeness(&db(&h, |_, c| c != "India"), &db(&h, |_, _| true), COUNTRY, TemporalScale::Week)
            .unwrap();
        for z in &r.zones {
            assert_eq!(z.score, if z.key == "India" { 0.0 } else { 1.0 }, "{}", z.key);
        }
    }

    #[test]
    fn france_only_in_week_two() {
        let h = hierarchies();
        let cand = db(&h, |w, c| c != "France" || w == 2);
        let r = representativeness(&cand, &db(&h, |_, _| true), COUNTRY, TemporalScale::Week).unwrap();
        assert_eq!(score(&r, "France"), 7.0 / 8.0);
        // restricted to France's own intervals
        let france_weeks = db(&h, |w, _| [1, 2, 4].contains(&w));
        let r = representativeness(&cand, &france_weeks, COUNTRY, TemporalScale::Week).unwrap();
        assert!((score(&r, "France") - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_reference_is_an_error() {
        let h = hierarchies();
        let empty = EventDatabase::new("e", h.clone(), vec![]).unwrap();
        assert!(representativeness(&db(&h, |_, _| true), &empty, COUNTRY, TemporalScale::Week).is_err());
    }

    // Literal double loop over zones and intervals on raw events.
    fn oracle(cand: &EventDatabase, reference: &EventDatabase, lt: TemporalScale) -> Vec<(String, f64)> {
        let h = reference.hierarchies();
        let iv = |e: &Event| TimeInterval::of(e.day(), lt).ordinal;
        let t: BTreeSet<i64> = reference.events().iter().map(iv).collect();
        let z: BTreeSet<NodeId> = reference.events().iter().map(|e| e.location).collect();
        let (lo, hi) = (*t.first().unwrap(), *t.last().unwrap());
        let ind = |db: &EventDatabase, zone: NodeId, o: i64| {
            (lo..=hi).contains(&o) && db.events().iter().any(|e| e.location == zone && iv(e) == o)
        };
        let mut out: Vec<(String, f64)> = z
            .iter()
            .map(|&zone| {
                let mut err = 0.0;
                for &o in &t {
                    let r = if ind(reference, zone, o) { 1.0 } else { 0.0 };
                    let c = [o - 1, o, o + 1]
                        .iter()
                        .map(|&n| if ind(cand, zone, n) { 1.0 } else { 0.0 })
                        .fold(0.0, f64::max);
                    err += f64::max(0.0, r - c);
                }
                (h.location.key(zone).to_owned(), 1.0 - err / t.len() as f64)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn random_db(h: &Arc<Hierarchies>, rng: &mut StdRng, n: usize) -> EventDatabase {
        let events = (0..n)
            .map(|_| {
                let c = COUNTRIES[rng.gen_range(0..COUNTRIES.len())];
                event(h, c, NaiveDate::from_ymd_opt(2021, 1, 1).unwrap() + Days::new(rng.gen_range(0..90)))
            })
            .collect();
        EventDatabase::new("r", h.clone(), events).unwrap()
    }

    #[test]
    fn matches_double_loop_oracle() {
        let h = hierarchies();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let (nr, nc) = (rng.gen_range(1..=50), rng.gen_range(0..=50));
            let reference = random_db(&h, &mut rng, nr);
            let cand = random_db(&h, &mut rng, nc);
            for lt in [TemporalScale::Week, TemporalScale::Day, TemporalScale::Month] {
                let r = representativeness(&cand, &reference, COUNTRY, lt).unwrap();
                let got: Vec<(String, f64)> = r.zones.iter().map(|z| (z.key.clone(), z.score)).collect();
                assert_eq!(got, oracle(&cand, &reference, lt));
            }
        }
    }

    #[test]
    fn adding_candidate_events_never_hurts() {
        let h = hierarchies();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let reference = random_db(&h, &mut rng, 30);
            let cand = random_db(&h, &mut rng, 20);
            let extra = random_db(&h, &mut rng, 5);
            let mut more = cand.events().to_vec();
            more.extend_from_slice(extra.events());
            let bigger = cand.with_events(more);
            let a = representativeness(&cand, &reference, COUNTRY, TemporalScale::Week).unwrap();
            let b = representativeness(&bigger, &reference, COUNTRY, TemporalScale::Week).unwrap();
            for (x, y) in a.zones.iter().zip(&b.zones) {
                assert!(y.score >= x.score);
            }
        }
    }
}
