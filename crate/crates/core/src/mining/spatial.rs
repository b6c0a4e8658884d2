use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::{is_full_periodic, period_support, MiningMode, MiningParams, PatternItems, PatternResult, PatternSet};
use crate::error::{Error, Result};
use crate::model::{geo_distance, Hierarchy, NodeId, ScaledEventDatabase};

/// Which pairs of zones may appear together in a spatial pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum Closeness {
    /// Centroids at most this many kilometres apart.
    Distance(f64),
    /// An explicit symmetric relation.
    Explicit(BTreeSet<(NodeId, NodeId)>),
}

impl Closeness {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            set.insert((a, b));
            set.insert((b, a));
        }
        Closeness::Explicit(set)
    }

    /// Loads an `entity_a,entity_b` CSV. Entities are node keys or unique
    /// labels; names absent from the hierarchy are skipped with a warning.
    pub fn load(path: &Path, zones: &Hierarchy) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            entity_a: String,
            entity_b: String,
        }
        let mut pairs = Vec::new();
        crate::csvio::read_rows(path, |line, row: Row| {
            match (zones.resolve(&row.entity_a), zones.resolve(&row.entity_b)) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                _ => log::warn!(
                    "{}:{line}: skipping pair ({}, {}) outside the location hierarchy",
                    path.display(),
                    row.entity_a,
                    row.entity_b
                ),
            }
            Ok(())
        })?;
        Ok(Self::from_pairs(pairs))
    }

    pub fn close(&self, zones: &Hierarchy, a: NodeId, b: NodeId) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        match self {
            Closeness::Distance(alpha) => Ok(geo_distance(zones, a, b)? <= *alpha),
            Closeness::Explicit(set) => Ok(set.contains(&(a, b))),
        }
    }

    fn alpha_km(&self) -> Option<f64> {
        match self {
            Closeness::Distance(a) => Some(*a),
            Closeness::Explicit(_) => None,
        }
    }
}

struct Miner<'a> {
    params: &'a MiningParams,
    threshold: usize,
    close: Vec<Vec<bool>>,
    out: Vec<(Vec<usize>, Vec<i64>)>,
}

impl Miner<'_> {
    fn passes(&self, tids: &[i64]) -> bool {
        self.params.passes(tids, tids.len(), self.threshold)
    }

    // Depth-first over an equivalence class: every member shares `prefix`
    // and is close to all of it.
    fn eclat(&mut self, prefix: &[usize], class: Vec<(usize, Vec<i64>)>) {
        for (k, (item, tids)) in class.iter().enumerate() {
            let mut pattern = prefix.to_vec();
            pattern.push(*item);
            let next: Vec<(usize, Vec<i64>)> = class[k + 1..]
                .iter()
                .filter(|(other, _)| self.close[*item][*other])
                .map(|(other, other_tids)| (*other, intersect(tids, other_tids)))
                .filter(|(_, t)| self.passes(t))
                .collect();
            self.out.push((pattern.clone(), tids.clone()));
            if !next.is_empty() {
                self.eclat(&pattern, next);
            }
        }
    }
}

fn intersect(a: &[i64], b: &[i64]) -> Vec<i64> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Mines every set of mutually close zones whose period-support (or
/// support, for an infinite gap) reaches the threshold. Results are sorted by
/// period-support descending, then by label.
pub fn mine_spatial(db: &ScaledEventDatabase, params: &MiningParams, closeness: &Closeness) -> Result<PatternSet> {
    let zones = db.zones();
    let threshold = params.rho.threshold(db.len(), params.iota);
    if threshold == 0 {
        return Err(Error::Config("rho must be positive".into()));
    }
    let mut tidlists: BTreeMap<NodeId, Vec<i64>> = BTreeMap::new();
    for t in db.transactions() {
        for &z in &t.zones {
            tidlists.entry(z).or_default().push(t.interval.ordinal);
        }
    }
    let mut items: Vec<(NodeId, Vec<i64>)> = tidlists.into_iter().collect();
    items.sort_by(|a, b| {
        b.1.len()
            .cmp(&a.1.len())
            .then_with(|| zones.label(a.0).cmp(zones.label(b.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    let n = items.len();
    let mut close = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i..n {
            let c = closeness.close(zones, items[i].0, items[j].0)?;
            close[i][j] = c;
            close[j][i] = c;
        }
    }
    let mut miner = Miner {
        params,
        threshold,
        close,
        out: Vec::new(),
    };
    let roots: Vec<(usize, Vec<i64>)> = items
        .iter()
        .enumerate()
        .map(|(i, (_, t))| (i, t.clone()))
        .filter(|(_, t)| miner.passes(t))
        .collect();
    miner.eclat(&[], roots);

    let horizon = db
        .transactions()
        .first()
        .zip(db.transactions().last())
        .map(|(f, l)| (f.interval, l.interval));
    let span = horizon.map(|(f, l)| (f.ordinal, l.ordinal));
    let scale = db.temporal_scale();
    let mut patterns: Vec<PatternResult> = miner
        .out
        .into_iter()
        .map(|(members, tids)| {
            let mut nodes: Vec<NodeId> = members.iter().map(|&i| items[i].0).collect();
            nodes.sort_by(|a, b| zones.label(*a).cmp(zones.label(*b)).then_with(|| a.cmp(b)));
            let label = nodes.iter().map(|&z| zones.label(z)).collect::<Vec<_>>().join("-");
            PatternResult {
                keys: nodes.iter().map(|&z| zones.key(z).to_owned()).collect(),
                items: PatternItems::Spatial(nodes),
                label,
                support: tids.len(),
                period_support: period_support(&tids, params.iota),
                full_periodic: span.is_some_and(|s| is_full_periodic(&tids, params.iota, s)),
                occurrences: tids
                    .iter()
                    .map(|&o| crate::model::TimeInterval { scale, ordinal: o })
                    .collect(),
            }
        })
        .collect();
    patterns.sort_by(|a, b| {
        b.period_support
            .cmp(&a.period_support)
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.keys.cmp(&b.keys))
    });
    Ok(PatternSet {
        mode: MiningMode::Spatial,
        params: MiningParams {
            alpha_km: closeness.alpha_km().or(params.alpha_km),
            ..*params
        },
        threshold,
        transactions: db.len(),
        horizon,
        patterns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::{Gap, MinSupport};
    use crate::model::{
        AdminLevel, Dimension, Hierarchies, NodeSpec, SpatialLevel, TemporalScale, TimeInterval, Transaction,
    };
    use proptest::prelude::*;
    use std::sync::Arc;

    fn hierarchies(names: &[String]) -> Arc<Hierarchies> {
        let mut specs = vec![NodeSpec::new("ALL_Z", "ALL_Z", None)];
        for n in names {
            specs.push(NodeSpec::new(n.clone(), n.clone(), Some("ALL_Z")).admin(AdminLevel::Country));
        }
        Arc::new(
            Hierarchies::new(
                Hierarchy::from_specs(Dimension::Location, specs).unwrap(),
                Hierarchy::flat(Dimension::Disease, ["d"]).unwrap(),
                Hierarchy::flat(Dimension::Host, ["h"]).unwrap(),
                Hierarchy::flat(Dimension::Source, ["s"]).unwrap(),
            )
            .unwrap(),
        )
    }

    fn scaled(h: &Arc<Hierarchies>, rows: &[(i64, Vec<&str>)]) -> ScaledEventDatabase {
        let transactions = rows
            .iter()
            .map(|(o, zs)| Transaction {
                interval: TimeInterval {
                    scale: TemporalScale::Week,
                    ordinal: *o,
                },
                zones: zs.iter().map(|z| h.location.get(z).unwrap()).collect(),
            })
            .collect();
        ScaledEventDatabase::from_transactions(
            "t",
            h.clone(),
            SpatialLevel::Admin(AdminLevel::Country),
            TemporalScale::Week,
            transactions,
        )
        .unwrap()
    }

    fn outbreaks() -> (Arc<Hierarchies>, ScaledEventDatabase, Closeness) {
        let names: Vec<String> = ["France", "Italy", "Spain", "Portugal", "China", "India", "Nepal", "Pakistan"]
            .map(String::from)
            .to_vec();
        let h = hierarchies(&names);
        let db = scaled(
            &h,
            &[
                (1, vec!["France", "Italy", "China", "India"]),
                (2, vec!["France", "Italy", "Spain", "China", "India", "Nepal"]),
                (4, vec!["France", "Spain", "Portugal", "India", "Nepal"]),
                (6, vec!["Spain", "Portugal", "India"]),
                (7, vec!["Spain", "Portugal", "India"]),
                (8, vec!["Portugal", "India", "Pakistan"]),
                (10, vec!["India", "Pakistan"]),
                (11, vec!["Italy", "India", "Pakistan"]),
            ],
        );
        let pairs = [
            ("France", "Italy"),
            ("France", "Spain"),
            ("Spain", "Portugal"),
            ("China", "Italy"),
            ("China", "Nepal"),
            ("China", "India"),
            ("India", "Pakistan"),
            ("India", "Nepal"),
            ("Pakistan", "China"),
        ];
        let g = |k: &str| h.location.get(k).unwrap();
        let close = Closeness::from_pairs(pairs.iter().map(|(a, b)| (g(a), g(b))));
        (h, db, close)
    }

    fn summary(set: &PatternSet) -> Vec<(String, usize)> {
        set.patterns.iter().map(|p| (p.label.clone(), p.period_support)).collect()
    }

    #[test]
    fn partial_periodic_patterns() {
        let (_, db, close) = outbreaks();
        let set = mine_spatial(&db, &MiningParams::new(Gap::Finite(2), MinSupport::Count(2)), &close).unwrap();
        let expect = [
            ("India", 7),
            ("Portugal", 3),
            ("Spain", 3),
            ("France", 2),
            ("India-Pakistan", 2),
            ("Pakistan", 2),
            ("Portugal-Spain", 2),
        ];
        assert_eq!(summary(&set), expect.map(|(l, p)| (l.to_string(), p)));
        let full: Vec<&str> = set.full_periodic().map(|p| p.label.as_str()).collect();
        assert_eq!(full, ["India"]);
        assert_eq!(set.find("India").unwrap().support, 8);
    }

    #[test]
    fn full_periodic_at_iota_4() {
        let (_, db, close) = outbreaks();
        let set = mine_spatial(&db, &MiningParams::new(Gap::Finite(4), MinSupport::Count(2)), &close).unwrap();
        let mut full: Vec<&str> = set.full_periodic().map(|p| p.label.as_str()).collect();
        full.sort_unstable();
        assert_eq!(full, ["India", "Portugal", "Portugal-Spain", "Spain"]);
        assert_eq!(set.find("Portugal-Spain").unwrap().period_support, 2);
    }

    #[test]
    fn no_closeness_leaves_singletons() {
        let (_, db, _) = outbreaks();
        let set = mine_spatial(
            &db,
            &MiningParams::new(Gap::Finite(2), MinSupport::Count(2)),
            &Closeness::from_pairs([]),
        )
        .unwrap();
        let labels: Vec<&str> = set.patterns.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels, ["India", "Portugal", "Spain", "France", "Pakistan"]);
        let none = mine_spatial(&db, &MiningParams::new(Gap::Finite(2), MinSupport::Count(8)), &Closeness::from_pairs([]))
            .unwrap();
        assert!(none.patterns.is_empty());
    }

    #[test]
    fn distance_closeness_needs_centroids() {
        let (_, db, _) = outbreaks();
        let err = mine_spatial(&db, &MiningParams::new(Gap::Finite(2), MinSupport::Count(1)), &Closeness::Distance(500.0));
        assert!(err.is_err());
    }

    #[test]
    fn empty_database() {
        let (h, _, close) = outbreaks();
        let db = scaled(&h, &[]);
        let set = mine_spatial(&db, &MiningParams::new(Gap::Finite(2), MinSupport::Count(1)), &close).unwrap();
        assert!(set.patterns.is_empty());
        assert!(set.horizon.is_none());
    }

    fn brute_force(
        db: &ScaledEventDatabase,
        params: &MiningParams,
        close: &Closeness,
        names: &[String],
    ) -> BTreeSet<(String, usize)> {
        let zones = db.zones();
        let ids: Vec<NodeId> = names.iter().map(|n| zones.get(n).unwrap()).collect();
        let threshold = params.rho.threshold(db.len(), params.iota);
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << ids.len()) {
            let set: Vec<NodeId> = (0..ids.len()).filter(|b| mask & (1 << b) != 0).map(|b| ids[b]).collect();
            let pairwise = set
                .iter()
                .all(|&a| set.iter().all(|&b| close.close(zones, a, b).unwrap()));
            if !pairwise {
                continue;
            }
            let occ: Vec<i64> = db
                .transactions()
                .iter()
                .filter(|t| set.iter().all(|z| t.zones.contains(z)))
                .map(|t| t.interval.ordinal)
                .collect();
            let ok = match params.iota {
                Gap::Finite(_) => period_support(&occ, params.iota) >= threshold,
                Gap::Infinite => occ.len() >= threshold,
            };
            if ok && !occ.is_empty() {
                let mut labels: Vec<&str> = set.iter().map(|&z| zones.label(z)).collect();
                labels.sort_unstable();
                out.insert((labels.join("-"), period_support(&occ, params.iota)));
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn miner_equals_subset_enumeration(
            n in 1usize..=12,
            rows in prop::collection::vec(any::<u16>(), 0..=20),
            gaps in prop::collection::vec(1i64..4, 20),
            edges in prop::collection::vec(any::<bool>(), 66),
            iota in prop_oneof![(1i64..5).prop_map(Gap::Finite), Just(Gap::Infinite)],
            rho in 1usize..4,
        ) {
            let names: Vec<String> = (0..n).map(|i| format!("z{i:02}")).collect();
            let h = hierarchies(&names);
            let mut ordinal = 0;
            let rows: Vec<(i64, Vec<&str>)> = rows
                .iter()
                .zip(&gaps)
                .map(|(mask, g)| {
                    ordinal += g;
                    (ordinal, (0..n).filter(|b| mask & (1 << b) != 0).map(|b| names[b].as_str()).collect())
                })
                .collect();
            let db = scaled(&h, &rows);
            let mut pairs = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if edges[k % edges.len()] {
                        pairs.push((h.location.get(&names[i]).unwrap(), h.location.get(&names[j]).unwrap()));
                    }
                    k += 1;
                }
            }
            let close = Closeness::from_pairs(pairs);
            let params = MiningParams::new(iota, MinSupport::Count(rho));
            let mined = mine_spatial(&db, &params, &close).unwrap();
            let got: BTreeSet<(String, usize)> = summary(&mined).into_iter().collect();
            prop_assert_eq!(got.len(), mined.patterns.len());
            prop_assert_eq!(got, brute_force(&db, &params, &close, &names));
            for p in &mined.patterns {
                if let PatternItems::Spatial(zs) = &p.items {
                    for &a in zs {
                        for &b in zs {
                            prop_assert!(close.close(db.zones(), a, b).unwrap());
                        }
                    }
                }
                prop_assert!(p.period_support < p.support.max(1));
            }
        }
    }
}
