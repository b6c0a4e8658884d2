use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::database::{EventDatabase, Hierarchies};
use super::hierarchy::{AdminLevel, Hierarchy, NodeId};
use super::temporal::{TemporalScale, TimeInterval};
use crate::error::{Error, Result};

/// A level of the location hierarchy, either a depth or an admin level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialLevel {
    Depth(u32),
    Admin(AdminLevel),
}

impl SpatialLevel {
    pub fn ancestor(&self, zones: &Hierarchy, id: NodeId) -> Option<NodeId> {
        match *self {
            SpatialLevel::Depth(d) => zones.ancestor_at_depth(id, d),
            SpatialLevel::Admin(a) => zones.ancestor_at_admin(id, a),
        }
    }

    pub fn holds(&self, zones: &Hierarchy, id: NodeId) -> bool {
        match *self {
            SpatialLevel::Depth(d) => zones.depth(id) == d,
            SpatialLevel::Admin(a) => zones.node(id).admin_level == Some(a),
        }
    }

    fn exists_in(&self, zones: &Hierarchy) -> bool {
        zones.ids().any(|id| self.holds(zones, id))
    }
}

impl fmt::Display for SpatialLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialLevel::Depth(d) => write!(f, "{d}"),
            SpatialLevel::Admin(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for SpatialLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(d) = s.parse::<u32>() {
            return Ok(SpatialLevel::Depth(d));
        }
        s.parse::<AdminLevel>()
            .map(SpatialLevel::Admin)
            .map_err(|_| Error::Config(format!("unknown spatial level {s:?}")))
    }
}

impl Serialize for SpatialLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpatialLevel::Depth(d) => serializer.serialize_u32(*d),
            SpatialLevel::Admin(_) => serializer.collect_str(self),
        }
    }
}

impl<'de> Deserialize<'de> for SpatialLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Depth(u32),
            Name(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Depth(d) => Ok(SpatialLevel::Depth(d)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One row of a scaled database: a time interval and the zones with at least
/// one event in it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transaction {
    pub interval: TimeInterval,
    pub zones: BTreeSet<NodeId>,
}

/// An event database discretised at fixed spatial and temporal scales.
#[derive(Debug, Clone)]
pub struct ScaledEventDatabase {
    name: String,
    hierarchies: Arc<Hierarchies>,
    spatial: SpatialLevel,
    temporal: TemporalScale,
    transactions: Vec<Transaction>,
    excluded: usize,
}

impl PartialEq for ScaledEventDatabase {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && Arc::ptr_eq(&self.hierarchies, &other.hierarchies)
            && self.spatial == other.spatial
            && self.temporal == other.temporal
            && self.transactions == other.transactions
            && self.excluded == other.excluded
    }
}

/// Result of a selection, with warnings for filter values that match nothing.
#[derive(Debug, Clone)]
pub struct Selection<T> {
    pub result: T,
    pub warnings: Vec<String>,
}

/// Zone and time filters for the selection operator. Empty sets do not filter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filter {
    pub zones: BTreeSet<NodeId>,
    pub times: BTreeSet<TimeInterval>,
}

impl Filter {
    pub fn zones(zones: impl IntoIterator<Item = NodeId>) -> Self {
        Filter {
            zones: zones.into_iter().collect(),
            times: BTreeSet::new(),
        }
    }

    pub fn times(times: impl IntoIterator<Item = TimeInterval>) -> Self {
        Filter {
            zones: BTreeSet::new(),
            times: times.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty() && self.times.is_empty()
    }

    fn zone_matches(&self, zones: &Hierarchy, id: NodeId) -> bool {
        self.zones.is_empty() || zones.ancestors_or_self(id).any(|a| self.zones.contains(&a))
    }

    fn time_matches(&self, interval: &TimeInterval) -> bool {
        self.times.is_empty() || self.times.iter().any(|t| t.covers(interval))
    }
}

/// Maps every event to its zone at `lz` and its interval at `lt`, grouping
/// events per interval. Events without an ancestor at `lz` or dated more
/// coarsely than `lt` are dropped and counted.
pub fn fix_scale(db: &EventDatabase, lz: SpatialLevel, lt: TemporalScale) -> Result<ScaledEventDatabase> {
    let zones = &db.hierarchies().location;
    if !lz.exists_in(zones) {
        return Err(Error::Config(format!("spatial level {lz} does not occur in the location hierarchy")));
    }
    let mut grouped: BTreeMap<TimeInterval, BTreeSet<NodeId>> = BTreeMap::new();
    let mut excluded = 0;
    for e in db.events() {
        let zone = match lz.ancestor(zones, e.location) {
            Some(z) if !lt.is_finer_than(e.date.precision) => z,
            _ => {
                excluded += 1;
                continue;
            }
        };
        grouped
            .entry(TimeInterval::of(e.date.start, lt))
            .or_default()
            .insert(zone);
    }
    if excluded > 0 {
        log::info!("{}: {excluded} events lack precision at ({lz}, {lt})", db.name());
    }
    Ok(ScaledEventDatabase {
        name: db.name().to_owned(),
        hierarchies: Arc::clone(db.hierarchies()),
        spatial: lz,
        temporal: lt,
        transactions: grouped
            .into_iter()
            .map(|(interval, zones)| Transaction { interval, zones })
            .collect(),
        excluded,
    })
}

impl ScaledEventDatabase {
    /// Builds a scaled database directly from transactions, validating order
    /// and levels.
    pub fn from_transactions(
        name: impl Into<String>,
        hierarchies: Arc<Hierarchies>,
        spatial: SpatialLevel,
        temporal: TemporalScale,
        transactions: Vec<Transaction>,
    ) -> Result<Self> {
        for w in transactions.windows(2) {
            if w[0].interval >= w[1].interval {
                return Err(Error::Data(format!(
                    "transaction intervals must strictly increase ({} then {})",
                    w[0].interval, w[1].interval
                )));
            }
        }
        for t in &transactions {
            if t.interval.scale != temporal {
                return Err(Error::Data(format!("interval {} is not at scale {temporal}", t.interval)));
            }
            for &z in &t.zones {
                hierarchies.location.check(z)?;
                if !spatial.holds(&hierarchies.location, z) {
                    return Err(Error::Data(format!(
                        "zone {} is not at level {spatial}",
                        hierarchies.location.key(z)
                    )));
                }
            }
        }
        Ok(ScaledEventDatabase {
            name: name.into(),
            hierarchies,
            spatial,
            temporal,
            transactions,
            excluded: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hierarchies(&self) -> &Arc<Hierarchies> {
        &self.hierarchies
    }

    pub fn zones(&self) -> &Hierarchy {
        &self.hierarchies.location
    }

    pub fn spatial_level(&self) -> SpatialLevel {
        self.spatial
    }

    pub fn temporal_scale(&self) -> TemporalScale {
        self.temporal
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// Number of events dropped when the scales were fixed.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// `|E|`: total number of (interval, zone) occurrences.
    pub fn cardinality(&self) -> usize {
        self.transactions.iter().map(|t| t.zones.len()).sum()
    }

    pub fn zone_domain(&self) -> BTreeSet<NodeId> {
        self.transactions.iter().flat_map(|t| t.zones.iter().copied()).collect()
    }

    pub fn zones_at(&self, interval: &TimeInterval) -> Option<&BTreeSet<NodeId>> {
        self.transactions
            .binary_search_by(|t| t.interval.cmp(interval))
            .ok()
            .map(|i| &self.transactions[i].zones)
    }

    /// Keeps the transactions accepted by `keep`.
    pub fn retain(&self, keep: impl Fn(&Transaction) -> bool) -> ScaledEventDatabase {
        ScaledEventDatabase {
            transactions: self.transactions.iter().filter(|t| keep(t)).cloned().collect(),
            ..self.clone()
        }
    }

    /// Re-fixes an already scaled database. Fixing at the same scales is the
    /// identity. Intervals that do not nest in the coarser scale are dropped.
    pub fn fix_scale(&self, lz: SpatialLevel, lt: TemporalScale) -> Result<ScaledEventDatabase> {
        if lz == self.spatial && lt == self.temporal {
            return Ok(self.clone());
        }
        let zones = self.zones();
        if !lz.exists_in(zones) {
            return Err(Error::Config(format!("spatial level {lz} does not occur in the location hierarchy")));
        }
        if lt.is_finer_than(self.temporal) {
            return Err(Error::Config(format!("cannot refine scale {} to {lt}", self.temporal)));
        }
        let mut grouped: BTreeMap<TimeInterval, BTreeSet<NodeId>> = BTreeMap::new();
        let mut excluded = self.excluded;
        for t in &self.transactions {
            let coarse = TimeInterval::of(t.interval.start(), lt);
            if !coarse.covers(&t.interval) {
                excluded += t.zones.len();
                continue;
            }
            for &z in &t.zones {
                match lz.ancestor(zones, z) {
                    Some(a) => {
                        grouped.entry(coarse).or_default().insert(a);
                    }
                    None => excluded += 1,
                }
            }
        }
        Ok(ScaledEventDatabase {
            name: self.name.clone(),
            hierarchies: Arc::clone(&self.hierarchies),
            spatial: lz,
            temporal: lt,
            transactions: grouped
                .into_iter()
                .map(|(interval, zones)| Transaction { interval, zones })
                .collect(),
            excluded,
        })
    }

    /// Keeps transactions whose interval is in the time filter and, within
    /// them, the zones under some filtered zone. Transactions left without
    /// zones are removed.
    pub fn select(&self, filter: &Filter) -> Selection<ScaledEventDatabase> {
        let zones = self.zones();
        let mut warnings = Vec::new();
        let domain = self.zone_domain();
        for &f in &filter.zones {
            if !domain.iter().any(|&z| zones.is_ancestor_or_self(f, z)) {
                warnings.push(format!("zone {} matches no transaction of {}", zones.key(f), self.name));
            }
        }
        for t in &filter.times {
            if !self.transactions.iter().any(|tr| t.covers(&tr.interval)) {
                warnings.push(format!("interval {t} matches no transaction of {}", self.name));
            }
        }
        let transactions = self
            .transactions
            .iter()
            .filter(|t| filter.time_matches(&t.interval))
            .filter_map(|t| {
                let kept: BTreeSet<NodeId> = t
                    .zones
                    .iter()
                    .copied()
                    .filter(|&z| filter.zone_matches(zones, z))
                    .collect();
                (!kept.is_empty()).then_some(Transaction {
                    interval: t.interval,
                    zones: kept,
                })
            })
            .collect();
        for w in &warnings {
            log::warn!("{w}");
        }
        Selection {
            result: ScaledEventDatabase {
                transactions,
                ..self.clone()
            },
            warnings,
        }
    }
}

impl EventDatabase {
    /// Keeps events located under a filtered zone and dated inside a filtered
    /// interval.
    pub fn select(&self, filter: &Filter) -> Selection<EventDatabase> {
        let zones = &self.hierarchies().location;
        let mut warnings = Vec::new();
        for &f in &filter.zones {
            if !self.events().iter().any(|e| zones.is_ancestor_or_self(f, e.location)) {
                warnings.push(format!("zone {} matches no event of {}", zones.key(f), self.name()));
            }
        }
        for t in &filter.times {
            if !self.events().iter().any(|e| t.covers(&e.date.interval())) {
                warnings.push(format!("interval {t} matches no event of {}", self.name()));
            }
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        let events = self
            .events()
            .iter()
            .filter(|e| filter.zone_matches(zones, e.location) && filter.time_matches(&e.date.interval()))
            .cloned()
            .collect();
        Selection {
            result: self.with_events(events),
            warnings,
        }
    }
}
