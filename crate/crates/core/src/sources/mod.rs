//! News-outlet networks: co-report centrality and timely detection.

mod cascade;
mod graph;

pub use cascade::{celf, naive_greedy, Cascade, CascadeSet, CelfResult};
pub use graph::{pagerank, CoReportGraph, PageRank, PageRankParams};

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EventDatabase, NodeId};

/// Outlet keys excluded from both networks, typically official sources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blocklist(BTreeSet<String>);

impl Blocklist {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(keys: I) -> Self {
        Blocklist(keys.into_iter().map(Into::into).collect())
    }

    /// One outlet id per line; blank lines and `#` comments are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        ))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Outlets of `db` that report at least one event, ordered by key, without
/// the blocked ones. Only the graph build warns about silent outlets, so a
/// run logs them once.
fn reporting_outlets(db: &EventDatabase, blocklist: &Blocklist, warn_silent: bool) -> Vec<NodeId> {
    let sources = &db.hierarchies().source;
    let set: BTreeSet<NodeId> = db
        .events()
        .iter()
        .flat_map(|e| e.reports.iter().map(|r| r.outlet))
        .filter(|&o| !blocklist.contains(sources.key(o)))
        .collect();
    let mut v: Vec<NodeId> = set.into_iter().collect();
    v.sort_by(|a, b| sources.key(*a).cmp(sources.key(*b)));
    let silent = sources
        .ids()
        .filter(|&id| id != sources.root() && !blocklist.contains(sources.key(id)))
        .filter(|&id| !v.iter().any(|&o| sources.is_ancestor_or_self(id, o)))
        .count();
    if warn_silent && silent > 0 {
        log::warn!("{silent} outlets report no event in {} and are dropped", db.name());
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedOutlet {
    pub rank: usize,
    pub outlet: String,
    pub score: f64,
}

/// Outlets in decreasing order of importance.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutletRanking(pub Vec<RankedOutlet>);

impl OutletRanking {
    pub fn keys(&self) -> Vec<&str> {
        self.0.iter().map(|r| r.outlet.as_str()).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "outlet", "score"])?;
        for r in &self.0 {
            w.write_record([r.rank.to_string(), r.outlet.clone(), r.score.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<ranking>", e))?;
        Ok(())
    }
}
