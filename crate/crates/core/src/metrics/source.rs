use serde::Serialize;

use super::ranking::{ranking_scores, RankingScores};
use crate::error::{Error, Result};
use crate::model::EventDatabase;
use crate::sources::{celf, pagerank, Blocklist, CascadeSet, CoReportGraph, OutletRanking, PageRankParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceConsistency {
    pub k: usize,
    pub pagerank: OutletRanking,
    pub celf: OutletRanking,
    pub scores: RankingScores,
}

/// Agreement of the most central outlets with the most timely ones, the
/// latter taken as the reference list.
pub fn source_consistency(
    db: &EventDatabase,
    blocklist: &Blocklist,
    k: usize,
    symmetrize: bool,
    params: &PageRankParams,
    t_max: Option<i64>,
) -> Result<SourceConsistency> {
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let graph = CoReportGraph::build(db, blocklist, symmetrize);
    let central = pagerank(&graph, params)?.top(&graph, k);
    let cascades = CascadeSet::build(db, blocklist, t_max)?;
    let timely = celf(&cascades, k).ranking(&cascades);
    let scores = ranking_scores(&central.keys(), &timely.keys());
    Ok(SourceConsistency {
        k,
        pagerank: central,
        celf: timely,
        scores,
    })
}
