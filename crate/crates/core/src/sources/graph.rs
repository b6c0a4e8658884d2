use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{reporting_outlets, Blocklist, OutletRanking, RankedOutlet};
use crate::error::{Error, Result};
use crate::model::{EventDatabase, NodeId};

/// Outlets and the events they report, with `b[i][j] = |E_i ∩ E_j| / |E_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoReportGraph {
    outlets: Vec<NodeId>,
    keys: Vec<String>,
    /// Event indices reported by each outlet.
    reported: Vec<BTreeSet<usize>>,
    weights: Vec<f64>,
}

impl CoReportGraph {
    /// Builds the graph over the outlets not in `blocklist`. With
    /// `symmetrize`, each weight is replaced by the mean of both directions.
    pub fn build(db: &EventDatabase, blocklist: &Blocklist, symmetrize: bool) -> Self {
        let outlets = reporting_outlets(db, blocklist, true);
        let sources = &db.hierarchies().source;
        let index = |o: NodeId| outlets.binary_search_by(|x| sources.key(*x).cmp(sources.key(o))).ok();
        let per_event: Vec<Vec<usize>> = db
            .events()
            .iter()
            .map(|e| {
                let set: BTreeSet<usize> = e.reports.iter().filter_map(|r| index(r.outlet)).collect();
                set.into_iter().collect()
            })
            .collect();
        let n = outlets.len();
        let mut reported = vec![BTreeSet::new(); n];
        for (e, os) in per_event.iter().enumerate() {
            for &o in os {
                reported[o].insert(e);
            }
        }
        let shared = per_event
            .par_iter()
            .fold(
                || vec![0usize; n * n],
                |mut acc, os| {
                    for &i in os {
                        for &j in os {
                            acc[i * n + j] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0usize; n * n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let mut weights: Vec<f64> = (0..n * n)
            .map(|k| {
                let own = reported[k / n].len();
                if own == 0 {
                    0.0
                } else {
                    shared[k] as f64 / own as f64
                }
            })
            .collect();
        if symmetrize {
            let b = weights.clone();
            for i in 0..n {
                for j in 0..n {
                    weights[i * n + j] = (b[i * n + j] + b[j * n + i]) / 2.0;
                }
            }
        }
        CoReportGraph {
            keys: outlets.iter().map(|&o| sources.key(o).to_owned()).collect(),
            outlets,
            reported,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.outlets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outlets.is_empty()
    }

    pub fn outlets(&self) -> &[NodeId] {
        &self.outlets
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    pub fn reported(&self, i: usize) -> &BTreeSet<usize> {
        &self.reported[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.len() + j]
    }

    /// Directed edges `i -> j` with positive weight, self-loops excluded.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n)
            .flat_map(move |i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| (i, j, self.weight(i, j)))
            .filter(|&(_, _, w)| w > 0.0)
    }

    /// Rows of `(outlet, outlet, weight)` for every edge, in key order.
    pub fn edge_table(&self) -> Vec<(String, String, f64)> {
        self.edges()
            .map(|(i, j, w)| (self.keys[i].clone(), self.keys[j].clone(), w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankParams {
    pub damping: f64,
    /// Stop once no score moves by this much in one iteration.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageRank {
    /// Scores in the graph's outlet order.
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl PageRank {
    /// The `k` highest scores; ties go to the smaller outlet key.
    pub fn top(&self, graph: &CoReportGraph, k: usize) -> OutletRanking {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(graph.keys[a].cmp(&graph.keys[b])));
        OutletRanking(
            order
                .into_iter()
                .take(k)
                .enumerate()
                .map(|(r, i)| RankedOutlet {
                    rank: r + 1,
                    outlet: graph.keys[i].clone(),
                    score: self.scores[i],
                })
                .collect(),
        )
    }
}

/// Weighted PageRank by power iteration. Out-weights are normalized per
/// node and the mass of nodes without out-edges is spread uniformly.
pub fn pagerank(graph: &CoReportGraph, params: &PageRankParams) -> Result<PageRank> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::Data("co-report graph has no outlet".into()));
    }
    if !(0.0..1.0).contains(&params.damping) || !(params.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "damping must lie in [0, 1) and tolerance be positive, got {} and {}",
            params.damping, params.tolerance
        )));
    }
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w) in graph.edges() {
        out[i].push((j, w));
    }
    for row in &mut out {
        let total: f64 = row.iter().map(|(_, w)| w).sum();
        row.iter_mut().for_each(|(_, w)| *w /= total);
    }
    let d = params.damping;
    let mut p = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for it in 1..=params.max_iterations {
        let dangling: f64 = (0..n).filter(|&i| out[i].is_empty()).map(|i| p[i]).sum();
        let base = (1.0 - d) / n as f64 + d * dangling / n as f64;
        let mut next = vec![base; n];
        for (i, row) in out.iter().enumerate() {
            for &(j, w) in row {
                next[j] += d * p[i] * w;
            }
        }
        residual = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if residual < params.tolerance {
            return Ok(PageRank {
                scores: p,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: params.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DayInterval, Dimension, Event, Hierarchies, Hierarchy, Report};
    use chrono::NaiveDate;
    use std::sync::Arc;

    pub(crate) fn db(outlets: &[&str], events: &[&[&str]]) -> EventDatabase {
        let h = Arc::new(
            Hierarchies::new(
                Hierarchy::flat(Dimension::Location, ["z"]).unwrap(),
                Hierarchy::flat(Dimension::Disease, ["d"]).unwrap(),
                Hierarchy::flat(Dimension::Host, ["h"]).unwrap(),
                Hierarchy::flat(Dimension::Source, outlets).unwrap(),
            )
            .unwrap(),
        );
        let day = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let events = events
            .iter()
            .enumerate()
            .map(|(i, os)| {
                let reports: Vec<Report> = os
                    .iter()
                    .map(|o| Report {
                        outlet: h.source.get(o).unwrap(),
                        date: day,
                    })
                    .collect();
                Event {
                    system: "t".into(),
                    record_id: i.to_string(),
                    location: h.location.get("z").unwrap(),
                    date: DayInterval::day(day),
                    disease: h.disease.get("d").unwrap(),
                    host: h.host.get("h").unwrap(),
                    source: reports[0].outlet,
                    reports,
                }
            })
            .collect();
        EventDatabase::new("t", h, events).unwrap()
    }

    #[test]
    fn weights_follow_the_row_normalisation() {
        let g = CoReportGraph::build(&db(&["a", "b", "c"], &[&["a"], &["a", "b"], &["c"]]), &Blocklist::default(), false);
        let (a, b, c) = (0, 1, 2);
        assert_eq!(g.weight(a, b), 0.5);
        assert_eq!(g.weight(b, a), 1.0);
        assert_eq!(g.weight(a, a), 1.0);
        assert_eq!(g.weight(a, c), 0.0);
        assert_eq!(g.edges().count(), 2);
        let s = CoReportGraph::build(&db(&["a", "b", "c"], &[&["a"], &["a", "b"], &["c"]]), &Blocklist::default(), true);
        assert_eq!(s.weight(a, b), 0.75);
        assert_eq!(s.weight(b, a), 0.75);
    }

    #[test]
    fn identical_event_sets() {
        let g = CoReportGraph::build(&db(&["a", "b"], &[&["a", "b"], &["a", "b"]]), &Blocklist::default(), false);
        assert_eq!((g.weight(0, 1), g.weight(1, 0)), (1.0, 1.0));
        let pr = pagerank(&g, &PageRankParams::default()).unwrap();
        assert!((pr.scores[0] - 0.5).abs() < 1e-12 && (pr.scores[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn blocklisted_and_silent_outlets_are_dropped() {
        let g = CoReportGraph::build(&db(&["a", "b", "woah", "quiet"], &[&["a", "woah"], &["b"]]), &Blocklist::new(["woah"]), false);
        assert_eq!(g.keys(), ["a", "b"]);
    }

    #[test]
    fn top_breaks_ties_by_key() {
        let g = CoReportGraph::build(&db(&["c", "a", "b"], &[&["a"], &["b"], &["c"]]), &Blocklist::default(), false);
        let pr = pagerank(&g, &PageRankParams::default()).unwrap();
        assert_eq!(pr.top(&g, 2).keys(), ["a", "b"]);
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = CoReportGraph::build(&db(&["a", "b", "c"], &[&["a"], &["a", "b"], &["c"]]), &Blocklist::default(), false);
        let params = PageRankParams {
            max_iterations: 1,
            ..Default::default()
        };
        assert!(matches!(pagerank(&g, &params), Err(Error::NonConvergence { iterations: 1, .. })));
    }
}
