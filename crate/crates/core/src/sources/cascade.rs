use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use super::{reporting_outlets, Blocklist, OutletRanking, RankedOutlet};
use crate::error::{Error, Result};
use crate::model::{EventDatabase, NodeId};

/// Outlets reporting one event, by increasing delay from its first report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cascade {
    pub record_id: String,
    /// `(outlet index, delay in days)`, ties by outlet key.
    pub reports: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeSet {
    #[serde(skip)]
    pub outlets: Vec<NodeId>,
    pub keys: Vec<String>,
    pub cascades: Vec<Cascade>,
    /// Delay assigned to an outlet that does not report an event.
    pub t_max: i64,
    /// Events left out because no allowed outlet reports them.
    pub excluded: usize,
}

impl CascadeSet {
    /// Cascades over the outlets not in `blocklist`, with `t_max` defaulting
    /// to one day past the largest observed delay.
    pub fn build(db: &EventDatabase, blocklist: &Blocklist, t_max: Option<i64>) -> Result<Self> {
        let outlets = reporting_outlets(db, blocklist, false);
        let sources = &db.hierarchies().source;
        let keys: Vec<String> = outlets.iter().map(|&o| sources.key(o).to_owned()).collect();
        let mut cascades = Vec::new();
        let mut excluded = 0;
        for e in db.events() {
            let mut earliest: BTreeMap<usize, chrono::NaiveDate> = BTreeMap::new();
            for r in &e.reports {
                if let Ok(i) = keys.binary_search_by(|k| k.as_str().cmp(sources.key(r.outlet))) {
                    let d = earliest.entry(i).or_insert(r.date);
                    *d = (*d).min(r.date);
                }
            }
            let Some(&first) = earliest.values().min() else {
                excluded += 1;
                continue;
            };
            let mut reports: Vec<(usize, i64)> = earliest.into_iter().map(|(i, d)| (i, (d - first).num_days())).collect();
            reports.sort_by_key(|&(i, d)| (d, i));
            cascades.push(Cascade {
                record_id: e.record_id.clone(),
                reports,
            });
        }
        let observed = cascades.iter().flat_map(|c| c.reports.iter().map(|r| r.1)).max().unwrap_or(0);
        let t_max = match t_max {
            Some(t) if t <= observed => {
                return Err(Error::Config(format!(
                    "cascade horizon {t} must exceed the largest observed delay {observed}"
                )))
            }
            Some(t) => t,
            None => observed + 1,
        };
        if excluded > 0 {
            log::warn!("{excluded} events of {} have no reporting outlet and are left out of the cascades", db.name());
        }
        Ok(CascadeSet {
            outlets,
            keys,
            cascades,
            t_max,
            excluded,
        })
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    /// `T(e, s)`: days from the first report of cascade `e` to the first
    /// report by outlet `s`, or `t_max` if `s` never reports it.
    pub fn delay(&self, e: usize, s: usize) -> i64 {
        self.cascades[e]
            .reports
            .iter()
            .find(|r| r.0 == s)
            .map_or(self.t_max, |r| r.1)
    }

    /// `R(A) = Σ_e (t_max - min_{s in A} T(e, s))`.
    pub fn penalty_reduction(&self, selected: &[usize]) -> i64 {
        (0..self.len())
            .map(|e| self.t_max - selected.iter().map(|&s| self.delay(e, s)).min().unwrap_or(self.t_max))
            .sum()
    }

    // Per outlet, the cascades it appears in with its delay.
    fn by_outlet(&self) -> Vec<Vec<(usize, i64)>> {
        let mut v = vec![Vec::new(); self.keys.len()];
        for (e, c) in self.cascades.iter().enumerate() {
            for &(s, d) in &c.reports {
                v[s].push((e, d));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CelfResult {
    /// Selected outlet indices with their marginal gains, in order.
    pub selection: Vec<(usize, i64)>,
    pub objective: i64,
    /// Marginal gains computed, a measure of the work saved by laziness.
    pub evaluations: usize,
}

impl CelfResult {
    pub fn ranking(&self, cascades: &CascadeSet) -> OutletRanking {
        OutletRanking(
            self.selection
                .iter()
                .enumerate()
                .map(|(r, &(s, gain))| RankedOutlet {
                    rank: r + 1,
                    outlet: cascades.keys[s].clone(),
                    score: gain as f64,
                })
                .collect(),
        )
    }
}

fn gain(reach: &[(usize, i64)], best: &[i64]) -> i64 {
    reach.iter().map(|&(e, d)| (best[e] - d).max(0)).sum()
}

#[derive(PartialEq, Eq)]
struct Entry {
    gain: i64,
    outlet: usize,
    /// Selection size when `gain` was computed.
    round: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.cmp(&other.gain).then(other.outlet.cmp(&self.outlet))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy greedy maximization of the penalty reduction. Stale gains are upper
/// bounds by submodularity, so an entry whose gain is fresh when it reaches
/// the top of the heap is the greedy choice; ties go to the smaller key.
pub fn celf(cascades: &CascadeSet, k: usize) -> CelfResult {
    let reach = cascades.by_outlet();
    let mut best = vec![cascades.t_max; cascades.len()];
    let mut heap: BinaryHeap<Entry> = (0..reach.len())
        .map(|s| Entry {
            gain: gain(&reach[s], &best),
            outlet: s,
            round: 0,
        })
        .collect();
    let mut evaluations = reach.len();
    let mut selection = Vec::new();
    let mut objective = 0;
    while selection.len() < k {
        let Some(top) = heap.pop() else { break };
        if top.round == selection.len() {
            for &(e, d) in &reach[top.outlet] {
                best[e] = best[e].min(d);
            }
            objective += top.gain;
            selection.push((top.outlet, top.gain));
        } else {
            evaluations += 1;
            heap.push(Entry {
                gain: gain(&reach[top.outlet], &best),
                outlet: top.outlet,
                round: selection.len(),
            });
        }
    }
    CelfResult {
        selection,
        objective,
        evaluations,
    }
}

/// Plain greedy that re-evaluates every remaining outlet at each step.
pub fn naive_greedy(cascades: &CascadeSet, k: usize) -> CelfResult {
    let n = cascades.keys.len();
    let mut selected: Vec<usize> = Vec::new();
    let mut selection = Vec::new();
    let mut evaluations = 0;
    let mut current = 0;
    while selected.len() < k.min(n) {
        let mut pick: Option<(i64, usize)> = None;
        for s in (0..n).filter(|s| !selected.contains(s)) {
            let mut with = selected.clone();
            with.push(s);
            let g = cascades.penalty_reduction(&with) - current;
            evaluations += 1;
            if pick.is_none_or(|(bg, _)| g > bg) {
                pick = Some((g, s));
            }
        }
        let (g, s) = pick.expect("an outlet remains");
        selected.push(s);
        selection.push((s, g));
        current += g;
    }
    CelfResult {
        selection,
        objective: current,
        evaluations,
    }
}
