use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::Serialize;

/// Normalized recall, precision and their harmonic mean for a candidate
/// ranked list against a reference ranked list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankingScores {
    pub recall: f64,
    pub precision: f64,
    pub f: f64,
    /// Number of candidate items present in the reference.
    pub relevant: usize,
}

/// Ranks (1-based, ascending) in the reference of the candidate items it
/// contains. Repeated items count once.
fn relevant_ranks<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> (Vec<u64>, usize) {
    let mut rank: HashMap<&T, u64> = HashMap::new();
    for (i, item) in reference.iter().enumerate() {
        rank.entry(item).or_insert(i as u64 + 1);
    }
    let mut seen = HashSet::new();
    let mut ranks: Vec<u64> = candidate
        .iter()
        .filter(|item| seen.insert(*item))
        .filter_map(|item| rank.get(item).copied())
        .collect();
    ranks.sort_unstable();
    (ranks, rank.len())
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

pub fn ranking_scores<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> RankingScores {
    let (ranks, n_ref) = relevant_ranks(candidate, reference);
    let n = ranks.len();
    if n == 0 {
        return RankingScores {
            recall: 0.0,
            precision: 0.0,
            f: 0.0,
            relevant: 0,
        };
    }
    // ranks are sorted, so the i-th smallest rank is at least i
    let excess: u64 = ranks.iter().enumerate().map(|(i, &r)| r - (i as u64 + 1)).sum();
    let recall = 1.0 - excess as f64 / (n * n_ref + n * n) as f64;
    let log_excess: f64 = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (r as f64).ln() - ((i + 1) as f64).ln())
        .sum();
    let denom = ln_binomial(n_ref, n);
    let precision = if denom > 0.0 {
        1.0 - log_excess / denom
    } else if excess == 0 {
        1.0
    } else {
        0.0
    };
    let f = if recall + precision > 0.0 {
        2.0 * recall * precision / (recall + precision)
    } else {
        0.0
    };
    RankingScores {
        recall,
        precision,
        f,
        relevant: n,
    }
}

pub fn normalized_recall<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> f64 {
    ranking_scores(candidate, reference).recall
}

pub fn normalized_precision<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> f64 {
    ranking_scores(candidate, reference).precision
}

pub fn ranking_f<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> f64 {
    ranking_scores(candidate, reference).f
}
