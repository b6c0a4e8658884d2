use rayon::prelude::*;
use serde::Serialize;

use super::config::EvaluationConfig;
use super::ranking::{ranking_scores, RankingScores};
use crate::error::Result;
use crate::mining::{mine_multidimensional, Gap, MinSupport, MiningParams};
use crate::model::EventDatabase;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThematicCell {
    pub iota: Gap,
    pub rho: MinSupport,
    pub reference: Vec<String>,
    pub candidate: Vec<String>,
    pub scores: Option<RankingScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thematic {
    pub cells: Vec<ThematicCell>,
    pub score: Option<f64>,
}

/// Ranking agreement of the hierarchy-expanded (location, disease, host)
/// patterns over the thematic parameter grid. Combinations where the
/// reference mines nothing are left out of the mean.
pub fn thematic_score(candidate: &EventDatabase, reference: &EventDatabase, config: &EvaluationConfig) -> Result<Thematic> {
    candidate.ensure_comparable(reference)?;
    config.validate()?;
    let grid: Vec<(Gap, MinSupport)> = config
        .thematic_iotas
        .iter()
        .flat_map(|&i| config.thematic_rhos.iter().map(move |&r| (i, r)))
        .collect();
    let cells: Vec<ThematicCell> = grid
        .par_iter()
        .map(|&(iota, rho)| {
            let params = MiningParams::new(iota, rho);
            let labels = |db| -> Result<Vec<String>> {
                Ok(mine_multidimensional(db, &params, config.thematic_unit)?
                    .patterns
                    .into_iter()
                    .map(|p| p.label)
                    .collect())
            };
            let cand = labels(candidate)?;
            let refl = labels(reference)?;
            Ok(ThematicCell {
                iota,
                rho,
                scores: (!refl.is_empty()).then(|| ranking_scores(&cand, &refl)),
                reference: refl,
                candidate: cand,
            })
        })
        .collect::<Result<_>>()?;
    let kept: Vec<f64> = cells.iter().filter_map(|c| c.scores.map(|s| s.f)).collect();
    let score = (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64);
    Ok(Thematic { cells, score })
}
