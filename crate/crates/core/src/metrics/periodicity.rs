use std::collections::BTreeSet;

use chrono::Datelike;
use rayon::prelude::*;
use serde::Serialize;

use super::config::EvaluationConfig;
use super::ranking::{ranking_scores, RankingScores};
use crate::error::{Error, Result};
use crate::mining::{mine_spatial, Closeness, Gap, MinSupport, MiningParams, PatternSet};
use crate::model::{fix_scale, EventDatabase, ScaledEventDatabase, SpatialLevel, TemporalScale};

/// One combination of scales and mining parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub spatial_level: SpatialLevel,
    pub temporal_scale: TemporalScale,
    pub iota: Gap,
    pub rho: MinSupport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingCell {
    #[serde(flatten)]
    pub cell: Cell,
    /// Pattern labels in mined order.
    pub reference: Vec<String>,
    pub candidate: Vec<String>,
    /// `None` when the reference yields no pattern.
    pub scores: Option<RankingScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousPeriodicity {
    pub cells: Vec<RankingCell>,
    pub score: Option<f64>,
}

/// Patterns of one month of the year, pooled across years.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalSlice {
    pub month: u32,
    pub reference: Vec<String>,
    pub candidate: Vec<String>,
    /// Reference patterns mined by the candidate in this month or an
    /// adjacent one.
    pub found: Vec<String>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalCell {
    #[serde(flatten)]
    pub cell: Cell,
    pub slices: Vec<SeasonalSlice>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalPeriodicity {
    pub cells: Vec<SeasonalCell>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periodicity {
    pub continuous: ContinuousPeriodicity,
    pub seasonal: SeasonalPeriodicity,
    /// Mean of the two components; `None` if either is undefined.
    pub score: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn labels(set: &PatternSet) -> Vec<String> {
    set.patterns.iter().map(|p| p.label.clone()).collect()
}

fn grid(config: &EvaluationConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &spatial_level in &config.spatial_levels {
        for &temporal_scale in &config.temporal_scales {
            for &iota in &config.iotas {
                for &rho in &config.rhos {
                    cells.push(Cell {
                        spatial_level,
                        temporal_scale,
                        iota,
                        rho,
                    });
                }
            }
        }
    }
    cells
}

fn params(cell: &Cell, closeness: &Closeness) -> MiningParams {
    MiningParams {
        alpha_km: match closeness {
            Closeness::Distance(a) => Some(*a),
            Closeness::Explicit(_) => None,
        },
        ..MiningParams::new(cell.iota, cell.rho)
    }
}

fn scaled_pair(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    cell: &Cell,
) -> Result<(ScaledEventDatabase, ScaledEventDatabase)> {
    Ok((
        fix_scale(candidate, cell.spatial_level, cell.temporal_scale)?,
        fix_scale(reference, cell.spatial_level, cell.temporal_scale)?,
    ))
}

/// Ranking agreement of the periodic spatial patterns, averaged over every
/// combination of scales and parameters with a non-empty reference list.
pub fn periodicity_continuous(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    config: &EvaluationConfig,
    closeness: &Closeness,
) -> Result<ContinuousPeriodicity> {
    candidate.ensure_comparable(reference)?;
    config.validate()?;
    let cells: Vec<RankingCell> = grid(config)
        .par_iter()
        .map(|cell| {
            let (c, r) = scaled_pair(candidate, reference, cell)?;
            let p = params(cell, closeness);
            let cand = labels(&mine_spatial(&c, &p, closeness)?);
            let refl = labels(&mine_spatial(&r, &p, closeness)?);
            let scores = (!refl.is_empty()).then(|| ranking_scores(&cand, &refl));
            Ok(RankingCell {
                cell: *cell,
                reference: refl,
                candidate: cand,
                scores,
            })
        })
        .collect::<Result<_>>()?;
    let score = mean(cells.iter().filter_map(|c| c.scores.map(|s| s.f)));
    Ok(ContinuousPeriodicity { cells, score })
}

fn month_slices(db: &ScaledEventDatabase, p: &MiningParams, closeness: &Closeness) -> Result<Vec<Vec<String>>> {
    (1..=12)
        .map(|m| {
            let slice = db.retain(|t| t.interval.start().month() == m);
            Ok(labels(&mine_spatial(&slice, p, closeness)?))
        })
        .collect()
}

/// Fraction of the reference patterns of each month that the candidate
/// mines in the same or an adjacent month, averaged over the months with at
/// least one reference pattern, then over the parameter grid. Months are
/// taken from the start of each interval and do not wrap around the year.
pub fn periodicity_seasonal(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    config: &EvaluationConfig,
    closeness: &Closeness,
) -> Result<SeasonalPeriodicity> {
    candidate.ensure_comparable(reference)?;
    config.validate()?;
    let cells: Vec<SeasonalCell> = grid(config)
        .par_iter()
        .map(|cell| {
            let (c, r) = scaled_pair(candidate, reference, cell)?;
            let p = params(cell, closeness);
            let cand = month_slices(&c, &p, closeness)?;
            let refs = month_slices(&r, &p, closeness)?;
            let slices: Vec<SeasonalSlice> = (0..12)
                .map(|i| {
                    let near: BTreeSet<&String> = (i.max(1) - 1..=(i + 1).min(11)).flat_map(|j| &cand[j]).collect();
                    let found: Vec<String> = refs[i].iter().filter(|x| near.contains(x)).cloned().collect();
                    SeasonalSlice {
                        month: i as u32 + 1,
                        score: (!refs[i].is_empty()).then(|| found.len() as f64 / refs[i].len() as f64),
                        reference: refs[i].clone(),
                        candidate: cand[i].clone(),
                        found,
                    }
                })
                .collect();
            Ok(SeasonalCell {
                cell: *cell,
                score: mean(slices.iter().filter_map(|s| s.score)),
                slices,
            })
        })
        .collect::<Result<_>>()?;
    let score = mean(cells.iter().filter_map(|c| c.score));
    Ok(SeasonalPeriodicity { cells, score })
}

pub fn periodicity(
    candidate: &EventDatabase,
    reference: &EventDatabase,
    config: &EvaluationConfig,
    closeness: &Closeness,
) -> Result<Periodicity> {
    let continuous = periodicity_continuous(candidate, reference, config, closeness)?;
    let seasonal = periodicity_seasonal(candidate, reference, config, closeness)?;
    let score = periodicity_final(continuous.score, seasonal.score).ok();
    Ok(Periodicity {
        continuous,
        seasonal,
        score,
    })
}

/// Mean of the continuous and seasonal scores.
pub fn periodicity_final(continuous: Option<f64>, seasonal: Option<f64>) -> Result<f64> {
    match (continuous, seasonal) {
        (Some(c), Some(s)) => Ok((c + s) / 2.0),
        (None, _) => Err(Error::Undefined("no reference periodic pattern at any scale".into())),
        (_, None) => Err(Error::Undefined("no month with a reference periodic pattern".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ranking::ranking_f;
    use crate::model::{AdminLevel, DayInterval, Dimension, Event, Hierarchies, Hierarchy, NodeSpec, Report};
    use chrono::{Days, NaiveDate};
    use std::sync::Arc;

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
    const CLOSE: [(&str, &str); 9] = [
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

    fn hierarchies() -> Arc<Hierarchies> {
        let mut specs = vec![NodeSpec::new("ALL_Z", "ALL_Z", None)];
        for (_, cs) in OUTBREAKS {
            for c in cs {
                if !specs.iter().any(|s| s.key == *c) {
                    specs.push(NodeSpec::new(*c, *c, Some("ALL_Z")).admin(AdminLevel::Country));
                }
            }
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

    fn db(h: &Arc<Hierarchies>, start: NaiveDate, keep: impl Fn(u64, &str) -> bool) -> EventDatabase {
        let s = h.source.get("s").unwrap();
        let events = OUTBREAKS
            .iter()
            .flat_map(|(w, cs)| cs.iter().filter(|c| keep(*w, c)).map(move |c| (*w, *c)))
            .map(|(w, c)| {
                let day = start + Days::new(7 * (w - 1));
                Event {
                    system: "t".into(),
                    record_id: format!("{c}-{w}"),
                    location: h.location.get(c).unwrap(),
                    date: DayInterval::day(day),
                    disease: h.disease.get("ai").unwrap(),
                    host: h.host.get("bird").unwrap(),
                    source: s,
                    reports: vec![Report { outlet: s, date: day }],
                }
            })
            .collect();
        EventDatabase::new("t", h.clone(), events).unwrap()
    }

    fn closeness(h: &Hierarchies) -> Closeness {
        Closeness::from_pairs(CLOSE.iter().map(|(a, b)| (h.location.get(a).unwrap(), h.location.get(b).unwrap())))
    }

    fn monday() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 1, 4).unwrap()
    }

    #[test]
    fn identical_databases_score_one() {
        let h = hierarchies();
        let d = db(&h, monday(), |_, _| true);
        let p = periodicity(&d, &d, &EvaluationConfig::default(), &closeness(&h)).unwrap();
        assert_eq!(p.continuous.score, Some(1.0));
        assert_eq!(p.seasonal.score, Some(1.0));
        assert_eq!(p.score, Some(1.0));
    }

    #[test]
    fn removing_india_composes_with_the_ranking_oracle() {
        let h = hierarchies();
        let full = db(&h, monday(), |_, _| true);
        let cand = db(&h, monday(), |_, c| c != "India");
        let cont = periodicity_continuous(&cand, &full, &EvaluationConfig::default(), &closeness(&h)).unwrap();
        let cell = &cont.cells[0];
        assert_eq!(cell.reference.len(), 7);
        assert!(cell.candidate.iter().all(|l| !l.contains("India")));
        let expect = ranking_f(&cell.candidate, &cell.reference);
        assert!(expect > 0.0 && expect < 1.0);
        assert_eq!(cont.score, Some(expect));
    }

    #[test]
    fn disjoint_patterns_score_zero() {
        let h = hierarchies();
        let a = db(&h, monday(), |_, c| c == "India");
        let b = db(&h, monday(), |_, c| c == "Portugal");
        let cont = periodicity_continuous(&a, &b, &EvaluationConfig::default(), &closeness(&h)).unwrap();
        assert_eq!(cont.score, Some(0.0));
    }

    #[test]
    fn seasonal_tolerates_an_adjacent_month() {
        let h = hierarchies();
        let config = EvaluationConfig {
            temporal_scales: vec![TemporalScale::Week],
            ..Default::default()
        };
        // weeks 1, 2 and 4 all fall in January; four weeks later, in February
        let reference = db(&h, monday(), |w, _| w <= 4);
        let shifted = db(&h, monday() + Days::new(28), |w, _| w <= 4);
        let s = periodicity_seasonal(&shifted, &reference, &config, &closeness(&h)).unwrap();
        let kept: Vec<&SeasonalSlice> = s.cells[0].slices.iter().filter(|x| x.score.is_some()).collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].month, 1);
        assert_eq!(kept[0].reference, ["France", "India"]);
        assert!(s.cells[0].slices[0].candidate.is_empty());
        assert_eq!(s.score, Some(1.0));
    }

    #[test]
    fn seasonal_without_patterns_is_undefined() {
        let h = hierarchies();
        let sparse = db(&h, monday(), |w, c| w == 1 && c == "France");
        let s = periodicity_seasonal(&sparse, &sparse, &EvaluationConfig::default(), &closeness(&h)).unwrap();
        assert_eq!(s.score, None);
        assert!(periodicity_final(Some(1.0), s.score).is_err());
    }

    #[test]
    fn final_is_the_mean() {
        assert_eq!(periodicity_final(Some(0.5), Some(0.7)).unwrap(), 0.6);
        assert_eq!(periodicity_final(Some(1.0), Some(1.0)).unwrap(), 1.0);
    }
}
