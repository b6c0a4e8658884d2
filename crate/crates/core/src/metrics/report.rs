use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::config::EvaluationConfig;
use super::periodicity::{periodicity, Periodicity};
use super::source::{source_consistency, SourceConsistency};
use super::spatial::{representativeness_multi, Representativeness};
use super::thematic::{thematic_score, Thematic};
use super::timeliness::{timeliness, Timeliness};
use crate::error::{Error, Result};
use crate::mining::{mine_spatial, Closeness, MiningParams};
use crate::model::{fix_scale, EventDatabase};
use crate::similarity::{match_events, SimilarityParams};
use crate::sources::{Blocklist, PageRankParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalDimension {
    Spatial,
    Timeliness,
    Periodicity,
    Thematic,
    Source,
}

impl EvalDimension {
    pub const ALL: [EvalDimension; 5] = [
        EvalDimension::Spatial,
        EvalDimension::Timeliness,
        EvalDimension::Periodicity,
        EvalDimension::Thematic,
        EvalDimension::Source,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalDimension::Spatial => "spatial",
            EvalDimension::Timeliness => "timeliness",
            EvalDimension::Periodicity => "periodicity",
            EvalDimension::Thematic => "thematic",
            EvalDimension::Source => "source",
        }
    }

    pub fn needs_reference(self) -> bool {
        self != EvalDimension::Source
    }
}

impl fmt::Display for EvalDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown dimension {s:?}; expected one of spatial, timeliness, periodicity, thematic, source"
                ))
            })
    }
}

/// Settings of the outlet rankings.
#[derive(Default, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceOptions {
    /// Average `b_ij` and `b_ji` before ranking.
    pub symmetrize: bool,
    pub pagerank: PageRankParams,
    /// Cascade horizon in days; one past the largest delay when unset.
    pub t_max: Option<i64>,
}


/// Everything an evaluation run reads.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation<'a> {
    pub candidate: &'a EventDatabase,
    pub reference: Option<&'a EventDatabase>,
    pub config: &'a EvaluationConfig,
    pub closeness: &'a Closeness,
    pub blocklist: &'a Blocklist,
    pub similarity: SimilarityParams,
    pub tau: f64,
    pub sources: SourceOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub candidate: String,
    pub candidate_events: usize,
    pub reference: Option<String>,
    pub reference_events: Option<usize>,
    pub dimensions: Vec<EvalDimension>,
    pub config: EvaluationConfig,
    pub similarity: SimilarityParams,
    pub tau: f64,
    pub sources: SourceOptions,
}

/// Headline numbers; `None` for dimensions not run or undefined.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Scores {
    pub spatial: Option<f64>,
    /// Higher means more delay.
    pub delay: Option<f64>,
    /// `1 - delay`.
    pub timeliness: Option<f64>,
    pub periodicity_continuous: Option<f64>,
    pub periodicity_seasonal: Option<f64>,
    pub periodicity: Option<f64>,
    pub thematic: Option<f64>,
    pub source: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialDetail {
    pub mean: f64,
    pub cells: Vec<Representativeness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingSummary {
    pub candidate_events: usize,
    pub reference_events: usize,
    pub matched: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelinessDetail {
    pub matching: MatchingSummary,
    #[serde(flatten)]
    pub timeliness: Timeliness,
}

/// One pair of entities co-occurring in a spatial pattern, with the months
/// in which the pattern occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordRow {
    pub system: String,
    pub entity_a: String,
    pub entity_b: String,
    pub weight: usize,
    pub months: [usize; 12],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub provenance: Provenance,
    pub scores: Scores,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spatial: Option<SpatialDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeliness: Option<TimelinessDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodicity: Option<Periodicity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thematic: Option<Thematic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConsistency>,
    #[serde(skip)]
    pub chord: Vec<ChordRow>,
}

fn chord_rows(db: &EventDatabase, config: &EvaluationConfig, closeness: &Closeness) -> Result<Vec<ChordRow>> {
    let scaled = fix_scale(db, config.spatial_levels[0], config.temporal_scales[0])?;
    let params = MiningParams::new(config.iotas[0], config.rhos[0]);
    let set = mine_spatial(&scaled, &params, closeness)?;
    let zones = scaled.zones();
    let mut rows: BTreeMap<(String, String), (usize, [usize; 12])> = BTreeMap::new();
    for p in &set.patterns {
        let crate::mining::PatternItems::Spatial(items) = &p.items else { continue };
        for (i, &a) in items.iter().enumerate() {
            for &b in &items[i + 1..] {
                let (la, lb) = (zones.label(a).to_owned(), zones.label(b).to_owned());
                let key = if la <= lb { (la, lb) } else { (lb, la) };
                let row = rows.entry(key).or_insert((0, [0; 12]));
                row.0 += p.period_support;
                for o in &p.occurrences {
                    row.1[o.start().month0() as usize] += 1;
                }
            }
        }
    }
    Ok(rows
        .into_iter()
        .map(|((entity_a, entity_b), (weight, months))| ChordRow {
            system: db.name().to_owned(),
            entity_a,
            entity_b,
            weight,
            months,
        })
        .collect())
}

/// Runs the requested evaluators. Every dimension but `source` compares the
/// candidate with the reference; `source` ranks the candidate's outlets.
pub fn evaluate(run: &Evaluation<'_>, dimensions: &[EvalDimension]) -> Result<EvaluationReport> {
    run.config.validate()?;
    run.similarity.validate()?;
    let mut dims: Vec<EvalDimension> = dimensions.to_vec();
    dims.sort();
    dims.dedup();
    if dims.is_empty() {
        return Err(Error::Config("no dimension requested".into()));
    }
    let window = |db: &EventDatabase| match run.config.horizon {
        None => db.clone(),
        Some((start, end)) => {
            let kept = db.events().iter().filter(|e| e.day() >= start && e.day() <= end).cloned().collect();
            db.with_events(kept)
        }
    };
    let candidate = window(run.candidate);
    let reference = match run.reference {
        Some(r) => {
            candidate.ensure_comparable(r)?;
            Some(window(r))
        }
        None => None,
    };
    let need_ref = |d: EvalDimension| -> Result<&EventDatabase> {
        reference
            .as_ref()
            .ok_or_else(|| Error::Config(format!("dimension {d} needs a reference database")))
    };
    let mut report = EvaluationReport {
        provenance: Provenance {
            candidate: candidate.name().to_owned(),
            candidate_events: candidate.len(),
            reference: reference.as_ref().map(|r| r.name().to_owned()),
            reference_events: reference.as_ref().map(|r| r.len()),
            dimensions: dims.clone(),
            config: run.config.clone(),
            similarity: run.similarity,
            tau: run.tau,
            sources: run.sources,
        },
        scores: Scores::default(),
        spatial: None,
        timeliness: None,
        periodicity: None,
        thematic: None,
        source: None,
        chord: Vec::new(),
    };
    for &d in &dims {
        match d {
            EvalDimension::Spatial => {
                let r = need_ref(d)?;
                let (mean, cells) =
                    representativeness_multi(&candidate, r, &run.config.spatial_levels, &run.config.temporal_scales)?;
                report.scores.spatial = Some(mean);
                report.spatial = Some(SpatialDetail { mean, cells });
            }
            EvalDimension::Timeliness => {
                let r = need_ref(d)?;
                let matching = match_events(&candidate, r, &run.similarity, run.tau)?;
                let t = timeliness(&matching, &candidate, r, run.config.decay_days, run.config.advance_days)?;
                report.scores.delay = Some(t.delay_score);
                report.scores.timeliness = Some(t.timeliness);
                report.timeliness = Some(TimelinessDetail {
                    matching: MatchingSummary {
                        candidate_events: candidate.len(),
                        reference_events: r.len(),
                        matched: matching.len(),
                        objective: matching.meta.objective,
                    },
                    timeliness: t,
                });
            }
            EvalDimension::Periodicity => {
                let r = need_ref(d)?;
                let p = periodicity(&candidate, r, run.config, run.closeness)?;
                report.scores.periodicity_continuous = p.continuous.score;
                report.scores.periodicity_seasonal = p.seasonal.score;
                report.scores.periodicity = p.score;
                report.chord = chord_rows(r, run.config, run.closeness)?;
                report.chord.extend(chord_rows(&candidate, run.config, run.closeness)?);
                report.periodicity = Some(p);
            }
            EvalDimension::Thematic => {
                let r = need_ref(d)?;
                let t = thematic_score(&candidate, r, run.config)?;
                report.scores.thematic = t.score;
                report.thematic = Some(t);
            }
            EvalDimension::Source => {
                let s = source_consistency(
                    &candidate,
                    run.blocklist,
                    run.config.top_k,
                    run.sources.symmetrize,
                    &run.sources.pagerank,
                    run.sources.t_max,
                )?;
                report.scores.source = Some(s.scores.f);
                report.source = Some(s);
            }
        }
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| x.to_string())
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, BufWriter::new(f)))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_file(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf> {
    let (path, out) = create(dir, name)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let inner = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    finish(&path, inner)?;
    Ok(path)
}

impl EvaluationReport {
    /// Radar-chart rows: one score per dimension, higher is better.
    pub fn radar(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("spatial", self.scores.spatial),
            ("timeliness", self.scores.timeliness),
            ("periodicity", self.scores.periodicity),
            ("thematic", self.scores.thematic),
            ("source", self.scores.source),
        ]
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n").map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    /// Writes `report.json` and the plot-data tables into `dir`, returning
    /// the paths written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let (path, out) = create(dir, "report.json")?;
        let mut out = out;
        self.write_json(&mut out)?;
        finish(&path, out)?;
        written.push(path);

        written.push(csv_file(
            dir,
            "radar.csv",
            &["dimension", "score"],
            self.radar().into_iter().map(|(d, s)| vec![d.to_owned(), opt(s)]).collect(),
        )?);

        if let Some(s) = &self.spatial {
            let rows = s
                .cells
                .iter()
                .flat_map(|c| {
                    c.zones.iter().map(move |z| {
                        vec![
                            c.spatial_level.clone(),
                            c.temporal_scale.to_string(),
                            z.key.clone(),
                            z.label.clone(),
                            z.reference_intervals.to_string(),
                            z.covered.to_string(),
                            z.score.to_string(),
                        ]
                    })
                })
                .collect();
            written.push(csv_file(
                dir,
                "choropleth.csv",
                &["spatial_level", "temporal_scale", "zone", "label", "reference_intervals", "covered", "score"],
                rows,
            )?);
        }

        if let Some(t) = &self.timeliness {
            let lags = &t.timeliness.lags;
            written.push(csv_file(
                dir,
                "lags.csv",
                &["candidate_record", "reference_record", "candidate_date", "reference_date", "lag_days"],
                lags.iter()
                    .map(|l| {
                        vec![
                            l.first_record.clone(),
                            l.second_record.clone(),
                            l.first_date.to_string(),
                            l.second_date.to_string(),
                            l.lag_days.to_string(),
                        ]
                    })
                    .collect(),
            )?);
            let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
            for l in lags {
                *bins.entry(l.lag_days.div_euclid(7)).or_default() += 1;
            }
            written.push(csv_file(
                dir,
                "lag_histogram.csv",
                &["bin_start_days", "bin_end_days", "pairs"],
                bins.into_iter()
                    .map(|(b, n)| vec![(b * 7).to_string(), (b * 7 + 6).to_string(), n.to_string()])
                    .collect(),
            )?);
        }

        let mut rankings: Vec<Vec<String>> = Vec::new();
        if let Some(p) = &self.periodicity {
            for c in &p.continuous.cells {
                for (list, items) in [("reference", &c.reference), ("candidate", &c.candidate)] {
                    for (i, item) in items.iter().enumerate() {
                        rankings.push(vec![
                            "periodicity".into(),
                            c.cell.spatial_level.to_string(),
                            c.cell.temporal_scale.to_string(),
                            c.cell.iota.to_string(),
                            c.cell.rho.to_string(),
                            list.into(),
                            (i + 1).to_string(),
                            item.clone(),
                        ]);
                    }
                }
            }
            let mut grid = Vec::new();
            for c in &p.seasonal.cells {
                for (system, pick) in [("reference", 0), ("candidate", 1)] {
                    let mut months: BTreeMap<&str, [bool; 12]> = BTreeMap::new();
                    for s in &c.slices {
                        let list = if pick == 0 { &s.reference } else { &s.candidate };
                        for x in list {
                            months.entry(x.as_str()).or_default()[s.month as usize - 1] = true;
                        }
                    }
                    for (pattern, marks) in months {
                        let mut row = vec![
                            c.cell.spatial_level.to_string(),
                            c.cell.temporal_scale.to_string(),
                            c.cell.iota.to_string(),
                            c.cell.rho.to_string(),
                            system.to_owned(),
                            pattern.to_owned(),
                        ];
                        row.extend(marks.iter().map(|&m| if m { "x".to_owned() } else { String::new() }));
                        grid.push(row);
                    }
                }
            }
            let mut header = vec!["spatial_level", "temporal_scale", "iota", "rho", "system", "pattern"];
            header.extend(["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]);
            written.push(csv_file(dir, "seasonal_grid.csv", &header, grid)?);
            let mut header = vec!["system", "entity_a", "entity_b", "weight"];
            header.extend(["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]);
            written.push(csv_file(
                dir,
                "chord.csv",
                &header,
                self.chord
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.system.clone(), r.entity_a.clone(), r.entity_b.clone(), r.weight.to_string()];
                        row.extend(r.months.iter().map(|m| m.to_string()));
                        row
                    })
                    .collect(),
            )?);
        }
        if let Some(t) = &self.thematic {
            for c in &t.cells {
                for (list, items) in [("reference", &c.reference), ("candidate", &c.candidate)] {
                    for (i, item) in items.iter().enumerate() {
                        rankings.push(vec![
                            "thematic".into(),
                            String::new(),
                            self.provenance.config.thematic_unit.to_string(),
                            c.iota.to_string(),
                            c.rho.to_string(),
                            list.into(),
                            (i + 1).to_string(),
                            item.clone(),
                        ]);
                    }
                }
            }
        }
        if let Some(s) = &self.source {
            for (list, ranking) in [("pagerank", &s.pagerank), ("celf", &s.celf)] {
                for r in &ranking.0 {
                    rankings.push(vec![
                        "source".into(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        list.into(),
                        r.rank.to_string(),
                        r.outlet.clone(),
                    ]);
                }
            }
        }
        if !rankings.is_empty() {
            written.push(csv_file(
                dir,
                "pattern_rankings.csv",
                &["dimension", "spatial_level", "temporal_scale", "iota", "rho", "list", "rank", "item"],
                rankings,
            )?);
        }
        Ok(written)
    }
}
