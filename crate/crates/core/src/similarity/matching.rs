use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hungarian::{assignment_value, max_weight_assignment};
use super::{event_similarity, SimilarityParams};
use crate::error::{Error, Result};
use crate::model::EventDatabase;

/// Dense similarity scores between the events of two databases, stored with
/// the smaller side as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    scores: Vec<f64>,
    transposed: bool,
}

impl SimilarityMatrix {
    /// Wraps a row-major `n1 x n2` matrix, transposing it when `n1 > n2`.
    pub fn from_scores(scores: Vec<f64>, n1: usize, n2: usize) -> Self {
        assert_eq!(scores.len(), n1 * n2, "matrix shape does not match its data");
        if n1 <= n2 {
            return SimilarityMatrix {
                rows: n1,
                cols: n2,
                scores,
                transposed: false,
            };
        }
        let mut t = vec![0.0; scores.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                t[j * n1 + i] = scores[i * n2 + j];
            }
        }
        SimilarityMatrix {
            rows: n2,
            cols: n1,
            scores: t,
            transposed: true,
        }
    }

    pub fn compute(db1: &EventDatabase, db2: &EventDatabase, params: &SimilarityParams) -> Result<Self> {
        db1.ensure_comparable(db2)?;
        params.validate()?;
        let h = db1.hierarchies();
        let (n1, n2) = (db1.len(), db2.len());
        let rows: Vec<Vec<f64>> = db1
            .events()
            .par_iter()
            .map(|a| {
                db2.events()
                    .iter()
                    .map(|b| event_similarity(h, a, b, params))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_scores(rows.concat(), n1, n2))
    }

    /// Number of events in the first and second database.
    pub fn shape(&self) -> (usize, usize) {
        if self.transposed {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        }
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    /// Score between event `i` of the first and `j` of the second database.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.transposed {
            self.scores[j * self.cols + i]
        } else {
            self.scores[i * self.cols + j]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    /// Index into the first database's events.
    pub db1: usize,
    /// Index into the second database's events.
    pub db2: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingMeta {
    pub db1: String,
    pub db2: String,
    pub n_db1: usize,
    pub n_db2: usize,
    pub tau: f64,
    pub params: Option<SimilarityParams>,
    pub transposed: bool,
    /// Total score of the optimal assignment before thresholding.
    pub objective: f64,
    pub matched: usize,
}

/// A partial bijection between two event databases.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub meta: MatchingMeta,
}

impl Matching {
    /// Solves the assignment on `matrix` and keeps pairs scoring above `tau`.
    pub fn solve(matrix: &SimilarityMatrix, tau: f64) -> Matching {
        let assignment = max_weight_assignment(&matrix.scores, matrix.rows, matrix.cols);
        let objective = assignment_value(&matrix.scores, matrix.cols, &assignment);
        let mut pairs: Vec<MatchedPair> = assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| {
                let (db1, db2) = if matrix.transposed { (c, r) } else { (r, c) };
                MatchedPair {
                    db1,
                    db2,
                    score: matrix.get(db1, db2),
                }
            })
            .filter(|p| p.score > tau)
            .collect();
        pairs.sort_by_key(|p| (p.db1, p.db2));
        let (n_db1, n_db2) = matrix.shape();
        Matching {
            meta: MatchingMeta {
                db1: String::new(),
                db2: String::new(),
                n_db1,
                n_db2,
                tau,
                params: None,
                transposed: matrix.transposed,
                objective,
                matched: pairs.len(),
            },
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Writes `db1_record,db2_record,score` rows after a `#` line holding
    /// the JSON metadata.
    pub fn write_csv<W: Write>(&self, db1: &EventDatabase, db2: &EventDatabase, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.meta)?).map_err(|e| Error::io("<matching>", e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["db1_record", "db2_record", "score"])?;
        for p in &self.pairs {
            w.write_record([
                db1.events()[p.db1].record_id.as_str(),
                db2.events()[p.db2].record_id.as_str(),
                &p.score.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<matching>", e))?;
        Ok(())
    }
}

fn record_index(db: &EventDatabase) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for (i, e) in db.events().iter().enumerate() {
        m.entry(e.record_id.as_str()).or_insert(i);
    }
    m
}

impl Matching {
    /// Reads a matching written by [`Matching::write_csv`], resolving record
    /// ids against the two databases.
    pub fn read_csv(path: &Path, db1: &EventDatabase, db2: &EventDatabase) -> Result<Matching> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut first = String::new();
        BufReader::new(file)
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        let meta: Option<MatchingMeta> = match first.trim().strip_prefix('#') {
            Some(json) => Some(serde_json::from_str(json.trim()).map_err(|e| Error::parse(path, 1, e.to_string()))?),
            None => None,
        };
        let (i1, i2) = (record_index(db1), record_index(db2));
        #[derive(Deserialize)]
        struct Row {
            db1_record: String,
            db2_record: String,
            score: f64,
        }
        let mut pairs = Vec::new();
        crate::csvio::read_rows(path, |line, row: Row| {
            let lookup = |m: &HashMap<&str, usize>, id: &str, db: &EventDatabase| {
                m.get(id)
                    .copied()
                    .ok_or_else(|| Error::parse(path, line, format!("record {id:?} not found in {}", db.name())))
            };
            pairs.push(MatchedPair {
                db1: lookup(&i1, &row.db1_record, db1)?,
                db2: lookup(&i2, &row.db2_record, db2)?,
                score: row.score,
            });
            Ok(())
        })?;
        let mut seen1 = vec![false; db1.len()];
        let mut seen2 = vec![false; db2.len()];
        for p in &pairs {
            if std::mem::replace(&mut seen1[p.db1], true) || std::mem::replace(&mut seen2[p.db2], true) {
                return Err(Error::Data(format!("{}: an event is matched twice", path.display())));
            }
        }
        let meta = meta.unwrap_or_else(|| MatchingMeta {
            db1: db1.name().to_owned(),
            db2: db2.name().to_owned(),
            n_db1: db1.len(),
            n_db2: db2.len(),
            tau: f64::NEG_INFINITY,
            params: None,
            transposed: false,
            objective: pairs.iter().map(|p| p.score).sum(),
            matched: pairs.len(),
        });
        Ok(Matching { pairs, meta })
    }
}

/// Optimal one-to-one association of the events of two databases under
/// [`event_similarity`], dropping pairs whose score is not above `tau`.
pub fn match_events(
    db1: &EventDatabase,
    db2: &EventDatabase,
    params: &SimilarityParams,
    tau: f64,
) -> Result<Matching> {
    let matrix = SimilarityMatrix::compute(db1, db2, params)?;
    let mut m = Matching::solve(&matrix, tau);
    m.meta.db1 = db1.name().to_owned();
    m.meta.db2 = db2.name().to_owned();
    m.meta.params = Some(*params);
    log::info!(
        "{} vs {}: {} putatively associated events",
        db1.name(),
        db2.name(),
        m.len()
    );
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_injection(rng: &mut StdRng, n: usize, m: usize) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..m).collect();
        for i in 0..n {
            let k = rng.gen_range(i..m);
            cols.swap(i, k);
        }
        cols.truncate(n);
        cols
    }

    #[test]
    fn beats_random_injections() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let (n1, n2) = (rng.gen_range(1..7), rng.gen_range(1..7));
            let scores: Vec<f64> = (0..n1 * n2).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let matrix = SimilarityMatrix::from_scores(scores.clone(), n1, n2);
            let best = Matching::solve(&matrix, f64::NEG_INFINITY).meta.objective;
            for _ in 0..1000 {
                let v: f64 = if n1 <= n2 {
                    random_injection(&mut rng, n1, n2).iter().enumerate().map(|(i, &j)| scores[i * n2 + j]).sum()
                } else {
                    random_injection(&mut rng, n2, n1).iter().enumerate().map(|(j, &i)| scores[i * n2 + j]).sum()
                };
                assert!(best >= v - 1e-9);
            }
        }
    }

    #[test]
    fn stable_under_transposition() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let (n1, n2) = (rng.gen_range(1..7), rng.gen_range(1..7));
            let scores: Vec<f64> = (0..n1 * n2).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let mut t = vec![0.0; scores.len()];
            for i in 0..n1 {
                for j in 0..n2 {
                    t[j * n1 + i] = scores[i * n2 + j];
                }
            }
            let a = Matching::solve(&SimilarityMatrix::from_scores(scores, n1, n2), 0.0);
            let b = Matching::solve(&SimilarityMatrix::from_scores(t, n2, n1), 0.0);
            let mut flipped: Vec<(usize, usize)> = b.pairs.iter().map(|p| (p.db2, p.db1)).collect();
            flipped.sort_unstable();
            let pa: Vec<(usize, usize)> = a.pairs.iter().map(|p| (p.db1, p.db2)).collect();
            assert_eq!(pa, flipped);
        }
    }

    #[test]
    fn threshold_filters_everything() {
        let m = Matching::solve(&SimilarityMatrix::from_scores(vec![-1.0, 0.0, 0.0, -2.0], 2, 2), 0.0);
        assert!(m.is_empty());
        assert_eq!(m.meta.objective, 0.0);
    }

    #[test]
    fn wide_and_tall_matrices() {
        // 3 x 2: one event of the first database stays unmatched
        let m = Matching::solve(&SimilarityMatrix::from_scores(vec![1.0, 0.5, 3.0, 2.0, 0.2, 0.1], 3, 2), 0.0);
        let pairs: Vec<(usize, usize)> = m.pairs.iter().map(|p| (p.db1, p.db2)).collect();
        assert_eq!(pairs, [(0, 1), (1, 0)]);
        assert!(m.meta.transposed);
        assert_eq!(m.meta.objective, 3.5);
    }
}
