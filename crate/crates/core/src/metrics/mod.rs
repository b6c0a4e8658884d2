//! Comparison scores of a candidate database against a reference.

mod config;
mod periodicity;
mod ranking;
mod report;
mod source;
mod spatial;
mod thematic;
mod timeliness;

pub use config::EvaluationConfig;
pub use periodicity::{
    periodicity, periodicity_continuous, periodicity_final, periodicity_seasonal, Cell, ContinuousPeriodicity,
    Periodicity, RankingCell, SeasonalCell, SeasonalPeriodicity, SeasonalSlice,
};
pub use ranking::{normalized_precision, normalized_recall, ranking_f, ranking_scores, RankingScores};
pub use report::{
    evaluate, ChordRow, EvalDimension, Evaluation, EvaluationReport, MatchingSummary, Provenance, Scores, SourceOptions,
    SpatialDetail, TimelinessDetail,
};
pub use source::{source_consistency, SourceConsistency};
pub use spatial::{representativeness, representativeness_multi, representativeness_scaled, Representativeness, ZoneScore};
pub use thematic::{thematic_score, Thematic, ThematicCell};
pub use timeliness::{delay_score, timeliness, PairLag, Timeliness, TimelinessSummary};
