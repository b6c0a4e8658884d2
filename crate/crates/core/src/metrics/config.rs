use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mining::{Gap, MinSupport};
use crate::model::{AdminLevel, SpatialLevel, TemporalScale};

/// Scales and parameter grids shared by every evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub spatial_levels: Vec<SpatialLevel>,
    pub temporal_scales: Vec<TemporalScale>,
    pub iotas: Vec<Gap>,
    pub rhos: Vec<MinSupport>,
    /// Distance bound for spatial patterns when no explicit closeness
    /// relation is supplied.
    pub alpha_km: Option<f64>,
    /// Decay window of the delay score, in days.
    pub decay_days: f64,
    /// Threshold of the "earlier by at least" timeliness counts.
    pub advance_days: i64,
    pub thematic_iotas: Vec<Gap>,
    pub thematic_rhos: Vec<MinSupport>,
    pub thematic_unit: TemporalScale,
    /// Length of the compared outlet rankings.
    pub top_k: usize,
    /// Only events dated within this inclusive range are evaluated.
    pub horizon: Option<(NaiveDate, NaiveDate)>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            spatial_levels: vec![SpatialLevel::Admin(AdminLevel::Country)],
            temporal_scales: vec![TemporalScale::Week],
            iotas: vec![Gap::Finite(2)],
            rhos: vec![MinSupport::Count(2)],
            alpha_km: None,
            decay_days: 21.0,
            advance_days: 30,
            thematic_iotas: vec![Gap::Finite(10), Gap::Finite(30), Gap::Infinite],
            thematic_rhos: vec![MinSupport::Count(1)],
            thematic_unit: TemporalScale::Day,
            top_k: 10,
            horizon: None,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::Config(format!("{name} must not be empty")))
            } else {
                Ok(())
            }
        };
        empty("spatial_levels", self.spatial_levels.len())?;
        empty("temporal_scales", self.temporal_scales.len())?;
        empty("iotas", self.iotas.len())?;
        empty("rhos", self.rhos.len())?;
        empty("thematic_iotas", self.thematic_iotas.len())?;
        empty("thematic_rhos", self.thematic_rhos.len())?;
        if !(self.decay_days > 0.0 && self.decay_days.is_finite()) {
            return Err(Error::Config(format!("decay_days must be positive, got {}", self.decay_days)));
        }
        if self.advance_days < 0 {
            return Err(Error::Config("advance_days must not be negative".into()));
        }
        if let Some(a) = self.alpha_km {
            if !(a >= 0.0) {
                return Err(Error::Config(format!("alpha_km must be non-negative, got {a}")));
            }
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        if let Some((start, end)) = self.horizon {
            if start > end {
                return Err(Error::Config(format!("horizon starts after it ends: {start} > {end}")));
            }
        }
        Ok(())
    }
}
