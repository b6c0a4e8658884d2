use std::path::{Path, PathBuf};

use ebsc_core::metrics::{EvaluationConfig, SourceOptions};
use ebsc_core::model::TemporalScale;
use ebsc_core::normalize::DateOrder;
use ebsc_core::similarity::SimilarityParams;
use ebsc_core::{Error, Result};
use serde::Deserialize;

/// Input and output locations. Relative paths in a config file are
/// resolved against the file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub location: Option<PathBuf>,
    pub disease: Option<PathBuf>,
    pub host: Option<PathBuf>,
    /// Outlet hierarchy; a flat one is built from the event files when unset.
    pub source: Option<PathBuf>,
    pub candidate: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub closeness: Option<PathBuf>,
    pub blocklist: Option<PathBuf>,
    pub lexicons: Vec<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub documents: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.location,
            &mut self.disease,
            &mut self.host,
            &mut self.source,
            &mut self.candidate,
            &mut self.reference,
            &mut self.closeness,
            &mut self.blocklist,
            &mut self.gazetteer,
            &mut self.documents,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.lexicons.iter_mut().for_each(fix);
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    /// System name given to documents that do not carry one.
    pub system: String,
    pub window: usize,
    pub cluster_threshold: f64,
    pub date_order: Option<DateOrder>,
}

impl Default for NormalizeSection {
    fn default() -> Self {
        let p = ebsc_core::normalize::NormalizeParams::default();
        NormalizeSection {
            system: "corpus".into(),
            window: p.window,
            cluster_threshold: p.cluster_threshold,
            date_order: p.date_order,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSection {
    /// Time unit of multidimensional mining.
    pub unit: TemporalScale,
}

impl Default for MiningSection {
    fn default() -> Self {
        MiningSection {
            unit: TemporalScale::Day,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    /// Matching threshold: pairs must score above it.
    pub tau: f64,
    pub similarity: SimilarityParams,
    pub evaluation: EvaluationConfig,
    pub sources: SourceOptions,
    pub normalize: NormalizeSection,
    pub mining: MiningSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.rebase(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() {
            return Err(Error::Config(format!("tau must be finite, got {}", self.tau)));
        }
        self.similarity.validate()?;
        self.evaluation.validate()?;
        if !(self.normalize.cluster_threshold.is_finite()) {
            return Err(Error::Config("normalize.cluster_threshold must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ebsc_core::mining::Gap;

    #[test]
    fn paths_are_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "tau = 1.5\n[paths]\nlocation = \"h/location.csv\"\nlexicons = [\"a.csv\"]\n\
             [evaluation]\niotas = [2, \"inf\"]\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.location.unwrap(), dir.path().join("h/location.csv"));
        assert_eq!(cfg.paths.lexicons, [dir.path().join("a.csv")]);
        assert_eq!(cfg.evaluation.iotas, [Gap::Finite(2), Gap::Infinite]);
        assert_eq!(cfg.tau, 1.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[paths]\nlocaton = \"x\"\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
    }
}
