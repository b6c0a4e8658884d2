use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AdminLevel;

/// One gazetteer answer. `rank` starts at 1 and follows result order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    /// Key of the country node in the location hierarchy.
    pub country: String,
    #[serde(default)]
    pub admin_level: Option<AdminLevel>,
    #[serde(default)]
    pub lat: Option<f64>,
    #[serde(default)]
    pub lon: Option<f64>,
    #[serde(default)]
    pub rank: usize,
}

pub trait Gazetteer: Sync {
    /// Ranked candidates for a place name; empty when unknown.
    fn lookup(&self, name: &str) -> Result<Vec<GazetteerEntry>>;
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// A `name,country,admin_level,lat,lon` CSV; rows sharing a name are
/// ranked in file order.
#[derive(Debug, Clone, Default)]
pub struct FileGazetteer {
    by_name: HashMap<String, Vec<GazetteerEntry>>,
    names: Vec<String>,
}

impl FileGazetteer {
    pub fn new(entries: impl IntoIterator<Item = GazetteerEntry>) -> Self {
        let mut g = FileGazetteer::default();
        for mut e in entries {
            let slot = g.by_name.entry(fold(&e.name)).or_default();
            if slot.is_empty() {
                g.names.push(e.name.clone());
            }
            e.rank = slot.len() + 1;
            slot.push(e);
        }
        g
    }

    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            name: String,
            country: String,
            #[serde(default)]
            admin_level: String,
            lat: Option<f64>,
            lon: Option<f64>,
        }
        let mut entries = Vec::new();
        crate::csvio::read_rows(path, |line, row: Row| {
            let admin_level = match row.admin_level.trim() {
                "" => None,
                s => Some(s.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?),
            };
            entries.push(GazetteerEntry {
                name: row.name,
                country: row.country,
                admin_level,
                lat: row.lat,
                lon: row.lon,
                rank: 0,
            });
            Ok(())
        })?;
        Ok(Self::new(entries))
    }

    /// Distinct names, in first-seen order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

impl Gazetteer for FileGazetteer {
    fn lookup(&self, name: &str) -> Result<Vec<GazetteerEntry>> {
        Ok(self.by_name.get(&fold(name)).cloned().unwrap_or_default())
    }
}

/// Remote lookup: `GET {base_url}?name=<name>` answering a JSON array of
/// entries in rank order.
#[derive(Debug, Clone)]
pub struct HttpGazetteer {
    base_url: String,
    agent: ureq::Agent,
}

impl HttpGazetteer {
    pub const ENV: &'static str = "EBSC_GAZETTEER_URL";

    pub fn new(base_url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .build()
            .new_agent();
        HttpGazetteer {
            base_url: base_url.into(),
            agent,
        }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(Self::ENV).ok().filter(|u| !u.trim().is_empty()).map(Self::new)
    }
}

impl Gazetteer for HttpGazetteer {
    fn lookup(&self, name: &str) -> Result<Vec<GazetteerEntry>> {
        let fail = |e: ureq::Error| Error::Gazetteer(format!("{}: {e}", self.base_url));
        let body = self
            .agent
            .get(&self.base_url)
            .query("name", name)
            .call()
            .map_err(fail)?
            .body_mut()
            .read_to_string()
            .map_err(fail)?;
        let mut entries: Vec<GazetteerEntry> = serde_json::from_str(&body)
            .map_err(|e| Error::Gazetteer(format!("{}: malformed answer: {e}", self.base_url)))?;
        for (i, e) in entries.iter_mut().enumerate() {
            e.rank = i + 1;
        }
        Ok(entries)
    }
}

/// The offline file first, then the remote service when the file has no
/// entry for the name.
pub struct ChainedGazetteer {
    pub file: FileGazetteer,
    pub remote: Option<HttpGazetteer>,
}

impl Gazetteer for ChainedGazetteer {
    fn lookup(&self, name: &str) -> Result<Vec<GazetteerEntry>> {
        let found = self.file.lookup(name)?;
        match &self.remote {
            Some(r) if found.is_empty() => r.lookup(name),
            _ => Ok(found),
        }
    }
}
