//! From news documents to normalized corpus events: entity extraction,
//! completion, geocoding, date normalization, clustering and fusion.

mod cluster;
mod completion;
mod dates;
mod gazetteer;
mod geocode;
mod lexicon;
mod text;

pub use cluster::{build_corpus_events, clusters, fuse};
pub use completion::{complete_events, DocumentEvent, PartialEvent, Rejection, SentenceFacts};
pub use dates::{find_date, infer_date_order, normalize_date, DateOrder};
pub use gazetteer::{ChainedGazetteer, FileGazetteer, Gazetteer, GazetteerEntry, HttpGazetteer};
pub use geocode::{choose_entry, geocode, place_node, CountryHints};
pub use lexicon::{EntityKind, LexEntry, Lexicons, Mention};
pub use text::{document_sentences, split_sentences, tokenize, Token};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dimension, Event, EventDatabase, Hierarchies, Hierarchy, Report};
use crate::similarity::SimilarityParams;

/// A news article, optionally with events already located in its text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    /// Surveillance system the document belongs to; the run default
    /// applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub title: String,
    pub body: String,
    pub publication_date: NaiveDate,
    pub outlet_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlet_country: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub declared_events: Vec<DeclaredEvent>,
}

/// A partially filled event anchored on a sentence (0 is the title).
/// Location, disease and host are node keys or labels; a location may
/// also be a place name for the gazetteer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeclaredEvent {
    pub sentence: usize,
    pub country: Option<String>,
    pub location: Option<String>,
    pub date: Option<String>,
    pub disease: Option<String>,
    pub host: Option<String>,
}

/// Reads documents from JSON lines.
pub fn read_documents(path: &Path) -> Result<Vec<RawDocument>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i as u64 + 1, e.to_string()))?);
    }
    Ok(out)
}

/// A flat outlet hierarchy over the documents' outlets.
pub fn outlet_hierarchy(docs: &[RawDocument]) -> Result<Hierarchy> {
    let outlets: BTreeSet<&str> = docs.iter().map(|d| d.outlet_id.as_str()).collect();
    Hierarchy::flat(Dimension::Source, outlets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeParams {
    /// Sentences after a head sentence that may refine its event.
    pub window: usize,
    pub cluster_threshold: f64,
    pub similarity: SimilarityParams,
    /// Forces the numeric date order instead of inferring it.
    pub date_order: Option<DateOrder>,
}

impl Default for NormalizeParams {
    fn default() -> Self {
        NormalizeParams {
            window: 2,
            cluster_threshold: 2.0,
            similarity: SimilarityParams::default(),
            date_order: None,
        }
    }
}

/// A record left out of the output, with a reason code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    pub doc_id: String,
    pub sentence: Option<usize>,
    pub reason: String,
    pub detail: String,
}

pub fn write_quarantine<W: Write>(records: &[QuarantineRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<quarantine>", e))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub database: EventDatabase,
    pub quarantine: Vec<QuarantineRecord>,
    pub document_events: usize,
    pub date_order: DateOrder,
}

impl Normalized {
    /// Corpus events per system and year.
    pub fn counts_per_year(&self) -> BTreeMap<String, BTreeMap<i32, usize>> {
        let mut out: BTreeMap<String, BTreeMap<i32, usize>> = BTreeMap::new();
        for e in self.database.events() {
            *out.entry(e.system.clone()).or_default().entry(e.date.start.year()).or_default() += 1;
        }
        out
    }
}

pub struct Normalizer<'a> {
    /// The source hierarchy must hold every outlet of the corpus.
    pub hierarchies: Arc<Hierarchies>,
    pub lexicons: &'a Lexicons,
    pub gazetteer: &'a dyn Gazetteer,
    pub params: NormalizeParams,
    pub system: String,
}

struct DocOutput {
    events: Vec<Event>,
    quarantine: Vec<QuarantineRecord>,
}

impl Normalizer<'_> {
    pub fn run(&self, docs: &[RawDocument]) -> Result<Normalized> {
        self.params.similarity.validate()?;
        let mut seen = HashSet::new();
        for d in docs {
            if !seen.insert(d.doc_id.as_str()) {
                return Err(Error::Data(format!("duplicate doc_id {:?}", d.doc_id)));
            }
        }
        let order = self.params.date_order.unwrap_or_else(|| {
            infer_date_order(
                docs.iter()
                    .flat_map(|d| [d.title.as_str(), d.body.as_str()])
                    .chain(docs.iter().flat_map(|d| d.declared_events.iter().filter_map(|e| e.date.as_deref()))),
            )
        });
        let outputs: Vec<DocOutput> = docs.par_iter().map(|d| self.document(d, order)).collect::<Result<_>>()?;
        let mut events = Vec::new();
        let mut quarantine = Vec::new();
        for o in outputs {
            events.extend(o.events);
            quarantine.extend(o.quarantine);
        }
        let document_events = events.len();
        let database = build_corpus_events(
            &self.system,
            self.hierarchies.clone(),
            events,
            &self.params.similarity,
            self.params.cluster_threshold,
        )?;
        Ok(Normalized {
            database,
            quarantine,
            document_events,
            date_order: order,
        })
    }

    /// Title and body mentions, one list per sentence.
    pub fn extract_entities(&self, doc: &RawDocument) -> Vec<Vec<Mention>> {
        document_sentences(&doc.title, &doc.body)
            .into_iter()
            .map(|s| self.lexicons.extract(s))
            .collect()
    }

    fn hints(&self, doc: &RawDocument, title: &[Mention]) -> CountryHints {
        let loc = &self.hierarchies.location;
        let country_key = |n| loc.country_of(n).map(|c| loc.key(c).to_owned());
        let mut hints = CountryHints::new();
        for m in title.iter().filter(|m| m.kind == EntityKind::Location) {
            match m.node {
                Some(n) => hints.extend(country_key(n)),
                None => {
                    let entries = self.gazetteer.lookup(&m.text).unwrap_or_default();
                    let countries: BTreeSet<&str> = entries.iter().map(|e| e.country.as_str()).collect();
                    if let [only] = countries.into_iter().collect::<Vec<_>>().as_slice() {
                        hints.push(*only);
                    }
                }
            }
        }
        for m in title.iter().filter(|m| m.kind == EntityKind::Nationality) {
            hints.extend(m.node.and_then(country_key));
        }
        hints.extend(doc.outlet_country.clone());
        hints
    }

    fn facts(&self, mentions: &[Mention], sentence: &str, hints: &CountryHints, order: DateOrder, doc: &RawDocument) -> SentenceFacts {
        let mut f = SentenceFacts {
            date: find_date(sentence, order, Some(doc.publication_date)).map(|(_, d)| d),
            ..Default::default()
        };
        for m in mentions {
            match (m.kind, m.node) {
                (EntityKind::Location, Some(n)) => f.locations.push((m.position, n)),
                (EntityKind::Location, None) => {
                    match geocode(&m.text, hints, self.gazetteer, &self.hierarchies.location) {
                        Ok(n) => f.locations.push((m.position, n)),
                        Err(Error::UnresolvedLocation { name, reason }) => f.unresolved.push((name, reason)),
                        Err(e) => f.unresolved.push((m.text.clone(), e.to_string())),
                    }
                }
                (EntityKind::Disease, Some(n)) => f.diseases.push((m.position, n)),
                (EntityKind::Host, Some(n)) => f.hosts.push((m.position, n)),
                _ => {}
            }
        }
        f
    }

    fn declared(&self, d: &DeclaredEvent, hints: &CountryHints, order: DateOrder, doc: &RawDocument) -> std::result::Result<PartialEvent, Rejection> {
        let h = &self.hierarchies;
        let reject = |reason: &str, detail: String| Rejection {
            sentence: Some(d.sentence),
            reason: reason.into(),
            detail,
        };
        let node = |hh: &Hierarchy, v: &Option<String>| match v.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            None => Ok(None),
            Some(s) => hh
                .resolve(s)
                .map(Some)
                .ok_or_else(|| reject(&format!("unknown_{}", hh.dimension()), s.to_owned())),
        };
        let location = match d.location.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => match h.location.resolve(s) {
                Some(n) => Some(n),
                None => {
                    let mut hs = CountryHints::new();
                    hs.extend(d.country.clone());
                    hs.extend(hints.iter().map(str::to_owned));
                    match geocode(s, &hs, self.gazetteer, &h.location) {
                        Ok(n) => Some(n),
                        Err(Error::UnresolvedLocation { name, reason }) => {
                            return Err(reject("unresolved_location", format!("{name}: {reason}")))
                        }
                        Err(e) => return Err(reject("unresolved_location", format!("{s}: {e}"))),
                    }
                }
            },
        };
        let date = match d.date.as_deref().filter(|s| !s.trim().is_empty()) {
            None => None,
            Some(s) => Some(
                normalize_date(s, order, Some(doc.publication_date))
                    .map_err(|_| reject("unparseable_date", s.to_owned()))?,
            ),
        };
        Ok(PartialEvent {
            sentence: d.sentence,
            location,
            date,
            disease: node(&h.disease, &d.disease)?,
            host: node(&h.host, &d.host)?,
        })
    }

    fn document(&self, doc: &RawDocument, order: DateOrder) -> Result<DocOutput> {
        let h = &self.hierarchies;
        let Some(outlet) = h.source.get(&doc.outlet_id) else {
            return Err(Error::Data(format!("document {:?}: unknown outlet {:?}", doc.doc_id, doc.outlet_id)));
        };
        let sentences = document_sentences(&doc.title, &doc.body);
        let mentions = self.extract_entities(doc);
        let hints = self.hints(doc, &mentions[0]);
        let facts: Vec<SentenceFacts> = sentences
            .iter()
            .zip(&mentions)
            .map(|(s, m)| self.facts(m, s, &hints, order, doc))
            .collect();
        let completed: Vec<std::result::Result<DocumentEvent, Rejection>> = if doc.declared_events.is_empty() {
            complete_events(&facts, self.params.window, doc.publication_date, h)
        } else {
            doc.declared_events
                .iter()
                .map(|d| {
                    self.declared(d, &hints, order, doc)
                        .and_then(|p| p.complete(&facts, self.params.window, h).finish(doc.publication_date))
                })
                .collect()
        };
        let system = doc.system.clone().unwrap_or_else(|| self.system.clone());
        let mut out = DocOutput {
            events: Vec::new(),
            quarantine: Vec::new(),
        };
        for c in completed {
            match c {
                Ok(e) => out.events.push(Event {
                    system: system.clone(),
                    record_id: format!("{}#{}", doc.doc_id, out.events.len() + 1),
                    location: e.location,
                    date: e.date,
                    disease: e.disease,
                    host: e.host,
                    source: outlet,
                    reports: vec![Report {
                        outlet,
                        date: doc.publication_date,
                    }],
                }),
                Err(r) => out.quarantine.push(QuarantineRecord {
                    doc_id: doc.doc_id.clone(),
                    sentence: r.sentence,
                    reason: r.reason,
                    detail: r.detail,
                }),
            }
        }
        Ok(out)
    }
}
