use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::text::{fold_words, tokenize};
use crate::error::{Error, Result};
use crate::model::{Hierarchies, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Disease,
    Host,
    Location,
    /// A demonym pointing at a country node.
    Nationality,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Disease => "disease",
            EntityKind::Host => "host",
            EntityKind::Location => "location",
            EntityKind::Nationality => "nationality",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disease" => Ok(EntityKind::Disease),
            "host" => Ok(EntityKind::Host),
            "location" => Ok(EntityKind::Location),
            "nationality" => Ok(EntityKind::Nationality),
            other => Err(Error::Config(format!("unknown entity kind {other:?}"))),
        }
    }
}

/// Where a surface form points. Location forms without a node are
/// place names left to the gazetteer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LexEntry {
    pub kind: EntityKind,
    pub node: Option<NodeId>,
}

/// Surface forms of every kind, keyed by their case-folded word sequence.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    entries: HashMap<Vec<String>, Vec<LexEntry>>,
    max_words: usize,
}

/// One matched surface form.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub kind: EntityKind,
    pub node: Option<NodeId>,
    /// Surface text as written.
    pub text: String,
    /// Token offset of the first word, used to order mentions.
    pub position: usize,
}

impl Lexicons {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a surface form. A form may carry several kinds but at most one
    /// target per kind.
    pub fn insert(&mut self, surface: &str, entry: LexEntry) -> Result<()> {
        let words = fold_words(surface);
        if words.is_empty() {
            return Err(Error::Config(format!("empty surface form {surface:?}")));
        }
        let slot = self.entries.entry(words).or_default();
        match slot.iter().find(|e| e.kind == entry.kind) {
            Some(e) if *e == entry => {}
            Some(_) => {
                return Err(Error::Config(format!(
                    "surface form {surface:?} has two {} targets",
                    entry.kind
                )))
            }
            None => slot.push(entry),
        }
        self.max_words = self.max_words.max(fold_words(surface).len());
        Ok(())
    }

    /// Adds place names with no fixed node, e.g. the names of a gazetteer.
    pub fn add_place_names<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        for name in names {
            let _ = self.insert(
                name,
                LexEntry {
                    kind: EntityKind::Location,
                    node: None,
                },
            );
        }
    }

    /// Loads a `surface_form,node_id,kind` CSV. Disease, host and
    /// nationality rows must name a node; nationalities point at locations.
    pub fn load(&mut self, path: &Path, h: &Hierarchies) -> Result<()> {
        #[derive(Deserialize)]
        struct Row {
            surface_form: String,
            #[serde(default)]
            node_id: String,
            kind: String,
        }
        crate::csvio::read_rows(path, |line, row: Row| {
            let fail = |m: String| Error::parse(path, line, m);
            let kind: EntityKind = row.kind.parse().map_err(|e: Error| fail(e.to_string()))?;
            let hierarchy = match kind {
                EntityKind::Disease => &h.disease,
                EntityKind::Host => &h.host,
                EntityKind::Location | EntityKind::Nationality => &h.location,
            };
            let node = if row.node_id.is_empty() {
                if kind != EntityKind::Location {
                    return Err(fail(format!("{kind} form {:?} needs a node_id", row.surface_form)));
                }
                None
            } else {
                Some(
                    hierarchy
                        .get(&row.node_id)
                        .ok_or_else(|| fail(format!("unknown {} node {:?}", hierarchy.dimension(), row.node_id)))?,
                )
            };
            if kind == EntityKind::Nationality && node.and_then(|n| h.location.country_of(n)).is_none() {
                return Err(fail(format!("nationality {:?} does not point inside a country", row.surface_form)));
            }
            self.insert(&row.surface_form, LexEntry { kind, node })
                .map_err(|e| fail(e.to_string()))
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Left-to-right scan keeping, at each position, the longest surface
    /// form that matches; all kinds of that form are reported.
    pub fn extract(&self, sentence: &str) -> Vec<Mention> {
        let tokens = tokenize(sentence);
        let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_words.min(words.len() - i))
                .rev()
                .find_map(|n| self.entries.get(&words[i..i + n]).map(|e| (n, e)));
            match longest {
                Some((n, entries)) => {
                    let text = &sentence[tokens[i].start..tokens[i + n - 1].end];
                    for e in entries {
                        out.push(Mention {
                            kind: e.kind,
                            node: e.node,
                            text: text.to_owned(),
                            position: i,
                        });
                    }
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}
