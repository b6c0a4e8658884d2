use crate::error::{Error, Result};
use crate::model::{Hierarchy, NodeId};

use super::gazetteer::{Gazetteer, GazetteerEntry};

/// Country keys used to disambiguate place names, strongest first: the
/// declared country, countries of locations named in the title, countries
/// of nationalities in the title, the outlet's country.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryHints(Vec<String>);

impl CountryHints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, country: impl Into<String>) {
        let c = country.into();
        if !c.is_empty() && !self.0.contains(&c) {
            self.0.push(c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Extend<String> for CountryHints {
    fn extend<I: IntoIterator<Item = String>>(&mut self, iter: I) {
        for c in iter {
            self.push(c);
        }
    }
}

/// Picks the first entry in the country of the strongest hint that has
/// one, falling back to the rank-1 entry.
pub fn choose_entry<'a>(entries: &'a [GazetteerEntry], hints: &CountryHints) -> Option<&'a GazetteerEntry> {
    hints
        .iter()
        .find_map(|c| entries.iter().find(|e| e.country.eq_ignore_ascii_case(c)))
        .or_else(|| entries.iter().min_by_key(|e| e.rank))
}

/// Resolves a place name to a node of the location hierarchy.
pub fn geocode(name: &str, hints: &CountryHints, gazetteer: &dyn Gazetteer, location: &Hierarchy) -> Result<NodeId> {
    let entries = gazetteer.lookup(name)?;
    let Some(entry) = choose_entry(&entries, hints) else {
        return Err(Error::UnresolvedLocation {
            name: name.to_owned(),
            reason: "no_gazetteer_result".into(),
        });
    };
    place_node(entry, location).ok_or_else(|| Error::UnresolvedLocation {
        name: name.to_owned(),
        reason: format!("not_in_hierarchy ({}, {})", entry.name, entry.country),
    })
}

/// The node labelled like the entry inside the entry's country.
pub fn place_node(entry: &GazetteerEntry, location: &Hierarchy) -> Option<NodeId> {
    location.find_by_label(&entry.name).iter().copied().find(|&n| {
        location
            .country_of(n)
            .is_some_and(|c| location.key(c).eq_ignore_ascii_case(&entry.country))
    })
}
