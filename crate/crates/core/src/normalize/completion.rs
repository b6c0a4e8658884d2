use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{DayInterval, Hierarchies, Hierarchy, NodeId};

/// Resolved entities of one sentence. Values carry their token position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceFacts {
    pub locations: Vec<(usize, NodeId)>,
    pub diseases: Vec<(usize, NodeId)>,
    pub hosts: Vec<(usize, NodeId)>,
    pub date: Option<DayInterval>,
    /// Place names the gazetteer could not resolve, with the reason.
    pub unresolved: Vec<(String, String)>,
}

impl SentenceFacts {
    fn is_head(&self) -> bool {
        (!self.locations.is_empty() || !self.unresolved.is_empty())
            && !self.diseases.is_empty()
            && !self.hosts.is_empty()
    }
}

/// An event of one document, before clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocumentEvent {
    pub sentence: usize,
    pub location: NodeId,
    pub date: DayInterval,
    pub disease: NodeId,
    pub host: NodeId,
}

/// Why a would-be event was not produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub sentence: Option<usize>,
    pub reason: String,
    pub detail: String,
}

/// A partially known event anchored on a sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PartialEvent {
    pub sentence: usize,
    pub location: Option<NodeId>,
    pub date: Option<DayInterval>,
    pub disease: Option<NodeId>,
    pub host: Option<NodeId>,
}

// Most specific value, then the first mentioned.
fn pick(h: &Hierarchy, values: &[(usize, NodeId)]) -> Option<NodeId> {
    let best = values
        .iter()
        .min_by_key(|(pos, n)| (std::cmp::Reverse(h.depth(*n)), *pos))
        .map(|(_, n)| *n)?;
    if values.iter().any(|(_, n)| !h.is_ancestor_or_self(*n, best)) {
        log::debug!("several unrelated {} values in one sentence, kept {}", h.dimension(), h.key(best));
    }
    Some(best)
}

fn refine(h: &Hierarchy, current: Option<NodeId>, values: &[(usize, NodeId)]) -> Option<NodeId> {
    let finer: Vec<(usize, NodeId)> = values
        .iter()
        .copied()
        .filter(|(_, n)| current.is_none_or(|c| c != *n && h.is_ancestor_or_self(c, *n)))
        .collect();
    pick(h, &finer).or(current)
}

fn refine_date(current: Option<DayInterval>, found: Option<DayInterval>) -> Option<DayInterval> {
    match (current, found) {
        (None, f) => f,
        (Some(c), Some(f)) if f.precision.is_finer_than(c.precision) && c.interval().contains(f.start) => Some(f),
        (c, _) => c,
    }
}

impl PartialEvent {
    /// Fills what is missing from the anchor sentence, then refines from
    /// the next `k` sentences with strictly more specific values only.
    pub fn complete(mut self, facts: &[SentenceFacts], k: usize, h: &Hierarchies) -> PartialEvent {
        if let Some(s) = facts.get(self.sentence) {
            self.location = self.location.or_else(|| pick(&h.location, &s.locations));
            self.disease = self.disease.or_else(|| pick(&h.disease, &s.diseases));
            self.host = self.host.or_else(|| pick(&h.host, &s.hosts));
            self.date = self.date.or(s.date);
        }
        for s in facts.iter().skip(self.sentence + 1).take(k) {
            self.location = refine(&h.location, self.location, &s.locations);
            self.disease = refine(&h.disease, self.disease, &s.diseases);
            self.host = refine(&h.host, self.host, &s.hosts);
            self.date = refine_date(self.date, s.date);
        }
        self
    }

    /// A full event, the publication date standing in for a missing date.
    pub fn finish(self, published: NaiveDate) -> Result<DocumentEvent, Rejection> {
        let missing: Vec<&str> = [
            ("location", self.location.is_none()),
            ("disease", self.disease.is_none()),
            ("host", self.host.is_none()),
        ]
        .into_iter()
        .filter_map(|(n, m)| m.then_some(n))
        .collect();
        match (self.location, self.disease, self.host) {
            (Some(location), Some(disease), Some(host)) => Ok(DocumentEvent {
                sentence: self.sentence,
                location,
                date: self.date.unwrap_or(DayInterval::day(published)),
                disease,
                host,
            }),
            _ => Err(Rejection {
                sentence: Some(self.sentence),
                reason: "incomplete".into(),
                detail: format!("missing {}", missing.join(", ")),
            }),
        }
    }
}

/// One event per head sentence, i.e. a sentence naming a location, a
/// disease and a host.
pub fn complete_events(
    facts: &[SentenceFacts],
    k: usize,
    published: NaiveDate,
    h: &Hierarchies,
) -> Vec<Result<DocumentEvent, Rejection>> {
    facts
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_head())
        .map(|(i, s)| {
            if s.locations.is_empty() {
                let (name, reason) = &s.unresolved[0];
                return Err(Rejection {
                    sentence: Some(i),
                    reason: "unresolved_location".into(),
                    detail: format!("{name}: {reason}"),
                });
            }
            PartialEvent {
                sentence: i,
                ..Default::default()
            }
            .complete(facts, k, h)
            .finish(published)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::fixture;
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn facts(h: &Hierarchies, loc: &[&str], dis: &[&str], host: &[&str], date: Option<NaiveDate>) -> SentenceFacts {
        let ids = |hh: &Hierarchy, ks: &[&str]| ks.iter().enumerate().map(|(i, k)| (i, hh.get(k).unwrap())).collect();
        SentenceFacts {
            locations: ids(&h.location, loc),
            diseases: ids(&h.disease, dis),
            hosts: ids(&h.host, host),
            date: date.map(DayInterval::day),
            unresolved: vec![],
        }
    }

    #[test]
    fn head_sentence_alone() {
        let h = fixture::hierarchies();
        let f = vec![
            facts(&h, &[], &["ai"], &[], None),
            facts(&h, &["SKEL"], &["hpai", "h7n9"], &["captive"], Some(d(2021, 3, 31))),
        ];
        let got = complete_events(&f, 0, d(2021, 4, 2), &h);
        assert_eq!(got.len(), 1);
        let e = got[0].clone().unwrap();
        assert_eq!(
            (h.location.key(e.location), h.disease.key(e.disease), h.host.key(e.host), e.date),
            ("SKEL", "h7n9", "captive", DayInterval::day(d(2021, 3, 31)))
        );
    }

    #[test]
    fn no_head_no_event() {
        let h = fixture::hierarchies();
        let f = vec![facts(&h, &["GB"], &["ai"], &[], None)];
        assert!(complete_events(&f, 2, d(2021, 4, 2), &h).is_empty());
    }

    #[test]
    fn refinement_from_the_next_sentence() {
        let h = fixture::hierarchies();
        let f = vec![
            facts(&h, &["ENG"], &["ai"], &["bird"], None),
            facts(&h, &["SKEL"], &["h7n9"], &[], None),
        ];
        let e = complete_events(&f, 1, d(2021, 4, 2), &h)[0].clone().unwrap();
        assert_eq!((h.location.key(e.location), h.disease.key(e.disease)), ("SKEL", "h7n9"));
        // publication date stands in
        assert_eq!(e.date, DayInterval::day(d(2021, 4, 2)));
        let e = complete_events(&f, 0, d(2021, 4, 2), &h)[0].clone().unwrap();
        assert_eq!(h.location.key(e.location), "ENG");
    }

    #[test]
    fn refinement_never_generalizes_or_jumps() {
        let h = fixture::hierarchies();
        let f = vec![
            facts(&h, &["ENG"], &["h7n9"], &["captive"], None),
            facts(&h, &["FR", "GB"], &["ai"], &["bird"], Some(d(2021, 3, 30))),
        ];
        let e = complete_events(&f, 2, d(2021, 4, 2), &h)[0].clone().unwrap();
        assert_eq!(
            (h.location.key(e.location), h.disease.key(e.disease), h.host.key(e.host)),
            ("ENG", "h7n9", "captive")
        );
        assert_eq!(e.date, DayInterval::day(d(2021, 3, 30)));
    }

    #[test]
    fn unresolved_head_is_rejected() {
        let h = fixture::hierarchies();
        let mut s = facts(&h, &[], &["ai"], &["bird"], None);
        s.unresolved.push(("Atlantis".into(), "no_gazetteer_result".into()));
        let got = complete_events(&[s], 2, d(2021, 4, 2), &h);
        assert_eq!(got[0].as_ref().unwrap_err().reason, "unresolved_location");
    }
}
