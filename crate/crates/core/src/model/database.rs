use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::hierarchy::{AdminLevel, Dimension, Hierarchy, NodeId};
use super::temporal::{DayInterval, TemporalScale, TimeInterval};
use crate::error::{Error, Result};

/// The four node-valued dimension hierarchies. The temporal hierarchy is the
/// calendar and is implicit.
#[derive(Debug, Clone)]
pub struct Hierarchies {
    pub location: Hierarchy,
    pub disease: Hierarchy,
    pub host: Hierarchy,
    pub source: Hierarchy,
}

impl Hierarchies {
    pub fn new(location: Hierarchy, disease: Hierarchy, host: Hierarchy, source: Hierarchy) -> Result<Self> {
        for (h, dim) in [
            (&location, Dimension::Location),
            (&disease, Dimension::Disease),
            (&host, Dimension::Host),
            (&source, Dimension::Source),
        ] {
            if h.dimension() != dim {
                return Err(Error::Config(format!(
                    "{} hierarchy supplied where the {dim} hierarchy was expected",
                    h.dimension()
                )));
            }
        }
        Ok(Hierarchies {
            location,
            disease,
            host,
            source,
        })
    }

    /// Builds a flat outlet hierarchy from every source id in `records`.
    pub fn with_sources_from<'a>(
        location: Hierarchy,
        disease: Hierarchy,
        host: Hierarchy,
        records: impl IntoIterator<Item = &'a EventRecord>,
    ) -> Result<Self> {
        let outlets: BTreeSet<&str> = records.into_iter().map(|r| r.source_id.as_str()).collect();
        let source = Hierarchy::flat(Dimension::Source, outlets)?;
        Self::new(location, disease, host, source)
    }

    pub fn get(&self, dim: Dimension) -> Option<&Hierarchy> {
        match dim {
            Dimension::Location => Some(&self.location),
            Dimension::Disease => Some(&self.disease),
            Dimension::Host => Some(&self.host),
            Dimension::Source => Some(&self.source),
            Dimension::Date => None,
        }
    }

    pub fn of(&self, id: NodeId) -> &Hierarchy {
        self.get(id.dimension()).expect("node ids never carry the date dimension")
    }
}

/// A news outlet reporting an event on a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Report {
    pub outlet: NodeId,
    pub date: NaiveDate,
}

/// One normalized epidemiological event.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub system: String,
    pub record_id: String,
    pub location: NodeId,
    pub date: DayInterval,
    pub disease: NodeId,
    pub host: NodeId,
    /// Primary outlet: the first report by date, then by outlet key.
    pub source: NodeId,
    /// All reports of the event, sorted by (date, outlet).
    pub reports: Vec<Report>,
}

impl Event {
    pub fn day(&self) -> NaiveDate {
        self.date.start
    }
}

/// A raw event row as found in CSV or JSON-lines input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub system: String,
    pub record_id: String,
    pub location_id: String,
    pub date: String,
    pub disease_id: String,
    pub host_id: String,
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_date: Option<String>,
    #[serde(skip)]
    pub origin: Option<(PathBuf, u64)>,
}

impl EventRecord {
    fn fail(&self, message: impl Into<String>) -> Error {
        match &self.origin {
            Some((path, line)) => Error::parse(path, *line, message),
            None => Error::Data(format!("record {}/{}: {}", self.system, self.record_id, message.into())),
        }
    }
}

/// Reads event records from a CSV file, or from JSON lines when the
/// extension is `.jsonl`, `.ndjson` or `.json`.
pub fn read_event_records(path: &Path) -> Result<Vec<EventRecord>> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let mut records = Vec::new();
    if matches!(ext, "jsonl" | "ndjson" | "json") {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut rec: EventRecord =
                serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
            rec.origin = Some((path.to_owned(), line_no));
            records.push(rec);
        }
    } else {
        crate::csvio::read_rows(path, |line, mut rec: EventRecord| {
            rec.origin = Some((path.to_owned(), line));
            records.push(rec);
            Ok(())
        })?;
    }
    Ok(records)
}

/// Parses `YYYY-MM-DD`, `YYYY-MM` or `YYYY`.
pub(crate) fn parse_iso_day_interval(s: &str) -> Option<DayInterval> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('-').collect();
    let (date, precision) = match parts.as_slice() {
        [y] if y.len() == 4 => (NaiveDate::from_ymd_opt(y.parse().ok()?, 1, 1)?, TemporalScale::Year),
        [y, m] if y.len() == 4 => (
            NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, 1)?,
            TemporalScale::Month,
        ),
        [y, _, _] if y.len() == 4 => (NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?, TemporalScale::Day),
        _ => return None,
    };
    Some(DayInterval {
        start: date,
        precision,
    })
}

/// A value of some dimension's active domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainValue {
    Node(NodeId),
    Interval(TimeInterval),
}

/// Granularity restriction for [`EventDatabase::active_domain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Depth(u32),
    Admin(AdminLevel),
    Time(TemporalScale),
}

/// A named, finite set of events over shared hierarchies.
#[derive(Debug, Clone)]
pub struct EventDatabase {
    name: String,
    hierarchies: Arc<Hierarchies>,
    events: Vec<Event>,
}

impl EventDatabase {
    pub fn new(name: impl Into<String>, hierarchies: Arc<Hierarchies>, events: Vec<Event>) -> Result<Self> {
        let db = EventDatabase {
            name: name.into(),
            hierarchies,
            events,
        };
        for e in &db.events {
            db.check_event(e)?;
        }
        Ok(db)
    }

    fn check_event(&self, e: &Event) -> Result<()> {
        let h = &self.hierarchies;
        h.location.check(e.location)?;
        h.disease.check(e.disease)?;
        h.host.check(e.host)?;
        h.source.check(e.source)?;
        for r in &e.reports {
            h.source.check(r.outlet)?;
        }
        Ok(())
    }

    /// Builds a database from raw records. Rows sharing `(system, record_id)`
    /// describe one event reported by several outlets; their location, date,
    /// disease and host must agree.
    pub fn from_records(
        name: impl Into<String>,
        hierarchies: Arc<Hierarchies>,
        records: &[EventRecord],
        window: Option<(NaiveDate, NaiveDate)>,
    ) -> Result<Self> {
        let mut events: Vec<Event> = Vec::new();
        let mut index: HashMap<(String, String), usize> = HashMap::new();
        for rec in records {
            let resolve = |h: &Hierarchy, key: &str, what: &str| {
                h.resolve(key)
                    .ok_or_else(|| rec.fail(format!("unknown {what} {key:?}")))
            };
            let location = resolve(&hierarchies.location, &rec.location_id, "location_id")?;
            let disease = resolve(&hierarchies.disease, &rec.disease_id, "disease_id")?;
            let host = resolve(&hierarchies.host, &rec.host_id, "host_id")?;
            let outlet = resolve(&hierarchies.source, &rec.source_id, "source_id")?;
            let mut date = parse_iso_day_interval(&rec.date)
                .ok_or_else(|| rec.fail(format!("invalid date {:?}", rec.date)))?;
            if let Some(p) = rec.precision.as_deref().filter(|p| !p.trim().is_empty()) {
                let p: TemporalScale = p.parse().map_err(|e: Error| rec.fail(e.to_string()))?;
                date = DayInterval {
                    start: TimeInterval::of(date.start, p).start(),
                    precision: p,
                };
            }
            if let Some((from, to)) = window {
                if date.start < from || date.start > to {
                    return Err(rec.fail(format!("date {} outside the study window {from}..{to}", rec.date)));
                }
            }
            let report_day = match rec.report_date.as_deref().filter(|d| !d.trim().is_empty()) {
                Some(d) => NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
                    .map_err(|_| rec.fail(format!("invalid report_date {d:?}")))?,
                None => date.start,
            };
            let report = Report {
                outlet,
                date: report_day,
            };
            let key = (rec.system.clone(), rec.record_id.clone());
            match index.get(&key) {
                Some(&i) => {
                    let e = &mut events[i];
                    if e.location != location || e.disease != disease || e.host != host || e.date != date {
                        return Err(rec.fail(format!(
                            "record {:?} repeats with different event attributes",
                            rec.record_id
                        )));
                    }
                    if !e.reports.contains(&report) {
                        e.reports.push(report);
                    }
                }
                None => {
                    index.insert(key, events.len());
                    events.push(Event {
                        system: rec.system.clone(),
                        record_id: rec.record_id.clone(),
                        location,
                        date,
                        disease,
                        host,
                        source: outlet,
                        reports: vec![report],
                    });
                }
            }
        }
        for e in &mut events {
            sort_reports(&hierarchies.source, e);
        }
        Self::new(name, hierarchies, events)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hierarchies(&self) -> &Arc<Hierarchies> {
        &self.hierarchies
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// A database with the same hierarchies holding a subset of events.
    pub fn with_events(&self, events: Vec<Event>) -> EventDatabase {
        EventDatabase {
            name: self.name.clone(),
            hierarchies: Arc::clone(&self.hierarchies),
            events,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Errors unless both databases address the same hierarchy objects, which
    /// is required for comparing node ids.
    pub fn ensure_comparable(&self, other: &EventDatabase) -> Result<()> {
        if Arc::ptr_eq(&self.hierarchies, &other.hierarchies) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "databases {:?} and {:?} were loaded with different hierarchies",
                self.name, other.name
            )))
        }
    }

    /// `Dom_E(D_i)` or, with a level, `Dom_E(D_i, l)`.
    pub fn active_domain(&self, dim: Dimension, level: Option<Level>) -> Result<BTreeSet<DomainValue>> {
        let mut out = BTreeSet::new();
        if dim == Dimension::Date {
            for e in &self.events {
                match level {
                    None => {
                        out.insert(DomainValue::Interval(e.date.interval()));
                    }
                    Some(Level::Time(scale)) => {
                        if !scale.is_finer_than(e.date.precision) {
                            out.insert(DomainValue::Interval(TimeInterval::of(e.date.start, scale)));
                        }
                    }
                    Some(other) => {
                        return Err(Error::Config(format!("{other:?} is not a temporal level")))
                    }
                }
            }
            return Ok(out);
        }
        let h = self.hierarchies.get(dim).expect("non-date dimension");
        for e in &self.events {
            let values: Vec<NodeId> = match dim {
                Dimension::Location => vec![e.location],
                Dimension::Disease => vec![e.disease],
                Dimension::Host => vec![e.host],
                Dimension::Source => e.reports.iter().map(|r| r.outlet).collect(),
                Dimension::Date => unreachable!(),
            };
            for v in values {
                let mapped = match level {
                    None => Some(v),
                    Some(Level::Depth(d)) => h.ancestor_at_depth(v, d),
                    Some(Level::Admin(a)) => h.ancestor_at_admin(v, a),
                    Some(Level::Time(_)) => {
                        return Err(Error::Config(format!("temporal level used for the {dim} dimension")))
                    }
                };
                if let Some(m) = mapped {
                    out.insert(DomainValue::Node(m));
                }
            }
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<EventRecord> {
        let h = &self.hierarchies;
        let mut out = Vec::new();
        for e in &self.events {
            for r in &e.reports {
                out.push(EventRecord {
                    system: e.system.clone(),
                    record_id: e.record_id.clone(),
                    location_id: h.location.key(e.location).to_owned(),
                    date: e.date.start.format("%Y-%m-%d").to_string(),
                    disease_id: h.disease.key(e.disease).to_owned(),
                    host_id: h.host.key(e.host).to_owned(),
                    source_id: h.source.key(r.outlet).to_owned(),
                    precision: Some(e.date.precision.to_string()),
                    report_date: Some(r.date.format("%Y-%m-%d").to_string()),
                    origin: None,
                });
            }
        }
        out
    }

    /// Writes one CSV row per (event, report).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "system",
            "record_id",
            "location_id",
            "date",
            "disease_id",
            "host_id",
            "source_id",
            "precision",
            "report_date",
        ])?;
        for r in self.to_records() {
            w.write_record([
                r.system.as_str(),
                &r.record_id,
                &r.location_id,
                &r.date,
                &r.disease_id,
                &r.host_id,
                &r.source_id,
                r.precision.as_deref().unwrap_or(""),
                r.report_date.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<events>", e))?;
        Ok(())
    }
}

pub(crate) fn sort_reports(sources: &Hierarchy, e: &mut Event) {
    e.reports
        .sort_by(|a, b| a.date.cmp(&b.date).then_with(|| sources.key(a.outlet).cmp(sources.key(b.outlet))));
    e.reports.dedup();
    if let Some(first) = e.reports.first() {
        e.source = first.outlet;
    }
}
