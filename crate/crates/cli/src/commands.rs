use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ebsc_core::metrics::{evaluate, EvalDimension, Evaluation};
use ebsc_core::mining::{mine_multidimensional, mine_spatial, Closeness, MiningParams, PatternSet};
use ebsc_core::model::{
    fix_scale, read_event_records, Dimension, EventDatabase, EventRecord, Hierarchies, Hierarchy,
};
use ebsc_core::normalize::{
    outlet_hierarchy, read_documents, write_quarantine, ChainedGazetteer, FileGazetteer, HttpGazetteer, Lexicons,
    NormalizeParams, Normalizer,
};
use ebsc_core::similarity::match_events;
use ebsc_core::sources::Blocklist;
use ebsc_core::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Flags, MineMode};

fn settings(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let p = &mut cfg.paths;
    p.candidate = flags.candidate.clone().or(p.candidate.take());
    p.reference = flags.reference.clone().or(p.reference.take());
    p.out = flags.out.clone().or(p.out.take());
    let e = &mut cfg.evaluation;
    if !flags.iota.is_empty() {
        e.iotas = flags.iota.clone();
    }
    if !flags.rho.is_empty() {
        e.rhos = flags.rho.clone();
    }
    if !flags.lz.is_empty() {
        e.spatial_levels = flags.lz.clone();
    }
    if !flags.lt.is_empty() {
        e.temporal_scales = flags.lt.clone();
    }
    e.alpha_km = flags.alpha_km.or(e.alpha_km);
    if let Some(d) = flags.decay_days {
        e.decay_days = d;
    }
    if let Some(t) = flags.tau {
        cfg.tau = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("no {what} given (set paths.{what} or pass --{what})")))
}

fn hierarchy(p: &Option<PathBuf>, dim: Dimension, key: &str) -> Result<Hierarchy> {
    Hierarchy::load(dim, required(p, key)?)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn finish(path: &Path, mut w: impl Write) -> Result<()> {
    w.flush().map_err(io_err(path))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = required(&cfg.paths.out, "out")?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "events".into())
}

/// Candidate and, when configured, reference databases over one set of
/// hierarchies.
fn databases(cfg: &RunConfig, need_reference: bool) -> Result<(EventDatabase, Option<EventDatabase>)> {
    let cand_path = required(&cfg.paths.candidate, "candidate")?;
    let ref_path = match (&cfg.paths.reference, need_reference) {
        (Some(p), _) => Some(p.as_path()),
        (None, true) => Some(required(&cfg.paths.reference, "reference")?),
        (None, false) => None,
    };
    let cand_records = read_event_records(cand_path)?;
    let ref_records = ref_path.map(read_event_records).transpose()?;
    let location = hierarchy(&cfg.paths.location, Dimension::Location, "location")?;
    let disease = hierarchy(&cfg.paths.disease, Dimension::Disease, "disease")?;
    let host = hierarchy(&cfg.paths.host, Dimension::Host, "host")?;
    let all: Vec<&EventRecord> = cand_records.iter().chain(ref_records.iter().flatten()).collect();
    let h = Arc::new(match &cfg.paths.source {
        Some(p) => Hierarchies::new(location, disease, host, Hierarchy::load(Dimension::Source, p)?)?,
        None => Hierarchies::with_sources_from(location, disease, host, all)?,
    });
    let candidate = EventDatabase::from_records(stem(cand_path), h.clone(), &cand_records, None)?;
    let reference = match (ref_path, ref_records) {
        (Some(p), Some(r)) => Some(EventDatabase::from_records(stem(p), h, &r, None)?),
        _ => None,
    };
    Ok((candidate, reference))
}

fn closeness(cfg: &RunConfig, zones: &Hierarchy) -> Result<Closeness> {
    if let Some(a) = cfg.evaluation.alpha_km {
        return Ok(Closeness::Distance(a));
    }
    match &cfg.paths.closeness {
        Some(p) => Closeness::load(p, zones),
        None => {
            log::warn!("no closeness relation or alpha given; spatial patterns hold single zones");
            Ok(Closeness::Explicit(BTreeSet::new()))
        }
    }
}

fn file_name_part(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn normalize(flags: &Flags) -> Result<()> {
    let cfg = settings(flags)?;
    let docs = read_documents(required(&cfg.paths.documents, "documents")?)?;
    let source = match &cfg.paths.source {
        Some(p) => Hierarchy::load(Dimension::Source, p)?,
        None => outlet_hierarchy(&docs)?,
    };
    let h = Arc::new(Hierarchies::new(
        hierarchy(&cfg.paths.location, Dimension::Location, "location")?,
        hierarchy(&cfg.paths.disease, Dimension::Disease, "disease")?,
        hierarchy(&cfg.paths.host, Dimension::Host, "host")?,
        source,
    )?);
    let mut lexicons = Lexicons::new();
    for p in &cfg.paths.lexicons {
        lexicons.load(p, &h)?;
    }
    let file = match &cfg.paths.gazetteer {
        Some(p) => FileGazetteer::load(p)?,
        None => FileGazetteer::default(),
    };
    lexicons.add_place_names(file.names());
    let gazetteer = ChainedGazetteer {
        file,
        remote: HttpGazetteer::from_env(),
    };
    let n = &cfg.normalize;
    let normalizer = Normalizer {
        hierarchies: h,
        lexicons: &lexicons,
        gazetteer: &gazetteer,
        params: NormalizeParams {
            window: n.window,
            cluster_threshold: n.cluster_threshold,
            similarity: cfg.similarity,
            date_order: n.date_order,
        },
        system: n.system.clone(),
    };
    let result = normalizer.run(&docs)?;
    let dir = out_dir(&cfg)?;
    let counts = result.counts_per_year();
    for system in counts.keys() {
        let events = result.database.events().iter().filter(|e| &e.system == system).cloned().collect();
        let path = dir.join(format!("events_{}.csv", file_name_part(system)));
        let mut w = create(&path)?;
        result.database.with_events(events).write_csv(&mut w)?;
        finish(&path, w)?;
    }
    let path = dir.join("quarantine.jsonl");
    let mut w = create(&path)?;
    write_quarantine(&result.quarantine, &mut w)?;
    finish(&path, w)?;

    let path = dir.join("counts.csv");
    let mut table = String::from("system,year,events\n");
    for (system, years) in &counts {
        for (year, n) in years {
            table.push_str(&format!("{system},{year},{n}\n"));
        }
    }
    std::fs::write(&path, &table).map_err(io_err(&path))?;
    print!("{table}");
    println!(
        "documents: {}, document events: {}, corpus events: {}, quarantined: {}",
        docs.len(),
        result.document_events,
        result.database.len(),
        result.quarantine.len()
    );
    Ok(())
}

pub fn match_cmd(flags: &Flags) -> Result<()> {
    let cfg = settings(flags)?;
    let (candidate, reference) = databases(&cfg, true)?;
    let reference = reference.expect("reference is required");
    let m = match_events(&candidate, &reference, &cfg.similarity, cfg.tau)?;
    let summary = format!(
        "{}: {} events\n{}: {} events\nputatively associated events: {}\n",
        candidate.name(),
        candidate.len(),
        reference.name(),
        reference.len(),
        m.len()
    );
    match &cfg.paths.out {
        Some(_) => {
            let dir = out_dir(&cfg)?;
            let path = dir.join("matching.csv");
            let mut w = create(&path)?;
            m.write_csv(&candidate, &reference, &mut w)?;
            finish(&path, w)?;
            print!("{summary}");
        }
        None => {
            let mut out = std::io::stdout().lock();
            m.write_csv(&candidate, &reference, &mut out)?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MinedCell<'a> {
    spatial_level: Option<String>,
    temporal_scale: String,
    #[serde(flatten)]
    patterns: &'a PatternSet,
}

pub fn mine(flags: &Flags, mode: MineMode) -> Result<()> {
    let cfg = settings(flags)?;
    let (db, _) = databases(&cfg, false)?;
    let e = &cfg.evaluation;
    let close = match mode {
        MineMode::Spatial => Some(closeness(&cfg, &db.hierarchies().location)?),
        MineMode::Multidimensional => None,
    };
    let mut cells: Vec<(Option<String>, String, PatternSet)> = Vec::new();
    for &iota in &e.iotas {
        for &rho in &e.rhos {
            let mut params = MiningParams::new(iota, rho);
            match &close {
                Some(c) => {
                    if let Closeness::Distance(a) = c {
                        params.alpha_km = Some(*a);
                    }
                    for &lz in &e.spatial_levels {
                        for &lt in &e.temporal_scales {
                            let scaled = fix_scale(&db, lz, lt)?;
                            cells.push((Some(lz.to_string()), lt.to_string(), mine_spatial(&scaled, &params, c)?));
                        }
                    }
                }
                None => {
                    let unit = cfg.mining.unit;
                    cells.push((None, unit.to_string(), mine_multidimensional(&db, &params, unit)?));
                }
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "spatial_level",
        "temporal_scale",
        "iota",
        "rho",
        "items",
        "support",
        "period_support",
        "full_periodic",
    ])?;
    for (lz, lt, set) in &cells {
        for p in &set.patterns {
            w.write_record([
                lz.as_deref().unwrap_or(""),
                lt,
                &set.params.iota.to_string(),
                &set.params.rho.to_string(),
                &p.label,
                &p.support.to_string(),
                &p.period_support.to_string(),
                &p.full_periodic.to_string(),
            ])?;
        }
    }
    let table = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    match &cfg.paths.out {
        Some(_) => {
            let dir = out_dir(&cfg)?;
            let path = dir.join("patterns.csv");
            std::fs::write(&path, &table).map_err(io_err(&path))?;
            let path = dir.join("patterns.json");
            let json: Vec<MinedCell> = cells
                .iter()
                .map(|(lz, lt, set)| MinedCell {
                    spatial_level: lz.clone(),
                    temporal_scale: lt.clone(),
                    patterns: set,
                })
                .collect();
            let mut w = create(&path)?;
            serde_json::to_writer_pretty(&mut w, &json)?;
            w.write_all(b"\n").map_err(io_err(&path))?;
            finish(&path, w)?;
            let total: usize = cells.iter().map(|(_, _, s)| s.patterns.len()).sum();
            println!("{total} patterns over {} parameter cells", cells.len());
        }
        None => std::io::stdout().write_all(&table).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(())
}

pub fn eval(flags: &Flags) -> Result<()> {
    let cfg = settings(flags)?;
    let dims: Vec<EvalDimension> = if flags.dims.is_empty() {
        EvalDimension::ALL.to_vec()
    } else {
        flags.dims.clone()
    };
    let (candidate, reference) = databases(&cfg, false)?;
    let close = closeness(&cfg, &candidate.hierarchies().location)?;
    let blocklist = match &cfg.paths.blocklist {
        Some(p) => Blocklist::load(p)?,
        None => Blocklist::default(),
    };
    let run = Evaluation {
        candidate: &candidate,
        reference: reference.as_ref(),
        config: &cfg.evaluation,
        closeness: &close,
        blocklist: &blocklist,
        similarity: cfg.similarity,
        tau: cfg.tau,
        sources: cfg.sources,
    };
    let report = evaluate(&run, &dims)?;
    match &cfg.paths.out {
        Some(_) => {
            let dir = out_dir(&cfg)?;
            report.write_dir(dir)?;
            for (d, s) in report.radar() {
                println!("{d}: {}", s.map_or("NA".to_owned(), |v| format!("{v:.4}")));
            }
        }
        None => report.write_json(std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn report(flags: &Flags) -> Result<()> {
    let cfg = settings(flags)?;
    let path = required(&cfg.paths.out, "out")?.join("report.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let scores = value
        .get("scores")
        .and_then(|s| s.as_object())
        .ok_or_else(|| Error::Data(format!("{}: no scores object", path.display())))?;
    let mut out = std::io::stdout().lock();
    let w = |out: &mut std::io::StdoutLock, line: String| writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")));
    w(&mut out, "score,value".into())?;
    for (k, v) in scores {
        let shown = v.as_f64().map_or("NA".to_owned(), |x| format!("{x:.4}"));
        w(&mut out, format!("{k},{shown}"))?;
    }
    Ok(())
}
