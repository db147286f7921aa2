//! Record cache, record stream and summary table.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gaplab::bounds::BoundEntry;
use tempfile::NamedTempFile;

use crate::record::ResultRecord;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SCALING_FILE: &str = "scaling.json";
pub const CACHE_DIR: &str = "cache";

/// Content-addressed record store: `<dir>/<config hash>.json`.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating cache {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    /// A stored record, if present and readable; damaged entries count as
    /// missing.
    pub fn get(&self, hash: &str) -> Option<ResultRecord> {
        let text = fs::read_to_string(self.path(hash)).ok()?;
        serde_json::from_str::<ResultRecord>(&text).ok().filter(|r| r.config_hash == hash)
    }

    /// Writes to a temporary file in the cache directory, then renames it
    /// into place.
    pub fn put(&self, record: &ResultRecord) -> Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, record)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(&record.config_hash))
            .with_context(|| format!("storing record {}", record.config_hash))?;
        Ok(())
    }
}

pub fn append_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}

/// Seventeen significant digits, enough to read the same `f64` back.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Header and rows: parameters, gap, certified bound, zero-range
/// criteria, every closed-form bound, continuum bounds and slack.
pub fn summary_table(records: &[ResultRecord]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut params: Vec<String> = Vec::new();
    let mut bounds: Vec<String> = Vec::new();
    let mut continuum: Vec<String> = Vec::new();
    for r in records {
        for k in r.point.keys().chain(r.model.parameters.keys()) {
            if !params.contains(k) {
                params.push(k.clone());
            }
        }
        for b in r.bounds.iter().filter_map(BoundEntry::report) {
            if !bounds.contains(&b.name) {
                bounds.push(b.name.clone());
            }
        }
        for b in r.continuum.iter().flat_map(|c| &c.bounds) {
            if !continuum.contains(&b.name) {
                continuum.push(b.name.clone());
            }
        }
    }
    params.sort();
    let mut header: Vec<String> = vec!["config_hash".into(), "kind".into(), "states".into()];
    header.extend(params.iter().cloned());
    header.extend(["gap", "certified_2k", "teom_delta", "cobound"].map(String::from));
    header.extend(bounds.iter().cloned());
    header.extend(continuum.iter().map(|n| format!("{n}-quadrature")));
    header.extend(["slack", "gap_diam2", "passed"].map(String::from));

    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![r.config_hash.clone(), r.model.kind.clone(), r.model.states.to_string()];
            for k in &params {
                row.push(opt(r.point.get(k).or_else(|| r.model.parameters.get(k)).copied()));
            }
            row.push(opt(r.gap_value()));
            row.push(opt(r.certified.as_ref().map(|c| c.bound)));
            row.push(opt(r.m_matrix.as_ref().map(|m| m.teom_delta)));
            row.push(opt(r.m_matrix.as_ref().map(|m| m.cobound_value)));
            for name in &bounds {
                row.push(opt(r.bound(name).map(|b| b.value)));
            }
            for name in &continuum {
                let v = r.continuum.as_ref().and_then(|c| c.bounds.iter().find(|b| &b.name == name));
                row.push(opt(v.map(|b| b.value)));
            }
            row.push(opt(r.continuum.as_ref().map(|c| c.slack)));
            row.push(opt(r.scaling.as_ref().map(|s| s.gap_diam2)));
            row.push(r.passed.to_string());
            row
        })
        .collect();
    (header, rows)
}

pub fn write_summary(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let (header, rows) = summary_table(records);
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
