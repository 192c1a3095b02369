//! Line-delimited JSON cache of invariant traces, keyed by `(p, k, t)`.
//!
//! New records are appended. On open, records that fail to parse, break the
//! Weil bound, or conflict with another record for the same key are dropped
//! and the file is rewritten through a temporary file and an atomic rename.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dwork::field::MAX_FIELD_SIZE;
use crate::dwork::hypergeometric::check_weil;
use crate::dwork::{DworkError, TraceEngine, TraceProvider, TraceValue};

type RecordMap = BTreeMap<(u64, u32, u64), CacheRecord>;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheRecord {
    pub p: u64,
    pub k: u32,
    pub t: u64,
    pub trace: i64,
    pub residual: String,
    pub tool_version: String,
    pub timestamp: String,
}

impl CacheRecord {
    pub fn new(p: u64, k: u32, t: u64, value: TraceValue) -> Self {
        CacheRecord {
            p,
            k,
            t,
            trace: value.trace,
            residual: format_residual(value.residual),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn key(&self) -> (u64, u32, u64) {
        (self.p, self.k, self.t)
    }

    fn value(&self) -> Option<TraceValue> {
        let residual: f64 = self.residual.parse().ok()?;
        Some(TraceValue {
            trace: self.trace,
            residual,
        })
    }

    fn validate(&self) -> Result<(), String> {
        let q = self
            .p
            .checked_pow(self.k)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .ok_or_else(|| {
                format!(
                    "field size out of range for ({}, {}, {})",
                    self.p, self.k, self.t
                )
            })?;
        check_weil(q, self.trace).map_err(|e| e.to_string())?;
        match self.value() {
            Some(v) if v.residual.is_finite() && v.residual >= 0.0 => Ok(()),
            _ => Err(format!("bad residual '{}'", self.residual)),
        }
    }
}

/// `"0"` for exact values, scientific notation otherwise.
pub fn format_residual(r: f64) -> String {
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r:e}")
    }
}

/// Outcome of scanning a cache file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CacheAudit {
    pub lines: usize,
    pub valid: usize,
    pub duplicates: usize,
    /// Human-readable reasons for every dropped line.
    pub rejected: Vec<String>,
}

impl CacheAudit {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty() && self.duplicates == 0
    }
}

#[derive(Debug)]
pub struct TraceCache {
    path: PathBuf,
    records: RecordMap,
    audit: CacheAudit,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_records(path: &Path) -> Result<(RecordMap, CacheAudit), CacheError> {
    let mut records = RecordMap::new();
    let mut audit = CacheAudit::default();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((records, audit)),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut conflicted = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        audit.lines += 1;
        let rec: CacheRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                audit.rejected.push(format!("line {}: {e}", i + 1));
                continue;
            }
        };
        if let Err(why) = rec.validate() {
            audit.rejected.push(format!("line {}: {why}", i + 1));
            continue;
        }
        match records.get(&rec.key()) {
            Some(prev) if prev.trace == rec.trace => audit.duplicates += 1,
            Some(prev) => {
                audit.rejected.push(format!(
                    "line {}: trace {} conflicts with {} for (p, k, t) = {:?}",
                    i + 1,
                    rec.trace,
                    prev.trace,
                    rec.key()
                ));
                conflicted.push(rec.key());
            }
            None => {
                records.insert(rec.key(), rec);
            }
        }
    }
    for key in conflicted {
        records.remove(&key);
    }
    audit.valid = records.len();
    Ok((records, audit))
}

impl TraceCache {
    /// Loads `path` (missing file = empty cache), compacting it if anything was dropped.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let path = path.into();
        let (records, audit) = read_records(&path)?;
        let cache = TraceCache {
            path,
            records,
            audit,
        };
        if !cache.audit.is_clean() {
            cache.compact()?;
        }
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// What [`open`](Self::open) found in the file before compaction.
    pub fn audit(&self) -> &CacheAudit {
        &self.audit
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, p: u64, k: u32, t: u64) -> Option<&CacheRecord> {
        self.records.get(&(p, k, t))
    }

    pub fn records(&self) -> impl Iterator<Item = &CacheRecord> {
        self.records.values()
    }

    /// Appends one record; an existing record for the same key is kept.
    pub fn insert(&mut self, rec: CacheRecord) -> Result<(), CacheError> {
        if self.records.contains_key(&rec.key()) {
            return Ok(());
        }
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(&self.path))?;
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(io_err(&self.path))?;
        let line = serde_json::to_string(&rec).expect("cache records always serialize");
        writeln!(f, "{line}").map_err(io_err(&self.path))?;
        self.records.insert(rec.key(), rec);
        Ok(())
    }

    /// Rewrites the file with one sorted record per key.
    pub fn compact(&self) -> Result<(), CacheError> {
        let tmp = self.path.with_extension("jsonl.tmp");
        {
            let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
            for rec in self.records.values() {
                let line = serde_json::to_string(rec).expect("cache records always serialize");
                writeln!(f, "{line}").map_err(io_err(&tmp))?;
            }
            f.sync_all().map_err(io_err(&tmp))?;
        }
        fs::rename(&tmp, &self.path).map_err(io_err(&self.path))
    }
}

/// Audits a cache file without modifying it.
pub fn verify(path: &Path) -> Result<(CacheAudit, Vec<CacheRecord>), CacheError> {
    let (records, audit) = read_records(path)?;
    Ok((audit, records.into_values().collect()))
}

/// A [`TraceProvider`] that reads through a cache and writes back fresh values.
pub struct CachedEngine<'a> {
    pub engine: TraceEngine,
    cache: &'a mut TraceCache,
    hits: usize,
    error: Option<CacheError>,
}

impl<'a> CachedEngine<'a> {
    pub fn new(engine: TraceEngine, cache: &'a mut TraceCache) -> Self {
        CachedEngine {
            engine,
            cache,
            hits: 0,
            error: None,
        }
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn computed(&self) -> usize {
        self.engine.evaluations()
    }

    /// First write-back failure, if any. Traces are still returned when the cache cannot be written.
    pub fn take_error(&mut self) -> Option<CacheError> {
        self.error.take()
    }
}

impl TraceProvider for CachedEngine<'_> {
    fn trace(&mut self, p: u64, k: u32, t: u64) -> Result<TraceValue, DworkError> {
        if let Some(v) = self.cache.get(p, k, t).and_then(CacheRecord::value) {
            self.hits += 1;
            return Ok(v);
        }
        let v = self.engine.trace(p, k, t)?;
        if let Err(e) = self.cache.insert(CacheRecord::new(p, k, t, v)) {
            self.error.get_or_insert(e);
        }
        Ok(v)
    }
}
