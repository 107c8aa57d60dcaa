//! Delimited-text helpers shared by the readers and writers.
//!
//! Files may start with `#` comment lines (provenance headers); the readers
//! skip them.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use nalgebra::DVector;

use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_timestamp(s: &str) -> std::result::Result<NaiveDateTime, String> {
    let s = s.trim();
    for fmt in [TIMESTAMP_FORMAT, "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(ts);
        }
    }
    Err(format!("cannot parse timestamp `{s}`"))
}

pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

pub(crate) fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader)
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Provenance written as `#` lines at the top of every emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Provenance {
            config_hash: config_hash.into(),
            seed,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# config_hash={} seed={}", self.config_hash, self.seed)?;
        for (k, v) in &self.extra {
            writeln!(out, "# {k}={v}")?;
        }
        Ok(())
    }

    /// Parse the `#` header lines of a file written by [`Provenance::write`].
    pub fn read(text: &str) -> Option<Provenance> {
        let mut lines = text.lines().take_while(|l| l.starts_with('#'));
        let first = lines.next()?.trim_start_matches('#').trim();
        let mut p = Provenance::default();
        for part in first.split_whitespace() {
            let (k, v) = part.split_once('=')?;
            match k {
                "config_hash" => p.config_hash = v.to_string(),
                "seed" => p.seed = v.parse().ok()?,
                _ => {}
            }
        }
        for line in lines {
            if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
                p.extra.push((k.to_string(), v.to_string()));
            }
        }
        Some(p)
    }
}

/// Long-format table regrouped into one vector per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub timestamps: Vec<NaiveDateTime>,
    /// `columns[c][t][i]`: value column `c` at timestamp `t` for id `i`.
    pub columns: Vec<Vec<DVector<f64>>>,
}

/// Read rows `timestamp,<key>,<values...>` where rows sharing a timestamp
/// are contiguous and each block names every id in `ids` exactly once.
pub(crate) fn read_blocks(
    reader: impl Read,
    origin: &Path,
    key: &str,
    ids: &[String],
    values: &[&str],
) -> Result<Blocks> {
    let perr = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| perr(format!("missing column `{name}`")))
    };
    let ts_col = col("timestamp")?;
    let key_col = col(key)?;
    let value_cols = values.iter().map(|v| col(v)).collect::<Result<Vec<_>>>()?;
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = ids.len();
    let mut out = Blocks {
        timestamps: Vec::new(),
        columns: vec![Vec::new(); values.len()],
    };
    let mut seen = vec![false; n];
    let close = |seen: &[bool], ts: &NaiveDateTime| match seen.iter().position(|s| !s) {
        Some(i) => Err(perr(format!("no row for `{}` at {ts}", ids[i]))),
        None => Ok(()),
    };
    for (row_no, record) in rdr.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| perr(e.to_string()))?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let ts = parse_timestamp(field(ts_col)).map_err(|m| perr(format!("row {line}: {m}")))?;
        if out.timestamps.last() != Some(&ts) {
            if let Some(prev) = out.timestamps.last() {
                if ts < *prev {
                    return Err(perr(format!("row {line}: timestamps must be grouped in increasing order")));
                }
                close(&seen, prev)?;
            }
            out.timestamps.push(ts);
            for c in &mut out.columns {
                c.push(DVector::from_element(n, f64::NAN));
            }
            seen.fill(false);
        }
        let id = field(key_col);
        let &i = index
            .get(id)
            .ok_or_else(|| perr(format!("row {line}: unknown {key} `{id}`")))?;
        if seen[i] {
            return Err(perr(format!("row {line}: duplicate row for `{id}` at {ts}")));
        }
        seen[i] = true;
        for (c, &vc) in value_cols.iter().enumerate() {
            let v: f64 = field(vc)
                .parse()
                .map_err(|_| perr(format!("row {line}: `{}` is not a number", field(vc))))?;
            out.columns[c].last_mut().expect("block pushed")[i] = v;
        }
    }
    if let Some(last) = out.timestamps.last() {
        close(&seen, last)?;
    }
    Ok(out)
}
