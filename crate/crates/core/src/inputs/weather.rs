use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::table::{csv_reader, format_timestamp, open, parse_timestamp, Provenance};

/// One row of hourly outdoor conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherRecord {
    pub timestamp: NaiveDateTime,
    /// °C
    pub t_amb: f64,
    /// °C
    pub t_ground: f64,
    /// Direct beam intensity.
    pub i_beam: f64,
    /// Sky diffuse intensity.
    pub i_sky: f64,
    /// Ground-reflected diffuse intensity.
    pub i_ground: f64,
}

#[derive(Debug, Deserialize)]
struct Row {
    timestamp: String,
    t_amb_c: f64,
    t_ground_c: f64,
    i_beam: f64,
    i_sky: f64,
    i_ground: f64,
}

pub const WEATHER_COLUMNS: [&str; 6] = [
    "timestamp",
    "t_amb_c",
    "t_ground_c",
    "i_beam",
    "i_sky",
    "i_ground",
];

/// Read a weather series from delimited text with a header row.
pub fn read_weather(reader: impl Read, origin: &Path) -> Result<Vec<WeatherRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(origin, e.to_string()))?
        .clone();
    for col in WEATHER_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(parse_error(origin, format!("missing column `{col}`")));
        }
    }
    let mut out: Vec<WeatherRecord> = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_error(origin, e.to_string()))?;
        let timestamp = parse_timestamp(&row.timestamp)
            .map_err(|msg| parse_error(origin, format!("row {line}: {msg}")))?;
        for (name, v) in [
            ("i_beam", row.i_beam),
            ("i_sky", row.i_sky),
            ("i_ground", row.i_ground),
        ] {
            if !(v >= 0.0) {
                return Err(parse_error(
                    origin,
                    format!("row {line}: {name} must be >= 0, got {v}"),
                ));
            }
        }
        out.push(WeatherRecord {
            timestamp,
            t_amb: row.t_amb_c,
            t_ground: row.t_ground_c,
            i_beam: row.i_beam,
            i_sky: row.i_sky,
            i_ground: row.i_ground,
        });
    }
    check_uniform(out.iter().map(|r| r.timestamp), origin)?;
    Ok(out)
}

pub fn write_weather(
    out: &mut impl Write,
    provenance: &Provenance,
    records: &[WeatherRecord],
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "{}", WEATHER_COLUMNS.join(","))?;
    for r in records {
        writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?}",
            format_timestamp(&r.timestamp),
            r.t_amb,
            r.t_ground,
            r.i_beam,
            r.i_sky,
            r.i_ground
        )?;
    }
    Ok(())
}

pub fn load_weather(path: &Path) -> Result<Vec<WeatherRecord>> {
    read_weather(open(path)?, path)
}

fn parse_error(path: &Path, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}

/// Timestamps must be strictly increasing with one fixed spacing.
pub(crate) fn check_uniform(
    timestamps: impl Iterator<Item = NaiveDateTime>,
    origin: &Path,
) -> Result<()> {
    let ts: Vec<_> = timestamps.collect();
    if ts.is_empty() {
        return Err(parse_error(origin, "no data rows".into()));
    }
    let mut step = None;
    for (i, pair) in ts.windows(2).enumerate() {
        let d = pair[1] - pair[0];
        if d <= chrono::TimeDelta::zero() {
            return Err(parse_error(
                origin,
                format!(
                    "row {}: timestamp {} does not advance past {}",
                    i + 3,
                    pair[1],
                    pair[0]
                ),
            ));
        }
        match step {
            None => step = Some(d),
            Some(s) if s != d => {
                return Err(parse_error(
                    origin,
                    format!("row {}: gap or irregular spacing at {}", i + 3, pair[1]),
                ))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Ground temperature at `ts` from twelve monthly means, interpolated
/// linearly between mid-month anchors and wrapping across the year end.
pub fn monthly_ground_temperature(monthly: &[f64; 12], ts: NaiveDateTime) -> f64 {
    let year = ts.year();
    let anchor = |y: i32, m: u32| -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, m, 15)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    };
    let month = ts.month();
    let this = anchor(year, month);
    let (lo_t, lo_v, hi_t, hi_v) = if ts >= this {
        let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
        (
            this,
            monthly[month as usize - 1],
            anchor(ny, nm),
            monthly[nm as usize - 1],
        )
    } else {
        let (py, pm) = if month == 1 { (year - 1, 12) } else { (year, month - 1) };
        (
            anchor(py, pm),
            monthly[pm as usize - 1],
            this,
            monthly[month as usize - 1],
        )
    };
    let span = (hi_t - lo_t).num_seconds() as f64;
    let frac = (ts - lo_t).num_seconds() as f64 / span;
    lo_v + frac * (hi_v - lo_v)
}
