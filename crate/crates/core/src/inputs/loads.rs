//! Hour-of-day load schedules used to drive the synthetic truth model.
//!
//! File layout (one table, header required):
//!
//! ```text
//! kind,id,day_type,hour,watts
//! t_int,Z1,weekday,9,850
//! t_q,Z1.Z1-S,all,13,120
//! ```
//!
//! `t_int` rows give the non-envelope load of a zone for `weekday` or
//! `weekend` days; `t_q` rows give the radiant gain on a surface's inner
//! face (`zone.surface` or a building-unique surface id). Missing entries
//! are zero.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDateTime, Timelike, Weekday};
use serde::Deserialize;

use crate::building::BuildingModel;
use crate::error::{Error, Result};
use crate::table::{csv_reader, open};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub fn of(ts: &NaiveDateTime) -> Self {
        match ts.weekday() {
            Weekday::Sat | Weekday::Sun => DayType::Weekend,
            _ => DayType::Weekday,
        }
    }

    fn slot(self) -> usize {
        match self {
            DayType::Weekday => 0,
            DayType::Weekend => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfiles {
    /// `[zone][day type][hour]`, W.
    pub t_int: Vec<[[f64; 24]; 2]>,
    /// `[zone][surface][hour]`, W.
    pub t_q: Vec<Vec<[f64; 24]>>,
}

impl LoadProfiles {
    pub fn zeros(model: &BuildingModel) -> Self {
        LoadProfiles {
            t_int: vec![[[0.0; 24]; 2]; model.zones.len()],
            t_q: model
                .zones
                .iter()
                .map(|z| vec![[0.0; 24]; z.surfaces.len()])
                .collect(),
        }
    }

    pub fn t_int_at(&self, zone: usize, ts: &NaiveDateTime) -> f64 {
        self.t_int[zone][DayType::of(ts).slot()][ts.hour() as usize]
    }

    pub fn t_q_at(&self, zone: usize, surface: usize, ts: &NaiveDateTime) -> f64 {
        self.t_q[zone][surface][ts.hour() as usize]
    }

    pub fn write(&self, model: &BuildingModel, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "kind,id,day_type,hour,watts")?;
        for (k, zone) in model.zones.iter().enumerate() {
            for (day, name) in [(0, "weekday"), (1, "weekend")] {
                for h in 0..24 {
                    writeln!(out, "t_int,{},{name},{h},{}", zone.id, self.t_int[k][day][h])?;
                }
            }
        }
        for (k, zone) in model.zones.iter().enumerate() {
            for (j, s) in zone.surfaces.iter().enumerate() {
                for h in 0..24 {
                    writeln!(out, "t_q,{}.{},all,{h},{}", zone.id, s.id, self.t_q[k][j][h])?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    kind: String,
    id: String,
    day_type: String,
    hour: usize,
    watts: f64,
}

fn parse_error(path: &Path, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}

pub fn read_loads(reader: impl Read, origin: &Path, model: &BuildingModel) -> Result<LoadProfiles> {
    let zones: HashMap<&str, usize> = model
        .zones
        .iter()
        .enumerate()
        .map(|(k, z)| (z.id.as_str(), k))
        .collect();
    let mut surfaces: HashMap<String, Option<(usize, usize)>> = HashMap::new();
    for (k, z) in model.zones.iter().enumerate() {
        for (j, s) in z.surfaces.iter().enumerate() {
            surfaces.insert(format!("{}.{}", z.id, s.id), Some((k, j)));
            surfaces
                .entry(s.id.clone())
                .and_modify(|e| *e = None)
                .or_insert(Some((k, j)));
        }
    }

    let mut profiles = LoadProfiles::zeros(model);
    let mut rdr = csv_reader(reader);
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_error(origin, e.to_string()))?;
        if row.hour > 23 {
            return Err(parse_error(origin, format!("row {line}: hour must be 0..=23")));
        }
        if !row.watts.is_finite() {
            return Err(parse_error(origin, format!("row {line}: watts must be finite")));
        }
        match row.kind.as_str() {
            "t_int" => {
                let &k = zones.get(row.id.as_str()).ok_or_else(|| {
                    parse_error(origin, format!("row {line}: unknown zone `{}`", row.id))
                })?;
                let days: &[usize] = match row.day_type.as_str() {
                    "weekday" => &[0],
                    "weekend" => &[1],
                    "all" => &[0, 1],
                    other => {
                        return Err(parse_error(
                            origin,
                            format!("row {line}: unknown day type `{other}`"),
                        ))
                    }
                };
                for &d in days {
                    profiles.t_int[k][d][row.hour] = row.watts;
                }
            }
            "t_q" => {
                let (k, j) = match surfaces.get(&row.id) {
                    Some(Some(kj)) => *kj,
                    Some(None) => {
                        return Err(parse_error(
                            origin,
                            format!(
                                "row {line}: surface id `{}` is ambiguous; qualify it as zone.surface",
                                row.id
                            ),
                        ))
                    }
                    None => {
                        return Err(parse_error(
                            origin,
                            format!("row {line}: unknown surface `{}`", row.id),
                        ))
                    }
                };
                profiles.t_q[k][j][row.hour] = row.watts;
            }
            other => {
                return Err(parse_error(
                    origin,
                    format!("row {line}: kind must be t_int or t_q, got `{other}`"),
                ))
            }
        }
    }
    Ok(profiles)
}

pub fn load_loads(path: &Path, model: &BuildingModel) -> Result<LoadProfiles> {
    read_loads(open(path)?, path, model)
}
