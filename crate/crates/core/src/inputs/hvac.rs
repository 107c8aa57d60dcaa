use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::table::{csv_reader, format_timestamp, open, parse_timestamp, Provenance};

/// Supply air delivered to every zone during one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct HvacRecord {
    pub timestamp: NaiveDateTime,
    /// kg/s, one per zone in model order.
    pub mdot: Vec<f64>,
    /// Supply air temperature, °C, one per zone in model order.
    pub supply_temp: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct Row {
    timestamp: String,
    zone_id: String,
    m_dot_kg_s: f64,
    t_supply_c: f64,
}

pub const HVAC_COLUMNS: [&str; 4] = ["timestamp", "zone_id", "m_dot_kg_s", "t_supply_c"];

fn parse_error(path: &Path, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}

/// Read long-format HVAC records; `zone_ids` fixes the zone order and the
/// set of zones every timestamp must cover exactly once.
pub fn read_hvac(reader: impl Read, origin: &Path, zone_ids: &[&str]) -> Result<Vec<HvacRecord>> {
    let index: HashMap<&str, usize> = zone_ids.iter().enumerate().map(|(i, z)| (*z, i)).collect();
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(origin, e.to_string()))?
        .clone();
    for col in HVAC_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(parse_error(origin, format!("missing column `{col}`")));
        }
    }

    let mut records: Vec<HvacRecord> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_error(origin, e.to_string()))?;
        let ts = parse_timestamp(&row.timestamp)
            .map_err(|m| parse_error(origin, format!("row {line}: {m}")))?;
        let &k = index.get(row.zone_id.as_str()).ok_or_else(|| {
            parse_error(origin, format!("row {line}: unknown zone `{}`", row.zone_id))
        })?;
        if !(row.m_dot_kg_s >= 0.0) {
            return Err(parse_error(
                origin,
                format!("row {line}: m_dot_kg_s must be >= 0, got {}", row.m_dot_kg_s),
            ));
        }
        let new_record = records.last().map_or(true, |r| r.timestamp != ts);
        if new_record {
            if let Some(prev) = records.last() {
                if ts < prev.timestamp {
                    return Err(parse_error(
                        origin,
                        format!("row {line}: timestamps must be grouped in increasing order"),
                    ));
                }
                close_record(prev, &filled, zone_ids, origin)?;
            }
            records.push(HvacRecord {
                timestamp: ts,
                mdot: vec![0.0; zone_ids.len()],
                supply_temp: vec![0.0; zone_ids.len()],
            });
            filled = vec![false; zone_ids.len()];
        }
        if filled[k] {
            return Err(parse_error(
                origin,
                format!("row {line}: duplicate entry for zone `{}` at {ts}", row.zone_id),
            ));
        }
        filled[k] = true;
        let rec = records.last_mut().expect("record pushed above");
        rec.mdot[k] = row.m_dot_kg_s;
        rec.supply_temp[k] = row.t_supply_c;
    }
    if let Some(last) = records.last() {
        close_record(last, &filled, zone_ids, origin)?;
    }
    super::weather::check_uniform(records.iter().map(|r| r.timestamp), origin)?;
    Ok(records)
}

fn close_record(rec: &HvacRecord, filled: &[bool], zone_ids: &[&str], origin: &Path) -> Result<()> {
    if let Some(k) = filled.iter().position(|f| !f) {
        return Err(parse_error(
            origin,
            format!("no entry for zone `{}` at {}", zone_ids[k], rec.timestamp),
        ));
    }
    Ok(())
}

pub fn write_hvac(
    out: &mut impl Write,
    provenance: &Provenance,
    zone_ids: &[&str],
    records: &[HvacRecord],
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "{}", HVAC_COLUMNS.join(","))?;
    for r in records {
        let ts = format_timestamp(&r.timestamp);
        for (k, id) in zone_ids.iter().enumerate() {
            writeln!(out, "{ts},{id},{:?},{:?}", r.mdot[k], r.supply_temp[k])?;
        }
    }
    Ok(())
}

pub fn load_hvac(path: &Path, zone_ids: &[&str]) -> Result<Vec<HvacRecord>> {
    read_hvac(open(path)?, path, zone_ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Vec<HvacRecord>> {
        read_hvac(text.as_bytes(), Path::new("hvac.csv"), &["A", "B"])
    }

    #[test]
    fn groups_rows_by_timestamp() {
        let text = "timestamp,zone_id,m_dot_kg_s,t_supply_c\n\
            2021-01-01T00:00:00,B,0.2,30\n\
            2021-01-01T00:00:00,A,0.1,28\n\
            2021-01-01T01:00:00,A,0.0,28\n\
            2021-01-01T01:00:00,B,0.3,31\n";
        let recs = read(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].mdot, vec![0.1, 0.2]);
        assert_eq!(recs[1].supply_temp, vec![28.0, 31.0]);
    }

    #[test]
    fn rejects_missing_zone_and_negative_flow() {
        let missing = "timestamp,zone_id,m_dot_kg_s,t_supply_c\n\
            2021-01-01T00:00:00,A,0.1,28\n\
            2021-01-01T01:00:00,A,0.1,28\n\
            2021-01-01T01:00:00,B,0.1,28\n";
        assert!(read(missing).is_err());
        let negative = "timestamp,zone_id,m_dot_kg_s,t_supply_c\n\
            2021-01-01T00:00:00,A,-0.1,28\n\
            2021-01-01T00:00:00,B,0.1,28\n";
        assert!(read(negative).is_err());
        let unknown = "timestamp,zone_id,m_dot_kg_s,t_supply_c\n2021-01-01T00:00:00,C,0.1,28\n";
        assert!(read(unknown).is_err());
    }
}
