//! Synthetic ground truth: the model driven by known inputs with its load
//! states pinned to the hour-of-day profiles, and noisy zone measurements.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDateTime;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{InputSeries, LoadProfiles};
use crate::building::ValidatedBuilding;
use crate::error::{Error, Result};
use crate::state_space::{DiscretizationCache, StateRole, StateSpaceModel};
use crate::table::{format_timestamp, read_blocks, Provenance};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementNoise {
    /// Each zone sensor draws its variance from `U[0, max_variance]`.
    Uniform { max_variance: f64 },
    /// Fixed per-zone variances, °C².
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthConfig {
    /// Integration step, s; must divide the data interval.
    pub dt: f64,
    pub noise: MeasurementNoise,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    /// State at each record timestamp, load states set for the interval that
    /// starts there.
    pub states: Vec<DVector<f64>>,
    /// Noisy zone-air temperatures at each record timestamp.
    pub measurements: Vec<DVector<f64>>,
    /// Per-zone measurement noise variance.
    pub variances: Vec<f64>,
}

/// Every temperature node at its zone setpoint; load states from the
/// profiles at the first record.
pub fn initial_state(
    model: &ValidatedBuilding,
    ssm: &StateSpaceModel,
    loads: &LoadProfiles,
    series: &InputSeries,
) -> DVector<f64> {
    let mut x = DVector::zeros(ssm.dim());
    for (i, &(k, _)) in ssm.layout.roles().iter().enumerate() {
        x[i] = model.zones[k].setpoint;
    }
    if let Some(ts) = series.timestamps.first() {
        pin_loads(&mut x, ssm, loads, ts);
    }
    x
}

fn pin_loads(
    x: &mut DVector<f64>,
    ssm: &StateSpaceModel,
    loads: &LoadProfiles,
    ts: &chrono::NaiveDateTime,
) {
    for (i, &(k, role)) in ssm.layout.roles().iter().enumerate() {
        match role {
            StateRole::InternalLoad => x[i] = loads.t_int_at(k, ts),
            StateRole::SurfaceGain(j) => x[i] = loads.t_q_at(k, j, ts),
            _ => {}
        }
    }
}

pub fn simulate_truth(
    model: &ValidatedBuilding,
    ssm: &StateSpaceModel,
    series: &InputSeries,
    loads: &LoadProfiles,
    initial: Option<DVector<f64>>,
    config: &TruthConfig,
) -> Result<Truth> {
    let substeps = series.substeps(config.dt)?;
    let n_zones = model.zones.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let variances = match &config.noise {
        MeasurementNoise::Uniform { max_variance } => {
            if !(*max_variance >= 0.0) {
                return Err(Error::invalid("measurement noise bound must be >= 0"));
            }
            (0..n_zones)
                .map(|_| rng.random::<f64>() * max_variance)
                .collect::<Vec<_>>()
        }
        MeasurementNoise::Fixed(v) => {
            if v.len() != n_zones || v.iter().any(|r| !(*r >= 0.0)) {
                return Err(Error::invalid(format!(
                    "expected {n_zones} non-negative measurement variances"
                )));
            }
            v.clone()
        }
    };
    let noise: Vec<Normal<f64>> = variances
        .iter()
        .map(|r| Normal::new(0.0, r.sqrt()).expect("variance checked non-negative"))
        .collect();

    let mut x = match initial {
        Some(x) if x.len() != ssm.dim() => {
            return Err(Error::Dimension(format!(
                "initial state has {} entries, model has {}",
                x.len(),
                ssm.dim()
            )))
        }
        Some(x) => x,
        None => initial_state(model, ssm, loads, series),
    };

    let observed = ssm.observed_indices();
    let mut cache = DiscretizationCache::new(Arc::new(ssm.dynamics.clone()), config.dt, substeps, None);
    let mut states = Vec::with_capacity(series.len());
    let mut measurements = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        pin_loads(&mut x, ssm, loads, &series.timestamps[i]);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "truth state at {}",
                series.timestamps[i]
            )));
        }
        let y = DVector::from_iterator(
            observed.len(),
            observed
                .iter()
                .zip(&noise)
                .map(|(&idx, d)| x[idx] + d.sample(&mut rng)),
        );
        measurements.push(y);
        let op = cache.get(&series.mdot[i])?;
        let next = &op.phi * &x + &op.gamma * &series.u[i];
        states.push(std::mem::replace(&mut x, next));
    }
    Ok(Truth {
        states,
        measurements,
        variances,
    })
}

/// Long-format truth table: `timestamp,state_id,value`.
pub fn write_truth(
    out: &mut impl Write,
    provenance: &Provenance,
    state_ids: &[String],
    timestamps: &[NaiveDateTime],
    states: &[DVector<f64>],
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "timestamp,state_id,value")?;
    for (ts, x) in timestamps.iter().zip(states) {
        let ts = format_timestamp(ts);
        for (id, v) in state_ids.iter().zip(x.iter()) {
            writeln!(out, "{ts},{id},{v:?}")?;
        }
    }
    Ok(())
}

pub fn read_truth(
    reader: impl Read,
    origin: &Path,
    state_ids: &[String],
) -> Result<(Vec<NaiveDateTime>, Vec<DVector<f64>>)> {
    let mut b = read_blocks(reader, origin, "state_id", state_ids, &["value"])?;
    Ok((b.timestamps, b.columns.pop().expect("one value column")))
}

/// Zone sensor readings with the variance of each sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub timestamps: Vec<NaiveDateTime>,
    pub values: Vec<DVector<f64>>,
    pub variances: Vec<f64>,
}

/// Long-format measurements: `timestamp,zone_id,temperature_c,variance`.
pub fn write_measurements(
    out: &mut impl Write,
    provenance: &Provenance,
    zone_ids: &[&str],
    m: &Measurements,
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "timestamp,zone_id,temperature_c,variance")?;
    for (ts, y) in m.timestamps.iter().zip(&m.values) {
        let ts = format_timestamp(ts);
        for (k, id) in zone_ids.iter().enumerate() {
            writeln!(out, "{ts},{id},{:?},{:?}", y[k], m.variances[k])?;
        }
    }
    Ok(())
}

/// Read measurements; each zone's variance must be the same on every row.
pub fn read_measurements(reader: impl Read, origin: &Path, zone_ids: &[String]) -> Result<Measurements> {
    let mut b = read_blocks(reader, origin, "zone_id", zone_ids, &["temperature_c", "variance"])?;
    let var_rows = b.columns.pop().expect("two value columns");
    let values = b.columns.pop().expect("two value columns");
    let variances: Vec<f64> = match var_rows.first() {
        Some(v) => v.iter().copied().collect(),
        None => vec![0.0; zone_ids.len()],
    };
    for (t, row) in var_rows.iter().enumerate() {
        if let Some(k) = (0..row.len()).find(|&k| row[k] != variances[k]) {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                message: format!(
                    "variance of `{}` changes at {}",
                    zone_ids[k], b.timestamps[t]
                ),
            });
        }
    }
    Ok(Measurements {
        timestamps: b.timestamps,
        values,
        variances,
    })
}
