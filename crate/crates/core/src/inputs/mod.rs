//! Weather, HVAC and load inputs, and the per-step input vector.

mod hvac;
mod loads;
pub mod solar;
mod truth;
mod weather;

pub use hvac::{load_hvac, read_hvac, write_hvac, HvacRecord, HVAC_COLUMNS};
pub use loads::{load_loads, read_loads, DayType, LoadProfiles};
pub use solar::{exterior_solar_gain, window_solar_gain, SolarGeometry};
pub use truth::{
    initial_state, read_measurements, read_truth, simulate_truth, write_measurements, write_truth,
    MeasurementNoise, Measurements, Truth, TruthConfig,
};
pub use weather::{
    load_weather, monthly_ground_temperature, read_weather, write_weather, WeatherRecord,
    WEATHER_COLUMNS,
};

use chrono::NaiveDateTime;
use nalgebra::DVector;

use crate::building::{SurfaceKind, ValidatedBuilding};
use crate::error::{Error, Result};
use crate::state_space::{InputLayout, StateSpaceModel};

/// Input vector for one step, ordered per `inputs`:
/// `[T_amb, T_ground, U_o per exterior surface, ṁ·U_sa per zone]`.
///
/// `solar[k][j]` is the outer solar gain of surface `j` in zone `k`; entries
/// for non-exterior surfaces are ignored.
pub fn assemble_input(
    model: &ValidatedBuilding,
    inputs: &InputLayout,
    weather: &WeatherRecord,
    hvac: &HvacRecord,
    solar: &[Vec<f64>],
) -> Result<DVector<f64>> {
    if weather.timestamp != hvac.timestamp {
        return Err(Error::invalid(format!(
            "weather record at {} does not line up with HVAC record at {}",
            weather.timestamp, hvac.timestamp
        )));
    }
    let zones = model.zones.len();
    if hvac.mdot.len() != zones || hvac.supply_temp.len() != zones || solar.len() != zones {
        return Err(Error::Dimension(format!(
            "inputs must cover all {zones} zones"
        )));
    }
    let mut u = DVector::zeros(inputs.dim());
    u[InputLayout::AMBIENT] = weather.t_amb;
    u[InputLayout::GROUND] = weather.t_ground;
    for (k, zone) in model.zones.iter().enumerate() {
        if solar[k].len() != zone.surfaces.len() {
            return Err(Error::Dimension(format!(
                "zone `{}`: expected {} solar values, got {}",
                zone.id,
                zone.surfaces.len(),
                solar[k].len()
            )));
        }
        for (j, s) in zone.surfaces.iter().enumerate() {
            if s.kind == SurfaceKind::Exterior {
                let col = inputs.solar(k, j).expect("exterior surfaces have a channel");
                u[col] = solar[k][j];
            }
        }
        u[inputs.hvac(k)] = hvac.mdot[k] * hvac.supply_temp[k];
    }
    Ok(u)
}

/// Outer solar gain of every surface (zero for non-exterior ones).
pub fn surface_solar_gains(
    model: &ValidatedBuilding,
    weather: &WeatherRecord,
) -> Result<Vec<Vec<f64>>> {
    model
        .zones
        .iter()
        .map(|zone| {
            zone.surfaces
                .iter()
                .map(|s| match s.kind {
                    SurfaceKind::Exterior => {
                        let g = SolarGeometry::for_surface(s, &model.location, weather.timestamp);
                        exterior_solar_gain(s, weather, &g)
                    }
                    _ => Ok(0.0),
                })
                .collect()
        })
        .collect()
}

/// Aligned per-interval inputs for a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSeries {
    pub timestamps: Vec<NaiveDateTime>,
    /// Seconds between consecutive records.
    pub interval: f64,
    pub u: Vec<DVector<f64>>,
    /// Supply-air mass flow per zone, kg/s.
    pub mdot: Vec<Vec<f64>>,
}

impl InputSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// The first `n` records.
    pub fn truncated(&self, n: usize) -> InputSeries {
        let n = n.min(self.len());
        InputSeries {
            timestamps: self.timestamps[..n].to_vec(),
            interval: self.interval,
            u: self.u[..n].to_vec(),
            mdot: self.mdot[..n].to_vec(),
        }
    }

    /// Number of `dt` substeps per record; `dt` must divide the interval.
    pub fn substeps(&self, dt: f64) -> Result<usize> {
        substeps(self.interval, dt)
    }
}

pub fn substeps(interval: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let s = (interval / dt).round();
    if s < 1.0 || (s * dt - interval).abs() > 1e-9 * interval.max(1.0) {
        return Err(Error::invalid(format!(
            "dt = {dt} s does not divide the data interval of {interval} s"
        )));
    }
    Ok(s as usize)
}

/// Combine weather and HVAC records into input vectors.
pub fn build_input_series(
    model: &ValidatedBuilding,
    ssm: &StateSpaceModel,
    weather: &[WeatherRecord],
    hvac: &[HvacRecord],
) -> Result<InputSeries> {
    if weather.len() != hvac.len() {
        return Err(Error::invalid(format!(
            "weather has {} records but HVAC has {}",
            weather.len(),
            hvac.len()
        )));
    }
    if weather.len() < 2 {
        return Err(Error::invalid("at least two input records are required"));
    }
    let interval = (weather[1].timestamp - weather[0].timestamp).num_milliseconds() as f64 / 1e3;
    let mut u = Vec::with_capacity(weather.len());
    for (w, h) in weather.iter().zip(hvac) {
        let solar = surface_solar_gains(model, w)?;
        u.push(assemble_input(model, &ssm.inputs, w, h, &solar)?);
    }
    Ok(InputSeries {
        timestamps: weather.iter().map(|w| w.timestamp).collect(),
        interval,
        u,
        mdot: hvac.iter().map(|h| h.mdot.clone()).collect(),
    })
}
