//! Solar position, incidence and absorbed/transmitted solar gains.
//!
//! Sun position uses the NOAA fractional-year approximation (equation of
//! time and declination as Fourier series), accurate to a fraction of a
//! degree, which is plenty for hourly building inputs.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDateTime, Timelike};

use super::WeatherRecord;
use crate::building::{Location, Surface, SurfaceKind, Zone};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunPosition {
    /// Elevation above the horizon, rad.
    pub altitude: f64,
    /// Clockwise from north, rad.
    pub azimuth: f64,
}

impl SunPosition {
    pub fn is_up(&self) -> bool {
        self.altitude > 0.0
    }
}

/// Sun position at local standard time `ts`.
pub fn sun_position(location: &Location, ts: NaiveDateTime) -> SunPosition {
    let day = ts.ordinal() as f64;
    let hour = ts.hour() as f64 + ts.minute() as f64 / 60.0 + ts.second() as f64 / 3600.0;
    let gamma = 2.0 * PI / 365.0 * (day - 1.0 + (hour - 12.0) / 24.0);
    let eqtime = 229.18
        * (0.000075 + 0.001868 * gamma.cos()
            - 0.032077 * gamma.sin()
            - 0.014615 * (2.0 * gamma).cos()
            - 0.040849 * (2.0 * gamma).sin());
    let decl = 0.006918 - 0.399912 * gamma.cos() + 0.070257 * gamma.sin()
        - 0.006758 * (2.0 * gamma).cos()
        + 0.000907 * (2.0 * gamma).sin()
        - 0.002697 * (3.0 * gamma).cos()
        + 0.00148 * (3.0 * gamma).sin();
    let offset = eqtime + 4.0 * location.longitude - 60.0 * location.utc_offset_hours;
    let true_solar_minutes = hour * 60.0 + offset;
    let hour_angle = (true_solar_minutes / 4.0 - 180.0).to_radians();

    let lat = location.latitude.to_radians();
    let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    let altitude = sin_alt.clamp(-1.0, 1.0).asin();
    let azimuth = hour_angle
        .sin()
        .atan2(hour_angle.cos() * lat.sin() - decl.tan() * lat.cos())
        + PI;
    SunPosition { altitude, azimuth }
}

/// Cosine of the angle between the sun and the outward normal of a surface
/// with the given tilt and azimuth (degrees). Clamped to `[0, 1]`.
pub fn incidence_cosine(sun: &SunPosition, tilt_deg: f64, azimuth_deg: f64) -> f64 {
    if !sun.is_up() {
        return 0.0;
    }
    let (tilt, az) = (tilt_deg.to_radians(), azimuth_deg.to_radians());
    let sun_vec = [
        sun.azimuth.sin() * sun.altitude.cos(),
        sun.azimuth.cos() * sun.altitude.cos(),
        sun.altitude.sin(),
    ];
    let normal = [az.sin() * tilt.sin(), az.cos() * tilt.sin(), tilt.cos()];
    let c: f64 = sun_vec.iter().zip(normal).map(|(a, b)| a * b).sum();
    c.clamp(0.0, 1.0)
}

/// Per-surface geometry factors for one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarGeometry {
    pub cos_incidence: f64,
    pub sunlit_fraction: f64,
    pub f_ss: f64,
    pub f_sg: f64,
}

impl SolarGeometry {
    pub fn for_surface(surface: &Surface, location: &Location, ts: NaiveDateTime) -> Self {
        let sun = sun_position(location, ts);
        let (f_ss, f_sg) = surface.sky_ground_factors();
        SolarGeometry {
            cos_incidence: incidence_cosine(&sun, surface.tilt, surface.azimuth),
            sunlit_fraction: surface.sunlit_fraction.at_hour(ts.hour()),
            f_ss,
            f_sg,
        }
    }

    /// Total irradiance reaching the plane: beam, sky and ground components.
    pub fn incident(&self, w: &WeatherRecord) -> f64 {
        w.i_beam * self.sunlit_fraction * self.cos_incidence
            + w.i_sky * self.f_ss
            + w.i_ground * self.f_sg
    }
}

/// Solar heat absorbed on the outer face of an exterior surface:
/// `α·(I_b·(A_s/A)·cosθ + I_s·F_ss + I_g·F_sg)`.
pub fn exterior_solar_gain(
    surface: &Surface,
    weather: &WeatherRecord,
    geometry: &SolarGeometry,
) -> Result<f64> {
    if surface.kind != SurfaceKind::Exterior {
        return Err(Error::invalid(format!(
            "surface `{}` is {}; outer solar gain applies to exterior surfaces only",
            surface.id,
            surface.kind.as_str()
        )));
    }
    Ok(surface.absorptance * geometry.incident(weather))
}

/// Heat transmitted through a zone's windows, `Σ SHGC·A·E_t`.
///
/// `irradiance` holds the incident total irradiance of each window, in the
/// order the windows appear across the zone's surfaces.
pub fn window_solar_gain(zone: &Zone, irradiance: &[f64]) -> Result<f64> {
    let windows: Vec<_> = zone.surfaces.iter().flat_map(|s| &s.windows).collect();
    if windows.len() != irradiance.len() {
        return Err(Error::Dimension(format!(
            "zone `{}` has {} windows, got {} irradiance values",
            zone.id,
            windows.len(),
            irradiance.len()
        )));
    }
    if let Some(e) = irradiance.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::invalid(format!(
            "window irradiance must be >= 0, got {e}"
        )));
    }
    Ok(windows
        .iter()
        .zip(irradiance)
        .map(|(w, e)| w.shgc * w.area * e)
        .sum())
}
