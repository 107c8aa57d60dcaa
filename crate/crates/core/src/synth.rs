//! Generated buildings and input series for tests, benchmarks and demos.

use chrono::{Datelike, NaiveDateTime, TimeDelta, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::building::{
    BuildingModel, Construction, Location, Material, Surface, SurfaceKind, Window, Zone,
};
use crate::error::Result;
use crate::inputs::solar::sun_position;
use crate::inputs::{
    monthly_ground_temperature, window_solar_gain, DayType, HvacRecord, LoadProfiles,
    SolarGeometry, WeatherRecord,
};

fn material(name: &str, thickness: f64, conductivity: f64, density: f64, specific_heat: f64) -> Material {
    Material {
        name: name.into(),
        thickness,
        conductivity,
        density,
        specific_heat,
    }
}

fn constructions() -> (Construction, Construction, Construction, Construction) {
    let brick = material("brick", 0.1, 0.72, 1920.0, 840.0);
    let insulation = material("mineral_wool", 0.08, 0.04, 30.0, 840.0);
    let block = material("concrete_block", 0.15, 1.1, 1400.0, 880.0);
    let gypsum = material("gypsum", 0.016, 0.16, 800.0, 1090.0);
    let slab = material("concrete_slab", 0.15, 1.4, 2300.0, 880.0);
    let deck = material("roof_deck", 0.1, 0.9, 1800.0, 900.0);
    let ext = Construction {
        name: "exterior_wall".into(),
        layers: vec![brick, insulation.clone(), block, gypsum.clone()],
    };
    let part = Construction {
        name: "partition".into(),
        layers: vec![gypsum.clone(), material("stud_cavity", 0.09, 0.5, 100.0, 1000.0), gypsum],
    };
    let roof = Construction {
        name: "roof".into(),
        layers: vec![deck, insulation],
    };
    let floor = Construction {
        name: "ground_slab".into(),
        layers: vec![slab],
    };
    (ext, part, roof, floor)
}

/// Single-storey grid of `rows × cols` square zones. Walls on the perimeter
/// are exterior with a window, walls between neighbours are interior, every
/// zone has a roof and a slab on grade. Every zone has six surfaces, so
/// `N = 20·rows·cols`. `seed` varies zone sizes by up to ±20 %.
pub fn campus(rows: usize, cols: usize, seed: u64) -> BuildingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ext, part, roof, floor) = constructions();
    let id = |r: usize, c: usize| format!("Z{r}_{c}");
    let mut zones = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let side = 10.0 * rng.random_range(0.8..1.2);
            let height = 3.0;
            let floor_area = side * side;
            let wall_area = side * height;
            let zid = id(r, c);
            let mut surfaces = Vec::new();
            // (name, neighbour, azimuth)
            let sides = [
                ("N", (r > 0).then(|| id(r - 1, c)), 0.0),
                ("E", (c + 1 < cols).then(|| id(r, c + 1)), 90.0),
                ("S", (r + 1 < rows).then(|| id(r + 1, c)), 180.0),
                ("W", (c > 0).then(|| id(r, c - 1)), 270.0),
            ];
            for (name, neighbour, azimuth) in sides {
                let sid = format!("{zid}-{name}");
                let s = match neighbour {
                    Some(n) => {
                        let mut s = Surface::new(sid, SurfaceKind::Interior, wall_area, part.clone());
                        s.adjacent_zone = Some(n);
                        s
                    }
                    None => {
                        let mut s = Surface::new(sid.clone(), SurfaceKind::Exterior, wall_area, ext.clone());
                        s.azimuth = azimuth;
                        s.windows.push(Window {
                            id: format!("{sid}-win"),
                            area: 0.25 * wall_area,
                            resistance: 1.0 / (2.8 * 0.25 * wall_area),
                            shgc: 0.4,
                        });
                        s
                    }
                };
                surfaces.push(s);
            }
            let mut top = Surface::new(format!("{zid}-roof"), SurfaceKind::Exterior, floor_area, roof.clone());
            top.tilt = 0.0;
            top.absorptance = 0.7;
            surfaces.push(top);
            let mut slab = Surface::new(format!("{zid}-floor"), SurfaceKind::Underground, floor_area, floor.clone());
            slab.tilt = 180.0;
            slab.r_eff = Some(1.5 / floor_area);
            surfaces.push(slab);
            let air_mass = 1.2 * floor_area * height;
            zones.push(Zone {
                id: zid,
                air_mass,
                setpoint: 21.0,
                design_mass_flow: 2.0 * air_mass / 3600.0,
                surfaces,
                line: None,
            });
        }
    }
    let mut model = BuildingModel::new(zones);
    model.location = Location {
        latitude: 43.04,
        longitude: -76.14,
        utc_offset_hours: -5.0,
    };
    model
}

/// Four zones on a 2×2 plan with multi-segment walls: `A` and `B` share two
/// partitions, as do `B` and `C`; `C-D`, `A-D` and `B-D` share one each.
/// Surface counts are `{10, 14, 6, 10}`, so `N = 128`.
pub fn four_zone() -> BuildingModel {
    let (ext, part, roof, floor) = constructions();
    let names = ["A", "B", "C", "D"];
    let links = [(0, 1), (0, 1), (1, 2), (1, 2), (2, 3), (0, 3), (1, 3)];
    let exterior_walls = [5, 7, 1, 5];
    let floor_areas = [120.0, 180.0, 60.0, 110.0];
    let mut zones: Vec<Zone> = names
        .iter()
        .zip(floor_areas)
        .map(|(id, area)| {
            let air_mass = 1.2 * area * 3.0;
            Zone {
                id: (*id).into(),
                air_mass,
                setpoint: 21.0,
                design_mass_flow: 2.0 * air_mass / 3600.0,
                surfaces: Vec::new(),
                line: None,
            }
        })
        .collect();
    for (k, zone) in zones.iter_mut().enumerate() {
        let n = exterior_walls[k];
        for j in 0..n {
            let azimuth = 360.0 * j as f64 / n as f64;
            let sid = format!("{}-ext{j}", zone.id);
            let mut s = Surface::new(sid.clone(), SurfaceKind::Exterior, 18.0, ext.clone());
            s.azimuth = azimuth;
            if j % 2 == 0 {
                s.windows.push(Window {
                    id: format!("{sid}-win"),
                    area: 4.0,
                    resistance: 1.0 / (2.8 * 4.0),
                    shgc: 0.4,
                });
            }
            zone.surfaces.push(s);
        }
    }
    for (p, &(a, b)) in links.iter().enumerate() {
        for (from, to) in [(a, b), (b, a)] {
            let mut s = Surface::new(
                format!("{}-p{p}", names[from]),
                SurfaceKind::Interior,
                15.0,
                part.clone(),
            );
            s.adjacent_zone = Some(names[to].into());
            zones[from].surfaces.push(s);
        }
    }
    for (zone, area) in zones.iter_mut().zip(floor_areas) {
        let mut top = Surface::new(format!("{}-roof", zone.id), SurfaceKind::Exterior, area, roof.clone());
        top.tilt = 0.0;
        top.absorptance = 0.7;
        zone.surfaces.push(top);
        let mut slab = Surface::new(format!("{}-floor", zone.id), SurfaceKind::Underground, area, floor.clone());
        slab.tilt = 180.0;
        slab.r_eff = Some(1.5 / area);
        zone.surfaces.push(slab);
    }
    let mut model = BuildingModel::new(zones);
    model.location = Location {
        latitude: 43.04,
        longitude: -76.14,
        utc_offset_hours: -5.0,
    };
    model
}

/// A valid building with random zone count, surface mix and properties.
pub fn random_building(rng: &mut impl Rng, max_zones: usize, max_surfaces: usize) -> BuildingModel {
    let (ext, part, roof, floor) = constructions();
    let zone_count = rng.random_range(1..=max_zones.max(1));
    let mut zones: Vec<Zone> = (0..zone_count)
        .map(|k| Zone {
            id: format!("z{k}"),
            air_mass: rng.random_range(50.0..2000.0),
            setpoint: rng.random_range(18.0..24.0),
            design_mass_flow: rng.random_range(0.0..1.0),
            surfaces: Vec::new(),
            line: None,
        })
        .collect();
    for (k, zone) in zones.iter_mut().enumerate() {
        let own = rng.random_range(1..=(max_surfaces / 2).max(1));
        for j in 0..own {
            let area = rng.random_range(2.0..60.0);
            let s = match rng.random_range(0..3) {
                0 => {
                    let mut s = Surface::new(format!("z{k}s{j}"), SurfaceKind::Exterior, area, ext.clone());
                    s.azimuth = rng.random_range(0.0..360.0);
                    if rng.random_bool(0.5) {
                        s.windows.push(Window {
                            id: format!("z{k}s{j}w"),
                            area: area * rng.random_range(0.05..0.5),
                            resistance: rng.random_range(0.01..0.5),
                            shgc: rng.random_range(0.2..0.8),
                        });
                    }
                    s
                }
                1 => {
                    let mut s = Surface::new(format!("z{k}s{j}"), SurfaceKind::Exterior, area, roof.clone());
                    s.tilt = 0.0;
                    s
                }
                _ => {
                    let mut s = Surface::new(format!("z{k}s{j}"), SurfaceKind::Underground, area, floor.clone());
                    s.r_eff = Some(rng.random_range(1.5..4.0) / area);
                    s
                }
            };
            zone.surfaces.push(s);
        }
    }
    if zone_count > 1 {
        let pairs = rng.random_range(0..=zone_count * 2);
        for p in 0..pairs {
            let a = rng.random_range(0..zone_count);
            let b = rng.random_range(0..zone_count);
            if a == b
                || zones[a].surfaces.len() >= max_surfaces
                || zones[b].surfaces.len() >= max_surfaces
            {
                continue;
            }
            let area = rng.random_range(2.0..40.0);
            for (from, to) in [(a, b), (b, a)] {
                let mut s = Surface::new(format!("p{p}-{from}"), SurfaceKind::Interior, area, part.clone());
                s.adjacent_zone = Some(format!("z{to}"));
                zones[from].surfaces.push(s);
            }
        }
    }
    BuildingModel::new(zones)
}

/// Monthly mean ground temperatures for a cold-temperate site, °C.
pub const GROUND_MONTHLY: [f64; 12] = [3.0, 2.0, 3.0, 6.0, 10.0, 14.0, 17.0, 18.0, 16.0, 12.0, 8.0, 5.0];

/// Hourly weather: seasonal and daily temperature cycles with AR(1)
/// weather noise, and clear-sky-shaped irradiance scaled by a random daily
/// clearness.
pub fn synthetic_weather(
    location: &Location,
    start: NaiveDateTime,
    hours: usize,
    seed: u64,
) -> Vec<WeatherRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shock = Normal::new(0.0, 0.6).expect("valid normal");
    let mut anomaly = 0.0;
    let mut clearness = 0.7;
    let mut out = Vec::with_capacity(hours);
    for h in 0..hours {
        let ts = start + TimeDelta::hours(h as i64);
        if ts.hour() == 0 || h == 0 {
            clearness = rng.random_range(0.2..1.0);
        }
        anomaly = 0.95 * anomaly + shock.sample(&mut rng);
        let doy = ts.ordinal() as f64;
        let hour = ts.hour() as f64;
        let seasonal = 9.0 - 13.0 * (2.0 * std::f64::consts::PI * (doy - 20.0) / 365.0).cos();
        let daily = -5.0 * (2.0 * std::f64::consts::PI * (hour - 3.0) / 24.0).cos();
        let sun = sun_position(location, ts);
        let s = sun.altitude.sin().max(0.0);
        let i_beam = if s > 0.0 { 850.0 * clearness * (1.0 - (-4.0 * s).exp()) } else { 0.0 };
        let i_sky = 140.0 * (1.2 - clearness) * s;
        let i_ground = 0.2 * (i_beam * s + i_sky);
        out.push(WeatherRecord {
            timestamp: ts,
            t_amb: seasonal + daily + anomaly,
            t_ground: monthly_ground_temperature(&GROUND_MONTHLY, ts),
            i_beam,
            i_sky,
            i_ground,
        });
    }
    out
}

/// Two-level supply flow (design flow during weekday operating hours, 30 %
/// otherwise) and an outdoor-reset supply temperature.
pub fn synthetic_hvac(model: &BuildingModel, weather: &[WeatherRecord]) -> Vec<HvacRecord> {
    weather
        .iter()
        .map(|w| {
            let occupied = DayType::of(&w.timestamp) == DayType::Weekday
                && (6..20).contains(&w.timestamp.hour());
            let level = if occupied { 1.0 } else { 0.3 };
            HvacRecord {
                timestamp: w.timestamp,
                mdot: model.zones.iter().map(|z| level * z.design_mass_flow).collect(),
                supply_temp: model
                    .zones
                    .iter()
                    .map(|z| (z.setpoint + 0.6 * (z.setpoint - w.t_amb)).clamp(13.0, 35.0))
                    .collect(),
            }
        })
        .collect()
}

/// Occupancy-shaped non-envelope loads scaled by floor area, and hourly
/// mean window gains spread over each zone's inner faces by area.
pub fn synthetic_loads(model: &BuildingModel, weather: &[WeatherRecord]) -> Result<LoadProfiles> {
    let mut p = LoadProfiles::zeros(model);
    for (k, zone) in model.zones.iter().enumerate() {
        let floor_area = zone.air_mass / (1.2 * 3.0);
        for h in 0..24 {
            let occupied = (8..18).contains(&h);
            let lunch = h == 12;
            let weekday = if occupied {
                if lunch { 10.0 } else { 15.0 }
            } else {
                2.0
            };
            p.t_int[k][0][h] = weekday * floor_area;
            p.t_int[k][1][h] = 2.0 * floor_area;
        }
        let mut sums = [0.0; 24];
        let mut counts = [0usize; 24];
        for w in weather {
            let irradiance: Vec<f64> = zone
                .surfaces
                .iter()
                .flat_map(|s| {
                    let g = SolarGeometry::for_surface(s, &model.location, w.timestamp);
                    let e = g.incident(w);
                    s.windows.iter().map(move |_| e)
                })
                .collect();
            let h = w.timestamp.hour() as usize;
            sums[h] += window_solar_gain(zone, &irradiance)?;
            counts[h] += 1;
        }
        let total_area: f64 = zone.surfaces.iter().map(|s| s.gross_area - s.window_area()).sum();
        for (j, s) in zone.surfaces.iter().enumerate() {
            let share = (s.gross_area - s.window_area()) / total_area;
            for h in 0..24 {
                if counts[h] > 0 {
                    p.t_q[k][j][h] = share * sums[h] / counts[h] as f64;
                }
            }
        }
    }
    Ok(p)
}

/// Start of the synthetic year used by the bundled data.
pub fn year_start() -> NaiveDateTime {
    chrono::NaiveDate::from_ymd_opt(2021, 1, 1)
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::validate_building;

    #[test]
    fn campus_sizes() {
        let v = validate_building(campus(3, 4, 1)).unwrap();
        assert_eq!(v.zones.len(), 12);
        assert!(v.zones.iter().all(|z| z.surfaces.len() == 6));
        let interior = v
            .zones
            .iter()
            .flat_map(|z| &z.surfaces)
            .filter(|s| s.kind == SurfaceKind::Interior)
            .count();
        // 3·3 horizontal + 2·4 vertical shared walls, two copies each.
        assert_eq!(interior, 2 * (3 * 3 + 2 * 4));
    }

    #[test]
    fn random_buildings_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            validate_building(random_building(&mut rng, 6, 8)).unwrap();
        }
    }

    #[test]
    fn weather_is_deterministic_and_plausible() {
        let loc = Location::default();
        let a = synthetic_weather(&loc, year_start(), 24 * 40, 3);
        assert_eq!(a, synthetic_weather(&loc, year_start(), 24 * 40, 3));
        assert!(a.iter().all(|w| w.i_beam >= 0.0 && w.i_sky >= 0.0 && w.i_ground >= 0.0));
        assert!(a.iter().any(|w| w.i_beam > 0.0));
        let mean: f64 = a.iter().map(|w| w.t_amb).sum::<f64>() / a.len() as f64;
        assert!((-15.0..5.0).contains(&mean), "{mean}");
    }

    #[test]
    fn loads_follow_occupancy() {
        let m = campus(1, 2, 0);
        let w = synthetic_weather(&m.location, year_start(), 24 * 7, 1);
        let p = synthetic_loads(&m, &w).unwrap();
        assert!(p.t_int[0][0][10] > p.t_int[0][0][3]);
        assert_eq!(p.t_int[0][1][10], p.t_int[0][1][3]);
        let noon: f64 = p.t_q[0].iter().map(|s| s[12]).sum();
        let midnight: f64 = p.t_q[0].iter().map(|s| s[0]).sum();
        assert!(noon > 0.0);
        assert_eq!(midnight, 0.0);
    }
}
