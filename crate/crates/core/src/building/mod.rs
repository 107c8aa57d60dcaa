//! Declarative multi-zone building description and derived RC parameters.
//!
//! A building is a list of thermal zones, each owning the surfaces that bound
//! it. Every surface is reduced to a two-node wall (outer and inner face
//! temperatures) with one conduction resistance `R` and a capacitance `C` on
//! each node. Shared walls between zones are described once per zone: each
//! zone keeps its own copy and sees the neighbour's air temperature on the
//! far side.

mod loader;

pub use loader::{load_building, parse_building, to_toml};

use std::collections::{BTreeSet, HashMap};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation, Violations};

/// Default inside film conductance, W/(m²·°C).
pub const DEFAULT_H_INSIDE: f64 = 8.29;
/// Default outside film conductance for surfaces exposed to weather, W/(m²·°C).
pub const DEFAULT_H_OUTSIDE: f64 = 22.7;
/// Specific heat of air at design conditions, J/(kg·°C).
pub const DEFAULT_CPA: f64 = 1005.0;
/// Thickness of the soil layer added to underground constructions, m.
pub const SOIL_LAYER_THICKNESS: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// m
    pub thickness: f64,
    /// W/(m·°C)
    pub conductivity: f64,
    /// kg/m³
    pub density: f64,
    /// J/(kg·°C)
    pub specific_heat: f64,
}

impl Material {
    /// Default soil layer used for underground surfaces.
    pub fn default_soil() -> Self {
        Material {
            name: "soil".into(),
            thickness: SOIL_LAYER_THICKNESS,
            conductivity: 1.0,
            density: 1500.0,
            specific_heat: 1500.0,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.thickness > 0.0) || !self.thickness.is_finite() {
            return Err(format!("material `{}`: thickness must be > 0", self.name));
        }
        if !(self.conductivity > 0.0) || !self.conductivity.is_finite() {
            return Err(format!("material `{}`: conductivity must be > 0", self.name));
        }
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return Err(format!("material `{}`: density must be >= 0", self.name));
        }
        if !(self.specific_heat >= 0.0) || !self.specific_heat.is_finite() {
            return Err(format!(
                "material `{}`: specific heat must be >= 0",
                self.name
            ));
        }
        Ok(())
    }
}

/// Ordered material layers, outside to inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub name: String,
    pub layers: Vec<Material>,
}

impl Construction {
    /// The same construction with `extra` appended on the outer side.
    pub fn with_outer_layer(&self, extra: &Material) -> Construction {
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        layers.push(extra.clone());
        layers.extend(self.layers.iter().cloned());
        Construction {
            name: format!("{}+{}", extra.name, self.name),
            layers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub id: String,
    /// m²
    pub area: f64,
    /// °C/W
    pub resistance: f64,
    pub shgc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Exterior,
    Interior,
    Underground,
}

impl SurfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceKind::Exterior => "exterior",
            SurfaceKind::Interior => "interior",
            SurfaceKind::Underground => "underground",
        }
    }
}

/// Fraction of a surface's area in direct sun.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SunlitFraction {
    Constant(f64),
    /// One value per hour of day (24 entries).
    Hourly(Vec<f64>),
}

impl Default for SunlitFraction {
    fn default() -> Self {
        SunlitFraction::Constant(1.0)
    }
}

impl SunlitFraction {
    pub fn at_hour(&self, hour: u32) -> f64 {
        match self {
            SunlitFraction::Constant(v) => *v,
            SunlitFraction::Hourly(values) => values[hour as usize % values.len()],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            SunlitFraction::Constant(v) => std::slice::from_ref(v),
            SunlitFraction::Hourly(values) => values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub id: String,
    pub kind: SurfaceKind,
    /// m²
    pub gross_area: f64,
    pub construction: Construction,
    pub windows: Vec<Window>,
    /// Zone on the far side of an interior surface.
    pub adjacent_zone: Option<String>,
    /// W/(m²·°C)
    pub h_i: f64,
    /// Film conductance on the outer face. Unused for underground surfaces.
    pub h_o: f64,
    /// Published effective resistance of an underground surface, °C/W.
    pub r_eff: Option<f64>,
    pub absorptance: f64,
    /// Degrees from horizontal (0 = roof facing up, 90 = wall).
    pub tilt: f64,
    /// Degrees clockwise from north.
    pub azimuth: f64,
    /// Sky / ground view factors; derived from tilt when absent.
    pub angle_factors: Option<(f64, f64)>,
    pub sunlit_fraction: SunlitFraction,
    /// Source line, when loaded from a file.
    pub line: Option<usize>,
}

impl Surface {
    /// A bare surface with defaults for every optional property.
    pub fn new(
        id: impl Into<String>,
        kind: SurfaceKind,
        gross_area: f64,
        construction: Construction,
    ) -> Self {
        let h_o = match kind {
            SurfaceKind::Interior => DEFAULT_H_INSIDE,
            _ => DEFAULT_H_OUTSIDE,
        };
        Surface {
            id: id.into(),
            kind,
            gross_area,
            construction,
            windows: Vec::new(),
            adjacent_zone: None,
            h_i: DEFAULT_H_INSIDE,
            h_o,
            r_eff: None,
            absorptance: 0.6,
            tilt: 90.0,
            azimuth: 180.0,
            angle_factors: None,
            sunlit_fraction: SunlitFraction::default(),
            line: None,
        }
    }

    /// Sky and ground angle factors `(F_ss, F_sg)`.
    pub fn sky_ground_factors(&self) -> (f64, f64) {
        self.angle_factors.unwrap_or_else(|| {
            let c = self.tilt.to_radians().cos();
            ((1.0 + c) / 2.0, (1.0 - c) / 2.0)
        })
    }

    pub fn window_area(&self) -> f64 {
        self.windows.iter().map(|w| w.area).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    /// kg
    pub air_mass: f64,
    /// °C, used to initialise estimates.
    pub setpoint: f64,
    /// Supply air mass flow used when building the clustering matrix, kg/s.
    pub design_mass_flow: f64,
    pub surfaces: Vec<Surface>,
    pub line: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub latitude: f64,
    pub longitude: f64,
    /// Offset of the data timestamps from UTC.
    pub utc_offset_hours: f64,
}

impl Default for Location {
    fn default() -> Self {
        Location {
            latitude: 43.0,
            longitude: -76.1,
            utc_offset_hours: -5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub zones: Vec<Zone>,
    /// J/(kg·°C)
    pub cpa: f64,
    pub location: Location,
    pub soil: Material,
}

impl BuildingModel {
    pub fn new(zones: Vec<Zone>) -> Self {
        BuildingModel {
            zones,
            cpa: DEFAULT_CPA,
            location: Location::default(),
            soil: Material::default_soil(),
        }
    }
}

/// Net opaque area: gross area minus the windows it carries.
pub fn net_area(surface: &Surface) -> Result<f64> {
    let windows = surface.window_area();
    if windows >= surface.gross_area {
        return Err(Error::invalid(format!(
            "surface `{}`: window area {windows} m² is not below gross area {} m²",
            surface.id, surface.gross_area
        )));
    }
    Ok(surface.gross_area - windows)
}

/// Steady-state conduction resistance `Σ l/(k·A)`, °C/W.
pub fn thermal_resistance(construction: &Construction, net_area: f64) -> Result<f64> {
    if !(net_area > 0.0) {
        return Err(Error::invalid(format!(
            "construction `{}`: net area must be > 0, got {net_area}",
            construction.name
        )));
    }
    if construction.layers.is_empty() {
        return Err(Error::invalid(format!(
            "construction `{}` has no layers",
            construction.name
        )));
    }
    let mut total = 0.0;
    for layer in &construction.layers {
        layer.check().map_err(Error::InvalidInput)?;
        total += layer.thickness / (layer.conductivity * net_area);
    }
    Ok(total)
}

/// Capacitance lumped on each of the two surface nodes, J/°C.
///
/// Half the construction's heat capacity goes to each face.
pub fn thermal_capacitance(construction: &Construction, net_area: f64) -> f64 {
    construction
        .layers
        .iter()
        .map(|g| g.density * g.specific_heat * g.thickness * net_area / 2.0)
        .sum()
}

/// Massless series resistance that lifts an underground surface's total
/// resistance to its published effective value.
pub fn fictitious_resistance(r_eff: f64, r: f64) -> Result<f64> {
    if !(r_eff > r) {
        return Err(Error::invalid(format!(
            "effective resistance {r_eff} must exceed computed resistance {r}"
        )));
    }
    Ok(r_eff - r)
}

/// Derived RC parameters for one surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceParams {
    pub net_area: f64,
    pub resistance: f64,
    /// Per-node capacitance.
    pub capacitance: f64,
    pub fictitious_resistance: Option<f64>,
}

/// A building whose invariants have been checked, with derived parameters
/// cached alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedBuilding {
    model: BuildingModel,
    params: Vec<Vec<SurfaceParams>>,
    zone_index: HashMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl Deref for ValidatedBuilding {
    type Target = BuildingModel;

    fn deref(&self) -> &BuildingModel {
        &self.model
    }
}

impl ValidatedBuilding {
    pub fn model(&self) -> &BuildingModel {
        &self.model
    }

    pub fn into_model(self) -> BuildingModel {
        self.model
    }

    pub fn params(&self, zone: usize, surface: usize) -> &SurfaceParams {
        &self.params[zone][surface]
    }

    pub fn zone_params(&self, zone: usize) -> &[SurfaceParams] {
        &self.params[zone]
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zone_index.get(id).copied()
    }

    /// Index of the zone across an interior surface.
    pub fn adjacent_index(&self, zone: usize, surface: usize) -> Option<usize> {
        self.model.zones[zone].surfaces[surface]
            .adjacent_zone
            .as_deref()
            .and_then(|id| self.zone_index(id))
    }

    /// Zones coupled to `zone` through interior surfaces.
    pub fn neighbours(&self, zone: usize) -> &BTreeSet<usize> {
        &self.adjacency[zone]
    }

    pub fn surface_count(&self) -> usize {
        self.model.zones.iter().map(|z| z.surfaces.len()).sum()
    }
}

fn zone_path(zone: &Zone) -> String {
    format!("zone[{}]", zone.id)
}

fn surface_path(zone: &Zone, surface: &Surface) -> String {
    format!("zone[{}].surface[{}]", zone.id, surface.id)
}

fn check_surface(
    model: &BuildingModel,
    zone: &Zone,
    surface: &Surface,
    zone_ids: &HashMap<String, usize>,
    out: &mut Vec<Violation>,
) -> Option<SurfaceParams> {
    let path = surface_path(zone, surface);
    let before = out.len();
    let mut push = |msg: String| out.push(Violation::new(path.clone(), msg).at_line(surface.line));

    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(surface.gross_area) {
        push(format!("gross area must be > 0, got {}", surface.gross_area));
    }
    if !positive(surface.h_i) {
        push(format!("h_i must be > 0, got {}", surface.h_i));
    }
    if surface.kind != SurfaceKind::Underground && !positive(surface.h_o) {
        push(format!("h_o must be > 0, got {}", surface.h_o));
    }
    if !(0.0..=1.0).contains(&surface.absorptance) {
        push(format!(
            "absorptance must lie in [0, 1], got {}",
            surface.absorptance
        ));
    }
    if let Some((fss, fsg)) = surface.angle_factors {
        if fss < 0.0 || fsg < 0.0 || ((fss + fsg) - 1.0).abs() > 1e-9 {
            push(format!(
                "angle factors must be nonnegative and sum to 1, got ({fss}, {fsg})"
            ));
        }
    }
    if let SunlitFraction::Hourly(v) = &surface.sunlit_fraction {
        if v.len() != 24 {
            push(format!(
                "hourly sunlit fraction needs 24 values, got {}",
                v.len()
            ));
        }
    }
    if surface
        .sunlit_fraction
        .values()
        .iter()
        .any(|f| !(0.0..=1.0).contains(f))
    {
        push("sunlit fraction must lie in [0, 1]".into());
    }
    if surface.construction.layers.is_empty() {
        push(format!(
            "construction `{}` has no layers",
            surface.construction.name
        ));
    }
    for layer in &surface.construction.layers {
        if let Err(msg) = layer.check() {
            push(msg);
        }
    }
    for w in &surface.windows {
        if !positive(w.area) {
            push(format!("window `{}`: area must be > 0", w.id));
        }
        if !positive(w.resistance) {
            push(format!("window `{}`: resistance must be > 0", w.id));
        }
        if !(0.0..=1.0).contains(&w.shgc) {
            push(format!("window `{}`: SHGC must lie in [0, 1]", w.id));
        }
    }
    if !surface.windows.is_empty() && surface.kind != SurfaceKind::Exterior {
        push("windows are only supported on exterior surfaces".into());
    }
    match surface.kind {
        SurfaceKind::Interior => match surface.adjacent_zone.as_deref() {
            None => push("interior surface needs an adjacent zone".into()),
            Some(adj) if !zone_ids.contains_key(adj) => {
                push(format!("adjacent zone `{adj}` does not exist"))
            }
            Some(adj) if adj == zone.id => push("interior surface cannot face its own zone".into()),
            Some(_) => {}
        },
        _ => {
            if surface.adjacent_zone.is_some() {
                push(format!(
                    "{} surface cannot name an adjacent zone",
                    surface.kind.as_str()
                ));
            }
        }
    }
    if surface.kind == SurfaceKind::Underground && surface.r_eff.is_none() {
        push("underground surface needs an effective resistance r_eff".into());
    }
    if surface.kind != SurfaceKind::Underground && surface.r_eff.is_some() {
        push("r_eff is only meaningful for underground surfaces".into());
    }
    let net = net_area(surface);
    if let Err(e) = &net {
        push(e.to_string());
    }
    if out.len() > before {
        return None;
    }
    let net = net.expect("checked above");
    let construction = match surface.kind {
        SurfaceKind::Underground => surface.construction.with_outer_layer(&model.soil),
        _ => surface.construction.clone(),
    };
    let resistance = match thermal_resistance(&construction, net) {
        Ok(r) => r,
        Err(e) => {
            out.push(Violation::new(path, e.to_string()).at_line(surface.line));
            return None;
        }
    };
    let capacitance = thermal_capacitance(&construction, net);
    if !(capacitance > 0.0) {
        out.push(
            Violation::new(
                path,
                "construction has zero heat capacity; both surface nodes would be massless",
            )
            .at_line(surface.line),
        );
        return None;
    }
    let fictitious = match surface.r_eff {
        Some(r_eff) if surface.kind == SurfaceKind::Underground => {
            match fictitious_resistance(r_eff, resistance) {
                Ok(r) => Some(r),
                Err(e) => {
                    out.push(Violation::new(path, e.to_string()).at_line(surface.line));
                    return None;
                }
            }
        }
        _ => None,
    };
    Some(SurfaceParams {
        net_area: net,
        resistance,
        capacitance,
        fictitious_resistance: fictitious,
    })
}

/// Check every invariant of `model` and cache derived parameters.
///
/// All violations are collected before returning, each naming the entity
/// it concerns.
pub fn validate_building(model: BuildingModel) -> Result<ValidatedBuilding, Violations> {
    let mut out = Vec::new();

    if !(model.cpa > 0.0) {
        out.push(Violation::new("building", "cpa must be > 0"));
    }
    if let Err(msg) = model.soil.check() {
        out.push(Violation::new("soil", msg));
    }
    if model.zones.is_empty() {
        out.push(Violation::new("building", "at least one zone is required"));
    }

    let mut zone_index = HashMap::new();
    for (k, zone) in model.zones.iter().enumerate() {
        if zone_index.insert(zone.id.clone(), k).is_some() {
            out.push(Violation::new(zone_path(zone), "duplicate zone id").at_line(zone.line));
        }
    }

    let mut params = Vec::with_capacity(model.zones.len());
    let mut adjacency = vec![BTreeSet::new(); model.zones.len()];
    for (k, zone) in model.zones.iter().enumerate() {
        let path = zone_path(zone);
        if !(zone.air_mass > 0.0) || !zone.air_mass.is_finite() {
            out.push(Violation::new(&path, "air mass must be > 0").at_line(zone.line));
        }
        if !(zone.design_mass_flow >= 0.0) {
            out.push(Violation::new(&path, "design mass flow must be >= 0").at_line(zone.line));
        }
        if zone.surfaces.is_empty() {
            out.push(Violation::new(&path, "zone has no surfaces").at_line(zone.line));
        }
        let mut seen = BTreeSet::new();
        let mut zp = Vec::with_capacity(zone.surfaces.len());
        for surface in &zone.surfaces {
            if !seen.insert(surface.id.as_str()) {
                out.push(
                    Violation::new(surface_path(zone, surface), "duplicate surface id")
                        .at_line(surface.line),
                );
            }
            if let Some(p) = check_surface(&model, zone, surface, &zone_index, &mut out) {
                zp.push(p);
            }
            if let Some(&q) = surface.adjacent_zone.as_ref().and_then(|a| zone_index.get(a)) {
                if q != k {
                    adjacency[k].insert(q);
                }
            }
        }
        params.push(zp);
    }

    // Each zone describes its own copy of a shared wall, so a coupling seen
    // from one side must also be described from the other.
    for (k, zone) in model.zones.iter().enumerate() {
        for &q in &adjacency[k] {
            if !adjacency[q].contains(&k) {
                out.push(
                    Violation::new(
                        zone_path(zone),
                        format!(
                            "faces zone `{}` but `{}` has no interior surface facing back",
                            model.zones[q].id, model.zones[q].id
                        ),
                    )
                    .at_line(zone.line),
                );
            }
        }
    }

    if !out.is_empty() {
        return Err(Violations(out));
    }
    Ok(ValidatedBuilding {
        model,
        params,
        zone_index,
        adjacency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn layer(l: f64, k: f64, rho: f64, cp: f64) -> Material {
        Material {
            name: "m".into(),
            thickness: l,
            conductivity: k,
            density: rho,
            specific_heat: cp,
        }
    }

    fn cons(layers: Vec<Material>) -> Construction {
        Construction {
            name: "c".into(),
            layers,
        }
    }

    fn window(area: f64) -> Window {
        Window {
            id: format!("w{area}"),
            area,
            resistance: 0.5,
            shgc: 0.4,
        }
    }

    fn wall() -> Construction {
        cons(vec![layer(0.2, 0.9, 2000.0, 900.0)])
    }

    #[test]
    fn net_area_subtracts_windows() {
        let mut s = Surface::new("s", SurfaceKind::Exterior, 10.0, wall());
        assert_eq!(net_area(&s).unwrap(), 10.0);
        s.windows = vec![window(1.5), window(2.5)];
        assert_eq!(net_area(&s).unwrap(), 6.0);
        s.gross_area = 3.0;
        s.windows = vec![window(2.0), window(1.5)];
        assert!(net_area(&s).is_err());
    }

    #[test]
    fn resistance_formula() {
        let c = cons(vec![layer(0.2, 0.04, 0.0, 0.0)]);
        assert_relative_eq!(thermal_resistance(&c, 2.0).unwrap(), 2.5, epsilon = 1e-12);
        let c = cons(vec![layer(0.1, 1.0, 0.0, 0.0), layer(0.05, 0.025, 0.0, 0.0)]);
        assert_relative_eq!(thermal_resistance(&c, 1.0).unwrap(), 2.1, epsilon = 1e-12);
        let c = cons(vec![layer(0.1, 0.0, 0.0, 0.0)]);
        assert!(thermal_resistance(&c, 1.0).is_err());
        let c = cons(vec![layer(0.0, 1.0, 0.0, 0.0)]);
        assert!(thermal_resistance(&c, 1.0).is_err());
    }

    #[test]
    fn capacitance_formula() {
        let one = cons(vec![layer(0.15, 1.4, 2400.0, 880.0)]);
        assert_relative_eq!(thermal_capacitance(&one, 10.0), 1_584_000.0, epsilon = 1e-6);
        let two = cons(vec![layer(0.15, 1.4, 2400.0, 880.0); 2]);
        assert_relative_eq!(
            thermal_capacitance(&two, 10.0),
            2.0 * thermal_capacitance(&one, 10.0),
            epsilon = 1e-6
        );
        let light = cons(vec![layer(0.1, 0.04, 0.0, 1000.0)]);
        assert_eq!(thermal_capacitance(&light, 5.0), 0.0);
    }

    #[test]
    fn fictitious_resistance_boundary() {
        assert_relative_eq!(fictitious_resistance(3.0, 1.2).unwrap(), 1.8, epsilon = 1e-12);
        assert_relative_eq!(fictitious_resistance(2.0, 0.5).unwrap(), 1.5, epsilon = 1e-12);
        assert!(fictitious_resistance(1.2, 1.2).is_err());
        assert!(fictitious_resistance(1.0, 1.2).is_err());
    }

    fn two_zone() -> BuildingModel {
        let mut a_int = Surface::new("a-int", SurfaceKind::Interior, 12.0, wall());
        a_int.adjacent_zone = Some("B".into());
        let mut b_int = Surface::new("b-int", SurfaceKind::Interior, 12.0, wall());
        b_int.adjacent_zone = Some("A".into());
        let mut floor = Surface::new("a-floor", SurfaceKind::Underground, 30.0, wall());
        floor.r_eff = Some(1.0);
        let ext = Surface::new("b-ext", SurfaceKind::Exterior, 15.0, wall());
        BuildingModel::new(vec![
            Zone {
                id: "A".into(),
                air_mass: 120.0,
                setpoint: 21.0,
                design_mass_flow: 0.0,
                surfaces: vec![a_int, floor],
                line: None,
            },
            Zone {
                id: "B".into(),
                air_mass: 90.0,
                setpoint: 21.0,
                design_mass_flow: 0.0,
                surfaces: vec![b_int, ext],
                line: None,
            },
        ])
    }

    #[test]
    fn valid_model_derives_params() {
        let v = validate_building(two_zone()).unwrap();
        assert_eq!(v.zone_index("B"), Some(1));
        assert_eq!(v.adjacent_index(0, 0), Some(1));
        // Soil is part of the underground construction.
        let p = v.params(0, 1);
        let r = 0.3 / (1.0 * 30.0) + 0.2 / (0.9 * 30.0);
        assert_relative_eq!(p.resistance, r, epsilon = 1e-12);
        assert_relative_eq!(p.fictitious_resistance.unwrap(), 1.0 - r, epsilon = 1e-12);
        assert!(v.params(1, 1).fictitious_resistance.is_none());
    }

    #[test]
    fn validation_is_idempotent() {
        let v = validate_building(two_zone()).unwrap();
        let again = validate_building(v.model().clone()).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn missing_adjacent_zone_is_named() {
        let mut m = two_zone();
        m.zones[0].surfaces[0].adjacent_zone = Some("Nowhere".into());
        let err = validate_building(m).unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|v| v.path == "zone[A].surface[a-int]" && v.message.contains("Nowhere")));
    }

    #[test]
    fn underground_below_computed_resistance_is_rejected() {
        let mut m = two_zone();
        m.zones[0].surfaces[1].r_eff = Some(0.001);
        let err = validate_building(m).unwrap_err();
        assert!(err.0.iter().any(|v| v.path == "zone[A].surface[a-floor]"));
    }

    #[test]
    fn one_sided_coupling_is_rejected() {
        let mut m = two_zone();
        m.zones[1].surfaces.remove(0);
        let err = validate_building(m).unwrap_err();
        assert!(err.0.iter().any(|v| v.path == "zone[A]"));
    }

    #[test]
    fn violations_are_aggregated() {
        let mut m = two_zone();
        m.zones[0].air_mass = 0.0;
        m.zones[1].surfaces[1].absorptance = 1.5;
        m.zones[1].surfaces[1].windows = vec![window(20.0)];
        let err = validate_building(m).unwrap_err();
        assert!(err.0.len() >= 3, "{err}");
    }

    #[test]
    fn angle_factors_from_tilt() {
        let mut s = Surface::new("s", SurfaceKind::Exterior, 1.0, wall());
        s.tilt = 90.0;
        let (a, b) = s.sky_ground_factors();
        assert_relative_eq!(a, 0.5, epsilon = 1e-12);
        assert_relative_eq!(a + b, 1.0, epsilon = 1e-15);
        s.tilt = 0.0;
        assert_eq!(s.sky_ground_factors(), (1.0, 0.0));
    }
}
