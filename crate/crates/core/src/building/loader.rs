//! TOML building description loader.
//!
//! Materials and constructions are declared once at top level and referenced
//! by name; zones list their surfaces inline. See `docs/building-format.md`
//! for the full schema.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use super::{
    BuildingModel, Construction, Location, Material, SunlitFraction, Surface, SurfaceKind,
    Window, Zone, DEFAULT_CPA, DEFAULT_H_INSIDE, DEFAULT_H_OUTSIDE,
};
use crate::error::{Error, Result, Violation, Violations};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    building: RawGlobals,
    soil: Option<RawSoil>,
    #[serde(default, rename = "material")]
    materials: Vec<RawMaterial>,
    #[serde(default, rename = "construction")]
    constructions: Vec<RawConstruction>,
    #[serde(default, rename = "zone")]
    zones: Vec<RawZone>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGlobals {
    #[serde(default = "default_cpa")]
    cpa: f64,
    #[serde(default)]
    latitude: Option<f64>,
    #[serde(default)]
    longitude: Option<f64>,
    #[serde(default)]
    utc_offset_hours: Option<f64>,
}

impl Default for RawGlobals {
    fn default() -> Self {
        RawGlobals {
            cpa: DEFAULT_CPA,
            latitude: None,
            longitude: None,
            utc_offset_hours: None,
        }
    }
}

fn default_cpa() -> f64 {
    DEFAULT_CPA
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoil {
    conductivity: Option<f64>,
    density: Option<f64>,
    specific_heat: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    name: Spanned<String>,
    thickness: f64,
    conductivity: f64,
    #[serde(default)]
    density: f64,
    #[serde(default)]
    specific_heat: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstruction {
    name: Spanned<String>,
    layers: Vec<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    id: String,
    area: f64,
    resistance: f64,
    shgc: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    id: Spanned<String>,
    kind: SurfaceKind,
    gross_area: f64,
    construction: Spanned<String>,
    #[serde(default, rename = "window")]
    windows: Vec<RawWindow>,
    adjacent_zone: Option<String>,
    h_i: Option<f64>,
    h_o: Option<f64>,
    r_eff: Option<f64>,
    #[serde(default = "default_absorptance")]
    absorptance: f64,
    #[serde(default = "default_tilt")]
    tilt: f64,
    #[serde(default = "default_azimuth")]
    azimuth: f64,
    f_ss: Option<f64>,
    f_sg: Option<f64>,
    sunlit_fraction: Option<SunlitFraction>,
}

fn default_absorptance() -> f64 {
    0.6
}

fn default_tilt() -> f64 {
    90.0
}

fn default_azimuth() -> f64 {
    180.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZone {
    id: Spanned<String>,
    air_mass: f64,
    #[serde(default = "default_setpoint")]
    setpoint: f64,
    #[serde(default)]
    design_mass_flow: f64,
    #[serde(default, rename = "surface")]
    surfaces: Vec<RawSurface>,
}

fn default_setpoint() -> f64 {
    21.0
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn line(&self, offset: usize) -> usize {
        match self.starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }
}

/// Parse a building description from TOML text.
///
/// Unresolved references are reported with the line of the entity that
/// made them. The result still has to go through
/// [`validate_building`](super::validate_building).
pub fn parse_building(src: &str) -> Result<BuildingModel> {
    let lines = LineIndex::new(src);
    let raw: RawFile = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| lines.line(s.start));
        let message = e.message().trim().to_string();
        Error::Validation(Violations(vec![
            Violation::new("document", message).at_line(line)
        ]))
    })?;

    let mut errors = Vec::new();
    let line_of = |s: &Spanned<String>| Some(lines.line(s.span().start));

    let mut materials: HashMap<&str, Material> = HashMap::new();
    for m in &raw.materials {
        let mat = Material {
            name: m.name.get_ref().clone(),
            thickness: m.thickness,
            conductivity: m.conductivity,
            density: m.density,
            specific_heat: m.specific_heat,
        };
        if materials.insert(m.name.get_ref(), mat).is_some() {
            errors.push(
                Violation::new(format!("material[{}]", m.name.get_ref()), "duplicate name")
                    .at_line(line_of(&m.name)),
            );
        }
    }

    let mut constructions: HashMap<&str, Construction> = HashMap::new();
    for c in &raw.constructions {
        let mut layers = Vec::with_capacity(c.layers.len());
        for layer in &c.layers {
            match materials.get(layer.get_ref().as_str()) {
                Some(m) => layers.push(m.clone()),
                None => errors.push(
                    Violation::new(
                        format!("construction[{}]", c.name.get_ref()),
                        format!("unknown material `{}`", layer.get_ref()),
                    )
                    .at_line(line_of(layer)),
                ),
            }
        }
        let cons = Construction {
            name: c.name.get_ref().clone(),
            layers,
        };
        if constructions.insert(c.name.get_ref(), cons).is_some() {
            errors.push(
                Violation::new(format!("construction[{}]", c.name.get_ref()), "duplicate name")
                    .at_line(line_of(&c.name)),
            );
        }
    }

    let mut zones = Vec::with_capacity(raw.zones.len());
    for z in &raw.zones {
        let mut surfaces = Vec::with_capacity(z.surfaces.len());
        for s in &z.surfaces {
            let line = line_of(&s.id);
            let construction = match constructions.get(s.construction.get_ref().as_str()) {
                Some(c) => c.clone(),
                None => {
                    errors.push(
                        Violation::new(
                            format!("zone[{}].surface[{}]", z.id.get_ref(), s.id.get_ref()),
                            format!("unknown construction `{}`", s.construction.get_ref()),
                        )
                        .at_line(line_of(&s.construction)),
                    );
                    continue;
                }
            };
            let angle_factors = match (s.f_ss, s.f_sg) {
                (Some(a), Some(b)) => Some((a, b)),
                (Some(a), None) => Some((a, 1.0 - a)),
                (None, Some(b)) => Some((1.0 - b, b)),
                (None, None) => None,
            };
            let default_h_o = match s.kind {
                SurfaceKind::Interior => DEFAULT_H_INSIDE,
                _ => DEFAULT_H_OUTSIDE,
            };
            surfaces.push(Surface {
                id: s.id.get_ref().clone(),
                kind: s.kind,
                gross_area: s.gross_area,
                construction,
                windows: s
                    .windows
                    .iter()
                    .map(|w| Window {
                        id: w.id.clone(),
                        area: w.area,
                        resistance: w.resistance,
                        shgc: w.shgc,
                    })
                    .collect(),
                adjacent_zone: s.adjacent_zone.clone(),
                h_i: s.h_i.unwrap_or(DEFAULT_H_INSIDE),
                h_o: s.h_o.unwrap_or(default_h_o),
                r_eff: s.r_eff,
                absorptance: s.absorptance,
                tilt: s.tilt,
                azimuth: s.azimuth,
                angle_factors,
                sunlit_fraction: s.sunlit_fraction.clone().unwrap_or_default(),
                line,
            });
        }
        zones.push(Zone {
            id: z.id.get_ref().clone(),
            air_mass: z.air_mass,
            setpoint: z.setpoint,
            design_mass_flow: z.design_mass_flow,
            surfaces,
            line: line_of(&z.id),
        });
    }

    if !errors.is_empty() {
        return Err(Error::Validation(Violations(errors)));
    }

    let defaults = Location::default();
    let mut soil = Material::default_soil();
    if let Some(s) = &raw.soil {
        soil.conductivity = s.conductivity.unwrap_or(soil.conductivity);
        soil.density = s.density.unwrap_or(soil.density);
        soil.specific_heat = s.specific_heat.unwrap_or(soil.specific_heat);
    }
    Ok(BuildingModel {
        zones,
        cpa: raw.building.cpa,
        location: Location {
            latitude: raw.building.latitude.unwrap_or(defaults.latitude),
            longitude: raw.building.longitude.unwrap_or(defaults.longitude),
            utc_offset_hours: raw
                .building
                .utc_offset_hours
                .unwrap_or(defaults.utc_offset_hours),
        },
        soil,
    })
}

/// Read and parse a building file. Errors carry the file path.
pub fn load_building(path: &Path) -> Result<BuildingModel> {
    let src = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_building(&src)
}

/// Render a model in the file format read by [`parse_building`].
///
/// Materials and constructions are emitted once per distinct name (the
/// first occurrence wins). Floats use the shortest round-trip form, so
/// parsing the output reproduces the model apart from source lines.
pub fn to_toml(model: &BuildingModel) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let mut materials: Vec<&Material> = Vec::new();
    let mut constructions: Vec<&Construction> = Vec::new();
    for s in model.zones.iter().flat_map(|z| &z.surfaces) {
        if !constructions.iter().any(|c| c.name == s.construction.name) {
            constructions.push(&s.construction);
        }
        for m in &s.construction.layers {
            if !materials.iter().any(|x| x.name == m.name) {
                materials.push(m);
            }
        }
    }
    let loc = &model.location;
    let _ = writeln!(
        out,
        "[building]\ncpa = {:?}\nlatitude = {:?}\nlongitude = {:?}\nutc_offset_hours = {:?}\n",
        model.cpa, loc.latitude, loc.longitude, loc.utc_offset_hours
    );
    let soil = &model.soil;
    let _ = writeln!(
        out,
        "[soil]\nconductivity = {:?}\ndensity = {:?}\nspecific_heat = {:?}\n",
        soil.conductivity, soil.density, soil.specific_heat
    );
    for m in materials {
        let _ = writeln!(
            out,
            "[[material]]\nname = {:?}\nthickness = {:?}\nconductivity = {:?}\ndensity = {:?}\nspecific_heat = {:?}\n",
            m.name, m.thickness, m.conductivity, m.density, m.specific_heat
        );
    }
    for c in constructions {
        let layers: Vec<String> = c.layers.iter().map(|l| format!("{:?}", l.name)).collect();
        let _ = writeln!(
            out,
            "[[construction]]\nname = {:?}\nlayers = [{}]\n",
            c.name,
            layers.join(", ")
        );
    }
    for z in &model.zones {
        let _ = writeln!(
            out,
            "[[zone]]\nid = {:?}\nair_mass = {:?}\nsetpoint = {:?}\ndesign_mass_flow = {:?}\n",
            z.id, z.air_mass, z.setpoint, z.design_mass_flow
        );
        for s in &z.surfaces {
            let _ = writeln!(
                out,
                "[[zone.surface]]\nid = {:?}\nkind = {:?}\ngross_area = {:?}\nconstruction = {:?}",
                s.id,
                s.kind.as_str(),
                s.gross_area,
                s.construction.name
            );
            if let Some(adj) = &s.adjacent_zone {
                let _ = writeln!(out, "adjacent_zone = {adj:?}");
            }
            let _ = writeln!(
                out,
                "h_i = {:?}\nh_o = {:?}\nabsorptance = {:?}\ntilt = {:?}\nazimuth = {:?}",
                s.h_i, s.h_o, s.absorptance, s.tilt, s.azimuth
            );
            if let Some(r) = s.r_eff {
                let _ = writeln!(out, "r_eff = {r:?}");
            }
            if let Some((f_ss, f_sg)) = s.angle_factors {
                let _ = writeln!(out, "f_ss = {f_ss:?}\nf_sg = {f_sg:?}");
            }
            match &s.sunlit_fraction {
                SunlitFraction::Constant(v) if *v == 1.0 => {}
                SunlitFraction::Constant(v) => {
                    let _ = writeln!(out, "sunlit_fraction = {v:?}");
                }
                SunlitFraction::Hourly(v) => {
                    let vals: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(out, "sunlit_fraction = [{}]", vals.join(", "));
                }
            }
            out.push('\n');
            for w in &s.windows {
                let _ = writeln!(
                    out,
                    "[[zone.surface.window]]\nid = {:?}\narea = {:?}\nresistance = {:?}\nshgc = {:?}\n",
                    w.id, w.area, w.resistance, w.shgc
                );
            }
        }
    }
    out
}
