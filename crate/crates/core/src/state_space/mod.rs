//! Linear time-varying state-space form of the RC building network.
//!
//! The state vector is laid out zone by zone. Zone `k` with `m_k` surfaces
//! occupies a contiguous block of `2 + 3·m_k` entries:
//!
//! ```text
//! [T_k, T_o^1, T_i^1, T_q^1, ..., T_o^m, T_i^m, T_q^m, T_int_k]
//! ```
//!
//! `T_q` (solar/radiant gain on the inner face, W) and `T_int` (lumped
//! non-envelope load, W) have zero dynamics; they are random-walk states for
//! the estimator. Only the supply-air mass flow makes `H` time-varying, and
//! it only touches the zone-air diagonal, so the model stores the envelope
//! part `H0` plus one flow term per zone.

mod discrete;
mod dump;

pub use discrete::{discretize, DiscretizationCache, StepOperator};
pub use dump::{dump_matrices, write_matrix_market};

use nalgebra::{DMatrix, DVector};

use crate::building::{SurfaceKind, ValidatedBuilding};
use crate::error::{Error, Result};

/// Role of a state inside its zone block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateRole {
    ZoneAir,
    Outer(usize),
    Inner(usize),
    SurfaceGain(usize),
    InternalLoad,
}

impl StateRole {
    /// True for the random-walk load states.
    pub fn is_load(self) -> bool {
        matches!(self, StateRole::SurfaceGain(_) | StateRole::InternalLoad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateLayout {
    offsets: Vec<usize>,
    surfaces: Vec<usize>,
    roles: Vec<(usize, StateRole)>,
}

impl StateLayout {
    /// Layout for zones with the given surface counts, in order.
    pub fn from_surface_counts(counts: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(counts.len());
        let mut roles = Vec::new();
        for (k, &m) in counts.iter().enumerate() {
            offsets.push(roles.len());
            roles.push((k, StateRole::ZoneAir));
            for j in 0..m {
                roles.push((k, StateRole::Outer(j)));
                roles.push((k, StateRole::Inner(j)));
                roles.push((k, StateRole::SurfaceGain(j)));
            }
            roles.push((k, StateRole::InternalLoad));
        }
        StateLayout {
            offsets,
            surfaces: counts.to_vec(),
            roles,
        }
    }

    pub fn dim(&self) -> usize {
        self.roles.len()
    }

    pub fn zone_count(&self) -> usize {
        self.offsets.len()
    }

    /// `n_k = 2 + 3·m_k`.
    pub fn block_size(&self, zone: usize) -> usize {
        2 + 3 * self.surfaces[zone]
    }

    pub fn block_range(&self, zone: usize) -> std::ops::Range<usize> {
        let start = self.offsets[zone];
        start..start + self.block_size(zone)
    }

    pub fn surface_count(&self, zone: usize) -> usize {
        self.surfaces[zone]
    }

    pub fn index(&self, zone: usize, role: StateRole) -> usize {
        let base = self.offsets[zone];
        match role {
            StateRole::ZoneAir => base,
            StateRole::Outer(j) => base + 1 + 3 * j,
            StateRole::Inner(j) => base + 2 + 3 * j,
            StateRole::SurfaceGain(j) => base + 3 + 3 * j,
            StateRole::InternalLoad => base + 1 + 3 * self.surfaces[zone],
        }
    }

    pub fn zone_air(&self, zone: usize) -> usize {
        self.offsets[zone]
    }

    /// Zone and role stored at `index`.
    pub fn role(&self, index: usize) -> (usize, StateRole) {
        self.roles[index]
    }

    pub fn roles(&self) -> &[(usize, StateRole)] {
        &self.roles
    }

    /// Indices of every zone-air temperature, in zone order.
    pub fn zone_air_indices(&self) -> Vec<usize> {
        self.offsets.clone()
    }
}

/// Build the state layout of a validated building.
pub fn build_layout(model: &ValidatedBuilding) -> StateLayout {
    let counts: Vec<usize> = model.zones.iter().map(|z| z.surfaces.len()).collect();
    StateLayout::from_surface_counts(&counts)
}

/// Stable textual id of a state, e.g. `Z1.T`, `Z1.Z1-N.To`, `Z1.Tint`.
pub fn state_id(model: &ValidatedBuilding, layout: &StateLayout, index: usize) -> String {
    let (k, role) = layout.role(index);
    let zone = &model.zones[k];
    match role {
        StateRole::ZoneAir => format!("{}.T", zone.id),
        StateRole::Outer(j) => format!("{}.{}.To", zone.id, zone.surfaces[j].id),
        StateRole::Inner(j) => format!("{}.{}.Ti", zone.id, zone.surfaces[j].id),
        StateRole::SurfaceGain(j) => format!("{}.{}.Tq", zone.id, zone.surfaces[j].id),
        StateRole::InternalLoad => format!("{}.Tint", zone.id),
    }
}

/// One column of the input matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputChannel {
    /// Ambient dry-bulb temperature, °C.
    Ambient,
    /// Ground temperature, °C.
    Ground,
    /// Absorbed solar gain on the outer face of an exterior surface, W.
    Solar { zone: usize, surface: usize },
    /// Supply air enthalpy flow `ṁ_k·U_sa_k`, kg·°C/s.
    Hvac { zone: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputLayout {
    channels: Vec<InputChannel>,
    solar: Vec<Vec<Option<usize>>>,
    hvac: Vec<usize>,
}

impl InputLayout {
    pub const AMBIENT: usize = 0;
    pub const GROUND: usize = 1;

    fn new(model: &ValidatedBuilding) -> Self {
        let mut channels = vec![InputChannel::Ambient, InputChannel::Ground];
        let mut solar = Vec::with_capacity(model.zones.len());
        for (k, zone) in model.zones.iter().enumerate() {
            let mut per_surface = Vec::with_capacity(zone.surfaces.len());
            for (j, s) in zone.surfaces.iter().enumerate() {
                if s.kind == SurfaceKind::Exterior {
                    per_surface.push(Some(channels.len()));
                    channels.push(InputChannel::Solar { zone: k, surface: j });
                } else {
                    per_surface.push(None);
                }
            }
            solar.push(per_surface);
        }
        let mut hvac = Vec::with_capacity(model.zones.len());
        for k in 0..model.zones.len() {
            hvac.push(channels.len());
            channels.push(InputChannel::Hvac { zone: k });
        }
        InputLayout {
            channels,
            solar,
            hvac,
        }
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[InputChannel] {
        &self.channels
    }

    pub fn solar(&self, zone: usize, surface: usize) -> Option<usize> {
        self.solar[zone][surface]
    }

    pub fn hvac(&self, zone: usize) -> usize {
        self.hvac[zone]
    }

    /// Position of `channel` in the input vector.
    pub fn position(&self, channel: InputChannel) -> Option<usize> {
        match channel {
            InputChannel::Ambient => Some(Self::AMBIENT),
            InputChannel::Ground => Some(Self::GROUND),
            InputChannel::Solar { zone, surface } => {
                self.solar.get(zone)?.get(surface).copied().flatten()
            }
            InputChannel::Hvac { zone } => self.hvac.get(zone).copied(),
        }
    }

    pub fn channel_id(&self, model: &ValidatedBuilding, index: usize) -> String {
        match self.channels[index] {
            InputChannel::Ambient => "T_amb".into(),
            InputChannel::Ground => "T_ground".into(),
            InputChannel::Solar { zone, surface } => {
                format!("{}.U_o", model.zones[zone].surfaces[surface].id)
            }
            InputChannel::Hvac { zone } => format!("{}.mdot_Usa", model.zones[zone].id),
        }
    }
}

/// Supply-air term on a zone-air diagonal: `H[row,row] -= ṁ_zone · inv_mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTerm {
    pub row: usize,
    pub zone: usize,
    pub inv_mass: f64,
}

/// `H(ṁ) = H0 − Σ ṁ_k/M_k·e_r e_rᵀ` together with a fixed input matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDynamics {
    pub h0: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub flow_terms: Vec<FlowTerm>,
}

impl FlowDynamics {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    /// Dynamics matrix for the per-zone mass flows `mdot` (kg/s, indexed by
    /// global zone number).
    pub fn at(&self, mdot: &[f64]) -> Result<DMatrix<f64>> {
        let mut h = self.h0.clone();
        for t in &self.flow_terms {
            let m = *mdot.get(t.zone).ok_or_else(|| {
                Error::invalid(format!("no supply-air flow given for zone #{}", t.zone))
            })?;
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::invalid(format!(
                    "supply-air flow for zone #{} must be a finite value >= 0, got {m}",
                    t.zone
                )));
            }
            h[(t.row, t.row)] -= m * t.inv_mass;
        }
        Ok(h)
    }

    /// Restriction to the rows/columns in `indices` (in that order).
    pub fn restrict(&self, indices: &[usize]) -> FlowDynamics {
        let h0 = self.h0.select_rows(indices).select_columns(indices);
        let b = self.b.select_rows(indices);
        let flow_terms = self
            .flow_terms
            .iter()
            .filter_map(|t| {
                indices.iter().position(|&i| i == t.row).map(|row| FlowTerm {
                    row,
                    zone: t.zone,
                    inv_mass: t.inv_mass,
                })
            })
            .collect();
        FlowDynamics { h0, b, flow_terms }
    }
}

/// The assembled model: dynamics, inputs, and zone-temperature observation.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub layout: StateLayout,
    pub inputs: InputLayout,
    pub dynamics: FlowDynamics,
    /// `n × N` selector of the zone-air temperatures.
    pub observation: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.dynamics.b
    }

    /// `H(t)` for the given per-zone supply flows.
    pub fn h(&self, mdot: &[f64]) -> Result<DMatrix<f64>> {
        self.dynamics.at(mdot)
    }

    /// Observed state index for each measurement row.
    pub fn observed_indices(&self) -> Vec<usize> {
        self.layout.zone_air_indices()
    }
}

/// Assemble the full state-space model of a validated building.
pub fn assemble(model: &ValidatedBuilding) -> StateSpaceModel {
    let layout = build_layout(model);
    let inputs = InputLayout::new(model);
    let n = layout.dim();
    let mut h0 = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, inputs.dim());
    let mut flow_terms = Vec::with_capacity(model.zones.len());
    let cpa = model.cpa;

    for (k, zone) in model.zones.iter().enumerate() {
        let zk = layout.zone_air(k);
        let air_cap = zone.air_mass * cpa;
        let mut diag = 0.0;

        for (j, s) in zone.surfaces.iter().enumerate() {
            let p = model.params(k, j);
            let (o, i, q) = (
                layout.index(k, StateRole::Outer(j)),
                layout.index(k, StateRole::Inner(j)),
                layout.index(k, StateRole::SurfaceGain(j)),
            );
            let c = p.capacitance;
            let rc = 1.0 / (p.resistance * c);
            let hia = s.h_i * p.net_area;

            // Zone air <- inner face.
            h0[(zk, i)] += hia / air_cap;
            diag -= hia / air_cap;

            // Outer face.
            let g_out = match s.kind {
                SurfaceKind::Underground => 1.0 / p.fictitious_resistance.unwrap_or(f64::INFINITY),
                _ => s.h_o * p.net_area,
            };
            h0[(o, o)] = -(g_out / c + rc);
            h0[(o, i)] = rc;
            match s.kind {
                SurfaceKind::Interior => {
                    let q_zone = model
                        .adjacent_index(k, j)
                        .expect("validated interior surface has an adjacent zone");
                    h0[(o, layout.zone_air(q_zone))] += g_out / c;
                }
                SurfaceKind::Exterior => {
                    b[(o, InputLayout::AMBIENT)] += g_out / c;
                    let col = inputs.solar(k, j).expect("exterior surface has a solar channel");
                    b[(o, col)] = 1.0 / c;
                }
                SurfaceKind::Underground => {
                    b[(o, InputLayout::GROUND)] += g_out / c;
                }
            }

            // Inner face.
            h0[(i, zk)] = hia / c;
            h0[(i, o)] = rc;
            h0[(i, i)] = -(hia / c + rc);
            h0[(i, q)] = 1.0 / c;

            // Windows conduct straight from ambient to the zone air.
            for w in &s.windows {
                let g = 1.0 / w.resistance;
                diag -= g / air_cap;
                b[(zk, InputLayout::AMBIENT)] += g / air_cap;
            }
        }

        h0[(zk, zk)] = diag;
        h0[(zk, layout.index(k, StateRole::InternalLoad))] = 1.0 / air_cap;
        b[(zk, inputs.hvac(k))] = 1.0 / zone.air_mass;
        flow_terms.push(FlowTerm {
            row: zk,
            zone: k,
            inv_mass: 1.0 / zone.air_mass,
        });
    }

    let observation = assemble_observation_for(&layout);
    StateSpaceModel {
        layout,
        inputs,
        dynamics: FlowDynamics { h0, b, flow_terms },
        observation,
    }
}

/// `H(t)` and `B` for one set of per-zone supply flows.
pub fn assemble_dynamics(
    model: &ValidatedBuilding,
    mdot: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if mdot.len() != model.zones.len() {
        return Err(Error::invalid(format!(
            "expected supply-air flow for {} zones, got {}",
            model.zones.len(),
            mdot.len()
        )));
    }
    let ssm = assemble(model);
    let h = ssm.h(mdot)?;
    Ok((h, ssm.dynamics.b))
}

fn assemble_observation_for(layout: &StateLayout) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(layout.zone_count(), layout.dim());
    for k in 0..layout.zone_count() {
        c[(k, layout.zone_air(k))] = 1.0;
    }
    c
}

/// Selector of the zone-air temperatures, zones in declaration order.
pub fn assemble_observation(model: &ValidatedBuilding) -> DMatrix<f64> {
    assemble_observation_for(&build_layout(model))
}

/// Heat flow from the structure into the air of `zone`, W: convection off
/// every inner face plus conduction through the zone's windows.
pub fn structure_heat_flux(
    state: &DVector<f64>,
    model: &ValidatedBuilding,
    layout: &StateLayout,
    zone: usize,
    t_amb: f64,
) -> f64 {
    let t_zone = state[layout.zone_air(zone)];
    let mut q = 0.0;
    for (j, s) in model.zones[zone].surfaces.iter().enumerate() {
        let p = model.params(zone, j);
        q += s.h_i * p.net_area * (state[layout.index(zone, StateRole::Inner(j))] - t_zone);
        for w in &s.windows {
            q += (t_amb - t_zone) / w.resistance;
        }
    }
    q
}
