//! Weakly connected subsystems: clustering of the dynamics graph, per-cluster
//! filtering and the divergence metric against the full filter.

mod louvain;
mod subsystem;

pub use louvain::{louvain, LouvainResult};
pub use subsystem::{direct_sum, extract_subsystems, run_wcs_filter, Subsystem};

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::building::ValidatedBuilding;
use crate::error::{Error, Result};
use crate::state_space::{StateLayout, StateRole};
use crate::table::{format_timestamp, Provenance};

/// `W = ½(D⁻¹|H| + |H|ᵀD⁻¹)` with `D` the row sums of `|H|`. Rows of `|H|`
/// that sum to zero get a zero `D⁻¹` entry.
pub fn adjacency(h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let a = h.abs();
    let inv_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = a.row(i).sum();
            if d > 0.0 {
                1.0 / d
            } else {
                0.0
            }
        })
        .collect();
    // Both halves are formed from the same products so W is exactly symmetric.
    DMatrix::from_fn(n, n, |i, j| 0.5 * (inv_deg[i] * a[(i, j)] + a[(j, i)] * inv_deg[j]))
}

/// Rows of `|H|` summing to zero.
pub fn zero_degree_states(h: &DMatrix<f64>) -> Vec<usize> {
    (0..h.nrows())
        .filter(|&i| h.row(i).iter().all(|v| *v == 0.0))
        .collect()
}

/// `Q = (1/2m)·Σ_ij [W_ij − k_i k_j/2m]·δ(c_i, c_j)` with `2m = Σ_ij W_ij`.
pub fn modularity(w: &DMatrix<f64>, assignment: &[usize]) -> f64 {
    let m2: f64 = w.sum();
    if m2 <= 0.0 {
        return 0.0;
    }
    let count = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; count];
    let mut tot = vec![0.0; count];
    for i in 0..w.nrows() {
        let ci = assignment[i];
        tot[ci] += w.row(i).sum();
        for j in 0..w.ncols() {
            if assignment[j] == ci {
                internal[ci] += w[(i, j)];
            }
        }
    }
    internal
        .iter()
        .zip(&tot)
        .map(|(&inn, &t)| inn / m2 - (t / m2).powi(2))
        .sum()
}

/// Per-community terms of [`modularity`]; they sum to `Q`.
pub fn modularity_contributions(w: &DMatrix<f64>, partition: &Partition) -> Vec<f64> {
    let m2: f64 = w.sum();
    let mut internal = vec![0.0; partition.count];
    let mut tot = vec![0.0; partition.count];
    if m2 <= 0.0 {
        return internal;
    }
    for i in 0..w.nrows() {
        let ci = partition.assignment[i];
        tot[ci] += w.row(i).sum();
        for j in 0..w.ncols() {
            if partition.assignment[j] == ci {
                internal[ci] += w[(i, j)];
            }
        }
    }
    internal
        .iter()
        .zip(&tot)
        .map(|(&inn, &t)| inn / m2 - (t / m2).powi(2))
        .collect()
}

/// Mutually exclusive and exhaustive assignment of states to clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cluster of each state, `0..count`.
    pub assignment: Vec<usize>,
    pub count: usize,
    /// Modularity of this partition on the graph it was computed for.
    pub modularity: f64,
}

impl Partition {
    /// Canonical labels (order of first appearance) and modularity on `w`.
    pub fn from_assignment(assignment: Vec<usize>, w: &DMatrix<f64>) -> Partition {
        let mut map = std::collections::HashMap::new();
        let assignment: Vec<usize> = assignment
            .into_iter()
            .map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
            .collect();
        let modularity = modularity(w, &assignment);
        Partition {
            count: map.len(),
            assignment,
            modularity,
        }
    }

    pub fn single(n: usize, w: &DMatrix<f64>) -> Partition {
        Partition::from_assignment(vec![0; n], w)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// State indices of every cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.assignment.len() != n {
            return Err(Error::Dimension(format!(
                "partition covers {} states, model has {n}",
                self.assignment.len()
            )));
        }
        let mut seen = vec![false; self.count];
        for &c in &self.assignment {
            if c >= self.count {
                return Err(Error::invalid(format!(
                    "cluster id {c} out of range for {} clusters",
                    self.count
                )));
            }
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("partition has an empty cluster"));
        }
        Ok(())
    }
}

/// Move every state in `states` into the cluster of its zone's air node.
pub fn attach_to_zone_air(partition: &mut Partition, layout: &StateLayout, states: &[usize]) {
    for &i in states {
        let (k, _) = layout.role(i);
        partition.assignment[i] = partition.assignment[layout.zone_air(k)];
    }
}

/// Clusters of the design-condition dynamics: Louvain on `W`, then load
/// states (and any other zero-degree rows) joined to their zone's air node.
pub fn cluster_states(h: &DMatrix<f64>, layout: &StateLayout, seed: u64) -> (Partition, DMatrix<f64>) {
    let w = adjacency(h);
    let mut partition = louvain(&w, seed).partition;
    let isolated = zero_degree_states(h);
    attach_to_zone_air(&mut partition, layout, &isolated);
    let partition = Partition::from_assignment(partition.assignment, &w);
    (partition, w)
}

/// `true` when every cluster lies inside a single zone block.
pub fn clusters_within_zones(partition: &Partition, layout: &StateLayout) -> bool {
    partition.clusters().iter().all(|c| {
        let z = layout.role(c[0]).0;
        c.iter().all(|&i| layout.role(i).0 == z)
    })
}

pub fn write_partition(
    out: &mut impl Write,
    provenance: &Provenance,
    state_ids: &[String],
    partition: &Partition,
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "state_id,cluster_id")?;
    for (id, c) in state_ids.iter().zip(&partition.assignment) {
        writeln!(out, "{id},{c}")?;
    }
    Ok(())
}

/// Read a partition written by [`write_partition`], in `state_ids` order.
pub fn read_partition(
    reader: impl std::io::Read,
    origin: &std::path::Path,
    state_ids: &[String],
    w: &DMatrix<f64>,
) -> Result<Partition> {
    #[derive(serde::Deserialize)]
    struct Row {
        state_id: String,
        cluster_id: usize,
    }
    let index: std::collections::HashMap<&str, usize> =
        state_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let perr = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut assignment = vec![usize::MAX; state_ids.len()];
    for row in crate::table::csv_reader(reader).deserialize::<Row>() {
        let row = row.map_err(|e| perr(e.to_string()))?;
        let &i = index
            .get(row.state_id.as_str())
            .ok_or_else(|| perr(format!("unknown state `{}`", row.state_id)))?;
        assignment[i] = row.cluster_id;
    }
    if let Some(i) = assignment.iter().position(|&c| c == usize::MAX) {
        return Err(perr(format!("state `{}` has no cluster", state_ids[i])));
    }
    Ok(Partition::from_assignment(assignment, w))
}

pub fn write_cluster_summary(
    out: &mut impl Write,
    provenance: &Provenance,
    model: &ValidatedBuilding,
    layout: &StateLayout,
    partition: &Partition,
    w: &DMatrix<f64>,
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "cluster_id,size,zones,q_contribution")?;
    let q = modularity_contributions(w, partition);
    for (c, members) in partition.clusters().iter().enumerate() {
        let mut zones: Vec<usize> = members.iter().map(|&i| layout.role(i).0).collect();
        zones.dedup();
        zones.sort_unstable();
        zones.dedup();
        let names: Vec<&str> = zones.iter().map(|&k| model.zones[k].id.as_str()).collect();
        writeln!(out, "{c},{},{},{:?}", members.len(), names.join(";"), q[c])?;
    }
    Ok(())
}

/// Which coordinates enter the divergence metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmuStates {
    #[default]
    All,
    Zones,
}

impl EmuStates {
    pub fn indices(self, layout: &StateLayout) -> Vec<usize> {
        match self {
            EmuStates::All => (0..layout.dim()).collect(),
            EmuStates::Zones => layout
                .roles()
                .iter()
                .enumerate()
                .filter(|(_, (_, r))| *r == StateRole::ZoneAir)
                .map(|(i, _)| i)
                .collect(),
        }
    }
}

/// Divergence of one trajectory from a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    /// `e_mu(t) = (1/n)·‖(x_c − x_f)/x_f‖₂` over the compared coordinates.
    pub values: Vec<f64>,
    /// Coordinate-steps left out because the reference was exactly zero.
    pub excluded: usize,
}

pub fn error_metric(
    candidate: &[DVector<f64>],
    reference: &[DVector<f64>],
    coords: &[usize],
    n: usize,
) -> Result<ErrorSeries> {
    if candidate.len() != reference.len() {
        return Err(Error::invalid(format!(
            "trajectories have {} and {} steps",
            candidate.len(),
            reference.len()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("normalizing count must be > 0"));
    }
    let mut excluded = 0;
    let values = candidate
        .iter()
        .zip(reference)
        .map(|(c, f)| {
            let mut sq = 0.0;
            for &i in coords {
                if f[i] == 0.0 {
                    excluded += 1;
                    continue;
                }
                sq += ((c[i] - f[i]) / f[i]).powi(2);
            }
            sq.sqrt() / n as f64
        })
        .collect();
    if excluded > 0 {
        log::warn!("{excluded} coordinate-steps with a zero reference were left out of e_mu");
    }
    Ok(ErrorSeries { values, excluded })
}

pub fn write_error_series(
    out: &mut impl Write,
    provenance: &Provenance,
    timestamps: &[chrono::NaiveDateTime],
    e: &[f64],
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "timestamp,e_mu")?;
    for (t, v) in timestamps.iter().zip(e) {
        writeln!(out, "{},{v:?}", format_timestamp(t))?;
    }
    Ok(())
}
