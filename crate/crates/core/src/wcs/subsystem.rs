use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::Partition;
use crate::error::{Error, Result};
use crate::filtering::{run_filter, FilterModel, FilterState, NoiseSpec, RunOptions, Trajectory};
use crate::inputs::InputSeries;
use crate::state_space::StateSpaceModel;

/// One cluster's restricted model.
#[derive(Debug, Clone)]
pub struct Subsystem {
    /// Global state indices, ascending.
    pub indices: Vec<usize>,
    /// Rows of the full observation matrix that measure a state in here.
    pub measurements: Vec<usize>,
    pub model: FilterModel,
}

impl Subsystem {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// Restrict dynamics, inputs and observations to each cluster. Couplings
/// between clusters are dropped.
pub fn extract_subsystems(ssm: &StateSpaceModel, partition: &Partition) -> Result<Vec<Subsystem>> {
    partition.check(ssm.dim())?;
    let c = &ssm.observation;
    let clusters = partition.clusters();
    let mut subsystems: Vec<Subsystem> = clusters
        .into_iter()
        .map(|indices| Subsystem {
            model: FilterModel {
                dynamics: Arc::new(ssm.dynamics.restrict(&indices)),
                observation: DMatrix::zeros(0, indices.len()),
            },
            indices,
            measurements: Vec::new(),
        })
        .collect();
    for row in 0..c.nrows() {
        let cols: Vec<usize> = (0..c.ncols()).filter(|&j| c[(row, j)] != 0.0).collect();
        let Some(&first) = cols.first() else {
            continue;
        };
        let owner = partition.assignment[first];
        if cols.iter().any(|&j| partition.assignment[j] != owner) {
            return Err(Error::invalid(format!(
                "measurement row {row} spans more than one cluster"
            )));
        }
        subsystems[owner].measurements.push(row);
    }
    for s in &mut subsystems {
        s.model.observation = c.select_rows(&s.measurements).select_columns(&s.indices);
    }
    Ok(subsystems)
}

/// Reassemble per-cluster states into the global layout: means placed by
/// index, covariance block diagonal with exact zeros across clusters.
pub fn direct_sum(subsystems: &[Subsystem], states: &[FilterState], n: usize) -> FilterState {
    let mut mean = DVector::zeros(n);
    let mut cov = DMatrix::zeros(n, n);
    for (s, fs) in subsystems.iter().zip(states) {
        for (a, &i) in s.indices.iter().enumerate() {
            mean[i] = fs.mean[a];
            for (b, &j) in s.indices.iter().enumerate() {
                cov[(i, j)] = fs.cov[(a, b)];
            }
        }
    }
    FilterState {
        mean,
        cov,
        t: states.first().and_then(|s| s.t),
    }
}

/// Filter every cluster independently (in parallel) and recombine.
pub fn run_wcs_filter(
    subsystems: &[Subsystem],
    series: &InputSeries,
    measurements: Option<&[DVector<f64>]>,
    noise: &NoiseSpec,
    init: &FilterState,
    options: RunOptions,
) -> Result<Trajectory> {
    let n = init.dim();
    let total: usize = subsystems.iter().map(Subsystem::dim).sum();
    if total != n {
        return Err(Error::Dimension(format!(
            "subsystems cover {total} states, initial state has {n}"
        )));
    }
    let runs: Vec<Trajectory> = subsystems
        .par_iter()
        .map(|s| {
            let local_meas: Option<Vec<DVector<f64>>> = measurements.map(|ms| {
                ms.iter()
                    .map(|z| {
                        DVector::from_iterator(
                            s.measurements.len(),
                            s.measurements.iter().map(|&r| z[r]),
                        )
                    })
                    .collect()
            });
            let local_noise = noise.restrict(&s.indices, &s.measurements);
            let local_init = init.restrict(&s.indices);
            run_filter(
                &s.model,
                series,
                local_meas.as_deref(),
                &local_noise,
                &local_init,
                options,
            )
        })
        .collect::<Result<_>>()?;

    let steps = series.len();
    let mut out = Trajectory::with_capacity(steps);
    for t in 0..steps {
        let mut mean = DVector::zeros(n);
        let mut var = DVector::zeros(n);
        for (s, run) in subsystems.iter().zip(&runs) {
            for (a, &i) in s.indices.iter().enumerate() {
                mean[i] = run.means[t][a];
                var[i] = run.variances[t][a];
            }
        }
        out.timestamps.push(series.timestamps[t]);
        out.means.push(mean);
        out.variances.push(var);
    }
    Ok(out)
}
