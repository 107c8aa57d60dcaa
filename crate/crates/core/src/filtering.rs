//! Discrete Kalman recursion over the ZOH-discretized model.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDateTime;
use nalgebra::{DMatrix, DVector};

use crate::building::ValidatedBuilding;
use crate::error::{Error, Result};
use crate::inputs::InputSeries;
use crate::state_space::{state_id, DiscretizationCache, StateLayout, StateSpaceModel};
use crate::table::{format_timestamp, read_blocks, Provenance};

/// Default process noise on load states, W² per data interval.
pub const DEFAULT_LOAD_PROCESS_NOISE: f64 = 1.0;
pub const DEFAULT_TEMPERATURE_PRIOR_VARIANCE: f64 = 1.0;
pub const DEFAULT_LOAD_PRIOR_VARIANCE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub t: Option<NaiveDateTime>,
}

impl FilterState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension(format!(
                "covariance is {}x{} for a {}-state mean",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        Ok(FilterState { mean, cov, t: None })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Temperatures at zone setpoints, loads at zero, diagonal covariance.
    pub fn initial(model: &ValidatedBuilding, layout: &StateLayout) -> Self {
        let n = layout.dim();
        let mut mean = DVector::zeros(n);
        let mut var = DVector::zeros(n);
        for (i, &(k, role)) in layout.roles().iter().enumerate() {
            if role.is_load() {
                var[i] = DEFAULT_LOAD_PRIOR_VARIANCE;
            } else {
                mean[i] = model.zones[k].setpoint;
                var[i] = DEFAULT_TEMPERATURE_PRIOR_VARIANCE;
            }
        }
        FilterState {
            mean,
            cov: DMatrix::from_diagonal(&var),
            t: None,
        }
    }

    /// The sub-state on `indices`, in that order.
    pub fn restrict(&self, indices: &[usize]) -> FilterState {
        FilterState {
            mean: DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.mean[i])),
            cov: self.cov.select_rows(indices).select_columns(indices),
            t: self.t,
        }
    }
}

/// Diagonal noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Per-measurement variance `r_k`.
    pub measurement: DVector<f64>,
    /// Per-state process variance added at every predict.
    pub process: DVector<f64>,
}

impl NoiseSpec {
    pub fn new(measurement: DVector<f64>, process: DVector<f64>) -> Result<Self> {
        for (what, v) in [("measurement", &measurement), ("process", &process)] {
            if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                return Err(Error::invalid(format!(
                    "{what} noise variances must be finite and >= 0, got {x}"
                )));
            }
        }
        Ok(NoiseSpec {
            measurement,
            process,
        })
    }

    /// `q_load` on every load row, zero on temperature rows.
    pub fn with_load_process(layout: &StateLayout, measurement: DVector<f64>, q_load: f64) -> Result<Self> {
        let process = DVector::from_iterator(
            layout.dim(),
            layout
                .roles()
                .iter()
                .map(|&(_, r)| if r.is_load() { q_load } else { 0.0 }),
        );
        NoiseSpec::new(measurement, process)
    }

    pub fn restrict(&self, states: &[usize], measurements: &[usize]) -> NoiseSpec {
        NoiseSpec {
            measurement: DVector::from_iterator(
                measurements.len(),
                measurements.iter().map(|&i| self.measurement[i]),
            ),
            process: DVector::from_iterator(states.len(), states.iter().map(|&i| self.process[i])),
        }
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn ensure_finite(fs: &FilterState, what: &str) -> Result<()> {
    if fs.mean.iter().chain(fs.cov.iter()).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// A-priori step: `x ← Φx + Γu`, `Σ ← ΦΣΦᵀ + Q`.
pub fn predict(
    fs: &FilterState,
    phi: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    u: &DVector<f64>,
    q_diag: &DVector<f64>,
) -> Result<FilterState> {
    let n = fs.dim();
    if phi.shape() != (n, n) || gamma.nrows() != n || gamma.ncols() != u.len() || q_diag.len() != n {
        return Err(Error::Dimension(format!(
            "predict: state {n}, Φ {:?}, Γ {:?}, u {}, Q {}",
            phi.shape(),
            gamma.shape(),
            u.len(),
            q_diag.len()
        )));
    }
    let mean = phi * &fs.mean + gamma * u;
    let mut cov = phi * &fs.cov * phi.transpose();
    for i in 0..n {
        cov[(i, i)] += q_diag[i];
    }
    symmetrize(&mut cov);
    let out = FilterState { mean, cov, t: fs.t };
    ensure_finite(&out, "predicted state")?;
    Ok(out)
}

/// Covariance form used by [`update_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateForm {
    /// `Σ − K S Kᵀ`
    #[default]
    Standard,
    /// `(I − KC) Σ (I − KC)ᵀ + K R Kᵀ`
    Joseph,
}

/// Measurement update with the standard covariance form.
pub fn update(
    prior: &FilterState,
    z: &DVector<f64>,
    c: &DMatrix<f64>,
    r_diag: &DVector<f64>,
) -> Result<FilterState> {
    update_with(prior, z, c, r_diag, UpdateForm::Standard)
}

pub fn update_with(
    prior: &FilterState,
    z: &DVector<f64>,
    c: &DMatrix<f64>,
    r_diag: &DVector<f64>,
    form: UpdateForm,
) -> Result<FilterState> {
    let n = prior.dim();
    let m = c.nrows();
    if c.ncols() != n || z.len() != m || r_diag.len() != m {
        return Err(Error::Dimension(format!(
            "update: state {n}, C {:?}, z {}, R {}",
            c.shape(),
            z.len(),
            r_diag.len()
        )));
    }
    if m == 0 {
        return Ok(prior.clone());
    }
    let pct = &prior.cov * c.transpose();
    let mut s = c * &pct;
    for i in 0..m {
        s[(i, i)] += r_diag[i];
    }
    symmetrize(&mut s);
    let chol = s.clone().cholesky().ok_or(Error::SingularInnovation)?;
    // K = Σ Cᵀ S⁻¹, via S Kᵀ = (Σ Cᵀ)ᵀ.
    let k = chol.solve(&pct.transpose()).transpose();
    let residual = z - c * &prior.mean;
    let mean = &prior.mean + &k * residual;
    let mut cov = match form {
        UpdateForm::Standard => &prior.cov - &k * pct.transpose(),
        UpdateForm::Joseph => {
            let i_kc = DMatrix::identity(n, n) - &k * c;
            let kr = DMatrix::from_fn(n, m, |i, j| k[(i, j)] * r_diag[j]);
            &i_kc * &prior.cov * i_kc.transpose() + kr * k.transpose()
        }
    };
    symmetrize(&mut cov);
    let out = FilterState { mean, cov, t: prior.t };
    ensure_finite(&out, "updated state")?;
    Ok(out)
}

/// Per-step posterior means and variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub timestamps: Vec<NaiveDateTime>,
    pub means: Vec<DVector<f64>>,
    pub variances: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn with_capacity(n: usize) -> Self {
        Trajectory {
            timestamps: Vec::with_capacity(n),
            means: Vec::with_capacity(n),
            variances: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    fn push(&mut self, fs: &FilterState) {
        self.timestamps.push(fs.t.unwrap_or_default());
        self.means.push(fs.mean.clone());
        self.variances.push(fs.cov.diagonal());
    }

    /// Mean of state `index` over time.
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.means.iter().map(|m| m[index]).collect()
    }

    /// Largest absolute difference of any mean or variance.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.means
            .iter()
            .zip(&other.means)
            .chain(self.variances.iter().zip(&other.variances))
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }
}

/// Both halves of one filter step, handed to observers.
pub struct StepView<'a> {
    pub index: usize,
    pub prior: &'a FilterState,
    pub posterior: &'a FilterState,
}

/// Options for a filter run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// ZOH step, s; must divide the data interval.
    pub dt: f64,
    pub form: UpdateForm,
}

/// The pieces of a model a filter needs; the full model or one subsystem.
#[derive(Debug, Clone)]
pub struct FilterModel {
    pub dynamics: Arc<crate::state_space::FlowDynamics>,
    pub observation: DMatrix<f64>,
}

impl FilterModel {
    pub fn full(ssm: &StateSpaceModel) -> Self {
        FilterModel {
            dynamics: Arc::new(ssm.dynamics.clone()),
            observation: ssm.observation.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }
}

/// Run predict/update over the whole series.
///
/// Step `i` predicts from step `i-1` with that step's inputs and flows, then
/// updates with `measurements[i]`; step 0 only updates `init`. With
/// `measurements = None` the updates are skipped (open-loop simulation).
pub fn run_filter(
    model: &FilterModel,
    series: &InputSeries,
    measurements: Option<&[DVector<f64>]>,
    noise: &NoiseSpec,
    init: &FilterState,
    options: RunOptions,
) -> Result<Trajectory> {
    run_filter_observed(model, series, measurements, noise, init, options, |_| Ok(()))
}

/// [`run_filter`] with a callback that sees every prior/posterior pair.
pub fn run_filter_observed(
    model: &FilterModel,
    series: &InputSeries,
    measurements: Option<&[DVector<f64>]>,
    noise: &NoiseSpec,
    init: &FilterState,
    options: RunOptions,
    mut observer: impl FnMut(StepView<'_>) -> Result<()>,
) -> Result<Trajectory> {
    let mut run = FilterRun::new(model, series, noise, init, options)?;
    if let Some(ms) = measurements {
        if ms.len() != series.len() {
            return Err(Error::invalid(format!(
                "{} measurement rows for {} input rows",
                ms.len(),
                series.len()
            )));
        }
    }
    let mut out = Trajectory::with_capacity(series.len());
    for i in 0..series.len() {
        let z = measurements.map(|ms| &ms[i]);
        let (prior, posterior) = run.step(i, z)?;
        observer(StepView {
            index: i,
            prior: &prior,
            posterior: &posterior,
        })?;
        out.push(&posterior);
    }
    Ok(out)
}

/// Stepwise filter driver; lets callers interleave several filters.
pub struct FilterRun<'a> {
    model: &'a FilterModel,
    series: &'a InputSeries,
    noise: &'a NoiseSpec,
    options: RunOptions,
    cache: DiscretizationCache,
    state: FilterState,
}

impl<'a> FilterRun<'a> {
    pub fn new(
        model: &'a FilterModel,
        series: &'a InputSeries,
        noise: &'a NoiseSpec,
        init: &FilterState,
        options: RunOptions,
    ) -> Result<Self> {
        let n = model.dim();
        if init.dim() != n || noise.process.len() != n {
            return Err(Error::Dimension(format!(
                "model has {n} states, initial state {}, process noise {}",
                init.dim(),
                noise.process.len()
            )));
        }
        if noise.measurement.len() != model.observation.nrows() {
            return Err(Error::Dimension(format!(
                "{} measurement variances for {} measurements",
                noise.measurement.len(),
                model.observation.nrows()
            )));
        }
        let substeps = series.substeps(options.dt)?;
        Ok(FilterRun {
            model,
            series,
            noise,
            options,
            cache: DiscretizationCache::new(Arc::clone(&model.dynamics), options.dt, substeps, None),
            state: init.clone(),
        })
    }

    /// Advance to record `i`; returns (prior, posterior). Records must be
    /// visited in order starting at 0.
    pub fn step(&mut self, i: usize, z: Option<&DVector<f64>>) -> Result<(FilterState, FilterState)> {
        let mut prior = if i == 0 {
            self.state.clone()
        } else {
            let op = self.cache.get(&self.series.mdot[i - 1])?;
            predict(&self.state, &op.phi, &op.gamma, &self.series.u[i - 1], &self.noise.process)?
        };
        prior.t = Some(self.series.timestamps[i]);
        let posterior = match z {
            Some(z) => update_with(
                &prior,
                z,
                &self.model.observation,
                &self.noise.measurement,
                self.options.form,
            )?,
            None => prior.clone(),
        };
        self.state = posterior.clone();
        Ok((prior, posterior))
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }
}

pub const ESTIMATE_COLUMNS: [&str; 4] = ["timestamp", "state_id", "mean", "variance"];

/// Long-format estimate table. Floats are written with Rust's shortest
/// round-trip representation so reading back is lossless.
pub fn write_estimates(
    out: &mut impl Write,
    provenance: &Provenance,
    state_ids: &[String],
    traj: &Trajectory,
) -> std::io::Result<()> {
    provenance.write(out)?;
    writeln!(out, "{}", ESTIMATE_COLUMNS.join(","))?;
    for ((ts, mean), var) in traj.timestamps.iter().zip(&traj.means).zip(&traj.variances) {
        let ts = format_timestamp(ts);
        for (i, id) in state_ids.iter().enumerate() {
            writeln!(out, "{ts},{id},{:?},{:?}", mean[i], var[i])?;
        }
    }
    Ok(())
}

/// Read a table written by [`write_estimates`]; `state_ids` fixes the order.
pub fn read_estimates(reader: impl Read, origin: &Path, state_ids: &[String]) -> Result<Trajectory> {
    let mut blocks = read_blocks(reader, origin, "state_id", state_ids, &["mean", "variance"])?;
    let variances = blocks.columns.pop().expect("two value columns");
    let means = blocks.columns.pop().expect("two value columns");
    Ok(Trajectory {
        timestamps: blocks.timestamps,
        means,
        variances,
    })
}

pub fn state_ids(model: &ValidatedBuilding, layout: &StateLayout) -> Vec<String> {
    (0..layout.dim()).map(|i| state_id(model, layout, i)).collect()
}

/// Root-mean-square error of each zone-air estimate against truth.
pub fn zone_rmse(layout: &StateLayout, traj: &Trajectory, truth: &[DVector<f64>]) -> Vec<f64> {
    let steps = traj.len().min(truth.len()).max(1) as f64;
    layout
        .zone_air_indices()
        .into_iter()
        .map(|idx| {
            let sse: f64 = traj
                .means
                .iter()
                .zip(truth)
                .map(|(m, x)| (m[idx] - x[idx]).powi(2))
                .sum();
            (sse / steps).sqrt()
        })
        .collect()
}
