//! Zero-order-hold discretization and per-interval step operators.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::FlowDynamics;
use crate::error::{Error, Result};

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// ZOH discretization: `Φ = exp(H·dt)`, `Γ = ∫₀^dt exp(H·s) ds · B`.
///
/// Both come out of one exponential of the augmented matrix
/// `[[H, B], [0, 0]]·dt`, whose top blocks are `[Φ, Γ]`.
pub fn discretize(
    h: &DMatrix<f64>,
    b: &DMatrix<f64>,
    dt: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be > 0, got {dt}")));
    }
    let n = h.nrows();
    if h.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "H is {}x{}, B is {}x{}",
            h.nrows(),
            h.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    check_finite(h, "dynamics matrix")?;
    check_finite(b, "input matrix")?;
    let p = b.ncols();
    let mut aug = DMatrix::zeros(n + p, n + p);
    aug.view_mut((0, 0), (n, n)).copy_from(&(h * dt));
    aug.view_mut((0, n), (n, p)).copy_from(&(b * dt));
    let e = aug.exp();
    check_finite(&e, "matrix exponential")?;
    let phi = e.view((0, 0), (n, n)).into_owned();
    let gamma = e.view((0, n), (n, p)).into_owned();
    Ok((phi, gamma))
}

/// Transition over one data interval made of `substeps` ZOH steps, with the
/// process noise accumulated across the substeps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperator {
    pub phi: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    /// `Σ_{i<s} Φ_dt^i Q Φ_dt^iᵀ`; zero when no process noise is configured.
    pub process: DMatrix<f64>,
}

impl StepOperator {
    pub fn build(
        h: &DMatrix<f64>,
        b: &DMatrix<f64>,
        dt: f64,
        substeps: usize,
        q_diag: Option<&DVector<f64>>,
    ) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::invalid("at least one substep is required"));
        }
        let n = h.nrows();
        let (phi_dt, gamma_dt) = discretize(h, b, dt)?;
        let q = match q_diag {
            Some(q) if q.len() != n => {
                return Err(Error::Dimension(format!(
                    "process noise has {} entries for {n} states",
                    q.len()
                )))
            }
            Some(q) => DMatrix::from_diagonal(q),
            None => DMatrix::zeros(n, n),
        };
        let mut phi = phi_dt.clone();
        let mut gamma = gamma_dt.clone();
        let mut process = q.clone();
        for _ in 1..substeps {
            // x_{s+1} = Φ_dt x_s + Γ_dt u
            gamma = &phi_dt * &gamma + &gamma_dt;
            process = &phi_dt * &process * phi_dt.transpose() + &q;
            phi = &phi_dt * &phi;
        }
        process = (&process + process.transpose()) * 0.5;
        Ok(StepOperator {
            phi,
            gamma,
            process,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }
}

/// Step operators keyed by the supply-air flows that shaped `H`.
///
/// Flow schedules repeat, so a year of hourly data usually needs only a
/// handful of matrix exponentials.
#[derive(Debug, Clone)]
pub struct DiscretizationCache {
    dynamics: Arc<FlowDynamics>,
    dt: f64,
    substeps: usize,
    q_diag: Option<DVector<f64>>,
    entries: HashMap<Vec<u64>, Arc<StepOperator>>,
}

impl DiscretizationCache {
    pub fn new(
        dynamics: Arc<FlowDynamics>,
        dt: f64,
        substeps: usize,
        q_diag: Option<DVector<f64>>,
    ) -> Self {
        DiscretizationCache {
            dynamics,
            dt,
            substeps,
            q_diag,
            entries: HashMap::new(),
        }
    }

    pub fn dynamics(&self) -> &FlowDynamics {
        &self.dynamics
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&mut self, mdot: &[f64]) -> Result<Arc<StepOperator>> {
        let key: Vec<u64> = self
            .dynamics
            .flow_terms
            .iter()
            .map(|t| mdot.get(t.zone).copied().unwrap_or(f64::NAN).to_bits())
            .collect();
        if let Some(op) = self.entries.get(&key) {
            return Ok(Arc::clone(op));
        }
        let h = self.dynamics.at(mdot)?;
        let op = Arc::new(StepOperator::build(
            &h,
            &self.dynamics.b,
            self.dt,
            self.substeps,
            self.q_diag.as_ref(),
        )?);
        self.entries.insert(key, Arc::clone(&op));
        Ok(op)
    }
}
