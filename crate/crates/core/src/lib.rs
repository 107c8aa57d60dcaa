//! Reduced-order RC thermal models of multi-zone buildings, with full and
//! cluster-decomposed Kalman estimation of zone temperatures and loads.

pub mod building;
pub mod error;
pub mod filtering;
pub mod inputs;
pub mod state_space;
pub mod synth;
pub mod table;
pub mod wcs;

pub use error::{Error, Result};
