//! Simulation and analysis toolkit for a teleportation-based programmable
//! SIGN gate: gate model, Choi-matrix process algebra, synthetic coincidence
//! counts, maximum-likelihood process tomography, figures of merit and the
//! fixed unitary correction.

pub mod choi;
pub mod cli;
pub mod correction;
pub mod error;
pub mod formats;
pub mod gate;
pub mod linalg;
pub mod metrics;
pub mod simplex;
pub mod sim;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
