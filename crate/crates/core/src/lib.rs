//! Closed-orbit invariants for Reeb and geodesic flows on low-dimensional models.

pub mod ad;
pub mod error;
pub mod flow;
pub mod fourier;
pub mod gwf;
pub mod index;
pub mod continuation;
pub mod linalg;
pub mod models;
pub mod orbit;

pub use error::{Error, Result};
