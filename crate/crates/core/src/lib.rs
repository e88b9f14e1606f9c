//! Pseudospectral laboratory for coupled Schrödinger–transport systems of
//! generalized Benney type and their subsonic (ε → 0) limit.

pub mod error;
pub mod experiments;
pub mod initial_data;
pub mod integrators;
pub mod io;
pub mod models;
pub mod norms;
pub mod spectral;

pub use error::{Error, Result};
