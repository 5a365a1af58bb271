//! Optically pumped spin-to-rotation angular momentum transfer in a crystal
//! hosting NV–P1 pairs: rotor trajectories, golden-rule rates, spin-phonon
//! channels, and experiment-design estimates.

pub mod cli;
pub mod config;
pub mod error;
pub mod numerics;
pub mod params;
pub mod phonon;
pub mod rates;
pub mod design;
pub mod dipolar;
pub mod rotor;
pub mod verify;

pub use error::{Error, Result};
