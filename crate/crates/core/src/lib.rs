//! Traveling waves and stationary pulses for an 8-species blood
//! coagulation reaction-diffusion model.
//!
//! The thrombin equation is deformed by a homotopy `F^tau` that decouples
//! it at `tau = 1`, where a pulse is built by quadrature and a cascade of
//! linear problems. Newton continuation then carries the pulse back to the
//! original kinetics at `tau = 0`; it succeeds when the wave speed is
//! positive.

pub mod cli;
pub mod config;
pub mod equilibria;
pub mod error;
pub mod experiments;
pub mod homotopy;
pub mod io;
pub mod kinetics;
pub mod linalg;
pub mod params;
pub mod poly;
pub mod pulses;
pub mod quadrature;
pub mod waves;

pub use error::{Error, Result};
pub use kinetics::HomotopySetup;
pub use params::{KineticParams, State};
