//! Brownian tandem queues, semi-discrete Brownian last-passage percolation
//! and reflected Brownian particles on a shared sampled environment, with
//! the discrete exponential counterparts and Monte Carlo checks of their
//! limit behaviour.
//!
//! Path-valued code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, with `*32` variants for single precision.

pub mod config;
pub mod discrete;
pub mod error;
pub mod lpp;
pub mod path;
pub mod queue;
pub mod runner;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod tabep;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = path::Grid<f64>;
pub type Path = path::SampledPath<f64>;
pub type Environment = path::Environment<f64>;
pub type Profile = path::Profile<f64>;
pub type Field = lpp::LppField<f64>;
pub type Tandem = queue::TandemState<f64>;
pub type Particles = tabep::ParticleSystem<f64>;
pub type Weights = discrete::WeightTable<f64>;
pub type Departures = discrete::DepartureMatrix<f64>;

pub type Grid32 = path::Grid<f32>;
pub type Path32 = path::SampledPath<f32>;
pub type Environment32 = path::Environment<f32>;
pub type Profile32 = path::Profile<f32>;
pub type Field32 = lpp::LppField<f32>;
pub type Tandem32 = queue::TandemState<f32>;
pub type Particles32 = tabep::ParticleSystem<f32>;
