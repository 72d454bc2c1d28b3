//! Glauber birth-and-death dynamics for continuum particle systems.

pub mod config;
pub mod configuration;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod operators;
pub mod potentials;
pub mod report;

pub use error::{Error, Result};
