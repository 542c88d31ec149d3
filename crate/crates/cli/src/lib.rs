//! Experiment drivers and persistence for the NAE-3SAT SDP threshold lab.

pub mod config;
pub mod drivers;
pub mod io;

pub use config::{ExperimentConfig, Manifest, RhoPolicy, TrialRecord};
