//! Command-line driver for noisy rotation-channel discrimination: grid
//! sweeps, optimizer runs, ratio boundaries and hybrid coherence curves.

pub mod boundary;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{ProtocolId, SweepSpec};
pub use error::CliError;
