//! Experiment harness around `dmimo-core`: JSON configuration, parallel
//! Monte-Carlo sweeps, SNR maps, capacity comparisons and their CSV outputs.

pub mod compare;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod snrmap;
pub mod sweep;
pub mod tables;

pub use config::SimConfig;
pub use error::{Result, SimError};
pub use sweep::{run_sweep, Context, SweepOutput};
