//! Link-level simulation core for distributed and centralized massive MIMO
//! downlinks in an indoor office.
//!
//! The crate is `no_std` (with `alloc`); file formats, configuration files and
//! the command line live in the companion `dmimo-sim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod modulation;
pub mod powalloc;
pub mod precoding;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
