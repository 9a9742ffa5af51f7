//! Simulation core for virtual-world beam selection.
//!
//! Everything here is pure computation over `alloc`: scene geometry and
//! occlusion, a scripted UAV trajectory, geometric multipath channel
//! synthesis, DFT codebooks with exhaustive beam-pair search, the stepwise
//! INLOOP environment, and the oracle / baseline / tabular Q-learning
//! policies. File formats and the command line live in the `caviar` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod beamcodec;
pub mod channel;
pub mod episodes;
mod error;
pub mod rlenv;
pub mod seed;
pub mod world;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub use num_complex::Complex64;
