//! Fault-tolerant error correction on the 3D bcc cluster state concatenated
//! with small inner codes.
//!
//! The crate is organised bottom-up:
//!
//! - [`inner_codes`]: the six inner codes and their detect-and-erase readout.
//! - [`lattice`]: bcc lattice geometry, cube checks and the logical cut.
//! - [`noise`]: phenomenological, circuit-level and Z-biased noise samplers.
//! - [`circuit`]: CZ gate schedules, Pauli frame propagation and the
//!   detectability checker.
//! - [`decoder`]: inner erasure conversion followed by exact minimum-weight
//!   perfect matching on the outer lattice.
//! - [`montecarlo`]: reproducible parallel trial runner with Wilson intervals.
//! - [`analysis`]: effective rates, finite-size scaling fits, biased-noise
//!   counting and overhead estimates.

pub mod analysis;
pub mod circuit;
pub mod decoder;
pub mod error;
pub mod inner_codes;
pub mod lattice;
pub mod montecarlo;
pub mod noise;

pub use error::{Error, Result};
