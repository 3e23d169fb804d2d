//! Phase oscillators coupled through smooth, narrow, periodic pulses that
//! arrive after a fixed transmission lag.
//!
//! The crate is `no_std` and needs only `alloc`. It contains the numerical
//! core: the pulse comb, coupling matrices and their nonsymmetric spectra,
//! a method-of-steps RK4 integrator for the delayed equations of motion, an
//! exact event-driven simulator for Dirac pulses, the linearized theory of
//! synchronization and the observables used to measure it. File formats and
//! the command-line harness live in the `pulsesync` crate.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod dde;
pub mod dirac;
mod error;
pub mod lintheory;
pub mod linalg;
pub mod network;
pub mod pulse;
pub mod quad;

pub use error::{Error, Result};
pub use num_complex::Complex64;
