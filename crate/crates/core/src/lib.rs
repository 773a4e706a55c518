//! Numerically exact simulator and analysis toolkit for a protocol that
//! entangles two distant trapped ions by joint linear-optical detection of
//! the two photons they emit.
//!
//! The crate covers the full chain of the proposal:
//!
//! - [`fock`]: exact sparse Fock states over labeled optical modes, tensored
//!   with the two ion qubits;
//! - [`optics`]: beam splitters, polarizing splitters, photon loss, detector
//!   models, and the partial Bell-state analyzer with its click-pattern
//!   classification;
//! - [`protocol`]: one entanglement-generation attempt end to end, by exact
//!   enumeration, plus the phase-sensitive single-photon reference scheme;
//! - [`cavity`]: the cavity-enhanced emission probability and the
//!   optimal-finesse analysis;
//! - [`bell`]: CHSH correlators, seeded Monte Carlo experiments and the
//!   fluorescence readout model;
//! - [`timing`]: lightcone constraints for a loophole-free test;
//! - [`budget`]: the closed-form pair-rate budget;
//! - [`cli`]: the `ionherald` command-line tool.
//!
//! All state types are immutable; operations are pure functions.

pub mod bell;
pub mod budget;
pub mod cavity;
pub mod cli;
pub mod constants;
pub mod density;
pub mod error;
pub mod fock;
pub mod optics;
pub mod protocol;
pub mod report;
pub mod timing;

pub use error::{Error, Result};
