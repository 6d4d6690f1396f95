//! Steady-state simulation of a coherently driven trapped ion coupled to a
//! two-polarization optical cavity, together with the classical
//! photon-budget, resonator and trap-characterization arithmetic that goes
//! with it.
//!
//! Units: angular frequencies (rad/s) everywhere inside the library, with
//! ħ = 1. Conversion from linear frequencies happens at the configuration
//! boundary.

pub mod cavity_model;
pub mod error;
pub mod ion_model;
pub mod lineshape;
pub mod optimize;
pub mod photometrics;
pub mod qspace;
pub mod resonator;
pub mod selftest;
pub mod steadystate;
pub mod trapchar;

pub use error::{Category, Error, Result};
