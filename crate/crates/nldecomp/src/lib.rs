//! Diagnostics and residual-learning toolkit for dynamic nonlinear systems.
//!
//! The crate decomposes measured input/output records into a static
//! nonlinearity and a dynamic residual (Y = G + h), computes scalar
//! behavioral indicators and bounds from the decomposition, and compares
//! full-distortion learning against structured residual learning on
//! synthetic power-amplifier-like systems.
//!
//! See the `book/` guide for a narrative walk-through of the concepts.

pub mod decomp;
pub mod error;
mod fft;
pub mod indicators;
pub mod learner;
pub mod lipschitz;
pub mod signals;
pub mod spectrum;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
