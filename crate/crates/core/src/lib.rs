//! Small-signal and time-domain tools for deciding when a phasor (RMS) model of
//! a droop-controlled grid-forming converter can stand in for a full
//! electromagnetic-transient (EMT) model.
//!
//! - [`ratfun`]: polynomial and rational transfer-function algebra.
//! - [`plant`]: converter data model, operating point and the EMT/RMS
//!   power-angle, closed-loop and mismatch transfer functions.
//! - [`stability`]: Routh-Hurwitz conditions, closed-loop poles, root locus.
//! - [`margins`]: gain/phase margins, crossover frequencies, tuning rules.
//! - [`simulate`]: nonlinear EMT and RMS step-response simulation.
//! - [`cli`]: config files, reports, CSV output and the command layer behind
//!   the `gfpc` binary.

pub mod cli;
pub mod error;
pub mod margins;
pub mod plant;
pub mod ratfun;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
pub use plant::{ControlParams, ConverterParams, ModelKind, OperatingPoint};
pub use ratfun::{Polynomial, RationalTf};
