//! Localized quanta of a free Dirac field in a 1+1 dimensional cavity with
//! MIT bag walls: cavity spectra, global and split-cavity mode bases, the
//! Bogoliubov coefficients connecting them, and vacuum observables.
//!
//! Lengths are in units of the cavity length `R`; the mass enters as `mR`.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod cli;
pub mod config;
pub mod error;
pub mod evolution;
pub mod io;
pub mod modes;
pub mod observables;
pub mod quadrature;
pub mod spectrum;
pub mod sum;

pub use config::FieldConfig;
pub use error::{Error, Result};
