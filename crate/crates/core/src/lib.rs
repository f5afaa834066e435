//! Forward models and inverse fits for photon-pressure circuits in which
//! a strongly driven Kerr cavity hosts an effective negative-mass
//! microwave mode.
//!
//! The crate synthesizes reflection spectra, output noise spectra,
//! backaction curves and cooling curves from circuit parameters, fits
//! measured spectra back to those parameters, and carries an independent
//! unapproximated linear-response oracle for validating the reduced
//! models it uses.
//!
//! Internally every frequency is angular (rad/s); every external
//! interface (JSON, CSV, CLI) speaks ordinary Hz. All model evaluation
//! is pure and thread-safe.

pub mod backaction;
pub mod cooling;
pub mod error;
pub mod fitting;
pub mod io;
pub mod kerr;
pub mod oracle;
pub mod params;
pub mod spectra;
pub mod susceptibility;

pub use backaction::{CouplingRegime, HybridizedModes};
pub use cooling::OccupationResult;
pub use error::{Error, Result};
pub use fitting::{FitModel, FitProblem, FitResult, FreeParam, PsdContext};
pub use kerr::SteadyStateBranch;
pub use params::{
    angular, ordinary, BathOccupations, CircuitParams, DriveState, PumpConfig,
};
pub use spectra::{Spectrum, SpectrumData, SpectrumKind};
pub use susceptibility::SusceptibilityKind;

pub use num_complex::Complex64;
