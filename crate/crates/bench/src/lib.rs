//! Shared fixtures for the benchmark targets.

use num_complex::Complex64;
use pptk_core::params::{angular, example_device, CircuitParams, DriveState, PumpConfig};
use pptk_core::BathOccupations;

/// The device constants with the driven working point used throughout
/// the benchmarks (G = −0.35, Ωi = 20 κ).
pub fn driven_setup() -> (CircuitParams, DriveState, PumpConfig, BathOccupations) {
    let params = example_device();
    let drive =
        DriveState::from_gain_target(&params, -0.35, angular(6e6), Some(angular(300e3)))
            .expect("valid working point");
    let pump = PumpConfig::from_g_minus(
        &params,
        &drive,
        0.0,
        Complex64::new(angular(60e3), 0.0),
    )
    .expect("valid pump");
    let baths = BathOccupations::uniform(13.0, 0.0, 11.0).expect("valid baths");
    (params, drive, pump, baths)
}
