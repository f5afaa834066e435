//! Property tests over randomized parameters.

use num_complex::Complex64;
use proptest::prelude::*;
use pptk_core::backaction::effective_linewidths;
use pptk_core::kerr::steady_state_photon_number;
use pptk_core::params::{angular, example_device, ordinary, DriveState};
use pptk_core::susceptibility::{chi_generalized, chi_pump_frame};

proptest! {
    #[test]
    fn angular_ordinary_round_trip(hz in 1e-3f64..1e12) {
        let back = ordinary(angular(hz));
        prop_assert!(((back - hz) / hz).abs() < 1e-15);
    }

    #[test]
    fn conjugate_pump_component_is_the_mirrored_conjugate(
        omega_khz in -5e3f64..5e3,
        delta_p_khz in -5e3f64..5e3,
        kerr_khz in -50f64..50.0,
        n_d in 0f64..2e3,
        kappa_khz in 1f64..1e3,
        omega_dp_khz in -1e4f64..1e4,
    ) {
        let (omega, delta_p, kerr, kappa, omega_dp) = (
            angular(omega_khz * 1e3),
            angular(delta_p_khz * 1e3),
            angular(kerr_khz * 1e3),
            angular(kappa_khz * 1e3),
            angular(omega_dp_khz * 1e3),
        );
        let conj2 = chi_pump_frame(omega, delta_p, kerr, n_d, kappa, true, omega_dp);
        let mirrored =
            chi_pump_frame(-omega + 2.0 * omega_dp, delta_p, kerr, n_d, kappa, false, 0.0).conj();
        prop_assert!((conj2 - mirrored).norm() <= 1e-12 * mirrored.norm().max(1e-300));
    }

    #[test]
    fn generalized_susceptibility_negation_law(
        omega_khz in -5e3f64..5e3,
        detuning_khz in -5e3f64..5e3,
        kappa_khz in 1f64..1e3,
        gain in 0.01f64..3.0,
    ) {
        let plus = chi_generalized(
            angular(omega_khz * 1e3),
            angular(detuning_khz * 1e3),
            angular(kappa_khz * 1e3),
            gain,
        );
        let minus = chi_generalized(
            angular(omega_khz * 1e3),
            angular(detuning_khz * 1e3),
            angular(kappa_khz * 1e3),
            -gain,
        );
        prop_assert_eq!(minus, -plus);
    }

    #[test]
    fn trace_rule_for_random_working_points(
        kappa_khz in 50f64..1000.0,
        gamma_frac in 0.01f64..0.33,
        gain in -1.0f64..-0.05,
        coupling_frac in 0f64..0.999,
    ) {
        let kappa = angular(kappa_khz * 1e3);
        let gamma0 = gamma_frac * kappa;
        let g = coupling_frac * (kappa - gamma0) / (4.0 * gain.abs().sqrt());
        let params = pptk_core::CircuitParams::from_angular(
            angular(452e6), gamma0, 0.0, angular(7.211e9),
            kappa, 0.2 * kappa, angular(175e3), angular(-5e3),
        ).unwrap();
        let drive = DriveState::from_gain_target(&params, gain, 20.0 * kappa, Some(kappa)).unwrap();
        let (geff, keff) = effective_linewidths(&params, &drive, g).unwrap();
        let total = kappa + gamma0;
        prop_assert!(((geff + keff) - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn steady_state_roots_satisfy_the_cubic(
        flux in 0.1f64..1e4,
        delta in -6f64..6.0,
        kerr in -0.4f64..0.4,
    ) {
        let (kappa, kappa_e) = (1.0, 0.2);
        for branch in steady_state_photon_number(flux, delta, kerr, kappa, kappa_e) {
            let n = branch.n_d;
            let dk = delta - kerr * n;
            let lhs = n * (0.25 + dk * dk);
            let rhs = kappa_e * flux;
            let scale = lhs.abs() + rhs.abs();
            prop_assert!((lhs - rhs).abs() < 1e-9 * scale, "residual at n = {}", n);
        }
    }

    #[test]
    fn idler_symmetry_under_sign_flip(
        delta in 0.5f64..8.0,
        kerr in 0.01f64..0.4,
        n_d in 0f64..10.0,
    ) {
        // red-detuned with negative Kerr vs the mirror image
        let a = pptk_core::kerr::idler_frequency(-delta, -kerr, n_d);
        let b = pptk_core::kerr::idler_frequency(delta, kerr, n_d);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "asymmetric stability"),
        }
    }

    #[test]
    fn two_mode_reflection_tends_to_unity(
        offset_khz in an_offset(),
        gain in -1.0f64..2.0,
    ) {
        let params = example_device();
        let omega_d = params.omega_hf;
        let s = pptk_core::kerr::two_mode_reflection(
            omega_d + angular(offset_khz * 1e3),
            omega_d,
            angular(3e6),
            angular(300e3),
            params.kappa_e,
            gain,
        );
        // far off resonance both susceptibility tails vanish
        prop_assert!((s - Complex64::new(1.0, 0.0)).norm() < 0.02);
    }
}

fn an_offset() -> impl Strategy<Value = f64> {
    prop_oneof![-4e5f64..-1e5, 1e5f64..4e5]
}
