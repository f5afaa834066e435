//! Dynamical backaction rates, complex eigenfrequencies of the coupled
//! system, normal-mode splitting and strong-coupling classification.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{CircuitParams, DriveState, PumpConfig};

/// Coupling regime of a working point, classified on-sideband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CouplingRegime {
    WeakCoupling,
    NormalModeSplit,
    StrongCoupling,
}

impl std::fmt::Display for CouplingRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CouplingRegime::WeakCoupling => "weakCoupling",
            CouplingRegime::NormalModeSplit => "normalModeSplit",
            CouplingRegime::StrongCoupling => "strongCoupling",
        };
        f.write_str(s)
    }
}

/// The two hybridized modes of the pump-coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridizedModes {
    /// Complex eigenfrequency with the larger (real, imag) pair.
    pub omega_plus: Complex64,
    /// Complex eigenfrequency with the smaller (real, imag) pair.
    pub omega_minus: Complex64,
    /// Effective RF linewidth; defined on-sideband below splitting.
    pub gamma_eff: Option<f64>,
    /// Effective HF linewidth; defined on-sideband below splitting.
    pub kappa_eff: Option<f64>,
    /// Full frequency splitting |Re Ω̃+ − Re Ω̃−|.
    pub splitting: f64,
    /// Mean linewidth (κ + Γ0)/2, the strong-coupling yardstick.
    pub mean_linewidth: f64,
    pub regime: CouplingRegime,
}

/// Weak-coupling dynamical backaction (Γpp, δΩ0) of the RF mode:
/// Γpp = −G|g−|² κ/(κ²/4 + (Δ+Ω)²),
/// δΩ0 =  G|g−|² (Δ+Ω)/(κ²/4 + (Δ+Ω)²).
///
/// For a blue-sideband pump and G < 0 the damping Γpp is positive.
pub fn backaction_rates(
    delta: f64,
    omega: f64,
    gain_g: f64,
    g_minus: Complex64,
    kappa: f64,
) -> (f64, f64) {
    let g_sq = g_minus.norm_sqr();
    let denom = kappa * kappa / 4.0 + (delta + omega) * (delta + omega);
    let gamma_pp = -gain_g * g_sq * kappa / denom;
    let delta_omega0 = gain_g * g_sq * (delta + omega) / denom;
    (gamma_pp, delta_omega0)
}

/// Complex eigenfrequencies Ω̃± of the effective RF susceptibility for a
/// pump detuned by δ from the blue sideband:
/// Ω̃± = −Ω0 − δ/2 + i(κ+Γ0)/4 ± sqrt(−G|g−|² − [(κ−Γ0+2iδ)/4]²).
pub fn eigenfrequencies(
    params: &CircuitParams,
    drive: &DriveState,
    pump: &PumpConfig,
) -> HybridizedModes {
    let kappa = drive.kappa_driven;
    let gamma0 = params.gamma0;
    let g_sq = pump.g_sq();
    let gain = drive.gain_g;

    let quarter = Complex64::new(kappa - gamma0, 2.0 * pump.delta) / 4.0;
    let root = (Complex64::new(-gain * g_sq, 0.0) - quarter * quarter).sqrt();
    let base = Complex64::new(-params.omega_rf - pump.delta / 2.0, (kappa + gamma0) / 4.0);
    let mut a = base + root;
    let mut b = base - root;
    if (b.re, b.im) < (a.re, a.im) {
        std::mem::swap(&mut a, &mut b);
    }
    let (omega_minus, omega_plus) = (a, b);

    // on-sideband radicand decides the regime; the boundary (zero) counts
    // as split
    let radicand = (kappa - gamma0) * (kappa - gamma0) / 16.0 + gain * g_sq;
    let regime = if radicand > 0.0 {
        CouplingRegime::WeakCoupling
    } else {
        let half_split = (-radicand).sqrt();
        if half_split > (kappa + gamma0) / 4.0 {
            CouplingRegime::StrongCoupling
        } else {
            CouplingRegime::NormalModeSplit
        }
    };
    let (gamma_eff, kappa_eff) = if pump.delta == 0.0 && radicand > 0.0 {
        (
            Some(2.0 * omega_minus.im),
            Some(2.0 * omega_plus.im),
        )
    } else {
        (None, None)
    };

    HybridizedModes {
        omega_plus,
        omega_minus,
        gamma_eff,
        kappa_eff,
        splitting: (omega_plus.re - omega_minus.re).abs(),
        mean_linewidth: (kappa + gamma0) / 2.0,
        regime,
    }
}

/// Closed-form effective linewidths on-sideband below splitting:
/// Γeff = (κ+Γ0)/2 − sqrt([(κ−Γ0)/2]² + 4G|g−|²), κeff the + branch.
/// Their sum is κ + Γ0 exactly.
pub fn effective_linewidths(
    params: &CircuitParams,
    drive: &DriveState,
    g_minus_mag: f64,
) -> Result<(f64, f64)> {
    let kappa = drive.kappa_driven;
    let gamma0 = params.gamma0;
    let half_diff = (kappa - gamma0) / 2.0;
    let radicand = half_diff * half_diff + 4.0 * drive.gain_g * g_minus_mag * g_minus_mag;
    if radicand < 0.0 {
        return Err(Error::AboveNormalModeSplitting);
    }
    let root = radicand.sqrt();
    Ok(((kappa + gamma0) / 2.0 - root, (kappa + gamma0) / 2.0 + root))
}

/// Coupling |g−| at the onset of normal-mode splitting,
/// (κ − Γ0)/(4 √|G|); `None` when G >= 0 (no splitting for a blue pump).
pub fn nms_threshold(kappa: f64, gamma0: f64, gain_g: f64) -> Option<f64> {
    if gain_g >= 0.0 {
        return None;
    }
    Some((kappa - gamma0).abs() / (4.0 * gain_g.abs().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{angular, example_device, DriveState, PumpConfig};

    fn fig1_drive(params: &CircuitParams) -> DriveState {
        DriveState::from_gain_target(params, -0.35, angular(6e6), Some(angular(300e3))).unwrap()
    }

    #[test]
    fn decoupled_rates_vanish() {
        let (gpp, dw) = backaction_rates(
            angular(452e6),
            -angular(452e6),
            -0.35,
            Complex64::new(0.0, 0.0),
            angular(300e3),
        );
        assert_eq!(gpp, 0.0);
        assert_eq!(dw, 0.0);
    }

    #[test]
    fn on_sideband_damping_is_positive_for_negative_mass() {
        let kappa = angular(300e3);
        let g = Complex64::new(angular(40e3), 0.0);
        let (gpp, dw) = backaction_rates(angular(452e6), -angular(452e6), -0.35, g, kappa);
        let expect = 4.0 * 0.35 * g.norm_sqr() / kappa;
        assert!((gpp - expect).abs() < 1e-9 * expect);
        assert!(gpp > 0.0);
        assert_eq!(dw, 0.0);
    }

    #[test]
    fn rates_are_linear_in_gain() {
        let kappa = angular(300e3);
        let g = Complex64::new(angular(40e3), 0.0);
        for k in -7..=7 {
            let off = kappa * k as f64 / 2.0;
            let (p1, d1) = backaction_rates(off, 0.0, 1.0, g, kappa);
            let (p2, d2) = backaction_rates(off, 0.0, -1.0, g, kappa);
            assert_eq!(p1, -p2);
            assert_eq!(d1, -d2);
        }
    }

    #[test]
    fn decoupled_eigenfrequencies_are_the_bare_modes() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let pump = PumpConfig::off(&params, &drive);
        let modes = eigenfrequencies(&params, &drive, &pump);
        assert_eq!(modes.regime, CouplingRegime::WeakCoupling);
        assert!((modes.omega_minus.re + params.omega_rf).abs() < 1e-6);
        assert!((modes.omega_plus.re + params.omega_rf).abs() < 1e-6);
        let lw = [2.0 * modes.omega_minus.im, 2.0 * modes.omega_plus.im];
        assert!((lw[0] - params.gamma0).abs() < 1e-9 * params.gamma0);
        assert!((lw[1] - drive.kappa_driven).abs() < 1e-9 * drive.kappa_driven);
        assert_eq!(modes.gamma_eff, Some(lw[0]));
        assert_eq!(modes.kappa_eff, Some(lw[1]));
    }

    #[test]
    fn trace_rule_holds_for_every_coupling() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let total = drive.kappa_driven + params.gamma0;
        for g_khz in [0.0, 20.0, 60.0, 100.0, 107.0] {
            let (geff, keff) =
                effective_linewidths(&params, &drive, angular(g_khz * 1e3)).unwrap();
            assert!(((geff + keff) - total).abs() <= 1e-12 * total);
        }
    }

    #[test]
    fn above_nms_effective_linewidths_error() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let threshold =
            nms_threshold(drive.kappa_driven, params.gamma0, drive.gain_g).unwrap();
        assert!(effective_linewidths(&params, &drive, 1.01 * threshold).is_err());
        assert!(effective_linewidths(&params, &drive, 0.99 * threshold).is_ok());
    }

    #[test]
    fn nms_threshold_matches_the_quoted_point() {
        // κ = 2π·300 kHz, Γ0 = 2π·45 kHz, G = −0.35 → |g−| ≈ 2π·107.8 kHz
        let t = nms_threshold(angular(300e3), angular(45e3), -0.35).unwrap();
        assert!((t / angular(1e3) - 107.757).abs() < 0.01, "{}", t / angular(1e3));
        assert!(nms_threshold(angular(300e3), angular(45e3), 1.0).is_none());
    }

    #[test]
    fn eigenfrequency_trace_is_conserved() {
        let params = example_device();
        let drive = fig1_drive(&params);
        for (g_khz, delta_khz) in [(0.0, 0.0), (60.0, 0.0), (200.0, 0.0), (90.0, 150.0)] {
            let pump = PumpConfig::from_g_minus(
                &params,
                &drive,
                angular(delta_khz * 1e3),
                Complex64::new(angular(g_khz * 1e3), 0.0),
            )
            .unwrap();
            let modes = eigenfrequencies(&params, &drive, &pump);
            let total = drive.kappa_driven + params.gamma0;
            assert!(
                ((modes.omega_plus.im + modes.omega_minus.im) - total / 2.0).abs()
                    <= 1e-12 * total
            );
        }
    }

    #[test]
    fn regime_progression_is_monotone() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let mut last = 0u8;
        for k in 0..200 {
            let g = angular(2e3) * k as f64;
            let pump =
                PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(g, 0.0)).unwrap();
            let rank = match eigenfrequencies(&params, &drive, &pump).regime {
                CouplingRegime::WeakCoupling => 0,
                CouplingRegime::NormalModeSplit => 1,
                CouplingRegime::StrongCoupling => 2,
            };
            assert!(rank >= last, "regime regressed at g = {g}");
            last = rank;
        }
        assert_eq!(last, 2);
    }

    #[test]
    fn strong_coupling_point_of_the_split_map() {
        // G = −0.21 with full splitting 2√|G||g−| = 2π·500 kHz
        let params = example_device();
        let drive =
            DriveState::from_gain_target(&params, -0.21, angular(6e6), Some(angular(300e3)))
                .unwrap();
        let g_minus = angular(500e3) / (2.0 * 0.21f64.sqrt());
        assert!((g_minus / angular(1e3) - 545.5).abs() < 0.1);
        let pump =
            PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(g_minus, 0.0)).unwrap();
        let modes = eigenfrequencies(&params, &drive, &pump);
        assert_eq!(modes.regime, CouplingRegime::StrongCoupling);
        assert!(modes.splitting > modes.mean_linewidth);
        // both modes decay at (κ+Γ0)/2
        assert!(
            (2.0 * modes.omega_plus.im - modes.mean_linewidth).abs()
                < 1e-9 * modes.mean_linewidth
        );
        assert!(
            (2.0 * modes.omega_minus.im - modes.mean_linewidth).abs()
                < 1e-9 * modes.mean_linewidth
        );
    }

    #[test]
    fn effective_linewidths_meet_at_the_nms_point() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let threshold =
            nms_threshold(drive.kappa_driven, params.gamma0, drive.gain_g).unwrap();
        // approach the boundary from below; at the exact threshold the
        // radicand sits at rounding level
        let (geff, keff) =
            effective_linewidths(&params, &drive, (1.0 - 1e-6) * threshold).unwrap();
        let mid = (drive.kappa_driven + params.gamma0) / 2.0;
        assert!((geff - mid).abs() < 2e-3 * mid);
        assert!((keff - mid).abs() < 2e-3 * mid);
        // Γeff rises, κeff falls along the way
        let (g_lo, k_lo) = effective_linewidths(&params, &drive, 0.3 * threshold).unwrap();
        let (g_hi, k_hi) = effective_linewidths(&params, &drive, 0.8 * threshold).unwrap();
        assert!(g_lo < g_hi && g_hi < geff);
        assert!(k_lo > k_hi && k_hi > keff);
    }

    #[test]
    fn small_coupling_expansion_matches_backaction_rates() {
        let params = example_device();
        let drive = fig1_drive(&params);
        let kappa = drive.kappa_driven;
        let g = kappa / 10.0;
        let (geff, _) = effective_linewidths(&params, &drive, g).unwrap();
        let series_extra = 4.0 * drive.gain_g.abs() * g * g / (kappa - params.gamma0);
        assert!((geff - params.gamma0 - series_extra).abs() < 0.2 * series_extra);
        // and the series matches the on-sideband weak-coupling rate in
        // the κ >> Γ0 limit
        let (gamma_pp, _) = backaction_rates(
            params.omega_rf,
            -params.omega_rf,
            drive.gain_g,
            Complex64::new(g, 0.0),
            kappa,
        );
        assert!((series_extra - gamma_pp).abs() < 0.2 * gamma_pp.abs());
    }
}
