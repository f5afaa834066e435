//! Strong-drive working point of the Kerr cavity: steady-state photon
//! number, idler frequency, gain factor and the two-mode (signal/idler)
//! reflection model of the driven response.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One steady-state branch of the driven Kerr cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateBranch {
    /// Intracavity drive photon number.
    pub n_d: f64,
    /// Stable under the slope criterion d(flux)/d(n_d) > 0.
    pub stable: bool,
}

/// Steady-state intracavity photon numbers for a drive of photon flux
/// `flux` (photons/s at the feedline), solving
/// n_d [(κ/2)² + (Δd − K n_d)²] = κe · flux.
///
/// Returns all real non-negative roots sorted ascending in `n_d`, each
/// flagged stable/unstable. `flux = 0` returns the undriven fixed point.
pub fn steady_state_photon_number(
    flux: f64,
    delta_d: f64,
    kerr: f64,
    kappa: f64,
    kappa_e: f64,
) -> Vec<SteadyStateBranch> {
    assert!(flux >= 0.0, "photon flux must be >= 0");
    let half_k_sq = (kappa / 2.0) * (kappa / 2.0);
    let rhs = kappa_e * flux;
    if rhs == 0.0 {
        return vec![SteadyStateBranch {
            n_d: 0.0,
            stable: true,
        }];
    }
    if kerr == 0.0 {
        let n = rhs / (half_k_sq + delta_d * delta_d);
        return vec![SteadyStateBranch { n_d: n, stable: true }];
    }

    // K² n³ − 2 Δd K n² + (Δd² + κ²/4) n − κe·flux = 0, normalized monic.
    let a2 = -2.0 * delta_d / kerr;
    let a1 = (delta_d * delta_d + half_k_sq) / (kerr * kerr);
    let a0 = -rhs / (kerr * kerr);

    let mut roots: Vec<f64> = cubic_roots_monic(a2, a1, a0)
        .into_iter()
        .filter(|n| *n > 0.0)
        .collect();
    // Newton polish on the original cubic for tight residuals.
    for n in roots.iter_mut() {
        for _ in 0..3 {
            let dk = delta_d - kerr * *n;
            let f = *n * (half_k_sq + dk * dk) - rhs;
            let df = half_k_sq + dk * (delta_d - 3.0 * kerr * *n);
            if df.abs() > 0.0 {
                let step = f / df;
                if step.is_finite() && step.abs() < 0.5 * n.abs().max(1e-300) {
                    *n -= step;
                }
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
    roots
        .into_iter()
        .map(|n| {
            let slope = half_k_sq + (delta_d - kerr * n) * (delta_d - 3.0 * kerr * n);
            SteadyStateBranch {
                n_d: n,
                stable: slope > 0.0,
            }
        })
        .collect()
}

/// Real roots of x³ + a2 x² + a1 x + a0.
fn cubic_roots_monic(a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    // depressed cubic t³ + p t + q with x = t − a2/3
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc > 0.0 {
        // three distinct real roots (trigonometric form; p < 0 here)
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    } else {
        // one real root (Cardano, cancellation-safe branch)
        let half_q = q / 2.0;
        let r = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = if half_q >= 0.0 { -half_q - r } else { -half_q + r };
        let s = u.cbrt();
        let t = if s != 0.0 { s - p / (3.0 * s) } else { 0.0 };
        vec![t - shift]
    }
}

/// Idler offset Ωi = sqrt((Δd − K nd)(Δd − 3 K nd)) from the drive.
///
/// A negative radicand signals a dynamically unstable working point.
pub fn idler_frequency(delta_d: f64, kerr: f64, n_d: f64) -> Result<f64> {
    let radicand = (delta_d - kerr * n_d) * (delta_d - 3.0 * kerr * n_d);
    if radicand < 0.0 {
        return Err(Error::UnstableWorkingPoint { radicand });
    }
    Ok(radicand.sqrt())
}

/// Gain factor G ≈ (Ωi − Δd + 2 K nd)/(2 Ωi) of the idler quasi-mode.
pub fn gain_factor(delta_d: f64, kerr: f64, n_d: f64) -> Result<f64> {
    let omega_i = idler_frequency(delta_d, kerr, n_d)?;
    gain_at(delta_d, kerr, n_d, omega_i)
}

/// Gain factor of the signal quasi-mode (Ωi → −Ωi); satisfies
/// G_s = 1 − G_i exactly.
pub fn gain_factor_signal(delta_d: f64, kerr: f64, n_d: f64) -> Result<f64> {
    let omega_i = idler_frequency(delta_d, kerr, n_d)?;
    gain_at(delta_d, kerr, n_d, -omega_i)
}

fn gain_at(delta_d: f64, kerr: f64, n_d: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroIdlerFrequency);
    }
    Ok((omega - delta_d + 2.0 * kerr * n_d) / (2.0 * omega))
}

/// Two-mode reflection of the driven cavity:
/// S11 = 1 − κe (1 − G) χs − κe G χi, with the signal resonance at
/// ωd − Ω0 and the idler resonance at ωd + Ω0.
pub fn two_mode_reflection(
    omega: f64,
    omega_d: f64,
    omega0_idler: f64,
    kappa: f64,
    kappa_e: f64,
    gain_g: f64,
) -> Complex64 {
    let chi_s = 1.0 / Complex64::new(kappa / 2.0, omega - omega_d + omega0_idler);
    let chi_i = 1.0 / Complex64::new(kappa / 2.0, omega - omega_d - omega0_idler);
    Complex64::new(1.0, 0.0) - kappa_e * (1.0 - gain_g) * chi_s - kappa_e * gain_g * chi_i
}

/// Detuning magnitude above which the Kerr cavity bifurcates, (√3/2) κ.
pub fn bifurcation_detuning_threshold(kappa: f64) -> f64 {
    3f64.sqrt() / 2.0 * kappa
}
