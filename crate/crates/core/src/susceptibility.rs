//! The susceptibility family of the linearized theory, as pure
//! complex-valued functions of frequency.
//!
//! All functions take angular frequencies and are evaluated lazily per
//! point; grid handling lives in [`crate::spectra`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{CircuitParams, DriveState, PumpConfig};

/// Tags for the members of the χ family implemented below.
///
/// | tag                   | function                        |
/// |-----------------------|---------------------------------|
/// | `Mechanical`          | [`chi_mechanical`]              |
/// | `Generalized`         | [`chi_generalized`]             |
/// | `PumpFrame0`          | [`chi_pump_frame`] (direct)     |
/// | `PumpFrameConj2`      | [`chi_pump_frame`] (conjugate)  |
/// | `RfConj`              | [`chi_rf_bare`]                 |
/// | `KerrDressed`         | [`chi_kerr_dressed`]            |
/// | `HfEffective`         | [`chi_hf_effective`]            |
/// | `RfEffective`         | [`chi_rf_effective`]            |
/// | `HfEffectiveFactored` | [`chi_hf_effective_factored`]   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SusceptibilityKind {
    Mechanical,
    Generalized,
    PumpFrame0,
    PumpFrameConj2,
    RfConj,
    KerrDressed,
    HfEffective,
    RfEffective,
    HfEffectiveFactored,
}

impl SusceptibilityKind {
    pub const ALL: [SusceptibilityKind; 9] = [
        SusceptibilityKind::Mechanical,
        SusceptibilityKind::Generalized,
        SusceptibilityKind::PumpFrame0,
        SusceptibilityKind::PumpFrameConj2,
        SusceptibilityKind::RfConj,
        SusceptibilityKind::KerrDressed,
        SusceptibilityKind::HfEffective,
        SusceptibilityKind::RfEffective,
        SusceptibilityKind::HfEffectiveFactored,
    ];
}

/// Mechanical susceptibility χm(ω) = 1/(2mω0) · 1/(κ/2 + i(ω − ω0)).
///
/// The sign of the mass is free; a negative mass negates the whole
/// response, χ₋(ω) = −χ₊(ω).
pub fn chi_mechanical(omega: f64, omega0: f64, kappa: f64, mass: f64) -> Result<Complex64> {
    if mass == 0.0 {
        return Err(Error::ZeroMass);
    }
    debug_assert!(omega0 > 0.0 && kappa > 0.0);
    let prefactor = 1.0 / (2.0 * mass * omega0);
    Ok(prefactor / Complex64::new(kappa / 2.0, omega - omega0))
}

/// Generalized susceptibility χG(Ω) = G/(κ/2 + i(Δ + Ω)).
///
/// `detuning` is the resonance offset Δ; probing at Ω = −Δ hits the
/// resonance. G = 1 is an ordinary cavity, G > 1 intracavity
/// amplification, G < 0 a negative-mass mode.
pub fn chi_generalized(omega: f64, detuning: f64, kappa: f64, gain_g: f64) -> Complex64 {
    debug_assert!(kappa > 0.0);
    gain_g / Complex64::new(kappa / 2.0, detuning + omega)
}

/// Bare RF susceptibility of the conjugate quadrature,
/// χ̄0(Ω) = 1/(Γ0/2 + i(Ω + Ω0)).
pub fn chi_rf_bare(omega: f64, gamma0: f64, omega_rf: f64) -> Complex64 {
    1.0 / Complex64::new(gamma0 / 2.0, omega + omega_rf)
}

/// Pump-frame susceptibilities of the driven Kerr cavity:
/// the direct component χp,0 = 1/(κ/2 + i(Δp − 2K nd + Ω)) for
/// `conjugate_shifted = false`, the four-wave-mixed conjugate component
/// χ̄p,2 = 1/(κ/2 − i(Δp − 2K nd − Ω + 2Ωdp)) for `true`.
#[allow(clippy::too_many_arguments)]
pub fn chi_pump_frame(
    omega: f64,
    delta_p: f64,
    kerr: f64,
    n_d: f64,
    kappa: f64,
    conjugate_shifted: bool,
    omega_dp: f64,
) -> Complex64 {
    debug_assert!(kappa > 0.0 && n_d >= 0.0);
    let shifted = delta_p - 2.0 * kerr * n_d;
    if conjugate_shifted {
        1.0 / Complex64::new(kappa / 2.0, -(shifted - omega + 2.0 * omega_dp))
    } else {
        1.0 / Complex64::new(kappa / 2.0, shifted + omega)
    }
}

/// Kerr-dressed cavity susceptibility χg = χp/(1 − K²nd² χp χ̄p),
/// evaluated in the drive frame (`omega` is the probe offset ω − ωd).
///
/// Near the idler offset +Ωi this approaches G·χc with
/// χc⁻¹ = κ/2 + i(ω − ω0); the match tightens as Ωi/κ grows.
pub fn chi_kerr_dressed(
    omega: f64,
    drive: &DriveState,
    params: &CircuitParams,
) -> Result<Complex64> {
    let kn = params.kerr * drive.n_d;
    let cp = chi_pump_frame(
        omega,
        drive.delta_d,
        params.kerr,
        drive.n_d,
        drive.kappa_driven,
        false,
        0.0,
    );
    let cp_conj = chi_pump_frame(
        omega,
        drive.delta_d,
        params.kerr,
        drive.n_d,
        drive.kappa_driven,
        true,
        0.0,
    );
    let denom = Complex64::new(1.0, 0.0) - kn * kn * cp * cp_conj;
    if denom.norm() < 1e-12 {
        return Err(Error::SusceptibilitySingularity {
            denom_mag: denom.norm(),
        });
    }
    Ok(cp / denom)
}

/// Effective RF susceptibility under sideband pumping,
/// χ̄0eff(Ω) = 1/(Γ0/2 + i(Ω + Ω0) − |g−|² χG(Ω)), with the pump-sideband
/// detuning entering through Δ = Ω0 + δ.
pub fn chi_rf_effective(
    omega: f64,
    params: &CircuitParams,
    drive: &DriveState,
    pump: &PumpConfig,
) -> Complex64 {
    let chi_g = chi_generalized(
        omega,
        params.omega_rf + pump.delta,
        drive.kappa_driven,
        drive.gain_g,
    );
    1.0 / (Complex64::new(params.gamma0 / 2.0, omega + params.omega_rf) - pump.g_sq() * chi_g)
}

/// Effective HF susceptibility χGeff = χG/(1 − |g−|² χG χ̄0).
pub fn chi_hf_effective(
    omega: f64,
    params: &CircuitParams,
    drive: &DriveState,
    pump: &PumpConfig,
) -> Complex64 {
    let chi_g = chi_generalized(
        omega,
        params.omega_rf + pump.delta,
        drive.kappa_driven,
        drive.gain_g,
    );
    let chi_rf = chi_rf_bare(omega, params.gamma0, params.omega_rf);
    chi_g / (Complex64::new(1.0, 0.0) - pump.g_sq() * chi_g * chi_rf)
}

/// Factored form of χGeff valid on-sideband (δ = 0) below normal-mode
/// splitting:
/// χGeff = G (Γ0/2 + iu) / ([Γeff/2 + iu][κeff/2 + iu]), u = Ω + Ω0.
pub fn chi_hf_effective_factored(
    omega: f64,
    gain_g: f64,
    gamma0: f64,
    gamma_eff: f64,
    kappa_eff: f64,
    omega_rf: f64,
) -> Complex64 {
    let u = omega + omega_rf;
    let numer = Complex64::new(gamma0 / 2.0, u);
    let d1 = Complex64::new(gamma_eff / 2.0, u);
    let d2 = Complex64::new(kappa_eff / 2.0, u);
    gain_g * numer / (d1 * d2)
}
