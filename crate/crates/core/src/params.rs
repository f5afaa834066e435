//! Physical parameters and unit conventions.
//!
//! Every quantity inside the crate is an angular frequency in rad/s. All
//! external I/O (CLI flags, JSON files, CSV columns) uses ordinary
//! frequency in Hz; the conversion happens exactly once, at construction,
//! so no 2π factor can go missing in the middle of a formula.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::kerr;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn ordinary(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

/// Static device constants of the two coupled circuits.
///
/// All fields are angular frequencies (rad/s) except `g0` and `kerr`,
/// which are angular rates; `kerr` is signed (negative for the
/// Josephson-junction circuits modelled here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// RF resonance frequency Ω0.
    pub omega_rf: f64,
    /// RF total linewidth Γ0 = Γe + Γi.
    pub gamma0: f64,
    /// RF external linewidth Γe.
    pub gamma_e: f64,
    /// RF internal linewidth Γi.
    pub gamma_i: f64,
    /// Undriven HF resonance frequency ωc.
    pub omega_hf: f64,
    /// HF total linewidth κ = κe + κi (undriven).
    pub kappa: f64,
    /// HF external linewidth κe.
    pub kappa_e: f64,
    /// HF internal linewidth κi.
    pub kappa_i: f64,
    /// Single-photon photon-pressure coupling g0.
    pub g0: f64,
    /// HF Kerr constant K (signed).
    pub kerr: f64,
}

const REQUIRED_KEYS: [&str; 7] = ["Omega0", "Gamma0", "omegaC", "kappa", "kappaE", "g0", "Kerr"];
const OPTIONAL_KEYS: [&str; 1] = ["GammaE"];

impl CircuitParams {
    /// Builds the parameter set from named ordinary frequencies in Hz.
    ///
    /// Required keys: `Omega0`, `Gamma0`, `omegaC`, `kappa`, `kappaE`,
    /// `g0`, `Kerr`. Optional: `GammaE` (defaults to 0; the RF feedline is
    /// not driven in the modelled experiments). Unknown keys are rejected.
    pub fn from_ordinary_frequencies(values: &BTreeMap<String, f64>) -> Result<Self> {
        for key in values.keys() {
            if !REQUIRED_KEYS.contains(&key.as_str()) && !OPTIONAL_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey(key.clone()));
            }
        }
        let get = |key: &str| -> Result<f64> {
            let v = *values
                .get(key)
                .ok_or_else(|| Error::MissingKey(key.to_string()))?;
            if !v.is_finite() {
                return Err(Error::NonFinite(key.to_string()));
            }
            Ok(v)
        };
        let gamma_e_hz = match values.get("GammaE") {
            Some(v) if !v.is_finite() => return Err(Error::NonFinite("GammaE".into())),
            Some(v) => *v,
            None => 0.0,
        };
        Self::from_ordinary(
            get("Omega0")?,
            get("Gamma0")?,
            gamma_e_hz,
            get("omegaC")?,
            get("kappa")?,
            get("kappaE")?,
            get("g0")?,
            get("Kerr")?,
        )
    }

    /// Same constructor with explicit arguments, all in Hz.
    #[allow(clippy::too_many_arguments)]
    pub fn from_ordinary(
        omega_rf_hz: f64,
        gamma0_hz: f64,
        gamma_e_hz: f64,
        omega_hf_hz: f64,
        kappa_hz: f64,
        kappa_e_hz: f64,
        g0_hz: f64,
        kerr_hz: f64,
    ) -> Result<Self> {
        Self::from_angular(
            angular(omega_rf_hz),
            angular(gamma0_hz),
            angular(gamma_e_hz),
            angular(omega_hf_hz),
            angular(kappa_hz),
            angular(kappa_e_hz),
            angular(g0_hz),
            angular(kerr_hz),
        )
    }

    /// Constructor in angular units; enforces all invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_angular(
        omega_rf: f64,
        gamma0: f64,
        gamma_e: f64,
        omega_hf: f64,
        kappa: f64,
        kappa_e: f64,
        g0: f64,
        kerr: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("Omega0", omega_rf),
            ("Gamma0", gamma0),
            ("GammaE", gamma_e),
            ("omegaC", omega_hf),
            ("kappa", kappa),
            ("kappaE", kappa_e),
            ("g0", g0),
            ("Kerr", kerr),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.into()));
            }
        }
        let positive = |name: &str, v: f64| -> Result<()> {
            if v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("must be > 0, got {} Hz", ordinary(v)),
                });
            }
            Ok(())
        };
        positive("Omega0", omega_rf)?;
        positive("omegaC", omega_hf)?;
        positive("Gamma0", gamma0)?;
        positive("kappa", kappa)?;
        positive("kappaE", kappa_e)?;
        if gamma_e < 0.0 || gamma_e > gamma0 {
            return Err(Error::InvalidParameter {
                name: "GammaE".into(),
                reason: "must satisfy 0 <= GammaE <= Gamma0".into(),
            });
        }
        if kappa_e > kappa {
            return Err(Error::InvalidParameter {
                name: "kappaE".into(),
                reason: "must not exceed kappa".into(),
            });
        }
        if g0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "g0".into(),
                reason: "must be >= 0".into(),
            });
        }
        if kappa >= omega_rf {
            return Err(Error::SidebandResolution {
                kappa_hz: ordinary(kappa),
                omega0_hz: ordinary(omega_rf),
            });
        }
        Ok(Self {
            omega_rf,
            gamma0,
            gamma_e,
            gamma_i: gamma0 - gamma_e,
            omega_hf,
            kappa,
            kappa_e,
            kappa_i: kappa - kappa_e,
            g0,
            kerr,
        })
    }

    /// Named map of the constants in ordinary frequency (Hz).
    pub fn to_ordinary_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("Omega0".into(), ordinary(self.omega_rf)),
            ("Gamma0".into(), ordinary(self.gamma0)),
            ("GammaE".into(), ordinary(self.gamma_e)),
            ("omegaC".into(), ordinary(self.omega_hf)),
            ("kappa".into(), ordinary(self.kappa)),
            ("kappaE".into(), ordinary(self.kappa_e)),
            ("g0".into(), ordinary(self.g0)),
            ("Kerr".into(), ordinary(self.kerr)),
        ])
    }

    /// JSON snapshot (Hz units) for spectrum metadata.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self.to_ordinary_map()).expect("map of f64 serializes")
    }
}

/// Strong-drive working point of the HF circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    /// Drive frequency ωd.
    pub omega_d: f64,
    /// Drive detuning Δd = ωd − ωc.
    pub delta_d: f64,
    /// Intracavity drive photon number nd (dimensionless).
    pub n_d: f64,
    /// Idler offset Ωi from the drive, >= 0.
    pub omega_i: f64,
    /// Gain factor G (real, sign free).
    pub gain_g: f64,
    /// HF linewidth at the driven working point.
    pub kappa_driven: f64,
    /// Idler (negative-mass mode) absolute frequency ω0 = ωd + Ωi.
    pub omega_idler: f64,
}

impl DriveState {
    /// Builds a working point directly from (Δd, nd), bypassing the
    /// steady-state cubic. `kappa_driven` falls back to the undriven κ.
    pub fn from_working_point(
        params: &CircuitParams,
        delta_d: f64,
        n_d: f64,
        kappa_driven: Option<f64>,
    ) -> Result<Self> {
        if !delta_d.is_finite() {
            return Err(Error::NonFinite("DeltaD".into()));
        }
        if !n_d.is_finite() || n_d < 0.0 {
            return Err(Error::InvalidParameter {
                name: "nD".into(),
                reason: "must be finite and >= 0".into(),
            });
        }
        let kappa_driven = kappa_driven.unwrap_or(params.kappa);
        if !kappa_driven.is_finite() || kappa_driven <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappaDriven".into(),
                reason: "must be > 0".into(),
            });
        }
        let omega_i = kerr::idler_frequency(delta_d, params.kerr, n_d)?;
        let gain_g = kerr::gain_factor(delta_d, params.kerr, n_d)?;
        let omega_d = params.omega_hf + delta_d;
        Ok(Self {
            omega_d,
            delta_d,
            n_d,
            omega_i,
            gain_g,
            kappa_driven,
            omega_idler: omega_d + omega_i,
        })
    }

    /// Inverts the gain relation: finds the (Δd, nd) pair that places the
    /// idler at offset `omega_i` from the drive with gain factor `gain_g`.
    ///
    /// Real working points exist for G <= 0 and G >= 1 only (G = 1 is the
    /// undriven limit with nd = 0).
    pub fn from_gain_target(
        params: &CircuitParams,
        gain_g: f64,
        omega_i: f64,
        kappa_driven: Option<f64>,
    ) -> Result<Self> {
        if !omega_i.is_finite() || omega_i <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "OmegaI".into(),
                reason: "must be > 0".into(),
            });
        }
        // G = (Ωi − a)/(2Ωi) with a = Δd − 2 K nd and Ωi² = a² − (K nd)².
        let a = (1.0 - 2.0 * gain_g) * omega_i;
        let kn_sq = a * a - omega_i * omega_i;
        if kn_sq < 0.0 {
            return Err(Error::UnreachableGain { gain: gain_g });
        }
        let kn_mag = kn_sq.sqrt();
        let (n_d, kn) = if kn_mag == 0.0 {
            (0.0, 0.0)
        } else if params.kerr == 0.0 {
            return Err(Error::UnreachableGain { gain: gain_g });
        } else {
            // nd >= 0 forces sign(K nd) = sign(K).
            (kn_mag / params.kerr.abs(), params.kerr.signum() * kn_mag)
        };
        let delta_d = a + 2.0 * kn;
        Self::from_working_point(params, delta_d, n_d, kappa_driven)
    }
}

/// Photon-pressure sideband pump configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    /// Pump frequency ωp = ω0 + Ω0 + δ.
    pub omega_p: f64,
    /// Sideband detuning δ = ωp − (ω0 + Ω0).
    pub delta: f64,
    /// Complex multi-photon coupling g−.
    pub g_minus: Complex64,
    /// Pump photon number n− = |γ−|².
    pub n_minus: f64,
}

impl PumpConfig {
    /// Pump with an explicit multi-photon coupling.
    pub fn from_g_minus(
        params: &CircuitParams,
        drive: &DriveState,
        delta: f64,
        g_minus: Complex64,
    ) -> Result<Self> {
        if !delta.is_finite() || !g_minus.re.is_finite() || !g_minus.im.is_finite() {
            return Err(Error::NonFinite("pump".into()));
        }
        let n_minus = if params.g0 > 0.0 {
            g_minus.norm_sqr() / (params.g0 * params.g0)
        } else if g_minus.norm_sqr() == 0.0 {
            0.0
        } else {
            return Err(Error::InvalidParameter {
                name: "gMinus".into(),
                reason: "nonzero coupling requires g0 > 0".into(),
            });
        };
        Ok(Self {
            omega_p: drive.omega_idler + params.omega_rf + delta,
            delta,
            g_minus,
            n_minus,
        })
    }

    /// Pump specified through its intracavity photon number, g− = √(n−) g0.
    pub fn from_photon_number(
        params: &CircuitParams,
        drive: &DriveState,
        delta: f64,
        n_minus: f64,
    ) -> Result<Self> {
        if !n_minus.is_finite() || n_minus < 0.0 {
            return Err(Error::InvalidParameter {
                name: "nMinus".into(),
                reason: "must be finite and >= 0".into(),
            });
        }
        let g = n_minus.sqrt() * params.g0;
        Ok(Self {
            omega_p: drive.omega_idler + params.omega_rf + delta,
            delta,
            g_minus: Complex64::new(g, 0.0),
            n_minus,
        })
    }

    /// Pump switched off (g− = 0, δ = 0).
    pub fn off(params: &CircuitParams, drive: &DriveState) -> Self {
        Self {
            omega_p: drive.omega_idler + params.omega_rf,
            delta: 0.0,
            g_minus: Complex64::new(0.0, 0.0),
            n_minus: 0.0,
        }
    }

    /// |g−|².
    #[inline]
    pub fn g_sq(&self) -> f64 {
        self.g_minus.norm_sqr()
    }
}

/// Thermal occupations of the four baths plus amplifier added noise,
/// all in quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathOccupations {
    pub n_th_rf: f64,
    pub n_e_rf: f64,
    pub n_i_rf: f64,
    pub n_th_hf: f64,
    pub n_e_hf: f64,
    pub n_i_hf: f64,
    pub n_add: f64,
}

impl BathOccupations {
    /// All baths at zero occupation, no added noise.
    pub fn vacuum() -> Self {
        Self::uniform(0.0, 0.0, 0.0).expect("zeros are valid")
    }

    /// Internal and external baths share the same occupation per mode, so
    /// the weighted-mean relation holds trivially.
    pub fn uniform(n_th_rf: f64, n_th_hf: f64, n_add: f64) -> Result<Self> {
        Self::check(&[
            ("nThRF", n_th_rf),
            ("nThHF", n_th_hf),
            ("nAdd", n_add),
        ])?;
        Ok(Self {
            n_th_rf,
            n_e_rf: n_th_rf,
            n_i_rf: n_th_rf,
            n_th_hf,
            n_e_hf: n_th_hf,
            n_i_hf: n_th_hf,
            n_add,
        })
    }

    /// Distinct internal/external bath occupations; the per-mode thermal
    /// occupations are the linewidth-weighted means
    /// n_th = (Γi n_i + Γe n_e)/Γ0 (and the κ analogue).
    pub fn from_split(
        params: &CircuitParams,
        n_e_rf: f64,
        n_i_rf: f64,
        n_e_hf: f64,
        n_i_hf: f64,
        n_add: f64,
    ) -> Result<Self> {
        Self::check(&[
            ("nERF", n_e_rf),
            ("nIRF", n_i_rf),
            ("nEHF", n_e_hf),
            ("nIHF", n_i_hf),
            ("nAdd", n_add),
        ])?;
        let n_th_rf = (params.gamma_i * n_i_rf + params.gamma_e * n_e_rf) / params.gamma0;
        let n_th_hf = (params.kappa_i * n_i_hf + params.kappa_e * n_e_hf) / params.kappa;
        Ok(Self {
            n_th_rf,
            n_e_rf,
            n_i_rf,
            n_th_hf,
            n_e_hf,
            n_i_hf,
            n_add,
        })
    }

    fn check(entries: &[(&str, f64)]) -> Result<()> {
        for (name, v) in entries {
            if !v.is_finite() {
                return Err(Error::NonFinite((*name).into()));
            }
            if *v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: (*name).into(),
                    reason: "occupations must be >= 0".into(),
                });
            }
        }
        Ok(())
    }
}

/// JSON snapshot (Hz units where dimensional) of a full working point,
/// used as spectrum metadata.
pub fn working_point_snapshot(
    params: &CircuitParams,
    drive: Option<&DriveState>,
    pump: Option<&PumpConfig>,
    baths: Option<&BathOccupations>,
) -> serde_json::Value {
    let mut root = json!({ "circuit": params.snapshot() });
    if let Some(d) = drive {
        root["drive"] = json!({
            "DeltaD": ordinary(d.delta_d),
            "nD": d.n_d,
            "OmegaI": ordinary(d.omega_i),
            "gainG": d.gain_g,
            "kappaDriven": ordinary(d.kappa_driven),
            "omega0": ordinary(d.omega_idler),
        });
    }
    if let Some(p) = pump {
        root["pump"] = json!({
            "delta": ordinary(p.delta),
            "gMinusRe": ordinary(p.g_minus.re),
            "gMinusIm": ordinary(p.g_minus.im),
            "nMinus": p.n_minus,
            "omegaP": ordinary(p.omega_p),
        });
    }
    if let Some(b) = baths {
        root["baths"] = json!({
            "nThRF": b.n_th_rf,
            "nERF": b.n_e_rf,
            "nIRF": b.n_i_rf,
            "nThHF": b.n_th_hf,
            "nEHF": b.n_e_hf,
            "nIHF": b.n_i_hf,
            "nAdd": b.n_add,
        });
    }
    root
}

/// Device constants used throughout the tests and examples, in Hz.
pub fn example_device() -> CircuitParams {
    CircuitParams::from_ordinary(452e6, 45e3, 0.0, 7.211e9, 420e3, 85e3, 175e3, -5e3)
        .expect("example device parameters are valid")
}
