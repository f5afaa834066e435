//! Forward synthesis of the measurable spectra: reflection S11 of the
//! undriven/driven/pump-coupled cavity and the HF output noise PSD in
//! units of quanta.
//!
//! Spectra carry their frequency grids in ordinary Hz (the external
//! convention); the synthesis formulas run in angular units internally.
//! Synthesis is pure and keeps no shared mutable state, so concurrent
//! calls are safe.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::params::{
    angular, ordinary, working_point_snapshot, BathOccupations, CircuitParams, DriveState,
    PumpConfig,
};
use crate::susceptibility::{chi_generalized, chi_hf_effective, chi_pump_frame, chi_rf_bare};

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default half-span in linewidths.
pub const DEFAULT_GRID_SPAN: f64 = 8.0;

/// Identifier of the PRNG/noise recipe recorded in spectrum metadata.
pub const NOISE_RNG_ID: &str = "chacha12/box-muller";

/// What a spectrum holds.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumData {
    /// Complex reflection values.
    Reflection(Vec<Complex64>),
    /// Real PSD values in quanta, all >= 0.
    PsdQuanta(Vec<f64>),
}

/// Spectrum kind tag, matching the CSV/JSON wire names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    ReflectionComplex,
    PsdQuanta,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::ReflectionComplex => "reflectionComplex",
            SpectrumKind::PsdQuanta => "psdQuanta",
        }
    }
}

/// A frequency grid with values and a parameter snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid_hz: Vec<f64>,
    data: SpectrumData,
    meta: serde_json::Value,
}

impl Spectrum {
    pub fn new_reflection(
        grid_hz: Vec<f64>,
        values: Vec<Complex64>,
        meta: serde_json::Value,
    ) -> Result<Self> {
        if grid_hz.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "values".into(),
                reason: "length must match the grid".into(),
            });
        }
        Self::check_grid(&grid_hz)?;
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(format!("value[{i}]")));
            }
        }
        Ok(Self {
            grid_hz,
            data: SpectrumData::Reflection(values),
            meta,
        })
    }

    pub fn new_psd(grid_hz: Vec<f64>, values: Vec<f64>, meta: serde_json::Value) -> Result<Self> {
        if grid_hz.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "values".into(),
                reason: "length must match the grid".into(),
            });
        }
        Self::check_grid(&grid_hz)?;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("value[{i}]")));
            }
            if *v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: format!("value[{i}]"),
                    reason: "PSD values must be >= 0".into(),
                });
            }
        }
        Ok(Self {
            grid_hz,
            data: SpectrumData::PsdQuanta(values),
            meta,
        })
    }

    fn check_grid(grid: &[f64]) -> Result<()> {
        for (i, f) in grid.iter().enumerate() {
            if !f.is_finite() {
                return Err(Error::NonFinite(format!("grid[{i}]")));
            }
            if i > 0 && grid[i] <= grid[i - 1] {
                return Err(Error::NonMonotoneGrid { index: i });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SpectrumKind {
        match self.data {
            SpectrumData::Reflection(_) => SpectrumKind::ReflectionComplex,
            SpectrumData::PsdQuanta(_) => SpectrumKind::PsdQuanta,
        }
    }

    pub fn len(&self) -> usize {
        self.grid_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_hz.is_empty()
    }

    pub fn grid_hz(&self) -> &[f64] {
        &self.grid_hz
    }

    pub fn data(&self) -> &SpectrumData {
        &self.data
    }

    pub fn meta(&self) -> &serde_json::Value {
        &self.meta
    }

    pub fn set_meta(&mut self, meta: serde_json::Value) {
        self.meta = meta;
    }

    pub fn reflection_values(&self) -> Option<&[Complex64]> {
        match &self.data {
            SpectrumData::Reflection(v) => Some(v),
            _ => None,
        }
    }

    pub fn psd_values(&self) -> Option<&[f64]> {
        match &self.data {
            SpectrumData::PsdQuanta(v) => Some(v),
            _ => None,
        }
    }
}

/// Symmetric grid of `n_points` spanning ±`span_linewidths` half-widths
/// of `linewidth_hz` around `center_hz`, strictly increasing.
pub fn symmetric_grid_hz(
    center_hz: f64,
    linewidth_hz: f64,
    n_points: usize,
    span_linewidths: f64,
) -> Vec<f64> {
    assert!(n_points >= 2 && linewidth_hz > 0.0 && span_linewidths > 0.0);
    let half = span_linewidths * linewidth_hz;
    let step = 2.0 * half / (n_points - 1) as f64;
    (0..n_points)
        .map(|i| center_hz - half + step * i as f64)
        .collect()
}

/// 20·log10 |s|, the dB convention used at the output boundary.
pub fn to_db(value: Complex64) -> f64 {
    20.0 * value.norm().log10()
}

/// Single generalized-mode reflection S11(ω) = 1 − κe G/(κ/2 + i(ω − ω0))
/// on the grid. Covers both the undriven cavity (G = 1) and a driven
/// quasi-mode near its resonance.
pub fn s11_single_mode(
    grid_hz: &[f64],
    omega0: f64,
    kappa: f64,
    kappa_e: f64,
    gain_g: f64,
) -> Result<Spectrum> {
    let values = grid_hz
        .iter()
        .map(|&f| {
            let omega = angular(f);
            Complex64::new(1.0, 0.0) - kappa_e * chi_generalized(omega - omega0, 0.0, kappa, gain_g)
        })
        .collect();
    let meta = json!({
        "kind": SpectrumKind::ReflectionComplex.as_str(),
        "model": "s11_single_mode",
        "omega0": ordinary(omega0),
        "kappa": ordinary(kappa),
        "kappaE": ordinary(kappa_e),
        "gainG": gain_g,
    });
    Spectrum::new_reflection(grid_hz.to_vec(), values, meta)
}

/// Pump-coupled reflection S11 = 1 − κe χG/(1 − |g−|² χG χ̄0) evaluated
/// with Δ = Ω0 + δ, on an absolute-frequency grid near the idler.
pub fn s11_coupled(
    grid_hz: &[f64],
    params: &CircuitParams,
    drive: &DriveState,
    pump: &PumpConfig,
) -> Result<Spectrum> {
    let g_sq = pump.g_sq();
    let detuning = params.omega_rf + pump.delta;
    let values = grid_hz
        .iter()
        .map(|&f| {
            let om = angular(f) - pump.omega_p;
            let chi_g = chi_generalized(om, detuning, drive.kappa_driven, drive.gain_g);
            let chi_rf = chi_rf_bare(om, params.gamma0, params.omega_rf);
            Complex64::new(1.0, 0.0)
                - params.kappa_e * chi_g / (Complex64::new(1.0, 0.0) - g_sq * chi_g * chi_rf)
        })
        .collect();
    let mut meta = working_point_snapshot(params, Some(drive), Some(pump), None);
    meta["kind"] = json!(SpectrumKind::ReflectionComplex.as_str());
    meta["model"] = json!("s11_coupled");
    Spectrum::new_reflection(grid_hz.to_vec(), values, meta)
}

/// HF output PSD in quanta for vanishing HF thermal occupation:
/// S_out^q = 1/2 + n_add
///         + κe |g−|² |χGeff|² |χ̄0|² Γ0 (n_th^RF + 1)
///         + κe κ K² nd² |χ̄p,2|² |χGeff|².
pub fn psd_output_quanta(
    grid_hz: &[f64],
    params: &CircuitParams,
    drive: &DriveState,
    pump: &PumpConfig,
    baths: &BathOccupations,
) -> Result<Spectrum> {
    let g_sq = pump.g_sq();
    let kn = params.kerr * drive.n_d;
    let delta_p = pump.omega_p - params.omega_hf;
    let omega_dp = drive.omega_d - pump.omega_p;
    let values = grid_hz
        .iter()
        .map(|&f| {
            let om = angular(f) - pump.omega_p;
            let chi_eff = chi_hf_effective(om, params, drive, pump);
            let chi_rf = chi_rf_bare(om, params.gamma0, params.omega_rf);
            let chi_p2 = chi_pump_frame(
                om,
                delta_p,
                params.kerr,
                drive.n_d,
                drive.kappa_driven,
                true,
                omega_dp,
            );
            0.5 + baths.n_add
                + params.kappa_e
                    * g_sq
                    * chi_eff.norm_sqr()
                    * chi_rf.norm_sqr()
                    * params.gamma0
                    * (baths.n_th_rf + 1.0)
                + params.kappa_e
                    * drive.kappa_driven
                    * kn
                    * kn
                    * chi_p2.norm_sqr()
                    * chi_eff.norm_sqr()
        })
        .collect();
    let mut meta = working_point_snapshot(params, Some(drive), Some(pump), Some(baths));
    meta["kind"] = json!(SpectrumKind::PsdQuanta.as_str());
    meta["model"] = json!("psd_output_quanta");
    Spectrum::new_psd(grid_hz.to_vec(), values, meta)
}

/// Draws standard-normal pairs from seeded ChaCha12 via Box-Muller.
struct GaussianSource {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        use rand::RngExt;
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u1: f64 = self.rng.random();
            let u2: f64 = self.rng.random();
            if u1 > f64::MIN_POSITIVE {
                let r: f64 = (-2.0 * u1.ln()).sqrt();
                let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
                self.spare = Some(r * s);
                return r * c;
            }
        }
    }
}

/// Adds complex Gaussian noise (per-quadrature standard deviation
/// `sigma`) to a reflection spectrum; deterministic in `seed`. The noise
/// recipe is recorded in the metadata.
pub fn add_reflection_noise(spectrum: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum> {
    let values = spectrum.reflection_values().ok_or_else(|| Error::SpectrumKind {
        expected: SpectrumKind::ReflectionComplex.as_str().into(),
        got: spectrum.kind().as_str().into(),
    })?;
    let mut source = GaussianSource::new(seed);
    let noisy: Vec<Complex64> = values
        .iter()
        .map(|v| v + Complex64::new(sigma * source.next(), sigma * source.next()))
        .collect();
    let mut meta = spectrum.meta().clone();
    meta["noise"] = json!({ "sigma": sigma, "seed": seed, "rng": NOISE_RNG_ID });
    Spectrum::new_reflection(spectrum.grid_hz().to_vec(), noisy, meta)
}

/// Adds Gaussian noise of standard deviation `sigma` to a PSD spectrum,
/// clamping at zero to preserve the PSD invariant; deterministic in
/// `seed`.
pub fn add_psd_noise(spectrum: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum> {
    let values = spectrum.psd_values().ok_or_else(|| Error::SpectrumKind {
        expected: SpectrumKind::PsdQuanta.as_str().into(),
        got: spectrum.kind().as_str().into(),
    })?;
    let mut source = GaussianSource::new(seed);
    let noisy: Vec<f64> = values
        .iter()
        .map(|v| (v + sigma * source.next()).max(0.0))
        .collect();
    let mut meta = spectrum.meta().clone();
    meta["noise"] = json!({ "sigma": sigma, "seed": seed, "rng": NOISE_RNG_ID });
    Spectrum::new_psd(spectrum.grid_hz().to_vec(), noisy, meta)
}
