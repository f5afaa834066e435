//! The four fit models, their parameter tables, analytic Jacobians and
//! deterministic cold-start guesses.
//!
//! Linewidth-like parameters are optimized as log-values so positivity
//! needs no hard bounds; frequencies and gains stay linear. The gain
//! factor is always fitted sign-free.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fitting::lm::{DenseMatrix, LeastSquares};
use crate::params::{angular, CircuitParams, DriveState, PumpConfig};
use crate::spectra::Spectrum;
use crate::susceptibility::{chi_generalized, chi_pump_frame, chi_rf_bare};

/// How a parameter is carried by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Linear,
    /// Optimized as ln(value); enforces positivity smoothly.
    Log,
}

/// Unit of a parameter at the external (Hz) boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamUnit {
    /// Angular frequency internally, ordinary Hz externally.
    Angular,
    /// Squared angular frequency internally, Hz² externally.
    AngularSq,
    Dimensionless,
}

/// One entry of a model's parameter table.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub transform: Transform,
    pub unit: ParamUnit,
}

const fn p(name: &'static str, transform: Transform, unit: ParamUnit) -> ParamSpec {
    ParamSpec {
        name,
        transform,
        unit,
    }
}

/// Fixed working-point context of the output-PSD model.
#[derive(Debug, Clone, Copy)]
pub struct PsdContext {
    pub params: CircuitParams,
    pub drive: DriveState,
    /// Pump-sideband detuning δ.
    pub delta: f64,
}

/// The model being fitted.
#[derive(Debug, Clone)]
pub enum FitModel {
    /// S11 = 1 − κe G/(κ/2 + i(ω − ω0)).
    SingleModeS11,
    /// S11 = 1 − κe(1−G)χs − κe G χi around a strong drive at ωd.
    TwoModeS11,
    /// S11 = 1 − κe χGeff in the factored on-sideband form.
    CoupledS11Factored,
    /// Output PSD in quanta at a fixed working point.
    PsdCooling(PsdContext),
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::SingleModeS11 => "singleModeS11",
            FitModel::TwoModeS11 => "twoModeS11",
            FitModel::CoupledS11Factored => "coupledS11factored",
            FitModel::PsdCooling(_) => "psdCooling",
        }
    }

    /// Physical parameter table (nuisance parameters excluded).
    pub fn param_specs(&self) -> &'static [ParamSpec] {
        use ParamUnit::*;
        use Transform::*;
        const SINGLE: [ParamSpec; 4] = [
            p("omega0", Linear, Angular),
            p("kappa", Log, Angular),
            p("kappaE", Log, Angular),
            p("gainG", Linear, Dimensionless),
        ];
        const TWO_MODE: [ParamSpec; 5] = [
            p("omegaD", Linear, Angular),
            p("Omega0", Log, Angular),
            p("kappa", Log, Angular),
            p("kappaE", Log, Angular),
            p("gainG", Linear, Dimensionless),
        ];
        const COUPLED: [ParamSpec; 6] = [
            p("omega0", Linear, Angular),
            p("Gamma0", Log, Angular),
            p("gammaEff", Log, Angular),
            p("kappaEff", Log, Angular),
            p("kappaE", Log, Angular),
            p("gainG", Linear, Dimensionless),
        ];
        const PSD: [ParamSpec; 4] = [
            p("gMinusSq", Linear, AngularSq),
            p("nThRF", Linear, Dimensionless),
            p("nAdd", Linear, Dimensionless),
            p("gainScale", Log, Dimensionless),
        ];
        match self {
            FitModel::SingleModeS11 => &SINGLE,
            FitModel::TwoModeS11 => &TWO_MODE,
            FitModel::CoupledS11Factored => &COUPLED,
            FitModel::PsdCooling(_) => &PSD,
        }
    }

    pub fn is_reflection(&self) -> bool {
        !matches!(self, FitModel::PsdCooling(_))
    }

    /// Nuisance parameters appended to reflection models: a complex
    /// amplitude scale and a linear phase-delay term.
    pub fn nuisance_specs(&self) -> &'static [ParamSpec] {
        use ParamUnit::*;
        use Transform::*;
        const NUISANCE: [ParamSpec; 3] = [
            p("scaleRe", Linear, Dimensionless),
            p("scaleIm", Linear, Dimensionless),
            p("delay", Linear, Dimensionless),
        ];
        if self.is_reflection() {
            &NUISANCE
        } else {
            &[]
        }
    }

    pub fn spec_for(&self, name: &str) -> Option<ParamSpec> {
        self.param_specs()
            .iter()
            .chain(self.nuisance_specs())
            .find(|s| s.name == name)
            .copied()
    }
}

/// Complex model value and partial derivatives with respect to the
/// physical parameters, in table order.
pub(crate) fn reflection_value_and_partials(
    model: &FitModel,
    omega: f64,
    v: &BTreeMap<String, f64>,
) -> (Complex64, Vec<Complex64>) {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    match model {
        FitModel::SingleModeS11 => {
            let (omega0, kappa, kappa_e, g) =
                (v["omega0"], v["kappa"], v["kappaE"], v["gainG"]);
            let d = Complex64::new(kappa / 2.0, omega - omega0);
            let chi = one / d;
            let value = one - kappa_e * g * chi;
            let d_omega0 = -kappa_e * g * i / (d * d);
            let d_kappa = kappa_e * g / (2.0 * d * d);
            let d_kappa_e = -g * chi;
            let d_g = -kappa_e * chi;
            (value, vec![d_omega0, d_kappa, d_kappa_e, d_g])
        }
        FitModel::TwoModeS11 => {
            let (omega_d, omega0, kappa, kappa_e, g) = (
                v["omegaD"],
                v["Omega0"],
                v["kappa"],
                v["kappaE"],
                v["gainG"],
            );
            let ds = Complex64::new(kappa / 2.0, omega - omega_d + omega0);
            let di = Complex64::new(kappa / 2.0, omega - omega_d - omega0);
            let (chi_s, chi_i) = (one / ds, one / di);
            let value = one - kappa_e * (1.0 - g) * chi_s - kappa_e * g * chi_i;
            let d_omega_d = -i * kappa_e * ((1.0 - g) / (ds * ds) + g / (di * di));
            let d_omega0 = i * kappa_e * ((1.0 - g) / (ds * ds) - g / (di * di));
            let d_kappa = kappa_e * ((1.0 - g) / (2.0 * ds * ds) + g / (2.0 * di * di));
            let d_kappa_e = -(1.0 - g) * chi_s - g * chi_i;
            let d_g = kappa_e * (chi_s - chi_i);
            (value, vec![d_omega_d, d_omega0, d_kappa, d_kappa_e, d_g])
        }
        FitModel::CoupledS11Factored => {
            let (omega0, gamma0, gamma_eff, kappa_eff, kappa_e, g) = (
                v["omega0"],
                v["Gamma0"],
                v["gammaEff"],
                v["kappaEff"],
                v["kappaE"],
                v["gainG"],
            );
            let u = omega - omega0;
            let numer = Complex64::new(gamma0 / 2.0, u);
            let d1 = Complex64::new(gamma_eff / 2.0, u);
            let d2 = Complex64::new(kappa_eff / 2.0, u);
            let chi = g * numer / (d1 * d2);
            let value = one - kappa_e * chi;
            // dχ/du = iχ(1/N − 1/D1 − 1/D2); du/dω0 = −1
            let d_omega0 =
                kappa_e * i * chi * (one / numer - one / d1 - one / d2);
            let d_gamma0 = -kappa_e * g / (2.0 * d1 * d2);
            let d_gamma_eff = kappa_e * chi / (2.0 * d1);
            let d_kappa_eff = kappa_e * chi / (2.0 * d2);
            let d_kappa_e = -chi;
            let d_g = -kappa_e * numer / (d1 * d2);
            (
                value,
                vec![d_omega0, d_gamma0, d_gamma_eff, d_kappa_eff, d_kappa_e, d_g],
            )
        }
        FitModel::PsdCooling(_) => unreachable!("psd model is real-valued"),
    }
}

/// Real PSD model value and partials with respect to
/// (gMinusSq, nThRF, nAdd, gainScale), in table order.
pub(crate) fn psd_value_and_partials(
    ctx: &PsdContext,
    omega_abs: f64,
    v: &BTreeMap<String, f64>,
) -> (f64, Vec<f64>) {
    let (g2, n_rf, n_add, gain) = (v["gMinusSq"], v["nThRF"], v["nAdd"], v["gainScale"]);
    let params = &ctx.params;
    let drive = &ctx.drive;
    let omega_p = drive.omega_idler + params.omega_rf + ctx.delta;
    let om = omega_abs - omega_p;

    let chi_g = chi_generalized(
        om,
        params.omega_rf + ctx.delta,
        drive.kappa_driven,
        drive.gain_g,
    );
    let chi_rf = chi_rf_bare(om, params.gamma0, params.omega_rf);
    let delta_p = omega_p - params.omega_hf;
    let omega_dp = drive.omega_d - omega_p;
    let chi_p2 = chi_pump_frame(
        om,
        delta_p,
        params.kerr,
        drive.n_d,
        drive.kappa_driven,
        true,
        omega_dp,
    );
    let kn_sq = (params.kerr * drive.n_d) * (params.kerr * drive.n_d);

    let w = Complex64::new(1.0, 0.0) - g2 * chi_g * chi_rf;
    let chi_eff_sq = chi_g.norm_sqr() / w.norm_sqr();
    // ∂|χeff|²/∂g2 = 2|χeff|² Re(W̄ χG χ̄0)/|W|²
    let d_eff_sq_dg2 = 2.0 * chi_eff_sq * (w.conj() * chi_g * chi_rf).re / w.norm_sqr();

    let rf_weight = params.kappa_e * chi_rf.norm_sqr() * params.gamma0 * (n_rf + 1.0);
    let mirror_weight = params.kappa_e * drive.kappa_driven * kn_sq * chi_p2.norm_sqr();
    let s = 0.5 + n_add + g2 * rf_weight * chi_eff_sq + mirror_weight * chi_eff_sq;
    let value = gain * s;

    let d_g2 = gain * (rf_weight * chi_eff_sq + g2 * rf_weight * d_eff_sq_dg2
        + mirror_weight * d_eff_sq_dg2);
    let d_n_rf = gain * params.kappa_e * g2 * chi_eff_sq * chi_rf.norm_sqr() * params.gamma0;
    let d_n_add = gain;
    let d_gain = s;
    (value, vec![d_g2, d_n_rf, d_n_add, d_gain])
}

/// Order-agnostic reflection least-squares problem over (ω, S11) points.
pub struct ReflectionProblem {
    pub model: FitModel,
    /// (angular frequency, measured reflection) pairs.
    pub points: Vec<(f64, Complex64)>,
    /// Phase-delay reference frequency (mid-grid).
    pub omega_ref: f64,
    pub free_names: Vec<String>,
    pub fixed: BTreeMap<String, f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl ReflectionProblem {
    fn assemble(&self, x: &[f64]) -> BTreeMap<String, f64> {
        let mut v = self.fixed.clone();
        for (name, raw) in self.free_names.iter().zip(x) {
            let spec = self.model.spec_for(name).expect("validated");
            let value = match spec.transform {
                Transform::Linear => *raw,
                Transform::Log => raw.exp(),
            };
            v.insert(name.clone(), value);
        }
        v
    }

    fn modelled(&self, v: &BTreeMap<String, f64>, omega: f64) -> (Complex64, Vec<Complex64>) {
        let (s, mut partials) = reflection_value_and_partials(&self.model, omega, v);
        let scale = Complex64::new(v["scaleRe"], v["scaleIm"]);
        let phase = Complex64::from_polar(1.0, -v["delay"] * (omega - self.omega_ref));
        let m = scale * phase * s;
        for d in partials.iter_mut() {
            *d = scale * phase * *d;
        }
        // nuisance partials appended in table order
        partials.push(phase * s);
        partials.push(Complex64::i() * phase * s);
        partials.push(-Complex64::i() * (omega - self.omega_ref) * m);
        (m, partials)
    }

    fn partial_index(&self, name: &str) -> usize {
        let table: Vec<&str> = self
            .model
            .param_specs()
            .iter()
            .chain(self.model.nuisance_specs())
            .map(|s| s.name)
            .collect();
        table.iter().position(|n| *n == name).expect("validated")
    }
}

impl LeastSquares for ReflectionProblem {
    fn dims(&self) -> (usize, usize) {
        (2 * self.points.len(), self.free_names.len())
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let v = self.assemble(x);
        let mut r = Vec::with_capacity(2 * self.points.len());
        for (omega, y) in &self.points {
            let (m, _) = self.modelled_value_only(&v, *omega);
            r.push(m.re - y.re);
            r.push(m.im - y.im);
        }
        r
    }

    fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        let v = self.assemble(x);
        let idx: Vec<usize> = self.free_names.iter().map(|n| self.partial_index(n)).collect();
        let mut j = DenseMatrix::zeros(2 * self.points.len(), self.free_names.len());
        for (row, (omega, _)) in self.points.iter().enumerate() {
            let (_, partials) = self.modelled(&v, *omega);
            for (col, (name, pi)) in self.free_names.iter().zip(&idx).enumerate() {
                let spec = self.model.spec_for(name).expect("validated");
                let chain = match spec.transform {
                    Transform::Linear => 1.0,
                    Transform::Log => v[name],
                };
                let d = partials[*pi] * chain;
                *j.at_mut(2 * row, col) = d.re;
                *j.at_mut(2 * row + 1, col) = d.im;
            }
        }
        j
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

impl ReflectionProblem {
    fn modelled_value_only(&self, v: &BTreeMap<String, f64>, omega: f64) -> (Complex64, ()) {
        let (s, _) = reflection_value_and_partials(&self.model, omega, v);
        let scale = Complex64::new(v["scaleRe"], v["scaleIm"]);
        let phase = Complex64::from_polar(1.0, -v["delay"] * (omega - self.omega_ref));
        (scale * phase * s, ())
    }
}

/// Order-agnostic PSD least-squares problem over (ω, quanta) points.
pub struct PsdProblem {
    pub ctx: PsdContext,
    pub points: Vec<(f64, f64)>,
    pub free_names: Vec<String>,
    pub fixed: BTreeMap<String, f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl PsdProblem {
    fn model(&self) -> FitModel {
        FitModel::PsdCooling(self.ctx)
    }

    fn assemble(&self, x: &[f64]) -> BTreeMap<String, f64> {
        let model = self.model();
        let mut v = self.fixed.clone();
        for (name, raw) in self.free_names.iter().zip(x) {
            let spec = model.spec_for(name).expect("validated");
            let value = match spec.transform {
                Transform::Linear => *raw,
                Transform::Log => raw.exp(),
            };
            v.insert(name.clone(), value);
        }
        v
    }
}

impl LeastSquares for PsdProblem {
    fn dims(&self) -> (usize, usize) {
        (self.points.len(), self.free_names.len())
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let v = self.assemble(x);
        self.points
            .iter()
            .map(|(omega, y)| psd_value_and_partials(&self.ctx, *omega, &v).0 - y)
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        let v = self.assemble(x);
        let model = self.model();
        let table: Vec<&str> = model.param_specs().iter().map(|s| s.name).collect();
        let idx: Vec<usize> = self
            .free_names
            .iter()
            .map(|n| table.iter().position(|t| t == n).expect("validated"))
            .collect();
        let mut j = DenseMatrix::zeros(self.points.len(), self.free_names.len());
        for (row, (omega, _)) in self.points.iter().enumerate() {
            let (_, partials) = psd_value_and_partials(&self.ctx, *omega, &v);
            for (col, (name, pi)) in self.free_names.iter().zip(&idx).enumerate() {
                let spec = model.spec_for(name).expect("validated");
                let chain = match spec.transform {
                    Transform::Linear => 1.0,
                    Transform::Log => v[name],
                };
                *j.at_mut(row, col) = partials[*pi] * chain;
            }
        }
        j
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Full width of the  |S|-extremum around index `k` at half its
/// deviation from `baseline`, in grid units.
fn half_extremum_width_hz(grid_hz: &[f64], mags: &[f64], k: usize, baseline: f64) -> f64 {
    let dev = (mags[k] - baseline).abs();
    let target = 0.5 * dev;
    let mut left = grid_hz[0];
    for i in (0..k).rev() {
        if (mags[i] - baseline).abs() <= target {
            left = grid_hz[i];
            break;
        }
    }
    let mut right = grid_hz[grid_hz.len() - 1];
    for (i, m) in mags.iter().enumerate().skip(k + 1) {
        if (m - baseline).abs() <= target {
            right = grid_hz[i];
            break;
        }
    }
    (right - left).max(grid_hz[1] - grid_hz[0])
}

/// Deterministic cold start for the single-mode model with κe known:
/// extremum position → ω0, half-extremum width → κ, extremum depth →
/// κe·G → G.
pub fn guess_single_mode(data: &Spectrum, kappa_e: f64) -> Result<BTreeMap<String, f64>> {
    let values = data.reflection_values().ok_or_else(|| Error::SpectrumKind {
        expected: "reflectionComplex".into(),
        got: data.kind().as_str().into(),
    })?;
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let baseline = median(&mut mags.clone());
    let (k, _) = mags
        .iter()
        .map(|m| (m - baseline).abs())
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let kappa = angular(half_extremum_width_hz(data.grid_hz(), &mags, k, baseline));
    let gain = (1.0 - mags[k]) * kappa / (2.0 * kappa_e);
    Ok(BTreeMap::from([
        ("omega0".into(), angular(data.grid_hz()[k])),
        ("kappa".into(), kappa),
        ("kappaE".into(), kappa_e),
        ("gainG".into(), gain),
    ]))
}

/// Deterministic cold start for the two-mode model: the dip is the
/// signal, the peak the idler; κ from the dip width, G from the peak
/// height.
pub fn guess_two_mode(data: &Spectrum, kappa_e: f64) -> Result<BTreeMap<String, f64>> {
    let values = data.reflection_values().ok_or_else(|| Error::SpectrumKind {
        expected: "reflectionComplex".into(),
        got: data.kind().as_str().into(),
    })?;
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let baseline = median(&mut mags.clone());
    let (k_dip, _) = mags
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let (k_peak, _) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let f_dip = data.grid_hz()[k_dip];
    let f_peak = data.grid_hz()[k_peak];
    let kappa = angular(half_extremum_width_hz(data.grid_hz(), &mags, k_dip, baseline));
    let gain = (1.0 - mags[k_peak]) * kappa / (2.0 * kappa_e);
    Ok(BTreeMap::from([
        ("omegaD".into(), angular(0.5 * (f_dip + f_peak))),
        ("Omega0".into(), angular(0.5 * (f_peak - f_dip).abs().max(1.0))),
        ("kappa".into(), kappa),
        ("kappaE".into(), kappa_e),
        ("gainG".into(), gain),
    ]))
}

/// Deterministic cold start for the factored coupled model with κe and
/// Γ0 known: broad extremum → ω0 and κeff, inner counter-extremum →
/// Γeff, shoulder height → G.
pub fn guess_coupled_factored(
    data: &Spectrum,
    kappa_e: f64,
    gamma0: f64,
) -> Result<BTreeMap<String, f64>> {
    let values = data.reflection_values().ok_or_else(|| Error::SpectrumKind {
        expected: "reflectionComplex".into(),
        got: data.kind().as_str().into(),
    })?;
    let grid = data.grid_hz();
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let baseline = median(&mut mags.clone());
    let (k_broad, _) = mags
        .iter()
        .map(|m| (m - baseline).abs())
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let kappa_eff_hz = half_extremum_width_hz(grid, &mags, k_broad, baseline);
    let kappa_eff = angular(kappa_eff_hz);
    let peak_sense = (mags[k_broad] - baseline).signum();
    // the narrow feature works against the broad one inside ±κeff/4
    let window_hz = kappa_eff_hz / 4.0;
    let inner: Vec<usize> = (0..grid.len())
        .filter(|&i| (grid[i] - grid[k_broad]).abs() < window_hz)
        .collect();
    let k_inner = inner
        .iter()
        .copied()
        .min_by(|&a, &b| {
            (peak_sense * mags[a])
                .partial_cmp(&(peak_sense * mags[b]))
                .unwrap()
        })
        .unwrap_or(k_broad);
    let gamma_eff = angular(half_extremum_width_hz(grid, &mags, k_inner, mags[k_broad]))
        .min(kappa_eff / 2.0);
    let gain = (1.0 - mags[k_broad]) * kappa_eff / (2.0 * kappa_e);
    Ok(BTreeMap::from([
        ("omega0".into(), angular(grid[k_inner])),
        ("Gamma0".into(), gamma0),
        ("gammaEff".into(), gamma_eff.max(gamma0 / 2.0)),
        ("kappaEff".into(), kappa_eff),
        ("kappaE".into(), kappa_e),
        ("gainG".into(), gain),
    ]))
}

/// Deterministic cold start for the PSD model: the background pins
/// n_add, the feature width pins Γeff and through it g−², the feature
/// height pins n_th^RF.
pub fn guess_psd(data: &Spectrum, ctx: &PsdContext) -> Result<BTreeMap<String, f64>> {
    let values = data.psd_values().ok_or_else(|| Error::SpectrumKind {
        expected: "psdQuanta".into(),
        got: data.kind().as_str().into(),
    })?;
    let grid = data.grid_hz();
    let baseline = median(&mut values.to_vec());
    let n_add = (baseline - 0.5).max(0.0);
    let (k_peak, peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let width = angular(half_extremum_width_hz(grid, values, k_peak, baseline));
    // invert Γeff(g²) on-sideband below splitting
    let kappa = ctx.drive.kappa_driven;
    let gamma0 = ctx.params.gamma0;
    let gamma_eff = width.clamp(gamma0, 0.99 * (kappa + gamma0) / 2.0);
    let sum_half = (kappa + gamma0) / 2.0;
    let diff_half = (kappa - gamma0) / 2.0;
    let g2 = (((sum_half - gamma_eff) * (sum_half - gamma_eff)) - diff_half * diff_half)
        / (4.0 * ctx.drive.gain_g);
    let g2 = g2.max(0.0);
    // RF-term height at the center for n_th = 0 sets the scale for n_th
    let probe = BTreeMap::from([
        ("gMinusSq".to_string(), g2),
        ("nThRF".to_string(), 0.0),
        ("nAdd".to_string(), n_add),
        ("gainScale".to_string(), 1.0),
    ]);
    let omega_center = angular(grid[k_peak]);
    let (unit_height, _) = psd_value_and_partials(ctx, omega_center, &probe);
    let feature_unit = (unit_height - baseline).max(1e-9);
    let n_th_rf = ((peak - baseline) / feature_unit - 1.0).max(0.0);
    Ok(BTreeMap::from([
        ("gMinusSq".into(), g2),
        ("nThRF".into(), n_th_rf),
        ("nAdd".into(), n_add),
        ("gainScale".into(), 1.0),
    ]))
}

/// Helper shared by fits and tests: the pump implied by a PSD context
/// and a coupling value.
pub fn pump_for(ctx: &PsdContext, g_minus_mag: f64) -> PumpConfig {
    PumpConfig::from_g_minus(
        &ctx.params,
        &ctx.drive,
        ctx.delta,
        Complex64::new(g_minus_mag, 0.0),
    )
    .expect("finite pump")
}
