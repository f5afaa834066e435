//! Inverse problem: weighted complex least-squares fitting of reflection
//! spectra and real least-squares fitting of output PSDs.
//!
//! Weighting is uniform over points (the residual is Σ|model − data|²
//! with every point counted once); reflection data contribute their real
//! and imaginary parts as separate residuals.

pub mod lm;
pub mod models;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::angular;
use crate::spectra::{Spectrum, SpectrumKind};

pub use lm::{DenseMatrix, LeastSquares, LmOptions};
pub use models::{
    guess_coupled_factored, guess_psd, guess_single_mode, guess_two_mode, FitModel, ParamSpec,
    ParamUnit, PsdContext, PsdProblem, ReflectionProblem, Transform,
};

/// A free parameter with its initial guess and optional box bounds.
#[derive(Debug, Clone)]
pub struct FreeParam {
    pub name: String,
    pub guess: f64,
    pub bounds: Option<(f64, f64)>,
}

impl FreeParam {
    pub fn new(name: &str, guess: f64) -> Self {
        Self {
            name: name.into(),
            guess,
            bounds: None,
        }
    }

    pub fn bounded(name: &str, guess: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            guess,
            bounds: Some((lo, hi)),
        }
    }
}

/// A fit problem: model, data, free parameters and fixed values.
///
/// Reflection models always carry the complex-scale/delay nuisance
/// parameters (`scaleRe`, `scaleIm`, `delay`); they default to free with
/// guesses (1, 0, 0) unless listed in `fixed`.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub model: FitModel,
    pub data: Spectrum,
    pub free: Vec<FreeParam>,
    pub fixed: BTreeMap<String, f64>,
}

impl FitProblem {
    pub fn new(model: FitModel, data: Spectrum) -> Self {
        Self {
            model,
            data,
            free: Vec::new(),
            fixed: BTreeMap::new(),
        }
    }

    pub fn free(mut self, name: &str, guess: f64) -> Self {
        self.free.push(FreeParam::new(name, guess));
        self
    }

    pub fn free_bounded(mut self, name: &str, guess: f64, lo: f64, hi: f64) -> Self {
        self.free.push(FreeParam::bounded(name, guess, lo, hi));
        self
    }

    pub fn fix(mut self, name: &str, value: f64) -> Self {
        self.fixed.insert(name.into(), value);
        self
    }
}

/// Estimates, uncertainties and convergence report of one fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: String,
    pub free_names: Vec<String>,
    pub estimates: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    /// Covariance over the free parameters, ordered as `free_names`.
    pub covariance: Vec<Vec<f64>>,
    /// Correlation matrix over the free parameters.
    pub correlation: Vec<Vec<f64>>,
    pub fixed: BTreeMap<String, f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_points: usize,
}

struct ResolvedParams {
    free_names: Vec<String>,
    x0: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    fixed: BTreeMap<String, f64>,
}

/// Splits the full parameter table into free (transformed guesses) and
/// fixed values; every table entry must be exactly one of the two.
fn resolve_params(
    model: &FitModel,
    free: &[FreeParam],
    fixed: &BTreeMap<String, f64>,
) -> Result<ResolvedParams> {
    let mut free_names = Vec::new();
    let mut x0 = Vec::new();
    let mut bounds = Vec::new();
    let mut fixed_out = BTreeMap::new();

    for fp in free {
        let spec = fp_spec(model, &fp.name)?;
        if fixed.contains_key(&fp.name) {
            return Err(Error::InvalidParameter {
                name: fp.name.clone(),
                reason: "parameter is both free and fixed".into(),
            });
        }
        if let Some((lo, hi)) = fp.bounds {
            if !(lo <= fp.guess && fp.guess <= hi) {
                return Err(Error::InvalidParameter {
                    name: fp.name.clone(),
                    reason: format!("bounds [{lo}, {hi}] do not contain guess {}", fp.guess),
                });
            }
        }
        let (raw, raw_bounds) = match spec.transform {
            Transform::Linear => (fp.guess, fp.bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY))),
            Transform::Log => {
                if fp.guess <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: fp.name.clone(),
                        reason: "log-parameterized value needs a positive guess".into(),
                    });
                }
                let b = fp
                    .bounds
                    .map(|(lo, hi)| (lo.max(f64::MIN_POSITIVE).ln(), hi.ln()))
                    .unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                (fp.guess.ln(), b)
            }
        };
        free_names.push(fp.name.clone());
        x0.push(raw);
        bounds.push(raw_bounds);
    }

    for (name, value) in fixed {
        fp_spec(model, name)?;
        fixed_out.insert(name.clone(), *value);
    }

    // nuisance defaults for reflection models
    if model.is_reflection() {
        for (name, default) in [("scaleRe", 1.0), ("scaleIm", 0.0), ("delay", 0.0)] {
            let listed = free_names.iter().any(|n| n == name) || fixed_out.contains_key(name);
            if !listed {
                free_names.push(name.into());
                x0.push(default);
                bounds.push((f64::NEG_INFINITY, f64::INFINITY));
            }
        }
    }

    // completeness: every table parameter is either free or fixed
    for spec in model.param_specs().iter().chain(model.nuisance_specs()) {
        let listed =
            free_names.iter().any(|n| n == spec.name) || fixed_out.contains_key(spec.name);
        if !listed {
            return Err(Error::MissingKey(spec.name.into()));
        }
    }

    Ok(ResolvedParams {
        free_names,
        x0,
        bounds,
        fixed: fixed_out,
    })
}

fn fp_spec(model: &FitModel, name: &str) -> Result<ParamSpec> {
    model
        .spec_for(name)
        .ok_or_else(|| Error::UnknownKey(format!("{} (model {})", name, model.name())))
}

fn back_transform(model: &FitModel, names: &[String], x: &[f64]) -> BTreeMap<String, f64> {
    names
        .iter()
        .zip(x)
        .map(|(name, raw)| {
            let spec = model.spec_for(name).expect("validated");
            let value = match spec.transform {
                Transform::Linear => *raw,
                Transform::Log => raw.exp(),
            };
            (name.clone(), value)
        })
        .collect()
}

fn build_result(
    model: &FitModel,
    outcome: lm::LmOutcome,
    resolved: &ResolvedParams,
    n_points: usize,
) -> FitResult {
    let names = &resolved.free_names;
    let n = names.len();
    let estimates = back_transform(model, names, &outcome.x);

    // Gauss–Newton covariance σ²(JᵀJ)⁻¹ in optimizer space, chain-ruled
    // back to physical values
    let dof = outcome.n_residuals.saturating_sub(n).max(1);
    let sigma_sq = outcome.residual_norm * outcome.residual_norm / dof as f64;
    let mut covariance = vec![vec![0.0; n]; n];
    let mut correlation = vec![vec![0.0; n]; n];
    if let Some(inv) = lm::gram_inverse(&outcome.jtj) {
        let scales: Vec<f64> = names
            .iter()
            .map(|name| {
                let spec = model.spec_for(name).expect("validated");
                match spec.transform {
                    Transform::Linear => 1.0,
                    Transform::Log => estimates[name],
                }
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                covariance[i][j] = sigma_sq * inv.at(i, j) * scales[i] * scales[j];
            }
        }
        for i in 0..n {
            for j in 0..n {
                let denom = (covariance[i][i] * covariance[j][j]).sqrt();
                correlation[i][j] = if denom > 0.0 {
                    covariance[i][j] / denom
                } else if i == j {
                    1.0
                } else {
                    0.0
                };
            }
        }
    }
    let standard_errors = names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), covariance[i][i].max(0.0).sqrt()))
        .collect();

    FitResult {
        model: model.name().into(),
        free_names: names.clone(),
        estimates,
        standard_errors,
        covariance,
        correlation,
        fixed: resolved.fixed.clone(),
        residual_norm: outcome.residual_norm,
        converged: outcome.converged,
        iterations: outcome.iterations,
        n_points,
    }
}

/// Fits a reflection model to complex S11 data. Returns a best-point
/// result with `converged = false` on a blown iteration budget.
pub fn fit_reflection(problem: &FitProblem) -> Result<FitResult> {
    fit_reflection_with(problem, &LmOptions::default())
}

/// [`fit_reflection`] with explicit optimizer options.
pub fn fit_reflection_with(problem: &FitProblem, opts: &LmOptions) -> Result<FitResult> {
    if !problem.model.is_reflection() {
        return Err(Error::SpectrumKind {
            expected: "a reflection model".into(),
            got: problem.model.name().into(),
        });
    }
    let values = problem
        .data
        .reflection_values()
        .ok_or_else(|| Error::SpectrumKind {
            expected: SpectrumKind::ReflectionComplex.as_str().into(),
            got: problem.data.kind().as_str().into(),
        })?;
    let resolved = resolve_params(&problem.model, &problem.free, &problem.fixed)?;
    let n_points = problem.data.len();
    let needed = 5 * resolved.free_names.len();
    if n_points < needed {
        return Err(Error::NotEnoughData {
            points: n_points,
            free: resolved.free_names.len(),
            needed,
        });
    }
    let grid = problem.data.grid_hz();
    let omega_ref = angular(0.5 * (grid[0] + grid[n_points - 1]));
    let points: Vec<_> = grid
        .iter()
        .zip(values)
        .map(|(f, v)| (angular(*f), *v))
        .collect();
    let lsq = ReflectionProblem {
        model: problem.model.clone(),
        points,
        omega_ref,
        free_names: resolved.free_names.clone(),
        fixed: resolved.fixed.clone(),
        bounds: resolved.bounds.clone(),
    };
    let outcome = lm::minimize(&lsq, &resolved.x0, opts)?;
    Ok(build_result(&problem.model, outcome, &resolved, n_points))
}

/// Fits the output-PSD model to data in quanta.
pub fn fit_psd(problem: &FitProblem) -> Result<FitResult> {
    fit_psd_with(problem, &LmOptions::default())
}

/// [`fit_psd`] with explicit optimizer options.
pub fn fit_psd_with(problem: &FitProblem, opts: &LmOptions) -> Result<FitResult> {
    let ctx = match &problem.model {
        FitModel::PsdCooling(ctx) => *ctx,
        other => {
            return Err(Error::SpectrumKind {
                expected: "psdCooling".into(),
                got: other.name().into(),
            })
        }
    };
    let values = problem.data.psd_values().ok_or_else(|| Error::SpectrumKind {
        expected: SpectrumKind::PsdQuanta.as_str().into(),
        got: problem.data.kind().as_str().into(),
    })?;
    let resolved = resolve_params(&problem.model, &problem.free, &problem.fixed)?;
    let n_points = problem.data.len();
    let needed = 5 * resolved.free_names.len();
    if n_points < needed {
        return Err(Error::NotEnoughData {
            points: n_points,
            free: resolved.free_names.len(),
            needed,
        });
    }
    // a background region of at least two total linewidths beyond the
    // features must be present for n_add to be identifiable
    let grid = problem.data.grid_hz();
    let half_span_hz = 0.5 * (grid[n_points - 1] - grid[0]);
    let linewidth_hz = crate::params::ordinary(ctx.drive.kappa_driven + ctx.params.gamma0);
    if half_span_hz < 2.0 * linewidth_hz {
        return Err(Error::InvalidParameter {
            name: "data".into(),
            reason: format!(
                "grid half-span {half_span_hz} Hz leaves no background region \
                 (need >= {} Hz)",
                2.0 * linewidth_hz
            ),
        });
    }
    let points: Vec<_> = grid
        .iter()
        .zip(values)
        .map(|(f, v)| (angular(*f), *v))
        .collect();
    let lsq = PsdProblem {
        ctx,
        points,
        free_names: resolved.free_names.clone(),
        fixed: resolved.fixed.clone(),
        bounds: resolved.bounds.clone(),
    };
    let outcome = lm::minimize(&lsq, &resolved.x0, opts)?;
    Ok(build_result(&problem.model, outcome, &resolved, n_points))
}
