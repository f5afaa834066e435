//! `pptk` — synthesize, fit, sweep and validate spectra of a
//! photon-pressure circuit with a Kerr-driven negative-mass mode.
//!
//! All frequencies on the command line and in files are ordinary Hz.
//! Exit codes: 0 success, 1 input error, 2 fit did not converge,
//! 3 unstable working point.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pptk_core::backaction::{effective_linewidths, eigenfrequencies};
use pptk_core::cooling::final_occupations;
use pptk_core::fitting::{
    self, FitModel, FitProblem, LmOptions, ParamUnit, PsdContext,
};
use pptk_core::io::{read_spectrum_csv, write_spectrum_csv, SystemConfig};
use pptk_core::kerr::steady_state_photon_number;
use pptk_core::oracle::validate_working_point;
use pptk_core::params::{angular, ordinary, DriveState, PumpConfig};
use pptk_core::spectra::{
    add_psd_noise, add_reflection_noise, psd_output_quanta, s11_coupled, s11_single_mode,
    symmetric_grid_hz, Spectrum, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN,
};
use pptk_core::{Error, FitResult};

#[derive(Parser)]
#[command(
    name = "pptk",
    about = "Photon-pressure toolkit: forward models and fits for Kerr-driven negative-mass circuits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a spectrum from a parameter file
    Synth(SynthArgs),
    /// Fit a model to a measured spectrum
    Fit(FitArgs),
    /// Sweep a control parameter and tabulate derived quantities
    Sweep(SweepArgs),
    /// Compare the reduced models against the unapproximated solver
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Single generalized-mode reflection
    S11Single,
    /// Pump-coupled reflection near the idler
    S11Coupled,
    /// Output noise PSD in quanta
    Psd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    /// Parameter file (JSON, Hz units)
    #[arg(long)]
    params: PathBuf,
    /// Override file entries, e.g. --set drive.nD=420
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Half-span of the grid in linewidths
    #[arg(long, default_value_t = DEFAULT_GRID_SPAN)]
    grid_span: f64,
    /// Output path (CSV or JSON per --format); defaults next to stdout echo
    #[arg(long, default_value = "spectrum.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Add Gaussian noise of this standard deviation (quanta or
    /// per-quadrature reflection units)
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// PRNG seed for noise injection
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep the pump-sideband detuning: start,stop,count (Hz); one
    /// output file per value (s11-coupled only)
    #[arg(long, value_name = "START,STOP,COUNT", allow_hyphen_values = true)]
    delta_sweep: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModelArg {
    S11Single,
    S11TwoMode,
    S11CoupledFactored,
    PsdCooling,
}

#[derive(Args)]
struct FitArgs {
    #[arg(value_enum)]
    model: FitModelArg,
    /// Spectrum CSV to fit
    #[arg(long)]
    data: PathBuf,
    /// Parameter file supplying fixed context (κe, Γ0, working point)
    #[arg(long)]
    params: Option<PathBuf>,
    /// Free parameter with initial guess, e.g. --free kappa=300e3
    #[arg(long = "free", value_name = "NAME=GUESS")]
    free: Vec<String>,
    /// Fixed parameter value, e.g. --fix kappaE=85e3
    #[arg(long = "fix", value_name = "NAME=VALUE")]
    fix: Vec<String>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Report path (JSON); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Effective linewidths and regime vs pump coupling
    Backaction,
    /// Final occupations vs pump coupling
    Cooling,
    /// Steady-state branch, idler frequency and gains vs drive flux
    GainVsPower,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(value_enum)]
    kind: SweepKind,
    #[arg(long)]
    params: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// start,stop,points over g− (Hz) or photon flux (photons/s)
    #[arg(long, value_name = "START,STOP,POINTS")]
    range: String,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Quadrature span in total linewidths beyond the outermost mode
    #[arg(long, default_value_t = 40.0)]
    span_linewidths: f64,
    /// Report path (JSON); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => run_synth(&args),
        Command::Fit(args) => run_fit(&args),
        Command::Sweep(args) => run_sweep(&args),
        Command::Validate(args) => run_validate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::UnstableWorkingPoint { .. }
        | Error::SusceptibilitySingularity { .. }
        | Error::SingularSystem
        | Error::ZeroIdlerFrequency => 3,
        Error::NonConvergence => 2,
        _ => 1,
    }
}

/// Loads a parameter file and applies --set overrides to the JSON
/// document before strict parsing.
fn load_config(path: &Path, overrides: &[String]) -> Result<SystemConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    for entry in overrides {
        let (key, raw) = entry.split_once('=').ok_or_else(|| Error::InvalidParameter {
            name: entry.clone(),
            reason: "expected KEY=VALUE".into(),
        })?;
        let number: f64 = raw.parse().map_err(|_| Error::InvalidParameter {
            name: key.to_string(),
            reason: format!("cannot parse `{raw}` as a number"),
        })?;
        let mut cursor = &mut value;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            if cursor.get(*part).is_none() {
                cursor[*part] = json!({});
            }
            cursor = &mut cursor[*part];
        }
        cursor[*parts.last().unwrap()] = json!(number);
    }
    pptk_core::io::parse_params_json(&value)
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter {
            name: "range".into(),
            reason: "expected START,STOP,POINTS".into(),
        });
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| Error::InvalidParameter {
        name: "range".into(),
        reason: "bad start".into(),
    })?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| Error::InvalidParameter {
        name: "range".into(),
        reason: "bad stop".into(),
    })?;
    let points: usize = parts[2].trim().parse().map_err(|_| Error::InvalidParameter {
        name: "range".into(),
        reason: "bad point count".into(),
    })?;
    if points < 1 || (points > 1 && stop <= start) {
        return Err(Error::InvalidParameter {
            name: "range".into(),
            reason: "need points >= 1 and stop > start".into(),
        });
    }
    Ok((start, stop, points))
}

fn range_values((start, stop, points): (f64, f64, usize)) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

fn working_point_echo(cfg: &SystemConfig, files: &[PathBuf]) -> serde_json::Value {
    let mut echo = json!({
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    if let Some(drive) = &cfg.drive {
        echo["n_d"] = json!(drive.n_d);
        echo["omega_i_hz"] = json!(ordinary(drive.omega_i));
        echo["gain_g"] = json!(drive.gain_g);
        echo["kappa_driven_hz"] = json!(ordinary(drive.kappa_driven));
        echo["omega_idler_hz"] = json!(ordinary(drive.omega_idler));
        if let Some(pump) = &cfg.pump {
            let modes = eigenfrequencies(&cfg.params, drive, pump);
            echo["regime"] = serde_json::to_value(modes.regime).unwrap();
            echo["splitting_hz"] = json!(ordinary(modes.splitting));
        }
    } else {
        echo["n_d"] = json!(0.0);
        echo["gain_g"] = json!(1.0);
    }
    echo
}

fn spectrum_to_json(spectrum: &Spectrum) -> serde_json::Value {
    let values = match spectrum.data() {
        pptk_core::SpectrumData::Reflection(v) => v
            .iter()
            .map(|c| json!({"re": c.re, "im": c.im}))
            .collect::<Vec<_>>(),
        pptk_core::SpectrumData::PsdQuanta(v) => {
            v.iter().map(|x| json!(x)).collect::<Vec<_>>()
        }
    };
    json!({
        "kind": spectrum.kind().as_str(),
        "meta": spectrum.meta(),
        "frequency_hz": spectrum.grid_hz(),
        "values": values,
    })
}

fn write_spectrum(spectrum: &Spectrum, path: &Path, format: OutputFormat) -> Result<(), Error> {
    match format {
        OutputFormat::Csv => write_spectrum_csv(spectrum, path),
        OutputFormat::Json => {
            std::fs::write(
                path,
                serde_json::to_string_pretty(&spectrum_to_json(spectrum))?,
            )?;
            Ok(())
        }
    }
}

fn run_synth(args: &SynthArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.params, &args.set)?;
    let mut files = Vec::new();

    match args.kind {
        SynthKind::S11Single => {
            // driven idler quasi-mode when a drive is present, the bare
            // cavity otherwise
            let (omega0, kappa, gain) = match &cfg.drive {
                Some(d) => (d.omega_idler, d.kappa_driven, d.gain_g),
                None => (cfg.params.omega_hf, cfg.params.kappa, 1.0),
            };
            let grid = symmetric_grid_hz(
                ordinary(omega0),
                ordinary(kappa),
                args.grid_points,
                args.grid_span,
            );
            let mut spectrum = s11_single_mode(&grid, omega0, kappa, cfg.params.kappa_e, gain)?;
            if let Some(sigma) = args.noise_sigma {
                spectrum = add_reflection_noise(&spectrum, sigma, args.seed)?;
            }
            write_spectrum(&spectrum, &args.out, args.format)?;
            files.push(args.out.clone());
        }
        SynthKind::S11Coupled => {
            let drive = cfg.drive.ok_or_else(|| Error::MissingKey("drive".into()))?;
            let pump = cfg.pump.ok_or_else(|| Error::MissingKey("pump".into()))?;
            let deltas_hz: Vec<f64> = match &args.delta_sweep {
                Some(text) => range_values(parse_range(text)?),
                None => vec![ordinary(pump.delta)],
            };
            for (i, delta_hz) in deltas_hz.iter().enumerate() {
                let pump_i =
                    PumpConfig::from_g_minus(&cfg.params, &drive, angular(*delta_hz), pump.g_minus)?;
                let grid = symmetric_grid_hz(
                    ordinary(drive.omega_idler),
                    ordinary(drive.kappa_driven),
                    args.grid_points,
                    args.grid_span,
                );
                let mut spectrum = s11_coupled(&grid, &cfg.params, &drive, &pump_i)?;
                if let Some(sigma) = args.noise_sigma {
                    spectrum = add_reflection_noise(&spectrum, sigma, args.seed)?;
                }
                let path = if deltas_hz.len() == 1 {
                    args.out.clone()
                } else {
                    suffixed(&args.out, &format!("_delta{i:03}"))
                };
                write_spectrum(&spectrum, &path, args.format)?;
                files.push(path);
            }
        }
        SynthKind::Psd => {
            let drive = cfg.drive.ok_or_else(|| Error::MissingKey("drive".into()))?;
            let pump = cfg.pump.unwrap_or_else(|| PumpConfig::off(&cfg.params, &drive));
            let center = ordinary(pump.omega_p - cfg.params.omega_rf);
            let grid = symmetric_grid_hz(
                center,
                ordinary(drive.kappa_driven),
                args.grid_points,
                args.grid_span,
            );
            let mut spectrum = psd_output_quanta(&grid, &cfg.params, &drive, &pump, &cfg.baths)?;
            if let Some(sigma) = args.noise_sigma {
                spectrum = add_psd_noise(&spectrum, sigma, args.seed)?;
            }
            write_spectrum(&spectrum, &args.out, args.format)?;
            files.push(args.out.clone());
        }
    }

    println!(
        "{}",
        serde_json::to_string_pretty(&working_point_echo(&cfg, &files))?
    );
    Ok(ExitCode::SUCCESS)
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn parse_kv(entries: &[String]) -> Result<BTreeMap<String, f64>, Error> {
    let mut out = BTreeMap::new();
    for entry in entries {
        let (key, raw) = entry.split_once('=').ok_or_else(|| Error::InvalidParameter {
            name: entry.clone(),
            reason: "expected NAME=VALUE".into(),
        })?;
        let value: f64 = raw.parse().map_err(|_| Error::InvalidParameter {
            name: key.to_string(),
            reason: format!("cannot parse `{raw}` as a number"),
        })?;
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

/// External (Hz) to internal (angular) units for a named model parameter.
fn to_internal(model: &FitModel, name: &str, value: f64) -> Result<f64, Error> {
    let spec = model
        .spec_for(name)
        .ok_or_else(|| Error::UnknownKey(name.to_string()))?;
    Ok(match spec.unit {
        ParamUnit::Angular => angular(value),
        ParamUnit::AngularSq => angular(angular(value)),
        ParamUnit::Dimensionless => value,
    })
}

fn to_external(model: &FitModel, name: &str, value: f64) -> f64 {
    match model.spec_for(name).map(|s| s.unit) {
        Some(ParamUnit::Angular) => ordinary(value),
        Some(ParamUnit::AngularSq) => ordinary(ordinary(value)),
        _ => value,
    }
}

/// Free parameters with guesses plus fixed values, as resolved for a fit.
type ResolvedFit = (Vec<(String, f64)>, BTreeMap<String, f64>);

/// Model defaults: free set with cold-start guesses and fixed context.
fn default_problem(
    model: &FitModel,
    data: &Spectrum,
    cfg: Option<&SystemConfig>,
) -> Result<ResolvedFit, Error> {
    let need_cfg = || -> Result<&SystemConfig, Error> {
        cfg.ok_or_else(|| Error::MissingKey("--params (fixed fit context)".into()))
    };
    match model {
        FitModel::SingleModeS11 => {
            let kappa_e = need_cfg()?.params.kappa_e;
            let guesses = fitting::guess_single_mode(data, kappa_e)?;
            Ok((
                vec![
                    ("omega0".into(), guesses["omega0"]),
                    ("kappa".into(), guesses["kappa"]),
                    ("gainG".into(), guesses["gainG"]),
                ],
                BTreeMap::from([("kappaE".to_string(), kappa_e)]),
            ))
        }
        FitModel::TwoModeS11 => {
            let kappa_e = need_cfg()?.params.kappa_e;
            let guesses = fitting::guess_two_mode(data, kappa_e)?;
            Ok((
                vec![
                    ("Omega0".into(), guesses["Omega0"]),
                    ("kappa".into(), guesses["kappa"]),
                    ("gainG".into(), guesses["gainG"]),
                ],
                BTreeMap::from([
                    ("omegaD".to_string(), guesses["omegaD"]),
                    ("kappaE".to_string(), kappa_e),
                ]),
            ))
        }
        FitModel::CoupledS11Factored => {
            let cfg = need_cfg()?;
            let guesses =
                fitting::guess_coupled_factored(data, cfg.params.kappa_e, cfg.params.gamma0)?;
            Ok((
                vec![
                    ("omega0".into(), guesses["omega0"]),
                    ("gammaEff".into(), guesses["gammaEff"]),
                    ("kappaEff".into(), guesses["kappaEff"]),
                    ("gainG".into(), guesses["gainG"]),
                ],
                BTreeMap::from([
                    ("Gamma0".to_string(), cfg.params.gamma0),
                    ("kappaE".to_string(), cfg.params.kappa_e),
                ]),
            ))
        }
        FitModel::PsdCooling(ctx) => {
            let guesses = fitting::guess_psd(data, ctx)?;
            Ok((
                vec![
                    ("gMinusSq".into(), guesses["gMinusSq"]),
                    ("nThRF".into(), guesses["nThRF"]),
                    ("nAdd".into(), guesses["nAdd"]),
                ],
                BTreeMap::from([("gainScale".to_string(), 1.0)]),
            ))
        }
    }
}

fn run_fit(args: &FitArgs) -> Result<ExitCode, Error> {
    let data = read_spectrum_csv(&args.data)?;
    let cfg = match &args.params {
        Some(p) => Some(load_config(p, &[])?),
        None => None,
    };
    let model = match args.model {
        FitModelArg::S11Single => FitModel::SingleModeS11,
        FitModelArg::S11TwoMode => FitModel::TwoModeS11,
        FitModelArg::S11CoupledFactored => FitModel::CoupledS11Factored,
        FitModelArg::PsdCooling => {
            let cfg = cfg
                .as_ref()
                .ok_or_else(|| Error::MissingKey("--params (psd working point)".into()))?;
            let drive = cfg
                .drive
                .ok_or_else(|| Error::MissingKey("drive (psd working point)".into()))?;
            let delta = cfg.pump.map(|p| p.delta).unwrap_or(0.0);
            FitModel::PsdCooling(PsdContext {
                params: cfg.params,
                drive,
                delta,
            })
        }
    };

    let user_free = parse_kv(&args.free)?;
    let user_fix = parse_kv(&args.fix)?;
    let (free, mut fixed) = if user_free.is_empty() {
        default_problem(&model, &data, cfg.as_ref())?
    } else {
        (
            user_free
                .iter()
                .map(|(k, v)| Ok((k.clone(), to_internal(&model, k, *v)?)))
                .collect::<Result<Vec<_>, Error>>()?,
            BTreeMap::new(),
        )
    };
    for (k, v) in &user_fix {
        fixed.insert(k.clone(), to_internal(&model, k, *v)?);
    }

    let mut problem = FitProblem::new(model.clone(), data);
    for (name, guess) in free {
        problem = problem.free(&name, guess);
    }
    for (name, value) in fixed {
        problem = problem.fix(&name, value);
    }

    let opts = LmOptions {
        max_iterations: args.max_iter,
        ..Default::default()
    };
    let result = if model.is_reflection() {
        fitting::fit_reflection_with(&problem, &opts)?
    } else {
        fitting::fit_psd_with(&problem, &opts)?
    };

    let report = fit_report_json(&model, &result, cfg.as_ref());
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, &text)?,
        None => println!("{text}"),
    }
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("fit did not converge; best point written");
        Ok(ExitCode::from(2))
    }
}

/// Fit report with estimates converted back to Hz units; PSD fits also
/// report the implied occupations.
fn fit_report_json(
    model: &FitModel,
    result: &FitResult,
    cfg: Option<&SystemConfig>,
) -> serde_json::Value {
    let mut report = serde_json::to_value(result).expect("fit result serializes");
    let externalize = |map: &BTreeMap<String, f64>| -> serde_json::Value {
        json!(map
            .iter()
            .map(|(k, v)| (k.clone(), json!(to_external(model, k, *v))))
            .collect::<serde_json::Map<String, serde_json::Value>>())
    };
    report["estimates_hz"] = externalize(&result.estimates);
    report["standard_errors_hz"] = externalize(&result.standard_errors);
    if let (FitModel::PsdCooling(ctx), Some(cfg)) = (model, cfg) {
        if let Some(g2) = result.estimates.get("gMinusSq") {
            let g_minus = g2.max(0.0).sqrt();
            let n_th_rf = result.estimates.get("nThRF").copied().unwrap_or(0.0);
            if let Ok(baths) =
                pptk_core::BathOccupations::uniform(n_th_rf.max(0.0), cfg.baths.n_th_hf, 0.0)
            {
                let occ = final_occupations(&ctx.params, &ctx.drive, g_minus, &baths);
                report["occupations"] = serde_json::to_value(occ).unwrap();
            }
        }
    }
    report
}

fn run_sweep(args: &SweepArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.params, &args.set)?;
    let range = parse_range(&args.range)?;
    let values = range_values(range);

    let header: Vec<&str>;
    let mut rows: Vec<Vec<serde_json::Value>> = Vec::new();
    match args.kind {
        SweepKind::Backaction => {
            let drive = cfg.drive.ok_or_else(|| Error::MissingKey("drive".into()))?;
            header = vec![
                "g_minus_hz",
                "gamma_eff_hz",
                "kappa_eff_hz",
                "splitting_hz",
                "mean_linewidth_hz",
                "regime",
            ];
            for g_hz in &values {
                let pump = PumpConfig::from_g_minus(
                    &cfg.params,
                    &drive,
                    0.0,
                    pptk_core::Complex64::new(angular(*g_hz), 0.0),
                )?;
                let modes = eigenfrequencies(&cfg.params, &drive, &pump);
                let (ge, ke) = match effective_linewidths(&cfg.params, &drive, angular(*g_hz)) {
                    Ok((ge, ke)) => (json!(ordinary(ge)), json!(ordinary(ke))),
                    Err(_) => (serde_json::Value::Null, serde_json::Value::Null),
                };
                rows.push(vec![
                    json!(g_hz),
                    ge,
                    ke,
                    json!(ordinary(modes.splitting)),
                    json!(ordinary(modes.mean_linewidth)),
                    json!(modes.regime.to_string()),
                ]);
            }
        }
        SweepKind::Cooling => {
            let drive = cfg.drive.ok_or_else(|| Error::MissingKey("drive".into()))?;
            header = vec![
                "g_minus_hz",
                "g_eff_hz",
                "n_fin_rf",
                "n_fin_hf",
                "n_lim_rf",
                "n_lim_hf",
                "n_eff_hf",
            ];
            for g_hz in &values {
                let occ = final_occupations(&cfg.params, &drive, angular(*g_hz), &cfg.baths);
                rows.push(vec![
                    json!(g_hz),
                    json!(ordinary(occ.g_eff)),
                    json!(occ.n_fin_rf),
                    json!(occ.n_fin_hf),
                    json!(occ.n_lim_rf),
                    json!(occ.n_lim_hf),
                    json!(occ.n_eff_hf),
                ]);
            }
        }
        SweepKind::GainVsPower => {
            // sweep input photon flux through the steady-state cubic,
            // following the highest stable branch
            let kappa = cfg
                .drive
                .map(|d| d.kappa_driven)
                .unwrap_or(cfg.params.kappa);
            let delta_d = cfg
                .drive
                .map(|d| d.delta_d)
                .ok_or_else(|| Error::MissingKey("drive.DeltaD".into()))?;
            header = vec![
                "flux_photons_per_s",
                "n_branches",
                "n_d",
                "omega_i_hz",
                "gain_idler",
                "gain_signal",
            ];
            for flux in &values {
                let branches = steady_state_photon_number(
                    *flux,
                    delta_d,
                    cfg.params.kerr,
                    kappa,
                    cfg.params.kappa_e,
                );
                let chosen = branches.iter().rev().find(|b| b.stable);
                let row = match chosen {
                    Some(b) => {
                        match DriveState::from_working_point(
                            &cfg.params,
                            delta_d,
                            b.n_d,
                            Some(kappa),
                        ) {
                            Ok(d) => vec![
                                json!(flux),
                                json!(branches.len()),
                                json!(b.n_d),
                                json!(ordinary(d.omega_i)),
                                json!(d.gain_g),
                                json!(1.0 - d.gain_g),
                            ],
                            Err(_) => vec![
                                json!(flux),
                                json!(branches.len()),
                                json!(b.n_d),
                                serde_json::Value::Null,
                                serde_json::Value::Null,
                                serde_json::Value::Null,
                            ],
                        }
                    }
                    None => vec![
                        json!(flux),
                        json!(branches.len()),
                        serde_json::Value::Null,
                        serde_json::Value::Null,
                        serde_json::Value::Null,
                        serde_json::Value::Null,
                    ],
                };
                rows.push(row);
            }
        }
    }

    match args.format {
        OutputFormat::Csv => {
            let mut text = String::new();
            text.push_str(&header.join(","));
            text.push('\n');
            for row in &rows {
                let fields: Vec<String> = row
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::Number(n) => format!("{:.16e}", n.as_f64().unwrap()),
                        other => other.as_str().unwrap_or_default().to_string(),
                    })
                    .collect();
                text.push_str(&fields.join(","));
                text.push('\n');
            }
            std::fs::write(&args.out, text)?;
        }
        OutputFormat::Json => {
            let objects: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.clone()))
                        .collect::<serde_json::Map<String, serde_json::Value>>()
                        .into()
                })
                .collect();
            std::fs::write(&args.out, serde_json::to_string_pretty(&objects)?)?;
        }
    }
    println!(
        "{}",
        json!({"rows": rows.len(), "out": args.out.display().to_string()})
    );
    Ok(ExitCode::SUCCESS)
}

fn run_validate(args: &ValidateArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.params, &args.set)?;
    let drive = cfg.drive.ok_or_else(|| Error::MissingKey("drive".into()))?;
    let pump = cfg
        .pump
        .unwrap_or_else(|| PumpConfig::off(&cfg.params, &drive));
    let report = validate_working_point(
        &cfg.params,
        &drive,
        &pump,
        &cfg.baths,
        args.grid_points,
        args.span_linewidths,
    )?;
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, &text)?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
