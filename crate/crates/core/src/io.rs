//! Deterministic reading and writing of spectra and parameter files.
//!
//! CSV numbers are written with 17 significant digits, '.' decimal
//! separator, '\n' line endings and UTF-8 regardless of locale, so a
//! write/read round trip is bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::{BathOccupations, CircuitParams, DriveState, PumpConfig};
use crate::spectra::{Spectrum, SpectrumKind};

const REFLECTION_HEADER: &str = "frequency_hz,re_s11,im_s11";
const PSD_HEADER: &str = "frequency_hz,psd_quanta";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a spectrum as CSV text: a `# <json>` metadata comment, the
/// schema header, then one row per grid point.
pub fn spectrum_to_csv(spectrum: &Spectrum) -> String {
    let mut out = String::new();
    let mut meta = spectrum.meta().clone();
    if meta.get("kind").is_none() {
        meta["kind"] = serde_json::json!(spectrum.kind().as_str());
    }
    out.push_str("# ");
    out.push_str(&meta.to_string());
    out.push('\n');
    match spectrum.kind() {
        SpectrumKind::ReflectionComplex => {
            out.push_str(REFLECTION_HEADER);
            out.push('\n');
            let values = spectrum.reflection_values().unwrap();
            for (f, v) in spectrum.grid_hz().iter().zip(values) {
                out.push_str(&fmt(*f));
                out.push(',');
                out.push_str(&fmt(v.re));
                out.push(',');
                out.push_str(&fmt(v.im));
                out.push('\n');
            }
        }
        SpectrumKind::PsdQuanta => {
            out.push_str(PSD_HEADER);
            out.push('\n');
            let values = spectrum.psd_values().unwrap();
            for (f, v) in spectrum.grid_hz().iter().zip(values) {
                out.push_str(&fmt(*f));
                out.push(',');
                out.push_str(&fmt(*v));
                out.push('\n');
            }
        }
    }
    out
}

/// Writes a spectrum CSV to `path`.
pub fn write_spectrum_csv(spectrum: &Spectrum, path: &Path) -> Result<()> {
    fs::write(path, spectrum_to_csv(spectrum))?;
    Ok(())
}

/// Parses a spectrum from CSV text; the column header declares the kind.
pub fn parse_spectrum_csv(text: &str) -> Result<Spectrum> {
    let mut meta = serde_json::Value::Null;
    let mut lines = text.lines().enumerate().peekable();

    while let Some((_, line)) = lines.peek() {
        if let Some(comment) = line.strip_prefix('#') {
            meta = serde_json::from_str(comment.trim()).unwrap_or(serde_json::Value::Null);
            lines.next();
        } else {
            break;
        }
    }

    let (header_line_no, header) = lines
        .next()
        .ok_or_else(|| Error::CsvFormat {
            line: 1,
            msg: "missing header".into(),
        })?;
    let kind = match header.trim() {
        REFLECTION_HEADER => SpectrumKind::ReflectionComplex,
        PSD_HEADER => SpectrumKind::PsdQuanta,
        other => {
            return Err(Error::CsvFormat {
                line: header_line_no + 1,
                msg: format!(
                    "unrecognized header `{other}` (expected `{REFLECTION_HEADER}` or `{PSD_HEADER}`)"
                ),
            })
        }
    };

    let mut grid = Vec::new();
    let mut reflection = Vec::new();
    let mut psd = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = match kind {
            SpectrumKind::ReflectionComplex => 3,
            SpectrumKind::PsdQuanta => 2,
        };
        if fields.len() != expected {
            return Err(Error::CsvFormat {
                line: line_no,
                msg: format!("expected {expected} columns, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| Error::CsvFormat {
                line: line_no,
                msg: format!("cannot parse {what} `{s}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::CsvFormat {
                    line: line_no,
                    msg: format!("{what} is not finite"),
                });
            }
            Ok(v)
        };
        let f = parse(fields[0], "frequency")?;
        if let Some(last) = grid.last() {
            if f <= *last {
                return Err(Error::CsvFormat {
                    line: line_no,
                    msg: format!("grid is not strictly increasing at {f} Hz"),
                });
            }
        }
        grid.push(f);
        match kind {
            SpectrumKind::ReflectionComplex => {
                reflection.push(Complex64::new(
                    parse(fields[1], "re_s11")?,
                    parse(fields[2], "im_s11")?,
                ));
            }
            SpectrumKind::PsdQuanta => {
                let v = parse(fields[1], "psd_quanta")?;
                if v < 0.0 {
                    return Err(Error::CsvFormat {
                        line: line_no,
                        msg: format!("negative PSD value {v}"),
                    });
                }
                psd.push(v);
            }
        }
    }
    match kind {
        SpectrumKind::ReflectionComplex => Spectrum::new_reflection(grid, reflection, meta),
        SpectrumKind::PsdQuanta => Spectrum::new_psd(grid, psd, meta),
    }
}

/// Reads a spectrum CSV from `path`.
pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum> {
    parse_spectrum_csv(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------
// parameter files
// ---------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitSection {
    #[serde(rename = "Omega0")]
    omega0: f64,
    #[serde(rename = "Gamma0")]
    gamma0: f64,
    #[serde(rename = "GammaE")]
    gamma_e: Option<f64>,
    #[serde(rename = "omegaC")]
    omega_c: f64,
    kappa: f64,
    #[serde(rename = "kappaE")]
    kappa_e: f64,
    g0: f64,
    #[serde(rename = "Kerr")]
    kerr: f64,
    #[serde(rename = "kappaDriven")]
    kappa_driven: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    #[serde(rename = "DeltaD")]
    delta_d: f64,
    #[serde(rename = "nD")]
    n_d: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PumpSection {
    delta: f64,
    #[serde(rename = "gMinus")]
    g_minus: Option<f64>,
    #[serde(rename = "nMinus")]
    n_minus: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathSection {
    #[serde(rename = "nThRF")]
    n_th_rf: Option<f64>,
    #[serde(rename = "nThHF")]
    n_th_hf: Option<f64>,
    #[serde(rename = "nERF")]
    n_e_rf: Option<f64>,
    #[serde(rename = "nIRF")]
    n_i_rf: Option<f64>,
    #[serde(rename = "nEHF")]
    n_e_hf: Option<f64>,
    #[serde(rename = "nIHF")]
    n_i_hf: Option<f64>,
    #[serde(rename = "nAdd")]
    n_add: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    circuit: CircuitSection,
    drive: Option<DriveSection>,
    pump: Option<PumpSection>,
    baths: Option<BathSection>,
}

/// A fully resolved system description read from a parameter file.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub params: CircuitParams,
    /// Driven working point, when a drive section is present.
    pub drive: Option<DriveState>,
    /// Sideband pump, when a pump section is present (requires a drive).
    pub pump: Option<PumpConfig>,
    pub baths: BathOccupations,
}

/// Parses a parameter JSON document (all frequencies in Hz, strict
/// unknown-key rejection) into validated domain types.
pub fn parse_params_json(value: &serde_json::Value) -> Result<SystemConfig> {
    let file: ParamsFile = serde_json::from_value(value.clone()).map_err(map_serde_error)?;
    let c = &file.circuit;
    let mut map = BTreeMap::from([
        ("Omega0".to_string(), c.omega0),
        ("Gamma0".to_string(), c.gamma0),
        ("omegaC".to_string(), c.omega_c),
        ("kappa".to_string(), c.kappa),
        ("kappaE".to_string(), c.kappa_e),
        ("g0".to_string(), c.g0),
        ("Kerr".to_string(), c.kerr),
    ]);
    if let Some(ge) = c.gamma_e {
        map.insert("GammaE".to_string(), ge);
    }
    let params = CircuitParams::from_ordinary_frequencies(&map)?;
    let kappa_driven = c.kappa_driven.map(crate::params::angular);

    let drive = match &file.drive {
        Some(d) => Some(DriveState::from_working_point(
            &params,
            crate::params::angular(d.delta_d),
            d.n_d,
            kappa_driven,
        )?),
        None => None,
    };

    let pump = match (&file.pump, &drive) {
        (Some(p), Some(d)) => {
            let delta = crate::params::angular(p.delta);
            Some(match (p.g_minus, p.n_minus) {
                (Some(g), None) => PumpConfig::from_g_minus(
                    &params,
                    d,
                    delta,
                    Complex64::new(crate::params::angular(g), 0.0),
                )?,
                (None, Some(n)) => PumpConfig::from_photon_number(&params, d, delta, n)?,
                (None, None) => {
                    return Err(Error::MissingKey("pump.gMinus or pump.nMinus".into()))
                }
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidParameter {
                        name: "pump".into(),
                        reason: "give either gMinus or nMinus, not both".into(),
                    })
                }
            })
        }
        (Some(_), None) => {
            return Err(Error::MissingKey(
                "drive (required when a pump is configured)".into(),
            ))
        }
        (None, _) => None,
    };

    let baths = match &file.baths {
        None => BathOccupations::vacuum(),
        Some(b) => {
            let n_add = b.n_add.unwrap_or(0.0);
            let split_given =
                [b.n_e_rf, b.n_i_rf, b.n_e_hf, b.n_i_hf].iter().any(Option::is_some);
            let uniform_given = b.n_th_rf.is_some() || b.n_th_hf.is_some();
            if split_given && uniform_given {
                return Err(Error::InvalidParameter {
                    name: "baths".into(),
                    reason: "give either nThRF/nThHF or the nE/nI split, not both".into(),
                });
            }
            if split_given {
                BathOccupations::from_split(
                    &params,
                    b.n_e_rf.unwrap_or(0.0),
                    b.n_i_rf.unwrap_or(0.0),
                    b.n_e_hf.unwrap_or(0.0),
                    b.n_i_hf.unwrap_or(0.0),
                    n_add,
                )?
            } else {
                BathOccupations::uniform(
                    b.n_th_rf.unwrap_or(0.0),
                    b.n_th_hf.unwrap_or(0.0),
                    n_add,
                )?
            }
        }
    };

    Ok(SystemConfig {
        params,
        drive,
        pump,
        baths,
    })
}

fn map_serde_error(e: serde_json::Error) -> Error {
    let text = e.to_string();
    if let Some(rest) = text.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return Error::UnknownKey(rest[..end].to_string());
        }
    }
    if let Some(rest) = text.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            return Error::MissingKey(rest[..end].to_string());
        }
    }
    Error::Json(e)
}

/// Reads and resolves a parameter file from `path`.
pub fn read_params_file(path: &Path) -> Result<SystemConfig> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    parse_params_json(&value)
}
