//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong while building parameters, evaluating
/// models or running a fit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing parameter key `{0}`")]
    MissingKey(String),

    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),

    #[error("parameter `{name}` is invalid: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite value for `{0}`")]
    NonFinite(String),

    #[error(
        "HF linewidth exceeds the RF resonance (kappa = {kappa_hz} Hz >= Omega0 = {omega0_hz} Hz); \
         the reduced sideband-resolved model does not apply"
    )]
    SidebandResolution { kappa_hz: f64, omega0_hz: f64 },

    #[error("unstable working point: (DeltaD - K nD)(DeltaD - 3 K nD) = {radicand} < 0")]
    UnstableWorkingPoint { radicand: f64 },

    #[error("idler frequency is zero; the gain factor diverges at the instability boundary")]
    ZeroIdlerFrequency,

    #[error("no real working point exists for gain {gain} (requires G <= 0 or G >= 1)")]
    UnreachableGain { gain: f64 },

    #[error("oscillator mass must be nonzero")]
    ZeroMass,

    #[error("gain factor must be nonzero for effective bath occupations")]
    ZeroGain,

    #[error("dressed susceptibility pole encountered (|denominator| = {denom_mag}); unstable working point")]
    SusceptibilitySingularity { denom_mag: f64 },

    #[error("coupling is above the normal-mode splitting point; effective linewidths are undefined")]
    AboveNormalModeSplitting,

    #[error("linear response system is singular at this frequency; unstable working point")]
    SingularSystem,

    #[error("model is degenerate: {0}")]
    DegenerateModel(String),

    #[error("not enough data: {points} points for {free} free parameters (need >= {needed})")]
    NotEnoughData {
        points: usize,
        free: usize,
        needed: usize,
    },

    #[error("spectrum kind mismatch: expected {expected}, got {got}")]
    SpectrumKind { expected: String, got: String },

    #[error("grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("csv line {line}: {msg}")]
    CsvFormat { line: usize, msg: String },

    #[error("fit did not converge within the iteration budget")]
    NonConvergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
