use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("concentration must be non-negative, got {0}")]
    NegativeConcentration(f64),

    #[error("mean spacing is undefined for a zero surface density")]
    UndefinedSpacing,

    #[error("dipolar field is singular at zero separation")]
    Singularity,

    #[error("NV offset {offset:e} m is not inside the particle (radius {radius:e} m)")]
    NvOutsideParticle { offset: f64, radius: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("bright and dark records have mismatched grids ({bright} vs {dark} points)")]
    GridMismatch { bright: usize, dark: usize },

    #[error("differential measurement needs a t = 0 reference point, first time is {0:e} s")]
    MissingReference(f64),

    #[error("degenerate contrast: bright - dark at t = 0 is {0}, not significantly above zero")]
    DegenerateContrast(f64),

    #[error("no NV sites to average over")]
    EmptyEnsemble,

    #[error("insufficient data: need at least {need} points, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("fit failed after {starts} starts (best cost {best_cost:e}, projected gradient {best_gradient:e})")]
    FitFailure { starts: usize, best_cost: f64, best_gradient: f64 },

    #[error(
        "no bracket for T1 = {target:e} s: nearest reachable T1 is {nearest_t1:e} s at sigma = {nearest_sigma:e} m^-2 (relative residual {residual:.3e})"
    )]
    NoBracket { target: f64, nearest_sigma: f64, nearest_t1: f64, residual: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
