//! Stretched-exponential fitting, σ inversion, calibration and response
//! curves.

pub mod calibrate;
pub mod forward;
mod lm;
mod optimize;
pub mod response;
pub mod stretched;

pub use calibrate::{calibrate, calibrate_from, Calibration, CalibrationResidual, Observation};
pub use forward::{invert_sigma, invert_sigma_with, ForwardModel, GridSpec, Inversion, ModelT1};
pub use response::{response_curve, response_point, PointFailure, ResponsePoint};
pub use stretched::{fit_stretched_exp, BetaMode, StretchedExp, StretchedExpFit};
