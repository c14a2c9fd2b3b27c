//! T1-versus-concentration sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forward::ForwardModel;
use crate::adsorption::{surface_density, LangmuirParams};
use crate::error::{Error, Result};
use crate::units::molar_to_density;

/// One point of a response curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    /// Gd³⁺ concentration, mol·L⁻¹.
    pub c_gd: f64,
    /// Na⁺ concentration, mol·L⁻¹.
    pub c_na: f64,
    /// s.
    pub t1: f64,
    /// s.
    pub t1_uncertainty: f64,
    /// Surface density the point was simulated with, m⁻².
    pub sigma_used: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub c_gd: f64,
    pub c_na: f64,
    pub message: String,
}

/// Simulates and fits every Gd³⁺ concentration of `grid` at fixed Na⁺.
///
/// A point that fails is reported in place; the sweep always runs to the end.
pub fn response_curve(
    model: &ForwardModel,
    params: &LangmuirParams,
    grid: &[f64],
    c_na: f64,
) -> Result<Vec<Result<ResponsePoint, PointFailure>>> {
    params.validate()?;
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("grid", "concentrations must be sorted ascending"));
    }
    Ok(grid.par_iter().map(|&c_gd| response_point(model, params, c_gd, c_na)).collect())
}

pub fn response_point(
    model: &ForwardModel,
    params: &LangmuirParams,
    c_gd: f64,
    c_na: f64,
) -> Result<ResponsePoint, PointFailure> {
    let fail = |e: Error| PointFailure { c_gd, c_na, message: e.to_string() };
    let sigma = surface_density(c_gd, c_na, params).map_err(fail)?;
    let rho = molar_to_density(c_gd).map_err(fail)?;
    let out = model.t1(sigma, rho).map_err(fail)?;
    let Some(fit) = out.fit else {
        return Err(fail(Error::DegenerateInput("no relaxation: every NV rate is zero".into())));
    };
    Ok(ResponsePoint {
        c_gd,
        c_na,
        t1: fit.t1,
        t1_uncertainty: fit.t1_uncertainty,
        sigma_used: sigma,
        beta: fit.beta,
    })
}
