//! Competitive Langmuir adsorption of Gd³⁺ and Na⁺ on the carboxylated
//! nanodiamond surface, on top of a fixed dangling-bond spin density.

use serde::{Deserialize, Serialize};

use crate::constants::{K_GD, K_NA, SIGMA_BASELINE, SIGMA_MAX};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LangmuirParams {
    /// Dangling-bond spins present in deionised water, m⁻².
    pub sigma_baseline: f64,
    /// Density of exchangeable binding sites, m⁻².
    pub sigma_max: f64,
    /// Gd³⁺ affinity, L·mol⁻¹.
    pub k_gd: f64,
    /// Na⁺ affinity, L·mol⁻¹.
    pub k_na: f64,
}

impl Default for LangmuirParams {
    fn default() -> Self {
        Self { sigma_baseline: SIGMA_BASELINE, sigma_max: SIGMA_MAX, k_gd: K_GD, k_na: K_NA }
    }
}

impl LangmuirParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma_baseline", self.sigma_baseline),
            ("sigma_max", self.sigma_max),
            ("k_gd", self.k_gd),
            ("k_na", self.k_na),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

fn check_concentrations(c_gd: f64, c_na: f64) -> Result<()> {
    for c in [c_gd, c_na] {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::NegativeConcentration(c));
        }
    }
    Ok(())
}

/// Fraction of binding sites holding Gd³⁺.
pub fn occupancy(c_gd: f64, c_na: f64, p: &LangmuirParams) -> Result<f64> {
    check_concentrations(c_gd, c_na)?;
    let gd = p.k_gd * c_gd;
    Ok(gd / (1.0 + gd + p.k_na * c_na))
}

/// Paramagnetic surface density σ(c_gd, c_na), m⁻².
///
/// Na⁺ competes for sites but carries no spin, so only the Gd³⁺ share adds to
/// the baseline.
pub fn surface_density(c_gd: f64, c_na: f64, p: &LangmuirParams) -> Result<f64> {
    Ok(p.sigma_baseline + p.sigma_max * occupancy(c_gd, c_na, p)?)
}

/// Factor by which Na⁺ multiplies the Gd³⁺ concentration needed for a given
/// occupancy: 1 + K_Na·c_Na.
pub fn onset_shift(p: &LangmuirParams, c_na: f64) -> Result<f64> {
    check_concentrations(0.0, c_na)?;
    Ok(1.0 + p.k_na * c_na)
}
