//! Unit conversions between user-facing molar quantities and SI densities.

use crate::constants::{AVOGADRO, LITRES_PER_M3};
use crate::error::{Error, Result};

/// Converts a concentration in mol·L⁻¹ to a number density in m⁻³.
pub fn molar_to_density(molar: f64) -> Result<f64> {
    if !(molar >= 0.0) || !molar.is_finite() {
        return Err(Error::NegativeConcentration(molar));
    }
    Ok(molar * AVOGADRO * LITRES_PER_M3)
}

/// Inverse of [`molar_to_density`].
pub fn density_to_molar(density: f64) -> Result<f64> {
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::NegativeConcentration(density));
    }
    Ok(density / (AVOGADRO * LITRES_PER_M3))
}

/// Mean nearest-neighbour scale of a surface density, 1/√σ.
pub fn mean_spacing(sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Err(Error::UndefinedSpacing);
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(sigma.sqrt().recip())
}
