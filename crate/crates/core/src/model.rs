//! Shared domain types: spin species, particle geometry and the noise bath.

use serde::{Deserialize, Serialize};

use crate::constants::*;
use crate::error::{Error, Result};

/// A paramagnetic species acting as a magnetic noise source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSpecies {
    pub name: String,
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma: f64,
    /// Spin quantum number S (a non-negative multiple of ½; 0 means spinless).
    pub spin: f64,
    /// Correlation time of the field fluctuations, s.
    pub tau_c: f64,
}

impl SpinSpecies {
    pub fn new(name: impl Into<String>, gamma: f64, spin: f64, tau_c: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(tau_c > 0.0) || !tau_c.is_finite() {
            return Err(Error::invalid("tau_c", format!("must be positive, got {tau_c}")));
        }
        let twice = 2.0 * spin;
        if !(spin >= 0.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::invalid("spin", format!("must be a multiple of 1/2, got {spin}")));
        }
        Ok(Self { name: name.into(), gamma, spin, tau_c })
    }

    /// Gd³⁺: S = 7/2 with the free-electron gyromagnetic ratio.
    pub fn gd3() -> Self {
        Self { name: "Gd3+".into(), gamma: GAMMA_ELECTRON, spin: GD_SPIN, tau_c: GD_TAU_C }
    }

    /// Gd³⁺ in solution with the calibrated correlation time.
    pub fn gd3_solution() -> Self {
        Self { tau_c: GD_SOLUTION_TAU_C, ..Self::gd3() }
    }

    /// Surface dangling bond: a free-electron S = 1/2 defect.
    pub fn dangling_bond() -> Self {
        Self {
            name: "dangling-bond".into(),
            gamma: GAMMA_ELECTRON,
            spin: DANGLING_BOND_SPIN,
            tau_c: GD_TAU_C,
        }
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gd3+" | "gd" | "gd3" => Some(Self::gd3()),
            "gd3+-solution" | "gd-solution" => Some(Self::gd3_solution()),
            "dangling-bond" | "free-electron" => Some(Self::dangling_bond()),
            _ => None,
        }
    }

    /// S(S+1).
    pub fn spin_magnitude_sq(&self) -> f64 {
        self.spin * (self.spin + 1.0)
    }

    pub fn with_tau_c(&self, tau_c: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.gamma, self.spin, tau_c)
    }
}

/// Spherical nanodiamond hosting an NV ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleModel {
    /// Particle radius, m.
    pub radius: f64,
    /// NV centres per particle.
    pub n_nv: usize,
    /// Frequency entering the Lorentzian spectral weight, s⁻¹.
    pub omega: f64,
    /// NV electron gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma_e: f64,
    /// Relaxation rate with no bath spins, s⁻¹.
    pub intrinsic_rate: f64,
    /// Distance of the adsorbed-spin shell outside the diamond surface, m.
    pub surface_standoff: f64,
}

impl Default for ParticleModel {
    fn default() -> Self {
        Self {
            radius: PARTICLE_RADIUS,
            n_nv: NV_PER_PARTICLE,
            omega: NV_OMEGA,
            gamma_e: GAMMA_ELECTRON,
            intrinsic_rate: 0.0,
            surface_standoff: 0.0,
        }
    }
}

impl ParticleModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::invalid("radius", format!("must be positive, got {}", self.radius)));
        }
        if self.n_nv < 1 {
            return Err(Error::invalid("n_nv", "need at least one NV centre"));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if !(self.gamma_e > 0.0) || !self.gamma_e.is_finite() {
            return Err(Error::invalid("gamma_e", format!("must be positive, got {}", self.gamma_e)));
        }
        if !(self.intrinsic_rate >= 0.0) || !self.intrinsic_rate.is_finite() {
            return Err(Error::invalid(
                "intrinsic_rate",
                format!("must be non-negative, got {}", self.intrinsic_rate),
            ));
        }
        if !(self.surface_standoff >= 0.0) || !self.surface_standoff.is_finite() {
            return Err(Error::invalid(
                "surface_standoff",
                format!("must be non-negative, got {}", self.surface_standoff),
            ));
        }
        Ok(())
    }

    /// Radius of the shell on which adsorbed spins sit.
    pub fn surface_shell_radius(&self) -> f64 {
        self.radius + self.surface_standoff
    }
}

/// The two noise populations seen by the NV ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathState {
    /// Areal density of adsorbed spins, m⁻².
    pub sigma: f64,
    /// Volumetric density of spins in solution, m⁻³.
    pub rho: f64,
    pub surface_species: SpinSpecies,
    pub solution_species: SpinSpecies,
}

impl BathState {
    pub fn new(
        sigma: f64,
        rho: f64,
        surface_species: SpinSpecies,
        solution_species: SpinSpecies,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be non-negative, got {sigma}")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::invalid("rho", format!("must be non-negative, got {rho}")));
        }
        Ok(Self { sigma, rho, surface_species, solution_species })
    }

    /// Gd³⁺ on the surface and in solution with default correlation times.
    pub fn gd(sigma: f64, rho: f64) -> Result<Self> {
        Self::new(sigma, rho, SpinSpecies::gd3(), SpinSpecies::gd3_solution())
    }

    /// No surface or solution spins.
    pub fn empty() -> Self {
        Self {
            sigma: 0.0,
            rho: 0.0,
            surface_species: SpinSpecies::gd3(),
            solution_species: SpinSpecies::gd3_solution(),
        }
    }
}
