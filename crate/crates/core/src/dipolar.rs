//! Single-NV relaxation rate from surface and solution spin populations.
//!
//! Each bath spin at distance r contributes
//! `3 γ_e² ⟨B⊥²⟩(r) τ_c / (1 + ω² τ_c²)` with the point-dipole variance
//! `⟨B⊥²⟩ = (2/3)(μ₀/4π)² (γħ)² S(S+1) / r⁶`. Uniform densities on the
//! particle surface and in the surrounding solution reduce the sum over
//! spins to the two geometry integrals below.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, MU0_OVER_4PI};
use crate::error::{Error, Result};
use crate::model::{BathState, ParticleModel, SpinSpecies};

/// Position of one NV centre, as its distance from the particle centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NvSite {
    /// Radial offset d, m.
    pub offset: f64,
}

impl NvSite {
    pub fn new(offset: f64) -> Self {
        Self { offset }
    }

    pub fn check_inside(&self, particle: &ParticleModel) -> Result<()> {
        if self.offset >= 0.0 && self.offset < particle.radius {
            Ok(())
        } else {
            Err(Error::NvOutsideParticle { offset: self.offset, radius: particle.radius })
        }
    }
}

/// Spectral weight τ_c / (1 + ω²τ_c²), s.
pub fn lorentzian_weight(species: &SpinSpecies, omega: f64) -> f64 {
    let tau = species.tau_c;
    tau / (1.0 + (omega * tau).powi(2))
}

/// (2/3)(μ₀/4π)²(γħ)², T²·m⁶.
pub fn dipolar_coefficient(gamma: f64) -> f64 {
    2.0 / 3.0 * MU0_OVER_4PI.powi(2) * (gamma * HBAR).powi(2)
}

/// Transverse field variance of one spin of `species` at distance `r`, T².
pub fn transverse_field_variance(r: f64, species: &SpinSpecies) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("must be positive, got {r}")));
    }
    Ok(dipolar_coefficient(species.gamma) * species.spin_magnitude_sq() / r.powi(6))
}

fn check_geometry(d: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(d >= 0.0 && d < radius) {
        return Err(Error::NvOutsideParticle { offset: d, radius });
    }
    Ok(d / radius)
}

/// ∮_{|x|=R} dA / |x − p|⁶ for a point at distance `d` from the centre, m⁻⁴.
///
/// Equal to (πR / 2d)[(R−d)⁻⁴ − (R+d)⁻⁴]; evaluated in the cancellation-free
/// form 4π(1 + x²) / (R⁴(1 − x²)⁴) with x = d/R, which is also exact at d = 0.
pub fn surface_geometry_integral(d: f64, radius: f64) -> Result<f64> {
    let x = check_geometry(d, radius)?;
    let x2 = x * x;
    Ok(4.0 * PI * (1.0 + x2) / (radius.powi(4) * (1.0 - x2).powi(4)))
}

/// ∫_{|x|>R} dV / |x − p|⁶ for a point at distance `d` from the centre, m⁻³.
///
/// The textbook form (π/2d)[½((R−d)⁻² − (R+d)⁻²) + (d/3)((R−d)⁻³ + (R+d)⁻³)]
/// simplifies to πR/(R²−d²)² + πR(R² + 3d²)/(3(R²−d²)³).
pub fn solution_geometry_integral(d: f64, radius: f64) -> Result<f64> {
    check_geometry(d, radius)?;
    let q = radius * radius - d * d;
    Ok(PI * radius / (q * q) + PI * radius * (radius * radius + 3.0 * d * d) / (3.0 * q.powi(3)))
}

/// Geometry integrals of one NV site, independent of the bath.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteCoupling {
    /// Surface integral over the adsorbed-spin shell, m⁻⁴.
    pub surface: f64,
    /// Volume integral over the solution, m⁻³.
    pub solution: f64,
}

impl SiteCoupling {
    pub fn new(site: NvSite, particle: &ParticleModel) -> Result<Self> {
        site.check_inside(particle)?;
        Ok(Self {
            surface: surface_geometry_integral(site.offset, particle.surface_shell_radius())?,
            solution: solution_geometry_integral(site.offset, particle.radius)?,
        })
    }
}

/// Bath-dependent prefactors: Γ = intrinsic + surface·I_s + solution·I_v.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCoefficients {
    pub intrinsic: f64,
    /// s⁻¹·m⁴ (includes σ).
    pub surface: f64,
    /// s⁻¹·m³ (includes ρ).
    pub solution: f64,
}

impl RateCoefficients {
    pub fn new(particle: &ParticleModel, bath: &BathState) -> Self {
        let per_spin = |species: &SpinSpecies| {
            3.0 * particle.gamma_e.powi(2)
                * lorentzian_weight(species, particle.omega)
                * dipolar_coefficient(species.gamma)
                * species.spin_magnitude_sq()
        };
        Self {
            intrinsic: particle.intrinsic_rate,
            surface: per_spin(&bath.surface_species) * bath.sigma,
            solution: per_spin(&bath.solution_species) * bath.rho,
        }
    }

    #[inline]
    pub fn rate(&self, coupling: &SiteCoupling) -> f64 {
        self.intrinsic + self.surface * coupling.surface + self.solution * coupling.solution
    }
}

/// Relaxation rate Γ = 1/T1 of a single NV centre, s⁻¹.
pub fn nv_rate(site: NvSite, particle: &ParticleModel, bath: &BathState) -> Result<f64> {
    let coupling = SiteCoupling::new(site, particle)?;
    Ok(RateCoefficients::new(particle, bath).rate(&coupling))
}
