//! Forward model T1(σ, ρ): ensemble decay on a fixed NV sample followed by a
//! stretched-exponential fit, and its inversion for σ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::stretched::{fit_stretched_exp, BetaMode, StretchedExpFit};
use crate::constants::{
    GRID_POINTS, GRID_SPAN, GRID_T_MIN, INVERSION_RTOL, SIGMA_SEARCH_MAX, SIGMA_SEARCH_MIN,
};
use crate::dipolar::{NvSite, RateCoefficients, SiteCoupling};
use crate::ensemble::{
    decay_from_rates, log_grid, sample_aggregate_sites, site_couplings, AggregateSpec, DecayCurve,
};
use crate::error::{Error, Result};
use crate::model::{BathState, ParticleModel, SpinSpecies};

/// Log-spaced sampling used to extract T1 from a model curve: `points`
/// samples from `t_min` to `span` × the current T1 estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub t_min: f64,
    pub span: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: GRID_POINTS, t_min: GRID_T_MIN, span: GRID_SPAN }
    }
}

impl GridSpec {
    pub fn times_for(&self, t1_estimate: f64) -> Result<Vec<f64>> {
        let t_max = (self.span * t1_estimate).max(10.0 * self.t_min);
        log_grid(self.t_min, t_max, self.points)
    }
}

/// Model T1 with the fit and sampling that produced it.
#[derive(Clone, Debug)]
pub struct ModelT1 {
    /// s; infinite when no site relaxes at all.
    pub t1: f64,
    pub fit: Option<StretchedExpFit>,
    pub curve: Option<DecayCurve>,
}

const FIXED_POINT_RTOL: f64 = 1e-7;
const FIXED_POINT_MAX_ITER: usize = 40;

#[derive(Clone, Debug)]
pub struct ForwardModel {
    pub particle: ParticleModel,
    pub surface_species: SpinSpecies,
    pub solution_species: SpinSpecies,
    pub grid: GridSpec,
    pub beta_mode: BetaMode,
    couplings: Arc<[SiteCoupling]>,
}

impl ForwardModel {
    pub fn new(
        particle: ParticleModel,
        surface_species: SpinSpecies,
        solution_species: SpinSpecies,
        sites: &[NvSite],
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let couplings = site_couplings(sites, &particle)?;
        Ok(Self {
            particle,
            surface_species,
            solution_species,
            grid: GridSpec::default(),
            beta_mode: BetaMode::fixed(),
            couplings: couplings.into(),
        })
    }

    /// Samples an aggregate from `seed` and uses Gd³⁺ presets for both
    /// populations.
    pub fn sampled(particle: ParticleModel, aggregate: &AggregateSpec, seed: u64) -> Result<Self> {
        let sites = sample_aggregate_sites(&particle, aggregate, seed)?;
        Self::new(particle, SpinSpecies::gd3(), SpinSpecies::gd3_solution(), &sites)
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_beta_mode(mut self, mode: BetaMode) -> Self {
        self.beta_mode = mode;
        self
    }

    pub fn with_solution_species(&self, species: SpinSpecies) -> Self {
        Self { solution_species: species, ..self.clone() }
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.len()
    }

    pub fn bath(&self, sigma: f64, rho: f64) -> Result<BathState> {
        BathState::new(sigma, rho, self.surface_species.clone(), self.solution_species.clone())
    }

    pub fn rates(&self, sigma: f64, rho: f64) -> Result<Vec<f64>> {
        let coefficients = RateCoefficients::new(&self.particle, &self.bath(sigma, rho)?);
        Ok(self.couplings.iter().map(|c| coefficients.rate(c)).collect())
    }

    pub fn decay(&self, sigma: f64, rho: f64, times: &[f64]) -> Result<DecayCurve> {
        decay_from_rates(&self.rates(sigma, rho)?, times)
    }

    /// Fitted T1 of the model curve. The sampling window is iterated to a
    /// fixed point so that it always ends at `span` × the reported T1.
    pub fn t1(&self, sigma: f64, rho: f64) -> Result<ModelT1> {
        let rates = self.rates(sigma, rho)?;
        let mut positive: Vec<f64> = rates.iter().copied().filter(|r| *r > 0.0).collect();
        if positive.is_empty() {
            return Ok(ModelT1 { t1: f64::INFINITY, fit: None, curve: None });
        }
        positive.sort_by(|a, b| a.total_cmp(b));
        let mut estimate = positive[positive.len() / 2].recip();
        let mut last = None;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let times = self.grid.times_for(estimate)?;
            let curve = decay_from_rates(&rates, &times)?;
            let fit = fit_stretched_exp(&curve, self.beta_mode)?;
            let done = ((fit.t1 - estimate) / estimate).abs() <= FIXED_POINT_RTOL;
            estimate = fit.t1;
            last = Some((fit, curve));
            if done {
                break;
            }
        }
        let (fit, curve) = last.expect("at least one iteration");
        Ok(ModelT1 { t1: fit.t1, fit: Some(fit), curve: Some(curve) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    /// m⁻².
    pub sigma: f64,
    /// Model T1 at the returned σ, s.
    pub model_t1: f64,
    pub evaluations: usize,
}

/// Finds σ such that the model T1 at (σ, ρ) equals `measured_t1`.
///
/// Model T1 decreases strictly with σ, so the root is bracketed on
/// [10¹⁴, 10²⁰] m⁻² and refined by bisection on log σ to a relative T1
/// tolerance of 10⁻³. Below the bracket a zero-σ model with finite T1 is
/// handled by bisection on linear σ.
pub fn invert_sigma(model: &ForwardModel, measured_t1: f64, rho: f64) -> Result<Inversion> {
    invert_sigma_with(model, measured_t1, rho, INVERSION_RTOL)
}

pub fn invert_sigma_with(
    model: &ForwardModel,
    measured_t1: f64,
    rho: f64,
    rtol: f64,
) -> Result<Inversion> {
    if !(measured_t1 > 0.0) || !measured_t1.is_finite() {
        return Err(Error::invalid("measured_t1", format!("must be positive, got {measured_t1}")));
    }
    let mut evaluations = 0;
    let mut t1_at = |sigma: f64| -> Result<f64> {
        evaluations += 1;
        Ok(model.t1(sigma, rho)?.t1)
    };
    let close = |t1: f64| ((t1 - measured_t1) / measured_t1).abs() <= rtol;

    let t1_zero = t1_at(0.0)?;
    if t1_zero.is_finite() && (measured_t1 >= t1_zero || close(t1_zero)) {
        return Ok(Inversion { sigma: 0.0, model_t1: t1_zero, evaluations });
    }
    let t1_lo = t1_at(SIGMA_SEARCH_MIN)?;
    let t1_hi = t1_at(SIGMA_SEARCH_MAX)?;
    if measured_t1 < t1_hi && !close(t1_hi) {
        return Err(Error::NoBracket {
            target: measured_t1,
            nearest_sigma: SIGMA_SEARCH_MAX,
            nearest_t1: t1_hi,
            residual: (t1_hi - measured_t1) / measured_t1,
        });
    }

    // Bisection in `coordinate` space, mapped to σ by `to_sigma`.
    let mut bisect = |mut a: f64, mut b: f64, to_sigma: &dyn Fn(f64) -> f64| -> Result<Inversion> {
        let mut best = (to_sigma(a), f64::NAN);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let sigma = to_sigma(mid);
            let t1 = t1_at(sigma)?;
            best = (sigma, t1);
            if close(t1) || (b - a).abs() <= 1e-12 * (a.abs() + b.abs()) {
                break;
            }
            // T1 decreases with σ: too long means σ is too small.
            if t1 > measured_t1 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(Inversion { sigma: best.0, model_t1: best.1, evaluations: 0 })
    };

    let mut result = if measured_t1 > t1_lo && !close(t1_lo) {
        if !t1_zero.is_finite() {
            return Err(Error::NoBracket {
                target: measured_t1,
                nearest_sigma: SIGMA_SEARCH_MIN,
                nearest_t1: t1_lo,
                residual: (t1_lo - measured_t1) / measured_t1,
            });
        }
        bisect(0.0, SIGMA_SEARCH_MIN, &|s| s)?
    } else if close(t1_lo) {
        Inversion { sigma: SIGMA_SEARCH_MIN, model_t1: t1_lo, evaluations: 0 }
    } else if close(t1_hi) {
        Inversion { sigma: SIGMA_SEARCH_MAX, model_t1: t1_hi, evaluations: 0 }
    } else {
        bisect(SIGMA_SEARCH_MIN.ln(), SIGMA_SEARCH_MAX.ln(), &|x| x.exp())?
    };
    result.evaluations = evaluations;
    Ok(result)
}
