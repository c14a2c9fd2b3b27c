//! Staged least-squares calibration of the composite model against
//! T1-versus-concentration data.
//!
//! The phases of the triphasic response constrain nearly disjoint
//! parameters, so they are fitted in turn and the cycle repeated:
//!
//! 1. deionised points (c_gd = 0) fix the dangling-bond baseline σ₀;
//! 2. points at c_gd ≥ 100 mM fix the solution correlation time;
//! 3. plateau points (100 nM – 10 mM) fix σ_max, then knee and plateau
//!    points fix K_Gd;
//! 4. points with a Na⁺ background fix K_Na.
//!
//! All residuals are in ln T1. The surface correlation time is not fitted:
//! with T1 data alone it is exactly degenerate with σ.

use serde::{Deserialize, Serialize};

use super::forward::{invert_sigma, ForwardModel};
use super::optimize::golden_section;
use super::response::ResponsePoint;
use crate::adsorption::{occupancy, surface_density, LangmuirParams};
use crate::error::{Error, Result};
use crate::units::molar_to_density;

/// Lower edge of the surface-saturation plateau, mol·L⁻¹.
pub const PLATEAU_MIN: f64 = 1e-7;
/// Upper edge of the plateau, mol·L⁻¹.
pub const PLATEAU_MAX: f64 = 1e-2;
/// Gd³⁺ concentration above which solution spins dominate, mol·L⁻¹.
pub const SOLUTION_MIN: f64 = 0.1;

const PASSES: usize = 3;
const LOG_TOL: f64 = 1e-4;
const K_GD_RANGE: (f64, f64) = (1e2, 1e13);
const K_NA_RANGE: (f64, f64) = (1e-3, 1e10);
const TAU_MAX: f64 = 1e-6;
/// ln-residual charged for a point the model cannot evaluate.
const FAILED_POINT_PENALTY: f64 = 10.0;

/// A measured T1 at one condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub c_gd: f64,
    pub c_na: f64,
    /// s.
    pub t1: f64,
    pub t1_err: Option<f64>,
}

impl From<&ResponsePoint> for Observation {
    fn from(p: &ResponsePoint) -> Self {
        Self { c_gd: p.c_gd, c_na: p.c_na, t1: p.t1, t1_err: Some(p.t1_uncertainty) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResidual {
    pub c_gd: f64,
    pub c_na: f64,
    pub t1_observed: f64,
    pub t1_model: f64,
    /// ln(t1_model / t1_observed).
    pub log_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub langmuir: LangmuirParams,
    /// s; held fixed.
    pub surface_tau_c: f64,
    /// s.
    pub solution_tau_c: f64,
    pub residuals: Vec<CalibrationResidual>,
    pub rms_log_residual: f64,
    pub warnings: Vec<String>,
    /// Set when the data did not span enough phases and fallback values were
    /// kept for some parameters.
    pub ill_posed: bool,
}

impl Calibration {
    /// The forward model with the calibrated solution correlation time.
    pub fn apply(&self, model: &ForwardModel) -> Result<ForwardModel> {
        Ok(model.with_solution_species(model.solution_species.with_tau_c(self.solution_tau_c)?))
    }
}

#[derive(Default)]
struct Phases {
    baseline: Vec<Observation>,
    knee: Vec<Observation>,
    plateau: Vec<Observation>,
    solution: Vec<Observation>,
    competition: Vec<Observation>,
}

fn classify(data: &[Observation]) -> Phases {
    let mut p = Phases::default();
    for o in data {
        if o.c_gd == 0.0 {
            p.baseline.push(*o);
        } else if o.c_gd >= SOLUTION_MIN {
            p.solution.push(*o);
        } else if o.c_na > 0.0 {
            p.competition.push(*o);
        } else if o.c_gd >= PLATEAU_MIN && o.c_gd <= PLATEAU_MAX {
            p.plateau.push(*o);
        } else {
            p.knee.push(*o);
        }
    }
    p
}

fn validate(data: &[Observation]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    for o in data {
        if !(o.c_gd >= 0.0) || !(o.c_na >= 0.0) {
            return Err(Error::NegativeConcentration(o.c_gd.min(o.c_na)));
        }
        if !(o.t1 > 0.0) || !o.t1.is_finite() {
            return Err(Error::invalid("t1", format!("observed T1 must be positive, got {}", o.t1)));
        }
    }
    Ok(())
}

fn model_t1(model: &ForwardModel, params: &LangmuirParams, o: &Observation) -> Result<f64> {
    let sigma = surface_density(o.c_gd, o.c_na, params)?;
    Ok(model.t1(sigma, molar_to_density(o.c_gd)?)?.t1)
}

fn log_residual(model: &ForwardModel, params: &LangmuirParams, o: &Observation) -> f64 {
    match model_t1(model, params, o) {
        Ok(t1) if t1.is_finite() => (t1 / o.t1).ln(),
        _ => FAILED_POINT_PENALTY,
    }
}

fn sum_sq(model: &ForwardModel, params: &LangmuirParams, points: &[Observation]) -> f64 {
    points.iter().map(|o| log_residual(model, params, o).powi(2)).sum()
}

fn geometric_mean(points: &[Observation]) -> f64 {
    (points.iter().map(|o| o.t1.ln()).sum::<f64>() / points.len() as f64).exp()
}

/// Calibrates starting from the crate defaults.
pub fn calibrate(model: &ForwardModel, data: &[Observation]) -> Result<Calibration> {
    calibrate_from(model, data, &LangmuirParams::default())
}

/// Calibrates starting from (and falling back to) `initial`.
pub fn calibrate_from(
    model: &ForwardModel,
    data: &[Observation],
    initial: &LangmuirParams,
) -> Result<Calibration> {
    validate(data)?;
    initial.validate()?;
    let phases = classify(data);
    let mut warnings = Vec::new();
    let mut ill_posed = false;

    let present = [
        !phases.baseline.is_empty(),
        !(phases.knee.is_empty() && phases.plateau.is_empty()),
        !phases.solution.is_empty(),
    ];
    if present.iter().filter(|p| **p).count() < 2 {
        ill_posed = true;
        warnings.push(
            "ill-posed calibration: data cover a single phase of the response; \
             fallback parameters kept"
                .to_string(),
        );
    }
    if phases.plateau.is_empty() {
        ill_posed = true;
        warnings.push(format!(
            "ill-posed calibration: no plateau points ({PLATEAU_MIN:e}..{PLATEAU_MAX:e} M Gd, no Na); \
             sigma_max and K_Gd held at fallback values"
        ));
    }
    if phases.baseline.is_empty() {
        ill_posed = true;
        warnings.push("no deionised (c_gd = 0) points; sigma_baseline held at fallback value".into());
    }
    if phases.solution.is_empty() {
        warnings.push(format!(
            "no points at c_gd >= {SOLUTION_MIN} M; solution tau_c held at {:e} s",
            model.solution_species.tau_c
        ));
    }
    if phases.competition.is_empty() {
        warnings.push("no points with a Na+ background; K_Na held at fallback value".into());
    }

    let mut params = *initial;
    let mut model = model.clone();

    if !phases.baseline.is_empty() {
        let inv = invert_sigma(&model, geometric_mean(&phases.baseline), 0.0)?;
        params.sigma_baseline = inv.sigma;
    }

    if !ill_posed || !phases.plateau.is_empty() || !phases.solution.is_empty() {
        for _ in 0..PASSES {
            if !phases.solution.is_empty() {
                let lo = (1.0 / model.particle.omega).ln();
                let base = model.clone();
                let (log_tau, _) = golden_section(
                    |x| {
                        let m = base.with_solution_species(base.solution_species.with_tau_c(x.exp())?);
                        Ok(sum_sq(&m, &params, &phases.solution))
                    },
                    lo,
                    TAU_MAX.ln(),
                    LOG_TOL,
                )?;
                model = base.with_solution_species(base.solution_species.with_tau_c(log_tau.exp())?);
            }

            if !phases.plateau.is_empty() {
                let mut total = 0.0;
                for o in &phases.plateau {
                    let inv = invert_sigma(&model, o.t1, molar_to_density(o.c_gd)?)?;
                    let theta = occupancy(o.c_gd, 0.0, &params)?;
                    total += (inv.sigma - params.sigma_baseline) / theta;
                }
                let sigma_max = total / phases.plateau.len() as f64;
                if sigma_max <= 0.0 {
                    warnings.push("plateau T1 is not below the deionised T1; sigma_max set to 0".into());
                }
                params.sigma_max = sigma_max.max(0.0);

                let points: Vec<Observation> =
                    phases.knee.iter().chain(&phases.plateau).copied().collect();
                let (log_k, _) = golden_section(
                    |x| Ok(sum_sq(&model, &LangmuirParams { k_gd: x.exp(), ..params }, &points)),
                    K_GD_RANGE.0.ln(),
                    K_GD_RANGE.1.ln(),
                    LOG_TOL,
                )?;
                params.k_gd = log_k.exp();
            }

            if !phases.competition.is_empty() {
                let (log_k, _) = golden_section(
                    |x| {
                        Ok(sum_sq(
                            &model,
                            &LangmuirParams { k_na: x.exp(), ..params },
                            &phases.competition,
                        ))
                    },
                    K_NA_RANGE.0.ln(),
                    K_NA_RANGE.1.ln(),
                    LOG_TOL,
                )?;
                params.k_na = log_k.exp();
            }
        }
    }

    let residuals: Vec<CalibrationResidual> = data
        .iter()
        .map(|o| {
            let t1_model = model_t1(&model, &params, o).unwrap_or(f64::NAN);
            CalibrationResidual {
                c_gd: o.c_gd,
                c_na: o.c_na,
                t1_observed: o.t1,
                t1_model,
                log_residual: (t1_model / o.t1).ln(),
            }
        })
        .collect();
    let finite: Vec<f64> =
        residuals.iter().map(|r| r.log_residual).filter(|r| r.is_finite()).collect();
    let rms_log_residual = if finite.is_empty() {
        f64::NAN
    } else {
        (finite.iter().map(|r| r * r).sum::<f64>() / finite.len() as f64).sqrt()
    };

    Ok(Calibration {
        langmuir: params,
        surface_tau_c: model.surface_species.tau_c,
        solution_tau_c: model.solution_species.tau_c,
        residuals,
        rms_log_residual,
        warnings,
        ill_posed,
    })
}
