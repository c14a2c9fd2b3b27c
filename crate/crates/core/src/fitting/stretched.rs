//! Stretched-exponential fits A·exp(−(t/T1)^β).
//!
//! T1 here is the 1/e argument of the stretched exponential, not the mean
//! relaxation time (the two differ by Γ(1/β)/β).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{self, LmOptions};
use crate::constants::FIXED_BETA;
use crate::ensemble::DecayCurve;
use crate::error::{Error, Result};

const MIN_POINTS: usize = 4;
const BETA_MIN: f64 = 0.05;
const BETA_MAX: f64 = 1.0;
const T1_SEEDS: usize = 7;
/// T1 may wander this factor outside the sampled time range before the fit
/// counts as unconstrained.
const T1_RANGE_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaMode {
    /// β held at the given value.
    Fixed(f64),
    Free,
}

impl BetaMode {
    /// β = 0.5, the mode used for T1 extraction.
    pub fn fixed() -> Self {
        BetaMode::Fixed(FIXED_BETA)
    }

    fn n_params(&self) -> usize {
        match self {
            BetaMode::Fixed(_) => 2,
            BetaMode::Free => 3,
        }
    }
}

impl Default for BetaMode {
    fn default() -> Self {
        Self::fixed()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchedExpFit {
    pub amplitude: f64,
    /// s.
    pub t1: f64,
    pub beta: f64,
    /// √(Σ w r²); unweighted when the curve has no uncertainties.
    pub residual_norm: f64,
    pub converged: bool,
    /// Covariance of (amplitude, t1, beta); the β row and column are zero in
    /// fixed mode.
    pub covariance: [[f64; 3]; 3],
    /// √cov(t1, t1), s.
    pub t1_uncertainty: f64,
    /// Σ w r² (equal to residual_norm²).
    pub chi2: f64,
    /// Points used minus free parameters.
    pub dof: usize,
    /// Whether 1/σ² weights were applied.
    pub weighted: bool,
}

impl StretchedExpFit {
    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof.max(1) as f64
    }
}

/// The model and its gradient in the internal parametrisation
/// (A, ln T1, β).
#[derive(Clone, Copy, Debug)]
pub struct StretchedExp {
    pub amplitude: f64,
    pub log_t1: f64,
    pub beta: f64,
}

impl StretchedExp {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (-self.stretch(t)).exp()
    }

    fn stretch(&self, t: f64) -> f64 {
        if t > 0.0 {
            (self.beta * (t.ln() - self.log_t1)).exp()
        } else {
            0.0
        }
    }

    /// ∂f/∂(A, ln T1, β).
    pub fn gradient(&self, t: f64) -> [f64; 3] {
        let s = self.stretch(t);
        let e = (-s).exp();
        if s == 0.0 {
            return [e, 0.0, 0.0];
        }
        let log_ratio = t.ln() - self.log_t1;
        [e, self.amplitude * e * s * self.beta, -self.amplitude * e * s * log_ratio]
    }
}

struct Prepared {
    times: Vec<f64>,
    values: Vec<f64>,
    sqrt_w: Vec<f64>,
    weighted: bool,
}

fn prepare(curve: &DecayCurve) -> Result<Prepared> {
    if curve.len() < MIN_POINTS {
        return Err(Error::InsufficientData { need: MIN_POINTS, got: curve.len() });
    }
    if curve.times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidTimeGrid("fit times must be non-negative".into()));
    }
    if curve.contrast.iter().all(|c| *c == 0.0) {
        return Err(Error::DegenerateInput("all contrast values are zero".into()));
    }
    let mut p = Prepared { times: vec![], values: vec![], sqrt_w: vec![], weighted: false };
    match &curve.sigma_noise {
        Some(sigma) if sigma.iter().any(|s| *s > 0.0) => {
            p.weighted = true;
            // Zero-σ points are exact by construction (the normalisation
            // reference) and carry no statistical weight.
            for k in 0..curve.len() {
                if sigma[k] > 0.0 {
                    p.times.push(curve.times[k]);
                    p.values.push(curve.contrast[k]);
                    p.sqrt_w.push(sigma[k].recip());
                }
            }
        }
        _ => {
            p.times = curve.times.clone();
            p.values = curve.contrast.clone();
            p.sqrt_w = vec![1.0; curve.len()];
        }
    }
    if p.times.len() < MIN_POINTS {
        return Err(Error::InsufficientData { need: MIN_POINTS, got: p.times.len() });
    }
    if !p.times.iter().any(|t| *t > 0.0) {
        return Err(Error::DegenerateInput("no positive sample times".into()));
    }
    Ok(p)
}

/// Fits A·exp(−(t/T1)^β) by weighted least squares from several log-spaced
/// T1 starting points, keeping the best converged solution.
pub fn fit_stretched_exp(curve: &DecayCurve, mode: BetaMode) -> Result<StretchedExpFit> {
    let data = prepare(curve)?;
    if let BetaMode::Fixed(b) = mode {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid("beta", format!("fixed beta must be positive, got {b}")));
        }
    }
    let n = data.times.len();
    let np = mode.n_params();
    let t_pos_min = data.times.iter().copied().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
    let t_max = *data.times.last().expect("non-empty");
    let log_lo = t_pos_min.ln();
    let log_hi = t_max.ln().max(log_lo + 1e-9);

    let eval = |p: &[f64]| {
        let model = StretchedExp {
            amplitude: p[0],
            log_t1: p[1],
            beta: if np == 3 { p[2] } else { fixed_beta(mode) },
        };
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, np);
        for k in 0..n {
            let t = data.times[k];
            let w = data.sqrt_w[k];
            r[k] = w * (model.value(t) - data.values[k]);
            let g = model.gradient(t);
            for c in 0..np {
                j[(k, c)] = w * g[c];
            }
        }
        (r, j)
    };

    let data_energy: f64 =
        data.values.iter().zip(&data.sqrt_w).map(|(y, w)| (w * y).powi(2)).sum();
    let options = LmOptions {
        max_iterations: 400,
        gradient_tolerance: 1e-9 * data_energy.max(f64::MIN_POSITIVE),
    };
    let range = T1_RANGE_FACTOR.ln();
    let mut lower = vec![f64::NEG_INFINITY, log_lo - range];
    let mut upper = vec![f64::INFINITY, log_hi + range];
    if np == 3 {
        lower.push(BETA_MIN);
        upper.push(BETA_MAX);
    }
    let amplitude_seed = data
        .values
        .iter()
        .copied()
        .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });

    let mut best: Option<lm::LmOutcome> = None;
    let mut best_failed: Option<lm::LmOutcome> = None;
    for s in 0..T1_SEEDS {
        let log_t1 = log_lo + (log_hi - log_lo) * s as f64 / (T1_SEEDS - 1) as f64;
        let mut start = vec![amplitude_seed, log_t1];
        if np == 3 {
            start.push(FIXED_BETA);
        }
        let Some(out) = lm::minimize(eval, &start, &lower, &upper, &options) else {
            continue;
        };
        let pinned = out.params[1] <= lower[1] || out.params[1] >= upper[1];
        let slot = if out.converged && !pinned { &mut best } else { &mut best_failed };
        if slot.as_ref().is_none_or(|b| out.cost < b.cost) {
            *slot = Some(out);
        }
    }

    let Some(out) = best else {
        let (best_cost, best_gradient) = best_failed
            .map(|o| (o.cost, o.projected_gradient))
            .unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::FitFailure { starts: T1_SEEDS, best_cost, best_gradient });
    };

    let t1 = out.params[1].exp();
    let beta = if np == 3 { out.params[2] } else { fixed_beta(mode) };
    let dof = n.saturating_sub(np);
    let chi2 = 2.0 * out.cost;
    let covariance = covariance(&out.normal_matrix, t1, chi2, dof, data.weighted);
    Ok(StretchedExpFit {
        amplitude: out.params[0],
        t1,
        beta,
        residual_norm: chi2.sqrt(),
        converged: true,
        t1_uncertainty: covariance[1][1].max(0.0).sqrt(),
        covariance,
        chi2,
        dof,
        weighted: data.weighted,
    })
}

fn fixed_beta(mode: BetaMode) -> f64 {
    match mode {
        BetaMode::Fixed(b) => b,
        BetaMode::Free => FIXED_BETA,
    }
}

/// (JᵀWJ)⁻¹ mapped from (A, ln T1, β) to (A, T1, β). Without known weights
/// the residual variance χ²/dof scales the result.
fn covariance(normal: &DMatrix<f64>, t1: f64, chi2: f64, dof: usize, weighted: bool) -> [[f64; 3]; 3] {
    let np = normal.nrows();
    let mut out = [[0.0; 3]; 3];
    let Some(inv) = normal.clone().try_inverse() else {
        for row in out.iter_mut().take(np) {
            row[..np].fill(f64::INFINITY);
        }
        return out;
    };
    let scale = if weighted || dof == 0 { 1.0 } else { chi2 / dof as f64 };
    let jac = [1.0, t1, 1.0];
    for a in 0..np {
        for b in 0..np {
            out[a][b] = inv[(a, b)] * jac[a] * jac[b] * scale;
        }
    }
    out
}
