//! Small bound-constrained Levenberg–Marquardt solver for problems with a
//! handful of parameters.

use nalgebra::{DMatrix, DVector};

/// Residuals and Jacobian, both already multiplied by √weight.
pub(crate) type Evaluation = (DVector<f64>, DMatrix<f64>);

#[derive(Clone, Debug)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    /// Absolute tolerance on the projected gradient ‖Jᵀr‖∞.
    pub gradient_tolerance: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    /// ½ Σ r².
    pub cost: f64,
    pub projected_gradient: f64,
    pub converged: bool,
    /// JᵀJ at the solution.
    pub normal_matrix: DMatrix<f64>,
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn free_mask(x: &[f64], g: &DVector<f64>, lower: &[f64], upper: &[f64]) -> Vec<bool> {
    (0..x.len())
        .map(|j| !((x[j] <= lower[j] && g[j] > 0.0) || (x[j] >= upper[j] && g[j] < 0.0)))
        .collect()
}

pub(crate) fn minimize<F>(
    eval: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &LmOptions,
) -> Option<LmOutcome>
where
    F: Fn(&[f64]) -> Evaluation,
{
    let n = start.len();
    let mut x = start.to_vec();
    clamp(&mut x, lower, upper);
    let (mut r, mut jac) = eval(&x);
    let mut cost = 0.5 * r.norm_squared();
    if !cost.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut projected = f64::INFINITY;

    for _ in 0..options.max_iterations {
        let g = jac.tr_mul(&r);
        let h = jac.tr_mul(&jac);
        let free = free_mask(&x, &g, lower, upper);
        projected = (0..n).filter(|&j| free[j]).map(|j| g[j].abs()).fold(0.0, f64::max);
        if projected <= options.gradient_tolerance {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = h.clone();
            let mut rhs = -g.clone();
            for j in 0..n {
                if free[j] {
                    a[(j, j)] += lambda * h[(j, j)].max(1e-12);
                } else {
                    for k in 0..n {
                        a[(j, k)] = 0.0;
                        a[(k, j)] = 0.0;
                    }
                    a[(j, j)] = 1.0;
                    rhs[j] = 0.0;
                }
            }
            let Some(step) = a.lu().solve(&rhs) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut trial, lower, upper);
            let (tr, tj) = eval(&trial);
            let trial_cost = 0.5 * tr.norm_squared();
            if trial_cost.is_finite() && trial_cost < cost {
                x = trial;
                r = tr;
                jac = tj;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent step exists at machine precision; this is a minimum
            // exactly when the gradient is already negligible.
            let g = jac.tr_mul(&r);
            let free = free_mask(&x, &g, lower, upper);
            projected = (0..n).filter(|&j| free[j]).map(|j| g[j].abs()).fold(0.0, f64::max);
            converged = projected <= options.gradient_tolerance;
            break;
        }
    }

    Some(LmOutcome {
        normal_matrix: jac.tr_mul(&jac),
        params: x,
        cost,
        projected_gradient: projected,
        converged,
    })
}
