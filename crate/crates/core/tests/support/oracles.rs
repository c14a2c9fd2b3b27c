//! Brute-force reference computations, independent of the library's closed
//! forms. Shared by the core integration tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;

pub const MU0: f64 = 1.256_637_062_12e-6;
pub const HBAR: f64 = 1.054_571_817e-34;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// ∮ dA / |x − p|⁶ over the sphere of radius `r`, by quadrature over the
/// polar angle measured from the direction of p.
pub fn surface_integral_quadrature(d: f64, r: f64) -> f64 {
    // Work in units of r so the integrand is O(1).
    let x = d / r;
    let f = |th: f64| 2.0 * PI * th.sin() / (1.0 + x * x - 2.0 * x * th.cos()).powi(3);
    // Coarse estimate fixes the absolute tolerance.
    let rough = adaptive_simpson(&f, 0.0, PI, 1e-3);
    adaptive_simpson(&f, 0.0, PI, rough * 1e-11) / r.powi(4)
}

/// Distance from p (|p| = d < r) along a direction at cosine `u` to p̂ until
/// the ray leaves the sphere.
fn exit_distance(d: f64, r: f64, u: f64) -> f64 {
    -d * u + (d * d * u * u - d * d + r * r).sqrt()
}

/// ∫_{|x|>r} dV / |x − p|⁶ by Monte Carlo over ray directions from p.
///
/// Along each ray the radial integral ∫_{s_exit}^∞ s⁻⁴ ds = 1/(3 s_exit³) is
/// exact, so only the direction is sampled (jittered-stratified in cos θ).
/// Returns (estimate, standard error).
pub fn solution_integral_mc(d: f64, r: f64, samples: usize, rng: &mut impl Rng) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..samples {
        let u = -1.0 + 2.0 * (k as f64 + rng.random::<f64>()) / samples as f64;
        let s = exit_distance(d, r, u);
        let v = 4.0 * PI / (3.0 * s.powi(3));
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Same integral by importance-sampled Monte Carlo over solution positions
/// with density ∝ |x|⁻⁴ out to `cutoff`, plus the far tail 4π/(3·cutoff³).
pub fn solution_integral_point_mc(
    d: f64,
    r: f64,
    cutoff: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let norm = 4.0 * PI * (1.0 / r - 1.0 / cutoff);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let radius = 1.0 / (1.0 / r - rng.random::<f64>() * (1.0 / r - 1.0 / cutoff));
        let n = unit_vector(rng);
        let dx = radius * n[0];
        let dy = radius * n[1];
        let dz = radius * n[2] - d;
        let dist2 = dx * dx + dy * dy + dz * dz;
        let v = norm * radius.powi(4) / dist2.powi(3);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean + 4.0 * PI / (3.0 * cutoff.powi(3)), (var / n).sqrt())
}

pub fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Transverse-field variance per bath spin on the NV axis, T²·m⁶ (multiply
/// by r⁻⁶): (μ₀/4π)²(γħ)²·⟨μ_x² + μ_y²⟩ with an isotropic moment.
pub fn on_axis_field_coefficient(gamma: f64, spin: f64) -> f64 {
    let m0 = MU0 / (4.0 * PI);
    m0 * m0 * (gamma * HBAR).powi(2) * spin * (spin + 1.0) * 2.0 / 3.0
}

/// Mean |B⊥|² at distance `r` along the NV axis from a classical dipole of
/// magnitude γħ√(S(S+1)) with random orientation, from the full dipole field.
pub fn classical_on_axis_variance(
    gamma: f64,
    spin: f64,
    r: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let m0 = MU0 / (4.0 * PI);
    let mag = gamma * HBAR * (spin * (spin + 1.0)).sqrt();
    let rhat = [0.0, 0.0, 1.0];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let n = unit_vector(rng);
        let mu = [mag * n[0], mag * n[1], mag * n[2]];
        let dot = mu[0] * rhat[0] + mu[1] * rhat[1] + mu[2] * rhat[2];
        let b: Vec<f64> = (0..3).map(|i| m0 * (3.0 * dot * rhat[i] - mu[i]) / r.powi(3)).collect();
        let v = b[0] * b[0] + b[1] * b[1];
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    ((mean), ((sum_sq / n - mean * mean).max(0.0) / n).sqrt())
}

/// Relaxation rate from an explicit random configuration of surface spins:
/// `count` spins uniform on the shell, each weighted so the areal density is
/// `sigma`, summed with the on-axis field variance and Lorentzian filter.
#[allow(clippy::too_many_arguments)]
pub fn discrete_surface_rate(
    d: f64,
    shell: f64,
    sigma: f64,
    gamma_nv: f64,
    gamma_bath: f64,
    spin: f64,
    tau_c: f64,
    omega: f64,
    count: usize,
    rng: &mut impl Rng,
) -> f64 {
    let weight = sigma * 4.0 * PI * shell * shell / count as f64;
    let mut inv6 = 0.0;
    for _ in 0..count {
        let n = unit_vector(rng);
        let dx = shell * n[0];
        let dy = shell * n[1];
        let dz = shell * n[2] - d;
        inv6 += 1.0 / (dx * dx + dy * dy + dz * dz).powi(3);
    }
    let lorentz = tau_c / (1.0 + omega * omega * tau_c * tau_c);
    3.0 * gamma_nv * gamma_nv * lorentz * on_axis_field_coefficient(gamma_bath, spin) * weight * inv6
}
