//! Ensemble decay C(t) = (1/N) Σᵢ exp(−t Γᵢ) over randomly placed NV centres,
//! and synthetic bright/dark photon records of the differential measurement.
//!
//! Randomness uses one master seed with a ChaCha substream per particle (and
//! per time point for photon counts), so results never depend on the number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::AGGREGATE_PARTICLES;
use crate::dipolar::{NvSite, RateCoefficients, SiteCoupling};
use crate::error::{Error, Result};
use crate::model::{BathState, ParticleModel};

/// Sampled contrast over a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    /// Sample times, s; strictly increasing and non-negative.
    pub times: Vec<f64>,
    pub contrast: Vec<f64>,
    /// Per-point standard deviation, when known.
    pub sigma_noise: Option<Vec<f64>>,
}

impl DecayCurve {
    pub fn new(times: Vec<f64>, contrast: Vec<f64>, sigma_noise: Option<Vec<f64>>) -> Result<Self> {
        validate_times(&times)?;
        if contrast.len() != times.len() {
            return Err(Error::InvalidTimeGrid(format!(
                "{} times but {} values",
                times.len(),
                contrast.len()
            )));
        }
        if let Some(s) = &sigma_noise {
            if s.len() != times.len() {
                return Err(Error::InvalidTimeGrid(format!(
                    "{} times but {} uncertainties",
                    times.len(),
                    s.len()
                )));
            }
            if s.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::invalid("sigma", "uncertainties must be non-negative"));
            }
        }
        if contrast.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("contrast", "values must be finite"));
        }
        Ok(Self { times, contrast, sigma_noise })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidTimeGrid("empty grid".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidTimeGrid("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` log-spaced times from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidTimeGrid(format!("need at least 2 points, got {n}")));
    }
    if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
        return Err(Error::InvalidTimeGrid(format!("bad range [{t_min:e}, {t_max:e}]")));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| (a + step * k as f64).exp()).collect();
    grid[0] = t_min;
    grid[n - 1] = t_max;
    Ok(grid)
}

/// Prepends a t = 0 reference sample.
pub fn with_reference(mut grid: Vec<f64>) -> Vec<f64> {
    if grid.first() != Some(&0.0) {
        grid.insert(0, 0.0);
    }
    grid
}

/// Bright/dark photon totals of the differential T1 sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub times: Vec<f64>,
    /// S_B(t): counts without the final π pulse, summed over shots.
    pub bright: Vec<u64>,
    /// S_D(t): counts with the final π pulse, summed over shots.
    pub dark: Vec<u64>,
    pub shots: u64,
}

/// How many NV centres each sampled particle carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NvCount {
    /// Exactly `n_nv`.
    #[default]
    Fixed,
    /// Poisson with mean `n_nv`.
    Poisson,
}

/// A trapped aggregate: many particles measured together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateSpec {
    pub particles: usize,
    pub nv_count: NvCount,
}

impl Default for AggregateSpec {
    fn default() -> Self {
        Self { particles: AGGREGATE_PARTICLES, nv_count: NvCount::Fixed }
    }
}

impl AggregateSpec {
    pub fn single() -> Self {
        Self { particles: 1, nv_count: NvCount::Fixed }
    }
}

/// First ChaCha stream used for photon counts; particles use the streams
/// below it, so one master seed can drive both.
const MEASUREMENT_STREAM: u64 = 1 << 63;

fn particle_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_particle(particle: &ParticleModel, nv_count: NvCount, seed: u64, index: u64) -> Vec<NvSite> {
    let mut rng = particle_rng(seed, index);
    let n = match nv_count {
        NvCount::Fixed => particle.n_nv,
        NvCount::Poisson => {
            let dist = Poisson::new(particle.n_nv as f64).expect("n_nv >= 1");
            let draw: f64 = dist.sample(&mut rng);
            draw as usize
        }
    };
    // Uniform in the ball: P(d < r) = (r/R)³.
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            NvSite::new(particle.radius * u.cbrt())
        })
        .collect()
}

/// Draws `n_nv` NV sites uniformly over the particle volume.
pub fn sample_nv_sites(particle: &ParticleModel, seed: u64) -> Vec<NvSite> {
    draw_particle(particle, NvCount::Fixed, seed, 0)
}

/// Draws the NV sites of every particle in an aggregate, particle by particle.
pub fn sample_aggregate_sites(
    particle: &ParticleModel,
    aggregate: &AggregateSpec,
    seed: u64,
) -> Result<Vec<NvSite>> {
    particle.validate()?;
    if aggregate.particles == 0 {
        return Err(Error::invalid("particles", "aggregate needs at least one particle"));
    }
    let per_particle: Vec<Vec<NvSite>> = (0..aggregate.particles as u64)
        .into_par_iter()
        .map(|k| draw_particle(particle, aggregate.nv_count, seed, k))
        .collect();
    let sites: Vec<NvSite> = per_particle.into_iter().flatten().collect();
    if sites.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(sites)
}

/// Geometry integrals of every site.
pub fn site_couplings(sites: &[NvSite], particle: &ParticleModel) -> Result<Vec<SiteCoupling>> {
    particle.validate()?;
    sites.par_iter().map(|s| SiteCoupling::new(*s, particle)).collect()
}

/// Per-site rates Γᵢ for a bath.
pub fn site_rates(sites: &[NvSite], particle: &ParticleModel, bath: &BathState) -> Result<Vec<f64>> {
    let coefficients = RateCoefficients::new(particle, bath);
    let couplings = site_couplings(sites, particle)?;
    Ok(couplings.iter().map(|c| coefficients.rate(c)).collect())
}

/// C(t) = (1/N) Σᵢ exp(−t Γᵢ). Sums run in site order for every time point.
pub fn decay_from_rates(rates: &[f64], times: &[f64]) -> Result<DecayCurve> {
    if rates.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    validate_times(times)?;
    let n = rates.len() as f64;
    let contrast: Vec<f64> = times
        .par_iter()
        .map(|&t| rates.iter().map(|&g| (-t * g).exp()).sum::<f64>() / n)
        .collect();
    Ok(DecayCurve { times: times.to_vec(), contrast, sigma_noise: None })
}

/// Ensemble decay of a single particle with `n_nv` sites drawn from `seed`.
pub fn ensemble_decay(
    particle: &ParticleModel,
    bath: &BathState,
    times: &[f64],
    seed: u64,
) -> Result<DecayCurve> {
    particle.validate()?;
    let sites = sample_nv_sites(particle, seed);
    ensemble_decay_for_sites(&sites, particle, bath, times)
}

/// Ensemble decay over an explicit site list.
pub fn ensemble_decay_for_sites(
    sites: &[NvSite],
    particle: &ParticleModel,
    bath: &BathState,
    times: &[f64],
) -> Result<DecayCurve> {
    let rates = site_rates(sites, particle, bath)?;
    decay_from_rates(&rates, times)
}

/// Photon budget of a synthetic differential measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    /// Repetitions per time point.
    pub shots: u64,
    /// Mean detected photons per shot.
    pub counts_per_shot: f64,
    /// Fractional bright/dark contrast at full polarisation, in [0, 2].
    pub contrast_amplitude: f64,
}

impl Default for MeasurementSettings {
    fn default() -> Self {
        Self { shots: 10_000, counts_per_shot: 10.0, contrast_amplitude: 0.3 }
    }
}

impl MeasurementSettings {
    pub fn validate(&self) -> Result<()> {
        if self.shots < 1 {
            return Err(Error::invalid("shots", "need at least one shot"));
        }
        if !(self.counts_per_shot > 0.0) || !self.counts_per_shot.is_finite() {
            return Err(Error::invalid("counts_per_shot", "must be positive"));
        }
        if !(0.0..=2.0).contains(&self.contrast_amplitude) {
            return Err(Error::invalid("contrast_amplitude", "must lie in [0, 2]"));
        }
        Ok(())
    }
}

/// Draws Poisson bright/dark totals with means n·c·(1 ± a·C(t)/2).
///
/// The two channels differ in mean by `contrast_amplitude · C(t) ·
/// counts_per_shot` per shot, so `(S_B − S_D)/(shots · a · c)` estimates C(t).
pub fn simulate_measurement(
    curve: &DecayCurve,
    settings: &MeasurementSettings,
    seed: u64,
) -> Result<MeasurementRecord> {
    settings.validate()?;
    let base = settings.shots as f64 * settings.counts_per_shot;
    let half = 0.5 * settings.contrast_amplitude;
    let (bright, dark): (Vec<u64>, Vec<u64>) = curve
        .contrast
        .par_iter()
        .enumerate()
        .map(|(k, &c)| {
            let mut rng = particle_rng(seed, MEASUREMENT_STREAM + k as u64);
            let mut draw = |mean: f64| -> u64 {
                if mean <= 0.0 {
                    return 0;
                }
                let sample: f64 = Poisson::new(mean).expect("positive mean").sample(&mut rng);
                sample as u64
            };
            let b = draw(base * (1.0 + half * c));
            let d = draw(base * (1.0 - half * c));
            (b, d)
        })
        .unzip();
    Ok(MeasurementRecord { times: curve.times.clone(), bright, dark, shots: settings.shots })
}

/// Normalised differential contrast (S_B − S_D)(t) / (S_B − S_D)(0).
///
/// `sigma_noise` holds each point's own Poisson error scaled by the
/// reference. The reference's error multiplies every point alike, so it is
/// left to the fitted amplitude and the reference point itself gets σ = 0. A
/// reference difference that is not at least three standard errors above
/// zero is rejected.
pub fn contrast_from_measurement(record: &MeasurementRecord) -> Result<DecayCurve> {
    if record.bright.len() != record.dark.len() || record.bright.len() != record.times.len() {
        return Err(Error::GridMismatch { bright: record.bright.len(), dark: record.dark.len() });
    }
    validate_times(&record.times)?;
    if record.times[0] != 0.0 {
        return Err(Error::MissingReference(record.times[0]));
    }
    let diff = |k: usize| record.bright[k] as f64 - record.dark[k] as f64;
    let var = |k: usize| record.bright[k] as f64 + record.dark[k] as f64;
    let reference = diff(0);
    if !(reference > 3.0 * var(0).sqrt()) {
        return Err(Error::DegenerateContrast(reference));
    }
    let n = record.times.len();
    let mut contrast = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n {
        let c = diff(k) / reference;
        contrast.push(c);
        if k == 0 {
            sigma.push(0.0);
        } else {
            sigma.push(var(k).sqrt() / reference);
        }
    }
    DecayCurve::new(record.times.clone(), contrast, Some(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{fit_stretched_exp, BetaMode};

    fn exp_curve(t1: f64, times: Vec<f64>) -> DecayCurve {
        let c = times.iter().map(|t| (-t / t1).exp()).collect();
        DecayCurve::new(times, c, None).unwrap()
    }

    #[test]
    fn single_site_domain() {
        let p = ParticleModel { n_nv: 1, ..Default::default() };
        for seed in 0..50 {
            let sites = sample_nv_sites(&p, seed);
            assert_eq!(sites.len(), 1);
            assert!(sites[0].offset >= 0.0 && sites[0].offset < p.radius);
        }
    }

    #[test]
    fn radial_mean_is_three_quarters() {
        let p = ParticleModel { n_nv: 100_000, ..Default::default() };
        let sites = sample_nv_sites(&p, 7);
        let mean = sites.iter().map(|s| s.offset).sum::<f64>() / sites.len() as f64;
        assert!((mean / (0.75 * p.radius) - 1.0).abs() < 5e-3, "mean/R = {}", mean / p.radius);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = ParticleModel::default();
        assert_eq!(sample_nv_sites(&p, 3), sample_nv_sites(&p, 3));
        assert_ne!(sample_nv_sites(&p, 3), sample_nv_sites(&p, 4));
        let agg = AggregateSpec { particles: 20, nv_count: NvCount::Poisson };
        assert_eq!(
            sample_aggregate_sites(&p, &agg, 9).unwrap(),
            sample_aggregate_sites(&p, &agg, 9).unwrap()
        );
    }

    #[test]
    fn aggregate_first_particle_matches_single() {
        let p = ParticleModel::default();
        let agg = AggregateSpec { particles: 3, nv_count: NvCount::Fixed };
        let all = sample_aggregate_sites(&p, &agg, 11).unwrap();
        assert_eq!(all.len(), 300);
        assert_eq!(&all[..100], sample_nv_sites(&p, 11).as_slice());
    }

    #[test]
    fn poisson_counts_vary() {
        let p = ParticleModel::default();
        let agg = AggregateSpec { particles: 50, nv_count: NvCount::Poisson };
        let n = sample_aggregate_sites(&p, &agg, 5).unwrap().len();
        assert_ne!(n, 5000);
        assert!((n as f64 / 5000.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn one_site_is_single_exponential() {
        let p = ParticleModel { n_nv: 1, ..Default::default() };
        let bath = BathState::gd(1e17, 0.0).unwrap();
        let times = log_grid(1e-7, 1e-3, 16).unwrap();
        let curve = ensemble_decay(&p, &bath, &times, 2).unwrap();
        let site = sample_nv_sites(&p, 2)[0];
        let rate = crate::dipolar::nv_rate(site, &p, &bath).unwrap();
        for (t, c) in curve.times.iter().zip(&curve.contrast) {
            assert!((c - (-t * rate).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn homogeneous_rate() {
        let p = ParticleModel { intrinsic_rate: 1.0 / 50e-6, ..Default::default() };
        let times = with_reference(log_grid(1e-7, 250e-6, 32).unwrap());
        let curve = ensemble_decay(&p, &BathState::empty(), &times, 1).unwrap();
        assert_eq!(curve.contrast[0], 1.0);
        for (t, c) in curve.times.iter().zip(&curve.contrast) {
            assert!((c - (-t / 50e-6).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn contrast_starts_at_one_and_is_convex() {
        let p = ParticleModel::default();
        let bath = BathState::gd(5e17, 1e25).unwrap();
        let times = with_reference(log_grid(1e-7, 1e-4, 40).unwrap());
        let curve = ensemble_decay(&p, &bath, &times, 8).unwrap();
        assert_eq!(curve.contrast[0], 1.0);
        let c = &curve.contrast;
        let t = &curve.times;
        let slopes: Vec<f64> =
            (1..c.len()).map(|k| (c[k] - c[k - 1]) / (t[k] - t[k - 1])).collect();
        assert!(slopes.iter().all(|s| *s <= 0.0));
        assert!(slopes.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
    }

    #[test]
    fn null_contrast_channels_match() {
        let curve = exp_curve(50e-6, with_reference(log_grid(1e-7, 2.5e-4, 32).unwrap()));
        let settings = MeasurementSettings { contrast_amplitude: 0.0, ..Default::default() };
        let rec = simulate_measurement(&curve, &settings, 4).unwrap();
        let mean = settings.shots as f64 * settings.counts_per_shot;
        // Same distribution: the standardised difference is O(1) everywhere.
        let z: f64 = rec
            .bright
            .iter()
            .zip(&rec.dark)
            .map(|(b, d)| (*b as f64 - *d as f64).powi(2) / (2.0 * mean))
            .sum::<f64>()
            / rec.times.len() as f64;
        assert!((0.5..1.5).contains(&z), "z = {z}");
        assert!(matches!(contrast_from_measurement(&rec), Err(Error::DegenerateContrast(_))));
    }

    #[test]
    fn large_shot_limit() {
        let curve = exp_curve(15e-6, with_reference(log_grid(1e-7, 75e-6, 32).unwrap()));
        let settings =
            MeasurementSettings { shots: 1_000_000, counts_per_shot: 1.0, contrast_amplitude: 0.3 };
        let rec = simulate_measurement(&curve, &settings, 12).unwrap();
        let scale = settings.shots as f64 * settings.counts_per_shot * settings.contrast_amplitude;
        for k in 0..rec.times.len() {
            let est = (rec.bright[k] as f64 - rec.dark[k] as f64) / scale;
            let se = ((rec.bright[k] + rec.dark[k]) as f64).sqrt() / scale;
            assert!((est - curve.contrast[k]).abs() < 3.0 * se + 1e-12, "point {k}");
        }
    }

    #[test]
    fn equal_channels_are_degenerate() {
        let rec = MeasurementRecord {
            times: vec![0.0, 1e-6, 2e-6],
            bright: vec![100, 90, 80],
            dark: vec![100, 90, 80],
            shots: 10,
        };
        assert!(matches!(contrast_from_measurement(&rec), Err(Error::DegenerateContrast(_))));
    }

    #[test]
    fn noiseless_record_round_trip() {
        let rec = MeasurementRecord {
            times: vec![0.0, 1e-6, 2e-6, 4e-6],
            bright: vec![1200, 1150, 1100, 1050],
            dark: vec![800, 850, 900, 950],
            shots: 1000,
        };
        let curve = contrast_from_measurement(&rec).unwrap();
        assert_eq!(curve.contrast, vec![1.0, 0.75, 0.5, 0.25]);
        let missing = MeasurementRecord { times: vec![1e-7, 1e-6, 2e-6, 4e-6], ..rec };
        assert!(matches!(contrast_from_measurement(&missing), Err(Error::MissingReference(_))));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let rec = MeasurementRecord {
            times: vec![0.0, 1e-6],
            bright: vec![10, 9],
            dark: vec![5],
            shots: 1,
        };
        assert!(matches!(contrast_from_measurement(&rec), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn poisson_residuals_match_reported_noise() {
        let truth = exp_curve(15e-6, with_reference(log_grid(1e-7, 75e-6, 32).unwrap()));
        let settings = MeasurementSettings::default();
        let mut chi2 = 0.0;
        let mut n = 0usize;
        for seed in 0..10 {
            let rec = simulate_measurement(&truth, &settings, seed).unwrap();
            let curve = contrast_from_measurement(&rec).unwrap();
            let sigma = curve.sigma_noise.as_ref().unwrap();
            // Undo this record's own normalisation error.
            let expected_reference =
                settings.shots as f64 * settings.counts_per_shot * settings.contrast_amplitude;
            let scale = expected_reference / (rec.bright[0] as f64 - rec.dark[0] as f64);
            for k in 1..curve.len() {
                chi2 += ((curve.contrast[k] - scale * truth.contrast[k]) / sigma[k]).powi(2);
                n += 1;
            }
        }
        let reduced = chi2 / n as f64;
        assert!((0.7..=1.3).contains(&reduced), "chi2/dof = {reduced}");
    }

    #[test]
    fn synthetic_recovery_t1_50us() {
        let truth = exp_curve(50e-6, with_reference(log_grid(1e-7, 250e-6, 32).unwrap()));
        let rec = simulate_measurement(&truth, &MeasurementSettings::default(), 21).unwrap();
        let curve = contrast_from_measurement(&rec).unwrap();
        let fit = fit_stretched_exp(&curve, BetaMode::Free).unwrap();
        assert!((fit.t1 / 50e-6 - 1.0).abs() < 0.1, "t1 = {}", fit.t1);
    }

    #[test]
    fn stretched_exponential_emerges() {
        let p = ParticleModel::default();
        let sites = sample_aggregate_sites(&p, &AggregateSpec::default(), 1).unwrap();
        let bath = BathState::gd(8.4e17, 0.0).unwrap();
        let times = log_grid(1e-7, 1e-4, 32).unwrap();
        let curve = ensemble_decay_for_sites(&sites, &p, &bath, &times).unwrap();
        let free = fit_stretched_exp(&curve, BetaMode::Free).unwrap();
        let single = fit_stretched_exp(&curve, BetaMode::Fixed(1.0)).unwrap();
        assert!(free.beta < 1.0);
        assert!(free.residual_norm < single.residual_norm);
    }
}
