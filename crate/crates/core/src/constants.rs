//! Physical constants and model presets.
//!
//! Every default used elsewhere in the crate is defined here once.

/// Avogadro constant, mol⁻¹.
pub const AVOGADRO: f64 = 6.022_140_76e23;
/// Litres per cubic metre.
pub const LITRES_PER_M3: f64 = 1.0e3;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// μ₀/4π, T·m·A⁻¹.
pub const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;
/// Free-electron gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_ELECTRON: f64 = 1.760_859_630_23e11;

/// NV ground-state zero-field splitting, used directly as the Lorentzian
/// frequency (2.87 × 10⁹ s⁻¹, no 2π factor).
pub const NV_OMEGA: f64 = 2.87e9;

/// Gd³⁺ spin quantum number (seven unpaired 4f electrons).
pub const GD_SPIN: f64 = 3.5;
/// Default correlation time of Gd³⁺ field fluctuations, s.
pub const GD_TAU_C: f64 = 1.0e-9;
/// Surface dangling-bond defects carry a single unpaired electron.
pub const DANGLING_BOND_SPIN: f64 = 0.5;

/// Nanodiamond radius, m (70 nm diameter).
pub const PARTICLE_RADIUS: f64 = 35.0e-9;
/// NV centres per nanodiamond.
pub const NV_PER_PARTICLE: usize = 100;
/// Particles sampled per trapped aggregate.
pub const AGGREGATE_PARTICLES: usize = 200;

/// Time grid: number of log-spaced samples.
pub const GRID_POINTS: usize = 32;
/// Time grid: first sample, s.
pub const GRID_T_MIN: f64 = 100.0e-9;
/// Time grid: last sample as a multiple of the T1 estimate.
pub const GRID_SPAN: f64 = 5.0;

/// Stretch exponent used for T1 extraction.
pub const FIXED_BETA: f64 = 0.5;

/// σ search interval for T1 inversion, m⁻².
pub const SIGMA_SEARCH_MIN: f64 = 1.0e14;
pub const SIGMA_SEARCH_MAX: f64 = 1.0e20;
/// Relative T1 tolerance of the σ inversion.
pub const INVERSION_RTOL: f64 = 1.0e-3;

/// Langmuir defaults, obtained by calibrating against the bundled anchor
/// dataset (`data/t1_anchors.csv`) with the default particle and seed.
pub const SIGMA_BASELINE: f64 = 2.47e17;
pub const SIGMA_MAX: f64 = 7.69e17;
pub const K_GD: f64 = 4.32e7;
pub const K_NA: f64 = 4.26e5;
/// Calibrated correlation time of Gd³⁺ in solution, s.
pub const GD_SOLUTION_TAU_C: f64 = 3.29e-9;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Version of the CSV / JSON output schemas.
pub const SCHEMA_VERSION: u32 = 1;
