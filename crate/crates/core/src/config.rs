//! TOML run configuration.
//!
//! Every key is optional; omitted keys take the library defaults. Unknown
//! keys are rejected. [`RunConfig::resolve`] turns a parsed file into
//! concrete domain values and [`RunSetup::to_config`] writes them back as a
//! fully explicit config that reproduces the run.
//!
//! ```toml
//! seed = 7
//!
//! [particle]
//! radius_m = 35e-9
//! intrinsic_rate_per_s = 2e4
//!
//! [bath]
//! sigma_m2 = 8.4e17
//! c_gd_M = 0.0
//!
//! [sweep]
//! c_gd_min_M = 1e-9
//! c_gd_max_M = 5.0
//! points = 30
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adsorption::LangmuirParams;
use crate::constants::DEFAULT_SEED;
use crate::dipolar::NvSite;
use crate::ensemble::{log_grid, AggregateSpec, MeasurementSettings, NvCount};
use crate::error::{Error, Result};
use crate::fitting::{BetaMode, ForwardModel, GridSpec};
use crate::io::CalibrationManifest;
use crate::model::{ParticleModel, SpinSpecies};
use crate::units::molar_to_density;

const SWEEP_MIN: f64 = 1e-9;
const SWEEP_MAX: f64 = 5.0;
const SWEEP_POINTS: usize = 30;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub particle: ParticleSection,
    #[serde(default)]
    pub aggregate: AggregateSection,
    #[serde(default)]
    pub species: SpeciesSection,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub time_grid: TimeGridSection,
    #[serde(default)]
    pub adsorption: AdsorptionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub fit: FitSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_nv: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intrinsic_rate_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_standoff_m: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nv_count: Option<NvCount>,
    /// Explicit NV offsets from the particle centre; replaces sampling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites_m: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    #[serde(default)]
    pub surface: SpeciesOverrides,
    #[serde(default)]
    pub solution: SpeciesOverrides,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_c_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_m2: Option<f64>,
    #[serde(rename = "c_gd_M", skip_serializing_if = "Option::is_none")]
    pub c_gd_molar: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min_s: Option<f64>,
    /// Last sample as a multiple of the T1 estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    /// Fixed last sample; overrides `span`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max_s: Option<f64>,
    /// Prepend a t = 0 reference sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdsorptionSection {
    /// Calibration manifest to take parameters from; explicit keys win.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_baseline_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_max_m2: Option<f64>,
    #[serde(rename = "k_gd_L_per_mol", skip_serializing_if = "Option::is_none")]
    pub k_gd: Option<f64>,
    #[serde(rename = "k_na_L_per_mol", skip_serializing_if = "Option::is_none")]
    pub k_na: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit Gd³⁺ concentrations; overrides the log range.
    #[serde(rename = "c_gd_M", skip_serializing_if = "Option::is_none")]
    pub c_gd_molar: Option<Vec<f64>>,
    #[serde(rename = "c_gd_min_M", skip_serializing_if = "Option::is_none")]
    pub c_gd_min: Option<f64>,
    #[serde(rename = "c_gd_max_M", skip_serializing_if = "Option::is_none")]
    pub c_gd_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(rename = "c_na_M", skip_serializing_if = "Option::is_none")]
    pub c_na: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts_per_shot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast_amplitude: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaChoice {
    Fixed,
    Free,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaChoice>,
    /// Exponent used when `beta = "fixed"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_value: Option<f64>,
}

/// Time sampling of a single simulated curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub spec: GridSpec,
    pub t_max: Option<f64>,
    pub reference: bool,
}

impl TimeGrid {
    /// Sample times, ending at `t_max` or at `span` × `t1_estimate`.
    pub fn times(&self, t1_estimate: f64) -> Result<Vec<f64>> {
        let mut grid = match self.t_max {
            Some(t_max) => log_grid(self.spec.t_min, t_max, self.spec.points)?,
            None if t1_estimate.is_finite() => self.spec.times_for(t1_estimate)?,
            None => {
                return Err(Error::InvalidTimeGrid(
                    "no relaxation to scale the grid by; set time_grid.t_max_s".into(),
                ))
            }
        };
        if self.reference {
            grid.insert(0, 0.0);
        }
        Ok(grid)
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSetup {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub particle: ParticleModel,
    pub aggregate: AggregateSpec,
    pub sites: Option<Vec<NvSite>>,
    pub surface_species: SpinSpecies,
    pub solution_species: SpinSpecies,
    /// m⁻².
    pub sigma: f64,
    /// Bath Gd³⁺ concentration, mol·L⁻¹.
    pub c_gd: f64,
    /// Solution spin density for `c_gd`, m⁻³.
    pub rho: f64,
    pub time_grid: TimeGrid,
    pub langmuir: LangmuirParams,
    /// mol·L⁻¹, ascending.
    pub sweep: Vec<f64>,
    /// mol·L⁻¹.
    pub sweep_c_na: f64,
    pub measurement: MeasurementSettings,
    pub beta_mode: BetaMode,
}

/// Where a config came from, for line-anchored messages and relative paths.
#[derive(Clone, Debug, Default)]
pub struct ConfigSource {
    pub origin: String,
    pub text: String,
    pub base_dir: PathBuf,
}

impl ConfigSource {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(Self {
            origin: path.display().to_string(),
            text: std::fs::read_to_string(path)?,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    /// 1-based line of `key` inside `[section]` (or at top level).
    pub fn locate(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
                current = header.trim().to_string();
                continue;
            }
            let Some((k, _)) = line.split_once('=') else { continue };
            let k = k.trim().trim_matches('"');
            if current == section && k == key {
                return Some(i + 1);
            }
            // Dotted keys and inline tables.
            if section.is_empty() && k == key {
                return Some(i + 1);
            }
            let full = if current.is_empty() { k.to_string() } else { format!("{current}.{k}") };
            if full == format!("{section}.{key}") {
                return Some(i + 1);
            }
        }
        None
    }

    fn error(&self, section: &str, key: &str, message: impl std::fmt::Display) -> Error {
        let dotted = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        let line = self.locate(section, key).or_else(|| self.locate_header(section));
        let message = match line {
            Some(l) => format!("line {l}: `{dotted}`: {message}"),
            None => format!("`{dotted}`: {message}"),
        };
        Error::Parse { path: self.origin_or_default(), message }
    }

    fn locate_header(&self, section: &str) -> Option<usize> {
        let header = format!("[{section}]");
        self.text.lines().position(|l| l.trim() == header).map(|i| i + 1)
    }

    fn origin_or_default(&self) -> String {
        if self.origin.is_empty() {
            "<config>".into()
        } else {
            self.origin.clone()
        }
    }
}

impl RunConfig {
    pub fn parse(source: &ConfigSource) -> Result<Self> {
        toml::from_str(&source.text).map_err(|e| {
            let message = match e.span() {
                Some(span) => {
                    let line = source.text[..span.start].matches('\n').count() + 1;
                    format!("line {line}: {}", e.message())
                }
                None => e.message().to_string(),
            };
            Error::Parse { path: source.origin_or_default(), message }
        })
    }

    /// Reads, parses and resolves a config file.
    pub fn load(path: &Path) -> Result<(Self, RunSetup)> {
        let source = ConfigSource::read(path)?;
        let config = Self::parse(&source)?;
        let setup = config.resolve(&source)?;
        Ok((config, setup))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse { path: "<config>".into(), message: e.to_string() })
    }

    pub fn resolve(&self, src: &ConfigSource) -> Result<RunSetup> {
        let positive = |section: &str, key: &str, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(src.error(section, key, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |section: &str, key: &str, v: f64| -> Result<f64> {
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(src.error(section, key, format!("must be non-negative, got {v}")))
            }
        };

        let p = &self.particle;
        let defaults = ParticleModel::default();
        let particle = ParticleModel {
            radius: p.radius_m.map(|v| positive("particle", "radius_m", v)).transpose()?.unwrap_or(defaults.radius),
            n_nv: match p.n_nv {
                Some(0) => return Err(src.error("particle", "n_nv", "need at least one NV centre")),
                Some(n) => n,
                None => defaults.n_nv,
            },
            omega: p.omega_per_s.map(|v| positive("particle", "omega_per_s", v)).transpose()?.unwrap_or(defaults.omega),
            gamma_e: p.gamma_e.map(|v| positive("particle", "gamma_e", v)).transpose()?.unwrap_or(defaults.gamma_e),
            intrinsic_rate: p
                .intrinsic_rate_per_s
                .map(|v| non_negative("particle", "intrinsic_rate_per_s", v))
                .transpose()?
                .unwrap_or(defaults.intrinsic_rate),
            surface_standoff: p
                .surface_standoff_m
                .map(|v| non_negative("particle", "surface_standoff_m", v))
                .transpose()?
                .unwrap_or(defaults.surface_standoff),
        };

        let a = &self.aggregate;
        let agg_default = AggregateSpec::default();
        let aggregate = AggregateSpec {
            particles: match a.particles {
                Some(0) => return Err(src.error("aggregate", "particles", "need at least one particle")),
                Some(n) => n,
                None => agg_default.particles,
            },
            nv_count: a.nv_count.unwrap_or(agg_default.nv_count),
        };
        let sites = match &a.sites_m {
            None => None,
            Some(v) if v.is_empty() => {
                return Err(src.error("aggregate", "sites_m", "needs at least one offset"))
            }
            Some(v) => {
                let sites: Vec<NvSite> = v.iter().map(|d| NvSite::new(*d)).collect();
                for (i, s) in sites.iter().enumerate() {
                    s.check_inside(&particle)
                        .map_err(|e| src.error("aggregate", "sites_m", format!("entry {i}: {e}")))?;
                }
                Some(sites)
            }
        };

        let surface_species = resolve_species(src, "species.surface", &self.species.surface, SpinSpecies::gd3())?;
        let mut solution_base = SpinSpecies::gd3_solution();

        let ad = &self.adsorption;
        let mut langmuir = LangmuirParams::default();
        if let Some(path) = &ad.manifest {
            let path = if path.is_absolute() { path.clone() } else { src.base_dir.join(path) };
            let manifest = CalibrationManifest::read(&path)
                .map_err(|e| src.error("adsorption", "manifest", e))?;
            langmuir = manifest.calibration.langmuir;
            solution_base = solution_base
                .with_tau_c(manifest.calibration.solution_tau_c)
                .map_err(|e| src.error("adsorption", "manifest", e))?;
        }
        if let Some(v) = ad.sigma_baseline_m2 {
            langmuir.sigma_baseline = non_negative("adsorption", "sigma_baseline_m2", v)?;
        }
        if let Some(v) = ad.sigma_max_m2 {
            langmuir.sigma_max = non_negative("adsorption", "sigma_max_m2", v)?;
        }
        if let Some(v) = ad.k_gd {
            langmuir.k_gd = non_negative("adsorption", "k_gd_L_per_mol", v)?;
        }
        if let Some(v) = ad.k_na {
            langmuir.k_na = non_negative("adsorption", "k_na_L_per_mol", v)?;
        }
        let solution_species = resolve_species(src, "species.solution", &self.species.solution, solution_base)?;

        let sigma = self.bath.sigma_m2.map(|v| non_negative("bath", "sigma_m2", v)).transpose()?.unwrap_or(0.0);
        let c_gd = self.bath.c_gd_molar.unwrap_or(0.0);
        let rho = molar_to_density(c_gd).map_err(|e| src.error("bath", "c_gd_M", e))?;

        let g = &self.time_grid;
        let gd = GridSpec::default();
        let spec = GridSpec {
            points: match g.points {
                Some(n) if n < 2 => return Err(src.error("time_grid", "points", "need at least 2 points")),
                Some(n) => n,
                None => gd.points,
            },
            t_min: g.t_min_s.map(|v| positive("time_grid", "t_min_s", v)).transpose()?.unwrap_or(gd.t_min),
            span: g.span.map(|v| positive("time_grid", "span", v)).transpose()?.unwrap_or(gd.span),
        };
        if let Some(t_max) = g.t_max_s {
            if !(t_max > spec.t_min) || !t_max.is_finite() {
                return Err(src.error("time_grid", "t_max_s", format!("must exceed t_min_s = {}", spec.t_min)));
            }
        }
        let time_grid = TimeGrid { spec, t_max: g.t_max_s, reference: g.reference.unwrap_or(true) };

        let s = &self.sweep;
        let sweep = match &s.c_gd_molar {
            Some(list) => {
                if list.is_empty() {
                    return Err(src.error("sweep", "c_gd_M", "needs at least one concentration"));
                }
                if let Some(c) = list.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
                    return Err(src.error("sweep", "c_gd_M", format!("concentration must be non-negative, got {c}")));
                }
                if list.windows(2).any(|w| w[1] < w[0]) {
                    return Err(src.error("sweep", "c_gd_M", "concentrations must be ascending"));
                }
                list.clone()
            }
            None => {
                let lo = s.c_gd_min.map(|v| positive("sweep", "c_gd_min_M", v)).transpose()?.unwrap_or(SWEEP_MIN);
                let hi = s.c_gd_max.map(|v| positive("sweep", "c_gd_max_M", v)).transpose()?.unwrap_or(SWEEP_MAX);
                let n = s.points.unwrap_or(SWEEP_POINTS);
                match n {
                    0 => return Err(src.error("sweep", "points", "need at least one point")),
                    1 => vec![lo],
                    _ => {
                        if !(hi > lo) {
                            return Err(src.error("sweep", "c_gd_max_M", "must exceed c_gd_min_M"));
                        }
                        log_grid(lo, hi, n).map_err(|e| src.error("sweep", "points", e))?
                    }
                }
            }
        };
        let sweep_c_na = s.c_na.map(|v| non_negative("sweep", "c_na_M", v)).transpose()?.unwrap_or(0.0);

        let m = &self.measurement;
        let md = MeasurementSettings::default();
        let measurement = MeasurementSettings {
            shots: m.shots.unwrap_or(md.shots),
            counts_per_shot: m.counts_per_shot.unwrap_or(md.counts_per_shot),
            contrast_amplitude: m.contrast_amplitude.unwrap_or(md.contrast_amplitude),
        };
        measurement.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => src.error("measurement", name, reason),
            other => other,
        })?;

        let beta_mode = match self.fit.beta.unwrap_or(BetaChoice::Fixed) {
            BetaChoice::Free => BetaMode::Free,
            BetaChoice::Fixed => {
                let v = self.fit.beta_value.unwrap_or(crate::constants::FIXED_BETA);
                if !(v > 0.0 && v <= 1.0) {
                    return Err(src.error("fit", "beta_value", format!("must lie in (0, 1], got {v}")));
                }
                BetaMode::Fixed(v)
            }
        };

        Ok(RunSetup {
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            output_dir: self.output_dir.clone(),
            particle,
            aggregate,
            sites,
            surface_species,
            solution_species,
            sigma,
            c_gd,
            rho,
            time_grid,
            langmuir,
            sweep,
            sweep_c_na,
            measurement,
            beta_mode,
        })
    }
}

fn resolve_species(
    src: &ConfigSource,
    section: &str,
    o: &SpeciesOverrides,
    default: SpinSpecies,
) -> Result<SpinSpecies> {
    let base = match &o.preset {
        Some(name) => SpinSpecies::preset(name)
            .ok_or_else(|| src.error(section, "preset", format!("unknown preset {name:?}")))?,
        None => default,
    };
    SpinSpecies::new(
        o.name.clone().unwrap_or(base.name),
        o.gamma.unwrap_or(base.gamma),
        o.spin.unwrap_or(base.spin),
        o.tau_c_s.unwrap_or(base.tau_c),
    )
    .map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            let key = if name == "tau_c" { "tau_c_s" } else { name };
            src.error(section, key, reason)
        }
        other => other,
    })
}

impl RunSetup {
    /// Forward model over the configured (or sampled) NV sites.
    pub fn forward_model(&self) -> Result<ForwardModel> {
        let sampled;
        let sites = match &self.sites {
            Some(s) => s.as_slice(),
            None => {
                sampled = crate::ensemble::sample_aggregate_sites(&self.particle, &self.aggregate, self.seed)?;
                sampled.as_slice()
            }
        };
        Ok(ForwardModel::new(
            self.particle.clone(),
            self.surface_species.clone(),
            self.solution_species.clone(),
            sites,
        )?
        .with_grid(self.time_grid.spec)
        .with_beta_mode(self.beta_mode))
    }

    /// Fully explicit config reproducing this run.
    pub fn to_config(&self) -> RunConfig {
        let species = |s: &SpinSpecies| SpeciesOverrides {
            preset: None,
            name: Some(s.name.clone()),
            gamma: Some(s.gamma),
            spin: Some(s.spin),
            tau_c_s: Some(s.tau_c),
        };
        let (beta, beta_value) = match self.beta_mode {
            BetaMode::Free => (BetaChoice::Free, None),
            BetaMode::Fixed(v) => (BetaChoice::Fixed, Some(v)),
        };
        RunConfig {
            seed: Some(self.seed),
            output_dir: self.output_dir.clone(),
            particle: ParticleSection {
                radius_m: Some(self.particle.radius),
                n_nv: Some(self.particle.n_nv),
                omega_per_s: Some(self.particle.omega),
                gamma_e: Some(self.particle.gamma_e),
                intrinsic_rate_per_s: Some(self.particle.intrinsic_rate),
                surface_standoff_m: Some(self.particle.surface_standoff),
            },
            aggregate: AggregateSection {
                particles: Some(self.aggregate.particles),
                nv_count: Some(self.aggregate.nv_count),
                sites_m: self.sites.as_ref().map(|s| s.iter().map(|s| s.offset).collect()),
            },
            species: SpeciesSection {
                surface: species(&self.surface_species),
                solution: species(&self.solution_species),
            },
            bath: BathSection { sigma_m2: Some(self.sigma), c_gd_molar: Some(self.c_gd) },
            time_grid: TimeGridSection {
                points: Some(self.time_grid.spec.points),
                t_min_s: Some(self.time_grid.spec.t_min),
                span: Some(self.time_grid.spec.span),
                t_max_s: self.time_grid.t_max,
                reference: Some(self.time_grid.reference),
            },
            adsorption: AdsorptionSection {
                manifest: None,
                sigma_baseline_m2: Some(self.langmuir.sigma_baseline),
                sigma_max_m2: Some(self.langmuir.sigma_max),
                k_gd: Some(self.langmuir.k_gd),
                k_na: Some(self.langmuir.k_na),
            },
            sweep: SweepSection {
                c_gd_molar: Some(self.sweep.clone()),
                c_gd_min: None,
                c_gd_max: None,
                points: None,
                c_na: Some(self.sweep_c_na),
            },
            measurement: MeasurementSection {
                shots: Some(self.measurement.shots),
                counts_per_shot: Some(self.measurement.counts_per_shot),
                contrast_amplitude: Some(self.measurement.contrast_amplitude),
            },
            fit: FitSection { beta: Some(beta), beta_value },
        }
    }
}
