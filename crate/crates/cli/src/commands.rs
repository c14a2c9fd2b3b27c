use std::fs;
use std::path::{Path, PathBuf};

use nvrelax::config::{BetaChoice, ConfigSource, RunConfig, RunSetup};
use nvrelax::constants::SCHEMA_VERSION;
use nvrelax::ensemble::{contrast_from_measurement, decay_from_rates, simulate_measurement};
use nvrelax::fitting::{calibrate_from, fit_stretched_exp, response_curve, ForwardModel, StretchedExpFit};
use nvrelax::io::{self, write_atomic, CalibrationManifest};
use nvrelax::{BetaMode, DecayCurve, Error, Result};
use serde_json::{json, Value};

use crate::{Beta, Cli, Command};

const DEFAULT_OUT: &str = "nvrelax-out";

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::FitFailure { .. } | Error::NoBracket { .. } | Error::Calibration(_) | Error::DegenerateInput(_) => 3,
        _ => 2,
    }
}

struct Run {
    setup: RunSetup,
    out: PathBuf,
}

impl Run {
    fn load(cli: &Cli) -> Result<Self> {
        let source = match &cli.config {
            Some(path) => ConfigSource::read(path)?,
            None => ConfigSource::default(),
        };
        let mut config = RunConfig::parse(&source)?;
        if let Some(seed) = cli.seed {
            config.seed = Some(seed);
        }
        if let Some(beta) = cli.beta {
            config.fit.beta = Some(match beta {
                Beta::Fixed => BetaChoice::Fixed,
                Beta::Free => BetaChoice::Free,
            });
        }
        if let Command::Response { c_na: Some(c) } = &cli.command {
            config.sweep.c_na = Some(*c);
        }
        let setup = config.resolve(&source)?;
        let out = cli
            .out
            .clone()
            .or_else(|| setup.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        fs::create_dir_all(&out)?;
        Ok(Self { setup, out })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.out.join(name), contents.as_bytes())
    }

    /// Writes the resolved config and `metadata.json` with `extra` merged in.
    fn finish(&self, command: &str, n_sites: Option<usize>, extra: Value) -> Result<()> {
        let mut resolved = self.setup.to_config();
        // The output location is an invocation detail, not a model input.
        resolved.output_dir = None;
        self.write("resolved_config.toml", &resolved.to_toml()?)?;
        let mut meta = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": "nvrelax",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": self.setup.seed,
            "n_sites": n_sites,
            "parameters": serde_json::to_value(&resolved)?,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
        self.write("metadata.json", &(serde_json::to_string_pretty(&meta)? + "\n"))
    }

    fn model(&self) -> Result<ForwardModel> {
        self.setup.forward_model()
    }

    /// Noise-free ensemble curve for the configured bath.
    fn simulated_curve(&self, model: &ForwardModel) -> Result<DecayCurve> {
        let rates = model.rates(self.setup.sigma, self.setup.rho)?;
        let estimate = match self.setup.time_grid.t_max {
            Some(_) => f64::NAN,
            None => model.t1(self.setup.sigma, self.setup.rho)?.t1,
        };
        let times = self.setup.time_grid.times(estimate)?;
        decay_from_rates(&rates, &times)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate => simulate(cli),
        Command::Fit { input } => fit(cli, input),
        Command::Response { .. } => response(cli),
        Command::Calibrate { input } => calibrate(cli, input),
        Command::SynthMeasure { input } => synth_measure(cli, input.as_deref()),
    }
}

fn fit_report(fit: &StretchedExpFit, mode: BetaMode, n_points: usize) -> Value {
    json!({
        "beta_mode": match mode { BetaMode::Free => "free", BetaMode::Fixed(_) => "fixed" },
        "n_points": n_points,
        "amplitude": fit.amplitude,
        "t1_s": fit.t1,
        "t1_err_s": fit.t1_uncertainty,
        "beta": fit.beta,
        "beta_err": fit.covariance[2][2].max(0.0).sqrt(),
        "amplitude_err": fit.covariance[0][0].max(0.0).sqrt(),
        "residual_norm": fit.residual_norm,
        "chi2": fit.chi2,
        "dof": fit.dof,
        "reduced_chi2": fit.reduced_chi2(),
        "weighted": fit.weighted,
        "converged": fit.converged,
        "covariance": fit.covariance,
    })
}

fn simulate(cli: &Cli) -> Result<()> {
    let run = Run::load(cli)?;
    let model = run.model()?;
    let curve = run.simulated_curve(&model)?;
    let fit = fit_stretched_exp(&curve, run.setup.beta_mode).ok();
    let header = json!({
        "seed": run.setup.seed,
        "sigma_m2": run.setup.sigma,
        "c_gd_M": run.setup.c_gd,
        "n_sites": model.n_sites(),
    });
    run.write("decay.csv", &io::decay_csv(&curve))?;
    run.write("decay.jsonl", &io::decay_jsonl(&curve, &header))?;
    let report = fit.as_ref().map(|f| fit_report(f, run.setup.beta_mode, curve.len()));
    run.finish(
        "simulate",
        Some(model.n_sites()),
        json!({ "files": { "decay": "decay.csv", "decay_jsonl": "decay.jsonl" }, "fit": report }),
    )?;
    match fit {
        Some(f) => println!("simulated {} points; T1 = {:.4e} s, beta = {:.3}", curve.len(), f.t1, f.beta),
        None => println!("simulated {} points", curve.len()),
    }
    Ok(())
}

fn fit(cli: &Cli, input: &Path) -> Result<()> {
    let run = Run::load(cli)?;
    let curve = io::read_decay_csv(input)?;
    let mode = run.setup.beta_mode;
    let fit = fit_stretched_exp(&curve, mode)?;
    let report = fit_report(&fit, mode, curve.len());
    run.write("fit_report.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    run.finish("fit", None, json!({ "input": input.display().to_string(), "fit": report }))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn response(cli: &Cli) -> Result<()> {
    let run = Run::load(cli)?;
    let model = run.model()?;
    let results = response_curve(&model, &run.setup.langmuir, &run.setup.sweep, run.setup.sweep_c_na)?;
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(f) => {
                eprintln!("warning: c_gd = {:e} M, c_na = {:e} M failed: {}", f.c_gd, f.c_na, f.message);
                failures.push(f);
            }
        }
    }
    run.write("response.csv", &io::response_csv(&points))?;
    let plot = json!({
        "x": { "label": "[Gd3+] (mol/L)", "scale": "log" },
        "y": { "label": "T1 (s)", "scale": "log" },
        "c_na_M": run.setup.sweep_c_na,
        "series": [{
            "name": "T1",
            "x": points.iter().map(|p| p.c_gd).collect::<Vec<_>>(),
            "y": points.iter().map(|p| p.t1).collect::<Vec<_>>(),
            "y_err": points.iter().map(|p| p.t1_uncertainty).collect::<Vec<_>>(),
        }, {
            "name": "sigma_m2",
            "x": points.iter().map(|p| p.c_gd).collect::<Vec<_>>(),
            "y": points.iter().map(|p| p.sigma_used).collect::<Vec<_>>(),
        }],
    });
    run.write("response_plot.json", &(serde_json::to_string_pretty(&plot)? + "\n"))?;
    run.finish(
        "response",
        Some(model.n_sites()),
        json!({
            "files": { "response": "response.csv", "plot": "response_plot.json" },
            "columns": io::RESPONSE_COLUMNS,
            "failures": failures,
        }),
    )?;
    println!("{} points written, {} failed", points.len(), failures.len());
    if points.is_empty() {
        return Err(Error::Calibration("every sweep point failed".into()));
    }
    Ok(())
}

fn calibrate(cli: &Cli, input: &Path) -> Result<()> {
    let run = Run::load(cli)?;
    let data = io::read_dataset_csv(input)?;
    let model = run.model()?;
    let cal = calibrate_from(&model, &data, &run.setup.langmuir)?;
    for w in &cal.warnings {
        eprintln!("warning: {w}");
    }
    let manifest =
        CalibrationManifest::new(cal, run.setup.seed, model.n_sites(), Some(input.display().to_string()));
    run.write("calibration.json", &manifest.to_json()?)?;
    run.finish(
        "calibrate",
        Some(model.n_sites()),
        json!({ "files": { "manifest": "calibration.json" }, "ill_posed": manifest.calibration.ill_posed }),
    )?;
    let p = &manifest.calibration.langmuir;
    println!(
        "sigma_baseline = {:.4e} m^-2, sigma_max = {:.4e} m^-2, K_gd = {:.4e} L/mol, K_na = {:.4e} L/mol, \
         solution tau_c = {:.4e} s, rms ln-residual = {:.4}",
        p.sigma_baseline,
        p.sigma_max,
        p.k_gd,
        p.k_na,
        manifest.calibration.solution_tau_c,
        manifest.calibration.rms_log_residual
    );
    Ok(())
}

fn synth_measure(cli: &Cli, input: Option<&Path>) -> Result<()> {
    let run = Run::load(cli)?;
    let (curve, n_sites) = match input {
        Some(path) => (io::read_decay_csv(path)?, None),
        None => {
            let model = run.model()?;
            let curve = run.simulated_curve(&model)?;
            (curve, Some(model.n_sites()))
        }
    };
    let record = simulate_measurement(&curve, &run.setup.measurement, run.setup.seed)?;
    let contrast = contrast_from_measurement(&record)?;
    let header = json!({ "seed": run.setup.seed, "measurement": run.setup.measurement });
    run.write("measurement.csv", &io::measurement_csv(&record))?;
    run.write("measurement.jsonl", &io::measurement_jsonl(&record, &header))?;
    run.write("contrast.csv", &io::decay_csv(&contrast))?;
    let mode = run.setup.beta_mode;
    let fit = fit_stretched_exp(&contrast, mode)?;
    let report = fit_report(&fit, mode, contrast.len());
    run.write("fit_report.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    run.finish(
        "synth-measure",
        n_sites,
        json!({
            "input": input.map(|p| p.display().to_string()),
            "files": { "measurement": "measurement.csv", "contrast": "contrast.csv", "fit": "fit_report.json" },
            "fit": report,
        }),
    )?;
    println!("T1 = {:.4e} ± {:.2e} s, beta = {:.3}, chi2/dof = {:.3}", fit.t1, fit.t1_uncertainty, fit.beta, fit.reduced_chi2());
    Ok(())
}
