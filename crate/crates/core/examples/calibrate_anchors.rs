//! Calibrates the default model against the bundled anchor dataset and
//! prints the fitted parameters and residuals.

use std::path::Path;
use std::time::Instant;

use nvrelax::constants::DEFAULT_SEED;
use nvrelax::fitting::{calibrate, ForwardModel};
use nvrelax::io::read_dataset_csv;
use nvrelax::{AggregateSpec, ParticleModel};

fn main() -> nvrelax::Result<()> {
    let data = read_dataset_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/t1_anchors.csv"))?;
    let model = ForwardModel::sampled(ParticleModel::default(), &AggregateSpec::default(), DEFAULT_SEED)?;
    let start = Instant::now();
    let cal = calibrate(&model, &data)?;
    println!("elapsed {:.1?}", start.elapsed());
    println!("{:#?}", cal.langmuir);
    println!("solution tau_c = {:e}", cal.solution_tau_c);
    for r in &cal.residuals {
        println!(
            "c_gd {:>8.1e}  c_na {:>7.1e}  obs {:>6.2} us  model {:>6.2} us  ln {:+.3}",
            r.c_gd,
            r.c_na,
            r.t1_observed * 1e6,
            r.t1_model * 1e6,
            r.log_residual
        );
    }
    println!("rms {:.4}  warnings {:?}", cal.rms_log_residual, cal.warnings);
    Ok(())
}
