//! Grid statistic over a small F1 × F2 grid at F0 = 120 Hz.

use sineprobe::experiments::{run_with_models, Experiment, ExperimentConfig, FormantParams};
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let params = FormantParams {
        points: 10,
        ..FormantParams::default()
    };
    let config = ExperimentConfig::new(Experiment::FormantGrid(params));
    let report = run_with_models(&config, &[model])?;
    println!("{}", serde_json::to_string_pretty(&report.summary["grid"])?);
    Ok(())
}
