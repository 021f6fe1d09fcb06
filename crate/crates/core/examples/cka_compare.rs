//! Linear CKA between two random encoders and one encoder with itself.

use sineprobe::experiments::{run_with_models, Experiment, ExperimentConfig, FormantParams};
use sineprobe::fixtures::{random_model, FixtureStyle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        random_model(FixtureStyle::Base, 32, 1),
        random_model(FixtureStyle::Large, 32, 2),
        random_model(FixtureStyle::Base, 32, 1),
    ];
    let params = FormantParams {
        points: 8,
        ..FormantParams::default()
    };
    let config = ExperimentConfig::new(Experiment::CkaCompare(params));
    let report = run_with_models(&config, &models)?;
    let m = report.matrix.as_ref().expect("cka matrix");
    print!("{}", String::from_utf8(m.to_table().to_csv()?)?);
    Ok(())
}
