//! Energy-equalized two-tone amplitude grid and its grid statistic.

use sineprobe::experiments::run_amplitude_grid;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_amplitude_grid(&model)?;
    println!("levels {}", report.summary["levels"]);
    println!("grid statistic {:?}", report.number("grid_statistic"));
    Ok(())
}
