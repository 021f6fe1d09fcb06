//! Stepwise distance to the burst-free reference for shrinking burst lengths.

use sineprobe::experiments::run_temporal_burst;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_temporal_burst(&model)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.summary["durations"])?
    );
    Ok(())
}
