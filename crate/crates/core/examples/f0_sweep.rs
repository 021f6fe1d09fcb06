//! Cumulative frequency scale of the encoder against mel and Bark.

use sineprobe::experiments::run_f0_sweep;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_f0_sweep(&model)?;
    let scale = report.scale.as_ref().expect("scale table");
    println!("{} frequencies", scale.len());
    for key in [
        "monotone_fraction",
        "linearity_r2",
        "mel_deviation_from_linear",
    ] {
        println!("{key}: {:?}", report.number(key));
    }
    Ok(())
}
