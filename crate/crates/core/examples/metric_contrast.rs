//! Spectrogram vs encoder distances for 100, 200 and 8000 Hz tones.

use sineprobe::experiments::run_metric_contrast;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_metric_contrast(&model)?;
    println!("spectrogram {}", report.summary["spectrogram"]);
    println!("encoder     {}", report.summary["encoder"]);
    Ok(())
}
