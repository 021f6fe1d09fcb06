//! Encode a one-second tone and print the first time step.

use sineprobe::fixtures::model_from_args_or_random;
use sineprobe::signalgen::{synth, SignalSpec};
use sineprobe::{encode, metrics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let rep = encode(&model, &synth(&SignalSpec::tone(100.0))?)?;
    println!("representation: {} x {}", rep.steps(), rep.features());
    let head: Vec<String> = rep
        .step(0)
        .iter()
        .take(8)
        .map(|v| format!("{v:.4}"))
        .collect();
    println!("step 0: [{} ...]", head.join(", "));
    let mean = metrics::time_average(&rep)?;
    let s = metrics::cosine_similarity(mean.view(), rep.step(24))?;
    println!("cos(mean, step 24) = {s:.6}");
    Ok(())
}
