//! Similarity between biased and unbiased tones.

use sineprobe::experiments::run_bias_invariance;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_bias_invariance(&model)?;
    let m = report.matrix.as_ref().expect("bias table");
    print!("{}", String::from_utf8(m.to_table().to_csv()?)?);
    println!("min similarity {:?}", report.number("min_similarity"));
    Ok(())
}
