//! Time-averaged vs stepwise similarity for five pure tones.

use sineprobe::experiments::run_temporal_consistency;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(32, 0)?;
    let report = run_temporal_consistency(&model)?;
    let m = report.matrix.as_ref().expect("consistency matrix");
    print!("{}", String::from_utf8(m.to_table().to_csv()?)?);
    println!("symmetry residual {:.2e}", m.symmetry_residual());
    Ok(())
}
