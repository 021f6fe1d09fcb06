//! Print geometry and tensor checksums of a W2VFE file.
//!
//! `cargo run --example inspect_model -- path/to/model.w2vfe`

use sineprobe::encoder::format;
use sineprobe::fixtures::model_from_args_or_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = model_from_args_or_random(16, 0)?;
    println!(
        "{}: {} layers, window {}, stride {}, {} features",
        model.name(),
        model.layers().len(),
        model.window(),
        model.stride(),
        model.feature_dim()
    );
    for (name, sum) in format::tensor_checksums(&model) {
        println!("{name:16} {sum}");
    }
    Ok(())
}
