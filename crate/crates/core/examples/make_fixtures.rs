//! Regenerate the small W2VFE files under `tests/fixtures/`.

use std::path::Path;

use sineprobe::encoder::format::save_model;
use sineprobe::fixtures::{random_model, FixtureStyle};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir)?;
    for (file, style, seed) in [
        ("tiny_base.w2vfe", FixtureStyle::Base, 1),
        ("tiny_large.w2vfe", FixtureStyle::Large, 2),
    ] {
        let path = dir.join(file);
        save_model(&random_model(style, 8, seed), &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
