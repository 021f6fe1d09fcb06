//! Render a 100 Hz tone with a centered 40 ms, 800 Hz burst and save it as WAV.

use sineprobe::signalgen::{synth, SignalSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SignalSpec::tone(100.0).with_burst(&[(800.0, 1.0)], 0.040);
    let wave = synth(&spec)?;
    let (start, len) = spec.burst_region().expect("burst present");
    println!("{} samples, burst at {start}..{}", wave.len(), start + len);
    let path = std::env::temp_dir().join("sineprobe_burst.wav");
    wave.quantize_pcm16().write_wav(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
