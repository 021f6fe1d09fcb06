use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};

use super::MetricsError;
use crate::signalgen::Waveform;

/// Magnitude STFT with a periodic Hann window and no padding.
///
/// Returns `frames × (window/2 + 1)`, with `frames = ⌊(L − window)/hop⌋ + 1`.
pub fn spectrogram_features(
    wave: &Waveform,
    window: usize,
    hop: usize,
) -> Result<Array2<f64>, MetricsError> {
    assert!(window >= 1 && hop >= 1, "window and hop must be positive");
    let len = wave.len();
    if len < window {
        return Err(MetricsError::InputTooShort {
            needed: window,
            got: len,
        });
    }
    let frames = (len - window) / hop + 1;
    let bins = window / 2 + 1;
    let hann: Vec<f64> = (0..window)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / window as f64).cos())
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut out = Array2::zeros((frames, bins));
    for t in 0..frames {
        let frame = &wave.samples[t * hop..t * hop + window];
        for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&hann) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, c) in buf.iter().take(bins).enumerate() {
            out[[t, k]] = c.norm();
        }
    }
    Ok(out)
}
