//! Deterministic synthesis of sine-sum probe signals.
//!
//! Every probe is a sum of zero-phase sinusoids plus an optional constant
//! offset. A signal may also carry a *burst*: a centered segment in which a
//! different set of components replaces the base components.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sample rate every shipped encoder expects.
pub const DEFAULT_SAMPLE_RATE: f64 = 16_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("frequency {frequency} Hz must lie in (0, {nyquist}] Hz")]
    FrequencyOutOfRange { frequency: f64, nyquist: f64 },
    #[error("amplitude {0} must be non-negative")]
    NegativeAmplitude(f64),
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("burst duration {burst} s exceeds signal duration {signal} s")]
    BurstTooLong { burst: f64, signal: f64 },
}

/// One zero-phase sinusoid: `amplitude * sin(2π frequency t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineComponent {
    pub frequency: f64,
    pub amplitude: f64,
}

impl SineComponent {
    pub fn new(frequency: f64, amplitude: f64) -> Self {
        Self {
            frequency,
            amplitude,
        }
    }

    fn validate(&self, sample_rate: f64) -> Result<(), SignalError> {
        if !self.frequency.is_finite() {
            return Err(SignalError::NonFinite {
                field: "frequency",
                value: self.frequency,
            });
        }
        if !self.amplitude.is_finite() {
            return Err(SignalError::NonFinite {
                field: "amplitude",
                value: self.amplitude,
            });
        }
        let nyquist = sample_rate / 2.0;
        if self.frequency <= 0.0 || self.frequency > nyquist {
            return Err(SignalError::FrequencyOutOfRange {
                frequency: self.frequency,
                nyquist,
            });
        }
        if self.amplitude < 0.0 {
            return Err(SignalError::NegativeAmplitude(self.amplitude));
        }
        Ok(())
    }
}

/// Centered replacement segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub components: Vec<SineComponent>,
    /// Seconds.
    pub duration: f64,
}

fn default_duration() -> f64 {
    1.0
}

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}

/// Declarative description of a probe signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub components: Vec<SineComponent>,
    #[serde(default)]
    pub bias: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst: Option<Burst>,
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self {
            components: Vec::new(),
            bias: 0.0,
            duration: default_duration(),
            sample_rate: default_sample_rate(),
            burst: None,
        }
    }
}

impl SignalSpec {
    /// One-second 16 kHz signal built from `(frequency, amplitude)` pairs.
    pub fn sines(components: &[(f64, f64)]) -> Self {
        Self {
            components: components
                .iter()
                .map(|&(f, a)| SineComponent::new(f, a))
                .collect(),
            ..Self::default()
        }
    }

    /// Unit-amplitude one-second tone.
    pub fn tone(frequency: f64) -> Self {
        Self::sines(&[(frequency, 1.0)])
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_burst(mut self, components: &[(f64, f64)], duration: f64) -> Self {
        self.burst = Some(Burst {
            components: components
                .iter()
                .map(|&(f, a)| SineComponent::new(f, a))
                .collect(),
            duration,
        });
        self
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        for (field, value) in [
            ("bias", self.bias),
            ("duration", self.duration),
            ("sample_rate", self.sample_rate),
        ] {
            if !value.is_finite() {
                return Err(SignalError::NonFinite { field, value });
            }
        }
        if self.duration <= 0.0 {
            return Err(SignalError::NonPositive {
                field: "duration",
                value: self.duration,
            });
        }
        if self.sample_rate <= 0.0 {
            return Err(SignalError::NonPositive {
                field: "sample_rate",
                value: self.sample_rate,
            });
        }
        for c in &self.components {
            c.validate(self.sample_rate)?;
        }
        if let Some(burst) = &self.burst {
            if !burst.duration.is_finite() {
                return Err(SignalError::NonFinite {
                    field: "burst.duration",
                    value: burst.duration,
                });
            }
            if burst.duration < 0.0 {
                return Err(SignalError::NonPositive {
                    field: "burst.duration",
                    value: burst.duration,
                });
            }
            if burst.duration > self.duration {
                return Err(SignalError::BurstTooLong {
                    burst: burst.duration,
                    signal: self.duration,
                });
            }
            for c in &burst.components {
                c.validate(self.sample_rate)?;
            }
        }
        Ok(())
    }

    /// `round(duration * sample_rate)`.
    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    /// Burst interval as `(start, len)` in samples, if a burst is present.
    pub fn burst_region(&self) -> Option<(usize, usize)> {
        let burst = self.burst.as_ref()?;
        let total = self.sample_count();
        let len = ((burst.duration * self.sample_rate).round() as usize).min(total);
        Some(((total - len) / 2, len))
    }
}

/// Rendered samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Round-trip through signed 16-bit PCM (full scale = 32767, clipping at ±1).
    pub fn quantize_pcm16(&self) -> Waveform {
        Waveform {
            samples: self
                .samples
                .iter()
                .map(|&x| f64::from(to_pcm16(x)) / 32767.0)
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Write a mono 16-bit PCM RIFF/WAVE file.
    pub fn write_wav(&self, path: &Path) -> Result<(), hound::Error> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate.round() as u32,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(path, spec)?;
        for &x in &self.samples {
            writer.write_sample(to_pcm16(x))?;
        }
        writer.finalize()
    }
}

fn to_pcm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

fn sum_components(components: &[SineComponent], n: usize, sample_rate: f64) -> f64 {
    components
        .iter()
        .map(|c| c.amplitude * (2.0 * PI * c.frequency * n as f64 / sample_rate).sin())
        .sum()
}

/// Render a signal.
pub fn synth(spec: &SignalSpec) -> Result<Waveform, SignalError> {
    spec.validate()?;
    let total = spec.sample_count();
    let burst = spec
        .burst
        .as_ref()
        .zip(spec.burst_region())
        .map(|(b, (start, len))| (&b.components, start..start + len));

    let samples = (0..total)
        .map(|n| {
            let components = match &burst {
                Some((burst_components, range)) if range.contains(&n) => {
                    burst_components.as_slice()
                }
                _ => spec.components.as_slice(),
            };
            spec.bias + sum_components(components, n, spec.sample_rate)
        })
        .collect();

    Ok(Waveform {
        samples,
        sample_rate: spec.sample_rate,
    })
}

/// Output steps whose analysis window `[i*stride, i*stride + window)` touches
/// the burst interval `[burst_start, burst_start + burst_len)`.
///
/// `window` and `stride` must be non-zero.
pub fn burst_overlap_steps(
    total_samples: usize,
    burst_start: usize,
    burst_len: usize,
    window: usize,
    stride: usize,
) -> BTreeSet<usize> {
    assert!(
        window > 0 && stride > 0,
        "window and stride must be positive"
    );
    if burst_len == 0 || total_samples < window {
        return BTreeSet::new();
    }
    let steps = (total_samples - window) / stride + 1;
    let burst_end = burst_start + burst_len;
    // i*stride < burst_end  and  i*stride + window > burst_start
    let first = if burst_start + 1 > window {
        (burst_start + 1 - window).div_ceil(stride)
    } else {
        0
    };
    let last_exclusive = burst_end.div_ceil(stride).min(steps);
    (first..last_exclusive).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_tone_sample_values() {
        let wave = synth(&SignalSpec::sines(&[(100.0, 1.0)])).unwrap();
        assert_eq!(wave.len(), 16000);
        assert_eq!(wave.samples[0], 0.0);
        assert!((wave.samples[40] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn burst_is_centered() {
        let spec = SignalSpec::sines(&[(200.0, 1.0)]).with_burst(&[(800.0, 1.0)], 0.32);
        assert_eq!(spec.burst_region(), Some((5440, 5120)));
        let wave = synth(&spec).unwrap();
        let base = synth(&SignalSpec::sines(&[(200.0, 1.0)])).unwrap();
        let high = synth(&SignalSpec::sines(&[(800.0, 1.0)])).unwrap();
        assert_eq!(wave.samples[5439], base.samples[5439]);
        assert_eq!(wave.samples[5440], high.samples[5440]);
        assert_eq!(wave.samples[10559], high.samples[10559]);
        assert_eq!(wave.samples[10560], base.samples[10560]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            synth(&SignalSpec::sines(&[(8000.5, 1.0)])),
            Err(SignalError::FrequencyOutOfRange { .. })
        ));
        assert!(synth(&SignalSpec::sines(&[(8000.0, 1.0)])).is_ok());
        assert!(matches!(
            synth(&SignalSpec::sines(&[(f64::NAN, 1.0)])),
            Err(SignalError::NonFinite { .. })
        ));
        assert!(matches!(
            synth(&SignalSpec::sines(&[(100.0, f64::INFINITY)])),
            Err(SignalError::NonFinite { .. })
        ));
        assert!(matches!(
            synth(&SignalSpec::tone(100.0).with_bias(f64::NAN)),
            Err(SignalError::NonFinite { .. })
        ));
        assert!(matches!(
            synth(&SignalSpec::tone(100.0).with_burst(&[(800.0, 1.0)], 1.5)),
            Err(SignalError::BurstTooLong { .. })
        ));
        assert!(matches!(
            synth(&SignalSpec::sines(&[(100.0, -0.1)])),
            Err(SignalError::NegativeAmplitude(_))
        ));
    }

    #[test]
    fn overlap_steps_for_centered_burst() {
        let steps = burst_overlap_steps(16000, 5440, 5120, 400, 320);
        assert_eq!(steps, (16..=32).collect());
        assert!(burst_overlap_steps(16000, 5440, 0, 400, 320).is_empty());
        assert_eq!(
            burst_overlap_steps(16000, 0, 16000, 400, 320),
            (0..49).collect()
        );
    }

    #[test]
    fn zero_duration_burst_leaves_signal_untouched() {
        let spec = SignalSpec::tone(200.0).with_burst(&[(800.0, 1.0)], 0.0);
        assert_eq!(
            synth(&spec).unwrap(),
            synth(&SignalSpec::tone(200.0)).unwrap()
        );
    }

    #[test]
    fn spec_json_uses_field_defaults() {
        let spec: SignalSpec =
            serde_json::from_str(r#"{"components":[{"frequency":100,"amplitude":1}]}"#).unwrap();
        assert_eq!(spec, SignalSpec::tone(100.0));
        let json =
            serde_json::to_value(SignalSpec::tone(100.0).with_burst(&[(800.0, 1.0)], 0.1)).unwrap();
        assert_eq!(json["burst"]["duration"], 0.1);
        assert_eq!(json["sample_rate"], 16000.0);
    }

    #[test]
    fn pcm16_round_trip_is_close() {
        let wave = synth(&SignalSpec::tone(440.0)).unwrap();
        let q = wave.quantize_pcm16();
        for (a, b) in wave.samples.iter().zip(&q.samples) {
            assert!((a - b).abs() <= 0.5 / 32767.0 + 1e-12);
        }
    }
}
