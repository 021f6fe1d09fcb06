//! Probe convolutional speech feature encoders with synthetic sine signals.
//!
//! The crate synthesizes parametric test signals ([`signalgen`]), runs them
//! through a wav2vec-2.0-style convolutional feature encoder loaded from a
//! W2VFE weight file ([`encoder`]), and measures the resulting latent space
//! ([`metrics`]). Each analysis of temporal detail, fundamental frequency,
//! bias, formants, amplitude and metric structure has a runner in
//! [`experiments`] that writes a self-describing report directory.
//!
//! ```no_run
//! use sineprobe::encoder::{encode, load_model};
//! use sineprobe::metrics::time_average;
//! use sineprobe::signalgen::{synth, SignalSpec};
//!
//! let model = load_model("base.w2vfe")?;
//! let wave = synth(&SignalSpec::tone(100.0))?;
//! let rep = encode(&model, &wave)?;
//! assert_eq!(rep.matrix.dim(), (49, 512));
//! let mean = time_average(&rep)?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod encoder;
pub mod experiments;
pub mod fixtures;
pub mod metrics;
pub mod parity;
pub mod signalgen;
pub mod table;

pub use encoder::{encode, load_model, EncoderModel, Representation};
pub use signalgen::{synth, SignalSpec, Waveform};

/// Crate version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
