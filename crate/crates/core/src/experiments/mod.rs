//! One runner per probing analysis.
//!
//! An [`ExperimentConfig`] names the weight files, the experiment and its
//! parameters. [`run`] loads the models, synthesizes and encodes every probe
//! signal, computes the statistics and returns an [`ExperimentReport`] whose
//! `config` field reproduces the run bit for bit.

pub mod grid;
mod report;
mod runners;

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{format, EncodeError, EncoderModel, ModelError};
use crate::metrics::MetricsError;
use crate::signalgen::SignalError;

pub use grid::GridStatistic;
pub use report::{write_atomic, ExperimentReport, LabeledMatrix, ModelInfo};
pub use runners::{amplitude_levels, linspace};

/// Above this many signals the MDS projection uses a seeded subsample.
pub const MDS_MAX_POINTS: usize = 2000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::Model(e) => e.code(),
            ExperimentError::Signal(_) => "invalid_signal",
            ExperimentError::Encode(EncodeError::InputTooShort { .. }) => "input_too_short",
            ExperimentError::Encode(EncodeError::SampleRateMismatch { .. }) => {
                "sample_rate_mismatch"
            }
            ExperimentError::Metrics(e) => e.code(),
            ExperimentError::Io { .. } => "io_error",
            ExperimentError::InvalidConfig(_) => "invalid_config",
            ExperimentError::NonFinite(_) => "non_finite",
        }
    }
}

fn tones(from: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| from + step * k as f64).collect()
}

/// Pure tones at several fundamentals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToneSetParams {
    pub f0s: Vec<f64>,
    pub amplitude: f64,
}

impl Default for ToneSetParams {
    fn default() -> Self {
        Self {
            f0s: tones(100.0, 100.0, 5),
            amplitude: 1.0,
        }
    }
}

/// Low tone with a centered high-frequency burst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BurstParams {
    pub base_frequency: f64,
    pub burst_frequency: f64,
    pub amplitude: f64,
    pub durations_ms: Vec<f64>,
}

impl Default for BurstParams {
    fn default() -> Self {
        Self {
            base_frequency: 200.0,
            burst_frequency: 800.0,
            amplitude: 1.0,
            durations_ms: vec![320.0, 160.0, 80.0, 40.0, 20.0, 10.0],
        }
    }
}

/// Evenly spaced pure-tone sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepParams {
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
    pub amplitude: f64,
    /// With `full_matrix`, restrict `matrix.csv` to this many seeded signals.
    pub matrix_subsample: Option<usize>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            f_min: 10.0,
            f_max: 8000.0,
            f_step: 10.0,
            amplitude: 1.0,
            matrix_subsample: None,
        }
    }
}

impl SweepParams {
    pub fn frequencies(&self) -> Vec<f64> {
        let count = ((self.f_max - self.f_min) / self.f_step + 1e-9).floor() as usize + 1;
        tones(self.f_min, self.f_step, count)
    }
}

/// Tone with a constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasParams {
    pub f0s: Vec<f64>,
    pub amplitude: f64,
    pub biases: Vec<f64>,
}

impl Default for BiasParams {
    fn default() -> Self {
        Self {
            f0s: tones(100.0, 100.0, 5),
            amplitude: 0.5,
            biases: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
        }
    }
}

/// Three-component vowel-like signals over an F1 × F2 grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormantParams {
    /// Fundamental for the single-F0 grid.
    pub fix_f0: f64,
    /// Fundamentals for the F0 × F1 × F2 grid.
    pub f0_sweep: Vec<f64>,
    /// Amplitudes of the F0, F1 and F2 components.
    pub amplitudes: [f64; 3],
    pub f1_range: [f64; 2],
    pub f2_range: [f64; 2],
    pub points: usize,
    /// Non-adjacent pairs evaluated by the grid statistic before sampling kicks in.
    pub max_pairs: usize,
}

impl Default for FormantParams {
    fn default() -> Self {
        Self {
            fix_f0: 120.0,
            f0_sweep: tones(100.0, 25.0, 6),
            amplitudes: [0.5, 0.35, 0.15],
            f1_range: [235.0, 850.0],
            f2_range: [595.0, 2400.0],
            points: 30,
            max_pairs: 1_000_000,
        }
    }
}

/// Two-tone signals with amplitudes evenly spaced in energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmplitudeParams {
    pub f0: f64,
    pub f1: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
}

impl Default for AmplitudeParams {
    fn default() -> Self {
        Self {
            f0: 100.0,
            f1: 700.0,
            a_min: 0.1,
            a_max: 0.5,
            points: 5,
        }
    }
}

/// Three tones compared under spectrogram and encoder distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContrastParams {
    pub frequencies: [f64; 3],
    pub spectrogram_window: usize,
    pub spectrogram_hop: usize,
}

impl Default for ContrastParams {
    fn default() -> Self {
        Self {
            frequencies: [100.0, 200.0, 8000.0],
            spectrogram_window: 400,
            spectrogram_hop: 320,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    TemporalConsistency(ToneSetParams),
    TemporalBurst(BurstParams),
    F0Sweep(SweepParams),
    BiasInvariance(BiasParams),
    FormantGrid(FormantParams),
    FormantF0Grid(FormantParams),
    CkaCompare(FormantParams),
    AmplitudeGrid(AmplitudeParams),
    MetricContrast(ContrastParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::TemporalConsistency(_) => "temporal_consistency",
            Experiment::TemporalBurst(_) => "temporal_burst",
            Experiment::F0Sweep(_) => "f0_sweep",
            Experiment::BiasInvariance(_) => "bias_invariance",
            Experiment::FormantGrid(_) => "formant_grid",
            Experiment::FormantF0Grid(_) => "formant_f0_grid",
            Experiment::CkaCompare(_) => "cka_compare",
            Experiment::AmplitudeGrid(_) => "amplitude_grid",
            Experiment::MetricContrast(_) => "metric_contrast",
        }
    }

    /// Number of models the experiment consumes, as `(min, max)`.
    fn model_count(&self) -> (usize, usize) {
        match self {
            Experiment::CkaCompare(_) => (2, usize::MAX),
            _ => (1, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model_paths: Vec<PathBuf>,
    pub experiment: Experiment,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub full_matrix: bool,
    #[serde(default)]
    pub quantize_pcm16: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            model_paths: Vec::new(),
            experiment,
            output_dir: None,
            seed: 0,
            full_matrix: false,
            quantize_pcm16: false,
        }
    }

    pub fn with_models<P: Into<PathBuf>>(mut self, paths: impl IntoIterator<Item = P>) -> Self {
        self.model_paths = paths.into_iter().map(Into::into).collect();
        self
    }
}

/// Load the configured weight files and run.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let mut models = Vec::with_capacity(config.model_paths.len());
    let mut infos = Vec::with_capacity(config.model_paths.len());
    for path in &config.model_paths {
        let model = format::load_model(path)?;
        infos.push(ModelInfo {
            name: model.name().to_string(),
            path: Some(path.clone()),
            sha256: format::file_checksum(path)?,
            window: model.window(),
            stride: model.stride(),
            feature_dim: model.feature_dim(),
        });
        models.push(model);
    }
    runners::execute(config, &models, infos)
}

/// Run against models already in memory; `config.model_paths` is ignored.
pub fn run_with_models(
    config: &ExperimentConfig,
    models: &[EncoderModel],
) -> Result<ExperimentReport, ExperimentError> {
    let infos = models
        .iter()
        .map(|m| ModelInfo {
            name: m.name().to_string(),
            path: None,
            sha256: format::sha256_hex(&format::to_bytes(m)),
            window: m.window(),
            stride: m.stride(),
            feature_dim: m.feature_dim(),
        })
        .collect();
    runners::execute(config, models, infos)
}

macro_rules! single_model_runner {
    ($(#[$doc:meta])* $name:ident, $variant:ident) => {
        $(#[$doc])*
        pub fn $name(model: &EncoderModel) -> Result<ExperimentReport, ExperimentError> {
            run_with_models(
                &ExperimentConfig::new(Experiment::$variant(Default::default())),
                std::slice::from_ref(model),
            )
        }
    };
}

single_model_runner!(
    /// 5 × 5 consistency matrix over 100–500 Hz tones.
    run_temporal_consistency,
    TemporalConsistency
);
single_model_runner!(
    /// 200 Hz tone with centered 800 Hz bursts from 320 ms down to 10 ms.
    run_temporal_burst,
    TemporalBurst
);
single_model_runner!(
    /// 10 Hz – 8 kHz tone sweep and the encoder's cumulative frequency scale.
    run_f0_sweep,
    F0Sweep
);
single_model_runner!(
    /// Similarity of biased tones to their unbiased counterparts.
    run_bias_invariance,
    BiasInvariance
);
single_model_runner!(
    /// Energy-equalized A0 × A1 grid (5 × 5 by default) at 100 Hz and 700 Hz.
    run_amplitude_grid,
    AmplitudeGrid
);
single_model_runner!(
    /// Spectrogram vs encoder distances for 100 Hz, 200 Hz and 8 kHz tones.
    run_metric_contrast,
    MetricContrast
);

/// F1 × F2 grid at a fixed fundamental, or the F0 × F1 × F2 grid when `fix_f0` is `None`.
pub fn run_formant_grid(
    model: &EncoderModel,
    fix_f0: Option<f64>,
) -> Result<ExperimentReport, ExperimentError> {
    let experiment = match fix_f0 {
        Some(f0) => Experiment::FormantGrid(FormantParams {
            fix_f0: f0,
            ..Default::default()
        }),
        None => Experiment::FormantF0Grid(FormantParams::default()),
    };
    run_with_models(
        &ExperimentConfig::new(experiment),
        std::slice::from_ref(model),
    )
}

/// Pairwise linear CKA between models over the formant grid.
pub fn run_cka_compare(models: &[EncoderModel]) -> Result<ExperimentReport, ExperimentError> {
    run_with_models(
        &ExperimentConfig::new(Experiment::CkaCompare(FormantParams::default())),
        models,
    )
}
