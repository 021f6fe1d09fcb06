//! Similarity, scale, projection and structure statistics.

mod cka;
mod mds;
mod scale;
mod similarity;
mod spectrogram;

use thiserror::Error;

pub use cka::linear_cka;
pub use mds::mds_2d;
pub use scale::{
    bark_scale, build_encoder_scale, mel_scale, min_max_normalize, ordering_stats, FrequencyScale,
    OrderingStats,
};
pub(crate) use similarity::matrix_rows;
pub use similarity::{
    consistency_matrix, cosine_distance, cosine_similarity, time_average, DistanceMatrix,
};
pub use spectrogram::spectrogram_features;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricsError {
    #[error("representation has no time steps")]
    EmptyRepresentation,
    #[error("cosine similarity of a zero vector")]
    ZeroVector,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("frequencies must be strictly increasing (index {index})")]
    UnsortedFrequencies { index: usize },
    #[error("centered input is all zeros")]
    DegenerateInput,
    #[error("non-finite distance at ({row}, {col})")]
    NonFiniteDistance { row: usize, col: usize },
    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),
    #[error("input has {got} samples, window needs {needed}")]
    InputTooShort { needed: usize, got: usize },
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::EmptyRepresentation => "empty_representation",
            MetricsError::ZeroVector => "zero_vector",
            MetricsError::ShapeMismatch(_) => "shape_mismatch",
            MetricsError::TooFewPoints { .. } => "too_few_points",
            MetricsError::UnsortedFrequencies { .. } => "unsorted_frequencies",
            MetricsError::DegenerateInput => "degenerate_input",
            MetricsError::NonFiniteDistance { .. } => "non_finite_distance",
            MetricsError::InvalidDistanceMatrix(_) => "invalid_distance_matrix",
            MetricsError::InputTooShort { .. } => "input_too_short",
        }
    }
}
