use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{cosine_distance, MetricsError};

/// Cumulative neighbor distance along a frequency sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScale {
    pub frequencies: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl FrequencyScale {
    /// Distance between each neighboring pair (`len - 1` values).
    pub fn increments(&self) -> Vec<f64> {
        self.cumulative.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// `cumulative[k] = Σ_{j<k} D_c(r̄_j, r̄_{j+1})`.
pub fn build_encoder_scale(
    frequencies: &[f64],
    averaged: &[Array1<f64>],
) -> Result<FrequencyScale, MetricsError> {
    if frequencies.len() != averaged.len() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} frequencies for {} representations",
            frequencies.len(),
            averaged.len()
        )));
    }
    if averaged.len() < 2 {
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            got: averaged.len(),
        });
    }
    if let Some(index) = frequencies.windows(2).position(|w| w[1] <= w[0]) {
        return Err(MetricsError::UnsortedFrequencies { index: index + 1 });
    }
    let mut cumulative = Vec::with_capacity(averaged.len());
    cumulative.push(0.0);
    let mut total = 0.0;
    for pair in averaged.windows(2) {
        total += cosine_distance(pair[0].view(), pair[1].view())?;
        cumulative.push(total);
    }
    Ok(FrequencyScale {
        frequencies: frequencies.to_vec(),
        cumulative,
    })
}

/// O'Shaughnessy mel: `2595·log10(1 + f/700)`.
pub fn mel_scale(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

/// Zwicker–Terhardt bark: `13·atan(0.00076·f) + 3.5·atan((f/7500)²)`.
pub fn bark_scale(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

/// Map to `[0, 1]` by min and max; a constant input maps to zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingStats {
    /// Fraction of strictly positive neighbor increments.
    pub monotone_fraction: f64,
    /// R² of the least-squares line `cumulative ~ frequency`.
    pub linearity_r2: f64,
}

pub fn ordering_stats(scale: &FrequencyScale) -> Result<OrderingStats, MetricsError> {
    let n = scale.cumulative.len();
    if n < 3 || scale.frequencies.len() != n {
        return Err(MetricsError::TooFewPoints { needed: 3, got: n });
    }
    let increments = scale.increments();
    let monotone_fraction =
        increments.iter().filter(|&&d| d > 0.0).count() as f64 / increments.len() as f64;

    let x = &scale.frequencies;
    let y = &scale.cumulative;
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    // constant scale: R² is reported as 0
    let linearity_r2 = if syy > 0.0 && sxx > 0.0 {
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
            .sum();
        1.0 - ss_res / syy
    } else {
        0.0
    };
    Ok(OrderingStats {
        monotone_fraction,
        linearity_r2,
    })
}
