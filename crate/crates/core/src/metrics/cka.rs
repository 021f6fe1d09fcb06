use ndarray::{Array2, ArrayView2, Axis};

use super::MetricsError;

fn center_columns(m: ArrayView2<f64>) -> Array2<f64> {
    let mean = m.mean_axis(Axis(0)).expect("at least one row");
    &m - &mean
}

fn frobenius_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Linear CKA between two representations of the same `n` examples:
/// `‖Yᶜᵀ Xᶜ‖²_F / (‖Xᶜᵀ Xᶜ‖_F ‖Yᶜᵀ Yᶜ‖_F)`.
pub fn linear_cka(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64, MetricsError> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} rows vs {} rows",
            n,
            y.nrows()
        )));
    }
    if n < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: n });
    }
    let xc = center_columns(x);
    let yc = center_columns(y);
    if xc.iter().all(|&v| v == 0.0) || yc.iter().all(|&v| v == 0.0) {
        return Err(MetricsError::DegenerateInput);
    }
    let cross = yc.t().dot(&xc);
    let xx = xc.t().dot(&xc);
    let yy = yc.t().dot(&yc);
    let value = frobenius_sq(&cross) / (frobenius_sq(&xx).sqrt() * frobenius_sq(&yy).sqrt());
    Ok(value.clamp(0.0, 1.0))
}
