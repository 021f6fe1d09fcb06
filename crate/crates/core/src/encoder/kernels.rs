//! Forward-pass primitives: strided valid convolution, normalization, GELU.
//!
//! Activations are laid out channel-major (`C × L`).

use ndarray::{s, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis, Zip};
use serde::{Deserialize, Serialize};

use super::EncodeError;

/// Normalization applied after a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Each channel standardized over its time axis (group norm, one group per channel).
    GroupPerChannel,
    /// Each time step standardized over the channel axis.
    LayerOverChannels,
    None,
}

/// `out[o, t] = bias[o] + Σ_i Σ_k weight[o, i, k] · input[i, t·stride + k]`, no padding.
pub fn conv1d(
    input: ArrayView2<f64>,
    weight: ArrayView3<f64>,
    bias: Option<ArrayView1<f64>>,
    stride: usize,
) -> Result<Array2<f64>, EncodeError> {
    let (c_in, len) = input.dim();
    let (c_out, w_in, kernel) = weight.dim();
    assert_eq!(
        c_in, w_in,
        "weight expects {w_in} input channels, got {c_in}"
    );
    assert!(stride >= 1 && kernel >= 1);
    if len < kernel {
        return Err(EncodeError::InputTooShort {
            needed: kernel,
            got: len,
        });
    }
    let out_len = (len - kernel) / stride + 1;

    // im2col: row (i*K + k), column t holds input[i, t*stride + k]
    let mut cols = Array2::<f64>::zeros((c_in * kernel, out_len));
    for i in 0..c_in {
        let row = input.row(i);
        for k in 0..kernel {
            let src = row.slice(s![k..k + (out_len - 1) * stride + 1;stride]);
            cols.row_mut(i * kernel + k).assign(&src);
        }
    }
    let w2 = weight
        .to_shape((c_out, c_in * kernel))
        .expect("weight is contiguous");
    let mut out = w2.dot(&cols);
    if let Some(bias) = bias {
        assert_eq!(bias.len(), c_out);
        for (mut row, &b) in out.axis_iter_mut(Axis(0)).zip(bias.iter()) {
            row += b;
        }
    }
    Ok(out)
}

/// Standardize then apply a per-channel affine map.
pub fn normalize(
    input: ArrayView2<f64>,
    mode: NormKind,
    scale: ArrayView1<f64>,
    shift: ArrayView1<f64>,
    epsilon: f64,
) -> Array2<f64> {
    let mut out = input.to_owned();
    let axis = match mode {
        NormKind::None => return out,
        NormKind::GroupPerChannel => Axis(0),
        NormKind::LayerOverChannels => Axis(1),
    };
    assert_eq!(scale.len(), input.nrows());
    assert_eq!(shift.len(), input.nrows());
    for mut lane in out.axis_iter_mut(axis) {
        let n = lane.len() as f64;
        let mean = lane.sum() / n;
        let var = lane.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let inv = 1.0 / (var + epsilon).sqrt();
        lane.mapv_inplace(|x| (x - mean) * inv);
    }
    Zip::from(out.rows_mut())
        .and(scale)
        .and(shift)
        .for_each(|mut row, &g, &b| row.mapv_inplace(|x| x * g + b));
    out
}

/// Exact GELU, `0.5·x·(1 + erf(x/√2))`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

pub fn gelu_inplace(values: &mut Array2<f64>) {
    values.mapv_inplace(gelu);
}

/// Widen an `f32` tensor to `f64` in the given shape.
pub(crate) fn widen3(data: &[f32], shape: (usize, usize, usize)) -> Array3<f64> {
    Array3::from_shape_vec(shape, data.iter().map(|&v| f64::from(v)).collect())
        .expect("shape validated at load")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn identity_kernel_is_identity() {
        let input = array![[1.0, -2.0, 3.0, 4.5], [0.5, 0.0, -1.0, 2.0]];
        let mut weight = Array3::zeros((2, 2, 1));
        weight[[0, 0, 0]] = 1.0;
        weight[[1, 1, 0]] = 1.0;
        let out = conv1d(input.view(), weight.view(), None, 1).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn conv_rejects_short_input() {
        let input = Array2::<f64>::zeros((1, 3));
        let weight = Array3::<f64>::zeros((1, 1, 4));
        assert_eq!(
            conv1d(input.view(), weight.view(), None, 1),
            Err(EncodeError::InputTooShort { needed: 4, got: 3 })
        );
    }

    #[test]
    fn constant_input_normalizes_to_shift() {
        let input = Array2::from_elem((3, 7), 2.5);
        let ones = Array1::ones(3);
        let zeros = Array1::zeros(3);
        let out = normalize(
            input.view(),
            NormKind::GroupPerChannel,
            ones.view(),
            zeros.view(),
            1e-5,
        );
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn none_mode_is_identity() {
        let input = array![[1.0, 2.0], [3.0, -4.0]];
        let out = normalize(
            input.view(),
            NormKind::None,
            Array1::zeros(2).view(),
            Array1::zeros(2).view(),
            1e-5,
        );
        assert_eq!(out, input);
    }

    #[test]
    fn gelu_limits() {
        assert_eq!(gelu(0.0), 0.0);
        assert!((gelu(10.0) - 10.0).abs() < 1e-6);
        assert!(gelu(-10.0).abs() < 1e-6);
        // Φ(1) = 0.841344746...
        assert!((gelu(1.0) - 0.841_344_746_068_543).abs() < 1e-12);
    }
}
