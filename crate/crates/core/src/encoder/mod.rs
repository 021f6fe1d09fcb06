//! Convolutional feature encoder: model container and forward pass.
//!
//! A model is a stack of `conv1d → normalize → gelu` blocks read from a
//! W2VFE weight file (see [`format`]). The number of layers and their
//! norms come from the file header, so Base-style (group norm on the first
//! layer only) and Large-style (layer norm everywhere, z-normalized input)
//! checkpoints run through the same engine.

pub mod format;
pub mod kernels;

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Array3, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signalgen::{SignalSpec, Waveform, DEFAULT_SAMPLE_RATE};

pub use format::{load_model, ModelError};
pub use kernels::{conv1d, gelu, normalize, NormKind};

/// Variance floor used when z-normalizing raw input audio.
pub const INPUT_NORM_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EncodeError {
    #[error("input has {got} samples, at least {needed} required")]
    InputTooShort { needed: usize, got: usize },
    #[error("encoder expects {expected} Hz input, got {got} Hz")]
    SampleRateMismatch { expected: f64, got: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub has_bias: bool,
    pub norm: NormKind,
}

/// Dense `f32` tensor as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

pub fn conv_weight_name(layer: usize) -> String {
    format!("conv.{layer}.weight")
}
pub fn conv_bias_name(layer: usize) -> String {
    format!("conv.{layer}.bias")
}
pub fn norm_weight_name(layer: usize) -> String {
    format!("norm.{layer}.weight")
}
pub fn norm_bias_name(layer: usize) -> String {
    format!("norm.{layer}.bias")
}

/// Tensors a layer stack requires, with their shapes.
pub fn required_tensors(layers: &[LayerConfig]) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    for (i, l) in layers.iter().enumerate() {
        out.push((
            conv_weight_name(i),
            vec![l.out_channels, l.in_channels, l.kernel],
        ));
        if l.has_bias {
            out.push((conv_bias_name(i), vec![l.out_channels]));
        }
        if l.norm != NormKind::None {
            out.push((norm_weight_name(i), vec![l.out_channels]));
            out.push((norm_bias_name(i), vec![l.out_channels]));
        }
    }
    out
}

/// Receptive field and hop of a layer stack, in input samples.
pub fn receptive_field(layers: &[LayerConfig]) -> (usize, usize) {
    let mut window = 1;
    let mut stride = 1;
    for l in layers {
        window += (l.kernel - 1) * stride;
        stride *= l.stride;
    }
    (window, stride)
}

/// Output step count for an input of `len` samples; `None` if shorter than the window.
pub fn output_steps(len: usize, window: usize, stride: usize) -> Option<usize> {
    (len >= window).then(|| (len - window) / stride + 1)
}

#[derive(Debug, Clone)]
struct PreparedLayer {
    config: LayerConfig,
    weight: Array3<f64>,
    bias: Option<Array1<f64>>,
    scale: Array1<f64>,
    shift: Array1<f64>,
}

/// Parsed feature encoder. Immutable once built.
#[derive(Debug, Clone)]
pub struct EncoderModel {
    name: String,
    input_normalize: bool,
    epsilon: f64,
    layers: Vec<LayerConfig>,
    tensors: BTreeMap<String, Tensor>,
    prepared: Vec<PreparedLayer>,
    window: usize,
    stride: usize,
}

impl EncoderModel {
    /// Validate a layer stack against its tensors.
    pub fn new(
        name: impl Into<String>,
        input_normalize: bool,
        epsilon: f64,
        layers: Vec<LayerConfig>,
        tensors: BTreeMap<String, Tensor>,
    ) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(ModelError::MalformedHeader {
                field: "layers".into(),
                reason: "at least one layer required".into(),
            });
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ModelError::MalformedHeader {
                field: "epsilon".into(),
                reason: format!("must be positive and finite, got {epsilon}"),
            });
        }
        for (i, l) in layers.iter().enumerate() {
            for (what, v) in [
                ("in_channels", l.in_channels),
                ("out_channels", l.out_channels),
                ("kernel", l.kernel),
                ("stride", l.stride),
            ] {
                if v == 0 {
                    return Err(ModelError::MalformedHeader {
                        field: format!("layers[{i}].{what}"),
                        reason: "must be at least 1".into(),
                    });
                }
            }
        }
        if layers[0].in_channels != 1 {
            return Err(ModelError::MalformedHeader {
                field: "layers[0].in_channels".into(),
                reason: format!("expected mono input (1), got {}", layers[0].in_channels),
            });
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_channels != pair[1].in_channels {
                return Err(ModelError::MalformedHeader {
                    field: format!("layers[{}].in_channels", i + 1),
                    reason: format!(
                        "expected {} to match previous out_channels, got {}",
                        pair[0].out_channels, pair[1].in_channels
                    ),
                });
            }
        }

        let required = required_tensors(&layers);
        for (name, shape) in &required {
            let tensor = tensors
                .get(name)
                .ok_or_else(|| ModelError::MalformedHeader {
                    field: "tensors".into(),
                    reason: format!("missing tensor {name}"),
                })?;
            if &tensor.shape != shape {
                return Err(ModelError::ShapeMismatch {
                    tensor: name.clone(),
                    expected: shape.clone(),
                    found: tensor.shape.clone(),
                });
            }
        }
        if let Some(extra) = tensors
            .keys()
            .find(|k| !required.iter().any(|(name, _)| name == *k))
        {
            return Err(ModelError::MalformedHeader {
                field: "tensors".into(),
                reason: format!("tensor {extra} is not referenced by any layer"),
            });
        }

        let widen1 = |name: &str| -> Array1<f64> {
            tensors[name].data.iter().map(|&v| f64::from(v)).collect()
        };
        let prepared = layers
            .iter()
            .enumerate()
            .map(|(i, &config)| PreparedLayer {
                config,
                weight: kernels::widen3(
                    &tensors[&conv_weight_name(i)].data,
                    (config.out_channels, config.in_channels, config.kernel),
                ),
                bias: config.has_bias.then(|| widen1(&conv_bias_name(i))),
                scale: if config.norm == NormKind::None {
                    Array1::ones(config.out_channels)
                } else {
                    widen1(&norm_weight_name(i))
                },
                shift: if config.norm == NormKind::None {
                    Array1::zeros(config.out_channels)
                } else {
                    widen1(&norm_bias_name(i))
                },
            })
            .collect();

        let (window, stride) = receptive_field(&layers);
        Ok(Self {
            name: name.into(),
            input_normalize,
            epsilon,
            layers,
            tensors,
            prepared,
            window,
            stride,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn input_normalize(&self) -> bool {
        self.input_normalize
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn layers(&self) -> &[LayerConfig] {
        &self.layers
    }
    pub fn tensors(&self) -> &BTreeMap<String, Tensor> {
        &self.tensors
    }
    /// Effective receptive field in samples.
    pub fn window(&self) -> usize {
        self.window
    }
    /// Effective hop in samples.
    pub fn stride(&self) -> usize {
        self.stride
    }
    /// Feature dimension of the output.
    pub fn feature_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_channels)
    }

    /// Run raw samples through the stack; returns `T × D`.
    pub fn forward(&self, samples: &[f64]) -> Result<Array2<f64>, EncodeError> {
        if samples.len() < self.window {
            return Err(EncodeError::InputTooShort {
                needed: self.window,
                got: samples.len(),
            });
        }
        let mut x = Array2::from_shape_vec((1, samples.len()), samples.to_vec())
            .expect("one row of samples");
        if self.input_normalize {
            z_normalize(x.row_mut(0).as_slice_mut().expect("contiguous"));
        }
        for layer in &self.prepared {
            let mut y = conv1d(
                x.view(),
                layer.weight.view(),
                layer.bias.as_ref().map(Array1::view),
                layer.config.stride,
            )?;
            if layer.config.norm != NormKind::None {
                y = normalize(
                    y.view(),
                    layer.config.norm,
                    layer.scale.view(),
                    layer.shift.view(),
                    self.epsilon,
                );
            }
            kernels::gelu_inplace(&mut y);
            x = y;
        }
        Ok(x.reversed_axes().as_standard_layout().into_owned())
    }
}

/// In-place `(x - mean) / sqrt(var + INPUT_NORM_EPSILON)`.
pub fn z_normalize(samples: &mut [f64]) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let inv = 1.0 / (var + INPUT_NORM_EPSILON).sqrt();
    for x in samples {
        *x = (*x - mean) * inv;
    }
}

/// Encoder output for one signal: `T` time steps by `D` features.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub matrix: Array2<f64>,
    pub source: Option<SignalSpec>,
    pub window: usize,
    pub stride: usize,
}

impl Representation {
    pub fn steps(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn features(&self) -> usize {
        self.matrix.ncols()
    }
    pub fn step(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }
    pub fn with_source(mut self, spec: SignalSpec) -> Self {
        self.source = Some(spec);
        self
    }
}

/// Encode a 16 kHz waveform.
pub fn encode(model: &EncoderModel, wave: &Waveform) -> Result<Representation, EncodeError> {
    if wave.sample_rate != DEFAULT_SAMPLE_RATE {
        return Err(EncodeError::SampleRateMismatch {
            expected: DEFAULT_SAMPLE_RATE,
            got: wave.sample_rate,
        });
    }
    let matrix = model.forward(&wave.samples)?;
    debug_assert_eq!(
        Some(matrix.nrows()),
        output_steps(wave.len(), model.window(), model.stride())
    );
    Ok(Representation {
        matrix,
        source: None,
        window: model.window(),
        stride: model.stride(),
    })
}
