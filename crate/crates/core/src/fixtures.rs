//! Seeded random-weight encoders for tests and examples.
//!
//! These share the real encoders' layer geometry (kernels 10,3,3,3,3,2,2 and
//! strides 5,2,2,2,2,2,2) with a configurable channel width, so every
//! shape-level property can be checked without pretrained checkpoints.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::encoder::{
    conv_bias_name, conv_weight_name, norm_bias_name, norm_weight_name, EncoderModel, LayerConfig,
    NormKind, Tensor,
};

pub const STANDARD_KERNELS: [usize; 7] = [10, 3, 3, 3, 3, 2, 2];
pub const STANDARD_STRIDES: [usize; 7] = [5, 2, 2, 2, 2, 2, 2];

/// Normalization layout of the two pretrained families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureStyle {
    /// Group norm on layer 0 only, no conv bias, raw input.
    Base,
    /// Layer norm on every layer, conv bias, z-normalized input.
    Large,
}

pub fn standard_layers(channels: usize, style: FixtureStyle) -> Vec<LayerConfig> {
    STANDARD_KERNELS
        .iter()
        .zip(STANDARD_STRIDES)
        .enumerate()
        .map(|(i, (&kernel, stride))| LayerConfig {
            in_channels: if i == 0 { 1 } else { channels },
            out_channels: channels,
            kernel,
            stride,
            has_bias: style == FixtureStyle::Large,
            norm: match (style, i) {
                (FixtureStyle::Base, 0) => NormKind::GroupPerChannel,
                (FixtureStyle::Base, _) => NormKind::None,
                (FixtureStyle::Large, _) => NormKind::LayerOverChannels,
            },
        })
        .collect()
}

/// Random tensors for an arbitrary layer stack.
pub fn random_model_with(
    name: &str,
    layers: Vec<LayerConfig>,
    input_normalize: bool,
    seed: u64,
) -> EncoderModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small = Normal::new(0.0, 0.1).expect("valid normal");
    let mut tensors = BTreeMap::new();
    for (i, l) in layers.iter().enumerate() {
        let fan_in = (l.in_channels * l.kernel) as f64;
        let w = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("valid normal");
        let n = l.out_channels * l.in_channels * l.kernel;
        tensors.insert(
            conv_weight_name(i),
            Tensor::new(
                vec![l.out_channels, l.in_channels, l.kernel],
                (0..n).map(|_| w.sample(&mut rng) as f32).collect(),
            ),
        );
        if l.has_bias {
            tensors.insert(
                conv_bias_name(i),
                Tensor::new(
                    vec![l.out_channels],
                    (0..l.out_channels)
                        .map(|_| small.sample(&mut rng) as f32)
                        .collect(),
                ),
            );
        }
        if l.norm != NormKind::None {
            tensors.insert(
                norm_weight_name(i),
                Tensor::new(
                    vec![l.out_channels],
                    (0..l.out_channels)
                        .map(|_| (1.0 + small.sample(&mut rng)) as f32)
                        .collect(),
                ),
            );
            tensors.insert(
                norm_bias_name(i),
                Tensor::new(
                    vec![l.out_channels],
                    (0..l.out_channels)
                        .map(|_| small.sample(&mut rng) as f32)
                        .collect(),
                ),
            );
        }
    }
    EncoderModel::new(name, input_normalize, 1e-5, layers, tensors)
        .expect("fixture layers are consistent")
}

/// Seven-layer random model with the standard 400/320 geometry.
pub fn random_model(style: FixtureStyle, channels: usize, seed: u64) -> EncoderModel {
    let name = match style {
        FixtureStyle::Base => format!("random-base-c{channels}-s{seed}"),
        FixtureStyle::Large => format!("random-large-c{channels}-s{seed}"),
    };
    random_model_with(
        &name,
        standard_layers(channels, style),
        style == FixtureStyle::Large,
        seed,
    )
}

/// Load the model named by the first command-line argument, or fall back to a
/// seeded Base-style random model of the given width.
pub fn model_from_args_or_random(
    channels: usize,
    seed: u64,
) -> Result<EncoderModel, crate::encoder::ModelError> {
    match std::env::args_os().nth(1) {
        Some(path) => crate::encoder::load_model(path),
        None => Ok(random_model(FixtureStyle::Base, channels, seed)),
    }
}
