//! Independent reference implementations used by the integration and
//! acceptance tests. Everything here is written with plain loops over
//! `Vec`s and shares no code with the library's numerical paths.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sineprobe::encoder::{self, EncoderModel, LayerConfig, NormKind};
use sineprobe::fixtures::random_model_with;

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Largest `|a - b| / max(1, |b|)` over two equally shaped matrices.
pub fn max_rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn max_abs_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

type Signal = Vec<Vec<f64>>; // channel-major

fn tensor(model: &EncoderModel, name: &str) -> Vec<f64> {
    model.tensors()[name]
        .data
        .iter()
        .map(|&v| v as f64)
        .collect()
}

pub fn naive_conv(x: &Signal, w: &[f64], bias: Option<&[f64]>, l: &LayerConfig) -> Signal {
    let len = x[0].len();
    let out_len = (len - l.kernel) / l.stride + 1;
    let mut y = vec![vec![0.0; out_len]; l.out_channels];
    for o in 0..l.out_channels {
        for t in 0..out_len {
            let mut acc = bias.map_or(0.0, |b| b[o]);
            for i in 0..l.in_channels {
                for k in 0..l.kernel {
                    acc += w[(o * l.in_channels + i) * l.kernel + k] * x[i][t * l.stride + k];
                }
            }
            y[o][t] = acc;
        }
    }
    y
}

fn standardize(values: &mut [f64], eps: f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    for v in values.iter_mut() {
        *v = (*v - mean) / (var + eps).sqrt();
    }
}

pub fn naive_norm(y: &mut Signal, kind: NormKind, g: &[f64], b: &[f64], eps: f64) {
    match kind {
        NormKind::None => return,
        NormKind::GroupPerChannel => {
            for row in y.iter_mut() {
                standardize(row, eps);
            }
        }
        NormKind::LayerOverChannels => {
            for t in 0..y[0].len() {
                let mut col: Vec<f64> = y.iter().map(|r| r[t]).collect();
                standardize(&mut col, eps);
                for (c, v) in col.into_iter().enumerate() {
                    y[c][t] = v;
                }
            }
        }
    }
    for (c, row) in y.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v = *v * g[c] + b[c];
        }
    }
}

pub fn naive_gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Layer-by-layer forward pass; returns `T × D`.
pub fn naive_forward(model: &EncoderModel, samples: &[f64]) -> Array2<f64> {
    let mut input = samples.to_vec();
    if model.input_normalize() {
        standardize(&mut input, 1e-7);
    }
    let mut x: Signal = vec![input];
    for (i, l) in model.layers().iter().enumerate() {
        let w = tensor(model, &format!("conv.{i}.weight"));
        let bias = l.has_bias.then(|| tensor(model, &format!("conv.{i}.bias")));
        let mut y = naive_conv(&x, &w, bias.as_deref(), l);
        if l.norm != NormKind::None {
            let g = tensor(model, &format!("norm.{i}.weight"));
            let b = tensor(model, &format!("norm.{i}.bias"));
            naive_norm(&mut y, l.norm, &g, &b, model.epsilon());
        }
        for row in y.iter_mut() {
            for v in row.iter_mut() {
                *v = naive_gelu(*v);
            }
        }
        x = y;
    }
    Array2::from_shape_fn((x[0].len(), x.len()), |(t, c)| x[c][t])
}

/// A random 2–3 layer stack with mixed kernels, strides, norms and biases.
pub fn random_small_model(seed: u64) -> EncoderModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.gen_range(2..=3);
    let mut layers = Vec::new();
    let mut channels = 1;
    for _ in 0..depth {
        let out = rng.gen_range(2..=6);
        let norm = match rng.gen_range(0..3) {
            0 => NormKind::GroupPerChannel,
            1 => NormKind::LayerOverChannels,
            _ => NormKind::None,
        };
        layers.push(LayerConfig {
            in_channels: channels,
            out_channels: out,
            kernel: rng.gen_range(1..=6),
            stride: rng.gen_range(1..=4),
            has_bias: rng.gen_bool(0.5),
            norm,
        });
        channels = out;
    }
    let input_normalize = rng.gen_bool(0.5);
    random_model_with(&format!("small-{seed}"), layers, input_normalize, seed)
}

pub fn random_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// CKA through centered Gram matrices: `HSIC(K, L) / √(HSIC(K, K) HSIC(L, L))`
/// with `K = XXᵀ`, `L = YYᵀ`, `HSIC(K, L) = tr(K H L H)`.
pub fn hsic_cka(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let n = x.nrows();
    let gram = |m: &Array2<f64>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..m.ncols()).map(|k| m[[i, k]] * m[[j, k]]).sum())
                    .collect()
            })
            .collect()
    };
    let center = |g: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let row: Vec<f64> = g.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
        let all = row.iter().sum::<f64>() / n as f64;
        (0..n)
            .map(|i| (0..n).map(|j| g[i][j] - row[i] - row[j] + all).collect())
            .collect()
    };
    let k = center(gram(x));
    let l = center(gram(y));
    let hsic = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> f64 {
        (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * b[j][i]).sum::<f64>())
            .sum()
    };
    hsic(&k, &l) / (hsic(&k, &k) * hsic(&l, &l)).sqrt()
}

/// Magnitude DFT of Hann-windowed frames, summed directly.
pub fn naive_spectrogram(samples: &[f64], window: usize, hop: usize) -> Array2<f64> {
    let frames = (samples.len() - window) / hop + 1;
    let bins = window / 2 + 1;
    let tau = 2.0 * std::f64::consts::PI;
    Array2::from_shape_fn((frames, bins), |(t, k)| {
        let (mut re, mut im) = (0.0, 0.0);
        for n in 0..window {
            let w = 0.5 * (1.0 - (tau * n as f64 / window as f64).cos());
            let x = samples[t * hop + n] * w;
            let phase = tau * (k * n) as f64 / window as f64;
            re += x * phase.cos();
            im -= x * phase.sin();
        }
        (re * re + im * im).sqrt()
    })
}

/// Steps whose window shares at least one sample with the burst, by scanning.
pub fn brute_overlap(
    total: usize,
    start: usize,
    len: usize,
    window: usize,
    stride: usize,
) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    if total < window {
        return out;
    }
    let steps = (total - window) / stride + 1;
    for i in 0..steps {
        let lo = i * stride;
        if (lo..lo + window).any(|s| s >= start && s < start + len) {
            out.insert(i);
        }
    }
    out
}

/// `(mean non-adjacent, mean adjacent)` by coordinate comparison.
pub fn brute_grid_means(rows: usize, cols: usize, d: &Array2<f64>) -> (f64, f64) {
    let (mut adj, mut na, mut non, mut nn) = (0.0, 0usize, 0.0, 0usize);
    let n = rows * cols;
    for a in 0..n {
        for b in a + 1..n {
            let l1 = (a / cols).abs_diff(b / cols) + (a % cols).abs_diff(b % cols);
            if l1 == 1 {
                adj += d[[a, b]];
                na += 1;
            } else {
                non += d[[a, b]];
                nn += 1;
            }
        }
    }
    (non / nn as f64, adj / na as f64)
}

/// Largest error between pairwise Euclidean distances of two point sets.
pub fn distance_preservation_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let dist = |m: &Array2<f64>, i: usize, j: usize| -> f64 {
        (0..m.ncols())
            .map(|k| (m[[i, k]] - m[[j, k]]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((dist(a, i, j) - dist(b, i, j)).abs());
        }
    }
    worst
}

/// Pretrained weight files are looked up in `$SINEPROBE_MODEL_DIR`.
pub fn pretrained(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(sineprobe::cli::MODEL_DIR_ENV)?;
    let path = Path::new(&dir).join(name);
    path.exists().then_some(path)
}

pub fn load_pretrained(name: &str) -> Option<EncoderModel> {
    pretrained(name).map(|p| encoder::load_model(p).expect("pretrained model loads"))
}
