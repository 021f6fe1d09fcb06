mod common;

use common::*;
use ndarray::{s, Array1, Array2, Array3};
use sineprobe::encoder::format::{self, from_bytes, load_model, to_bytes, ModelError};
use sineprobe::encoder::{self, conv1d, normalize, output_steps, NormKind};
use sineprobe::fixtures::{random_model, random_model_with, standard_layers, FixtureStyle};
use sineprobe::signalgen::{synth, SignalSpec, Waveform};

#[test]
fn conv_matches_triple_loop() {
    for seed in 0..10 {
        let model = random_small_model(seed);
        let l = model.layers()[0];
        let x = random_signal(333, seed + 100);
        let w: Vec<f64> = model.tensors()["conv.0.weight"]
            .data
            .iter()
            .map(|&v| v as f64)
            .collect();
        let bias: Option<Vec<f64>> = l.has_bias.then(|| {
            model.tensors()["conv.0.bias"]
                .data
                .iter()
                .map(|&v| v as f64)
                .collect()
        });
        let expect = naive_conv(&vec![x.clone()], &w, bias.as_deref(), &l);
        let wv = Array3::from_shape_vec((l.out_channels, 1, l.kernel), w).unwrap();
        let bv = bias.map(Array1::from);
        let input = Array2::from_shape_vec((1, x.len()), x).unwrap();
        let got = conv1d(
            input.view(),
            wv.view(),
            bv.as_ref().map(|b| b.view()),
            l.stride,
        )
        .unwrap();
        let expect = Array2::from_shape_fn(got.dim(), |(o, t)| expect[o][t]);
        assert!(max_rel_err(&got, &expect) < 1e-10, "seed {seed}");
    }
}

#[test]
fn layer_norm_standardizes_each_step() {
    let x = Array2::from_shape_fn((16, 40), |(c, t)| {
        ((c * 7 + t * 3) % 11) as f64 - 4.0 + c as f64
    });
    let ones = Array1::ones(16);
    let zeros = Array1::zeros(16);
    let y = normalize(
        x.view(),
        NormKind::LayerOverChannels,
        ones.view(),
        zeros.view(),
        0.0,
    );
    for t in 0..40 {
        let col = y.column(t);
        let mean = col.sum() / 16.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 16.0;
        assert!(mean.abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);
    }
    let g = normalize(
        x.view(),
        NormKind::GroupPerChannel,
        ones.view(),
        zeros.view(),
        0.0,
    );
    for c in 0..16 {
        let row = g.row(c);
        assert!((row.sum() / 40.0).abs() < 1e-10);
    }
}

#[test]
fn forward_matches_compositional_oracle() {
    for seed in 0..12 {
        let model = random_small_model(seed);
        let len = 200 + (seed as usize * 137) % 1800;
        let x = random_signal(len, seed);
        let got = model.forward(&x).unwrap();
        assert!(
            max_rel_err(&got, &naive_forward(&model, &x)) < 1e-10,
            "seed {seed}"
        );
    }
    for style in [FixtureStyle::Base, FixtureStyle::Large] {
        let model = random_model(style, 6, 3);
        let x = random_signal(2000, 8);
        assert!(max_rel_err(&model.forward(&x).unwrap(), &naive_forward(&model, &x)) < 1e-10);
    }
}

#[test]
fn length_law() {
    let model = random_model(FixtureStyle::Base, 4, 0);
    assert_eq!((model.window(), model.stride()), (400, 320));
    for (len, steps) in [(400, 1), (401, 1), (720, 2), (16000, 49)] {
        let out = model.forward(&random_signal(len, len as u64)).unwrap();
        assert_eq!(out.dim(), (steps, 4), "L = {len}");
        assert_eq!(output_steps(len, 400, 320), Some(steps));
    }
    assert!(matches!(
        model.forward(&random_signal(399, 0)),
        Err(encoder::EncodeError::InputTooShort {
            needed: 400,
            got: 399
        })
    ));
}

#[test]
fn time_shift_covariance() {
    let layers = standard_layers(6, FixtureStyle::Large);
    let model = random_model_with("shift", layers, false, 4);
    let x = random_signal(16000 + 320, 21);
    let full = model.forward(&x).unwrap();
    let shifted = model.forward(&x[320..]).unwrap();
    let tail = full.slice(s![1.., ..]).to_owned();
    assert_eq!(tail.dim(), shifted.dim());
    assert!(max_abs_err(&shifted, &tail) < 1e-6);
}

#[test]
fn normalized_input_is_bias_invariant() {
    let model = random_model(FixtureStyle::Large, 8, 5);
    for f0 in [100.0, 350.0] {
        let plain =
            encoder::encode(&model, &synth(&SignalSpec::sines(&[(f0, 0.5)])).unwrap()).unwrap();
        for b in [-0.5, 0.25, 0.5] {
            let spec = SignalSpec::sines(&[(f0, 0.5)]).with_bias(b);
            let biased = encoder::encode(&model, &synth(&spec).unwrap()).unwrap();
            assert!(max_abs_err(&biased.matrix, &plain.matrix) < 1e-6);
        }
    }
}

#[test]
fn sample_rate_is_checked() {
    let model = random_model(FixtureStyle::Base, 4, 0);
    let wave = Waveform {
        samples: vec![0.1; 1000],
        sample_rate: 8000.0,
    };
    assert!(matches!(
        encoder::encode(&model, &wave),
        Err(encoder::EncodeError::SampleRateMismatch { .. })
    ));
}

#[test]
fn committed_fixtures_match_their_seeds() {
    for (file, style, seed) in [
        ("tiny_base.w2vfe", FixtureStyle::Base, 1),
        ("tiny_large.w2vfe", FixtureStyle::Large, 2),
    ] {
        let bytes = std::fs::read(fixture_path(file)).unwrap();
        let regenerated = random_model(style, 8, seed);
        assert_eq!(
            bytes,
            to_bytes(&regenerated),
            "{file} is stale; run the make_fixtures example"
        );
        let loaded = load_model(fixture_path(file)).unwrap();
        assert_eq!(
            format::tensor_checksums(&loaded),
            format::tensor_checksums(&regenerated)
        );
        assert_eq!(loaded.input_normalize(), style == FixtureStyle::Large);
    }
}

#[test]
fn round_trip_preserves_outputs() {
    let model = random_model(FixtureStyle::Large, 5, 77);
    let back = from_bytes(&to_bytes(&model)).unwrap();
    let x = random_signal(1200, 1);
    assert_eq!(model.forward(&x).unwrap(), back.forward(&x).unwrap());
}

fn corrupt(f: impl FnOnce(&mut Vec<u8>)) -> ModelError {
    let mut bytes = to_bytes(&random_model(FixtureStyle::Base, 3, 0));
    f(&mut bytes);
    from_bytes(&bytes).unwrap_err()
}

fn header_len(bytes: &[u8]) -> usize {
    u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize
}

fn edit_header(bytes: &mut Vec<u8>, edit: impl FnOnce(&mut serde_json::Value)) {
    let h = header_len(bytes);
    let mut json: serde_json::Value = serde_json::from_slice(&bytes[12..12 + h]).unwrap();
    edit(&mut json);
    let text = serde_json::to_vec(&json).unwrap();
    let data = bytes[12 + h..].to_vec();
    bytes.truncate(8);
    bytes.extend_from_slice(&(text.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&text);
    bytes.extend_from_slice(&data);
}

#[test]
fn malformed_files_are_rejected_with_codes() {
    assert_eq!(corrupt(|b| b[0] = b'X').code(), "bad_magic");
    assert_eq!(corrupt(|b| b[7] = b'9').code(), "unsupported_version");
    assert_eq!(
        corrupt(|b| b.truncate(b.len() - 4)).code(),
        "truncated_data"
    );
    assert_eq!(corrupt(|b| b.truncate(10)).code(), "truncated_data");
    assert_eq!(corrupt(|b| b[12] = b'!').code(), "malformed_header");
    let e = corrupt(|b| {
        edit_header(b, |h| {
            h["tensors"][0]["shape"] = serde_json::json!([3, 1, 9])
        })
    });
    assert_eq!(e.code(), "shape_mismatch");
    let e = corrupt(|b| {
        edit_header(b, |h| {
            h["tensors"].as_array_mut().unwrap().remove(0);
        })
    });
    assert_eq!(e.code(), "malformed_header");
    let e = corrupt(|b| edit_header(b, |h| h["tensors"][0]["dtype"] = "f16".into()));
    assert_eq!(e.code(), "malformed_header");
    let missing = load_model("/definitely/not/here.w2vfe").unwrap_err();
    assert_eq!(missing.code(), "file_not_found");
}
