//! Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//!
//! Criteria marked `(weights: ...)` need exported pretrained encoders named
//! `base.w2vfe`, `large.w2vfe` and `xlsr.w2vfe` in `$SINEPROBE_MODEL_DIR`.
//! They are skipped when the files are absent, unless
//! `SINEPROBE_REQUIRE_WEIGHTS=1`, which turns a skip into a failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sineprobe::experiments::{
    run_amplitude_grid, run_bias_invariance, run_cka_compare, run_f0_sweep, run_formant_grid,
    run_metric_contrast, run_temporal_consistency,
};
use sineprobe::fixtures::{random_model, FixtureStyle};
use sineprobe::metrics::{cosine_similarity, linear_cka, mds_2d, time_average, DistanceMatrix};
use sineprobe::signalgen::{burst_overlap_steps, synth, SignalSpec};
use sineprobe::{encode, EncoderModel};

type Criterion = (&'static str, fn() -> Outcome);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn length_law() -> Outcome {
    let model = random_model(FixtureStyle::Base, 8, 0);
    let mut seen = Vec::new();
    for len in [400usize, 401, 720, 16000] {
        let t = model
            .forward(&random_signal(len, len as u64))
            .unwrap()
            .nrows();
        let expect = (len - 400) / 320 + 1;
        if t != expect {
            return Fail(format!("L={len}: T={t}, expected {expect}"));
        }
        seen.push(format!("{len}->{t}"));
    }
    Pass(seen.join(" "))
}

fn kernel_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..40 {
        let model = random_small_model(seed);
        let len = ChaCha8Rng::seed_from_u64(seed).gen_range(64..=2000);
        let x = random_signal(len, seed + 1000);
        worst = worst.max(max_rel_err(
            &model.forward(&x).unwrap(),
            &naive_forward(&model, &x),
        ));
    }
    for (style, seed) in [(FixtureStyle::Base, 1), (FixtureStyle::Large, 2)] {
        let model = random_model(style, 6, seed);
        let x = random_signal(2000, seed);
        worst = worst.max(max_rel_err(
            &model.forward(&x).unwrap(),
            &naive_forward(&model, &x),
        ));
    }
    check(
        worst <= 1e-10,
        format!("max relative error {worst:.2e} (tol 1e-10)"),
    )
}

fn cka_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut oracle_err, mut orth_err, mut scale_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let n = rng.gen_range(3..=30);
        let (p, q) = (rng.gen_range(1..=10), rng.gen_range(1..=10));
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((n, q), |_| rng.gen_range(-1.0..1.0));
        let base = linear_cka(x.view(), y.view()).unwrap();
        oracle_err = oracle_err.max((base - hsic_cka(&x, &y)).abs());

        let seed: Vec<f64> = (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let qm = DMatrix::from_vec(p, p, seed).qr().q();
        let rotation = Array2::from_shape_fn((p, p), |(i, j)| qm[(i, j)]);
        let rotated = x.dot(&rotation);
        orth_err = orth_err.max((linear_cka(rotated.view(), y.view()).unwrap() - base).abs());

        let c = rng.gen_range(0.01..100.0);
        let scaled = &y * c;
        scale_err = scale_err.max((linear_cka(x.view(), scaled.view()).unwrap() - base).abs());
    }
    let worst = oracle_err.max(orth_err).max(scale_err);
    check(
        worst <= 1e-9,
        format!("oracle {oracle_err:.1e}, orthogonal {orth_err:.1e}, scaling {scale_err:.1e} (tol 1e-9)"),
    )
}

fn planar(points: &Array2<f64>) -> DistanceMatrix {
    let n = points.nrows();
    let v = Array2::from_shape_fn((n, n), |(i, j)| {
        ((points[[i, 0]] - points[[j, 0]]).powi(2) + (points[[i, 1]] - points[[j, 1]]).powi(2))
            .sqrt()
    });
    let v = (&v + &v.t()) * 0.5;
    DistanceMatrix::new((0..n).map(|i| i.to_string()).collect(), v).unwrap()
}

fn mds_recovery() -> Outcome {
    let square = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let e_square = distance_preservation_error(&mds_2d(&planar(&square)).unwrap(), &square);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pts = Array2::from_shape_fn((10, 2), |_| rng.gen_range(-0.7..0.7));
    let e_random = distance_preservation_error(&mds_2d(&planar(&pts)).unwrap(), &pts);
    check(
        e_square.max(e_random) <= 1e-8,
        format!("square {e_square:.1e}, 10 random {e_random:.1e} (tol 1e-8)"),
    )
}

fn burst_overlap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000 {
        let window = rng.gen_range(1..=600);
        let stride = rng.gen_range(1..=window.max(2));
        let total = rng.gen_range(0..=20_000);
        let start = rng.gen_range(0..=total.max(1));
        let len = rng.gen_range(0..=(total - start.min(total)).max(1));
        let got = burst_overlap_steps(total, start, len, window, stride);
        let want = brute_overlap(total, start, len, window, stride);
        if got != want {
            return Fail(format!(
                "case {case}: total={total} start={start} len={len} window={window} stride={stride}"
            ));
        }
    }
    Pass("1000 randomized cases exact".into())
}

fn analytic_bias_invariance() -> Outcome {
    let model = random_model(FixtureStyle::Large, 16, 7);
    let mut worst: f64 = 0.0;
    for f0 in [100.0, 200.0, 300.0, 400.0, 500.0] {
        let reference = mean_of(&model, SignalSpec::sines(&[(f0, 0.5)]));
        for b in [-0.5, -0.25, 0.0, 0.25, 0.5] {
            let biased = mean_of(&model, SignalSpec::sines(&[(f0, 0.5)]).with_bias(b));
            let s = cosine_similarity(biased.view(), reference.view()).unwrap();
            worst = worst.max((1.0 - s).abs());
        }
    }
    check(
        worst <= 1e-6,
        format!("max |1 - S_c| {worst:.1e} (tol 1e-6)"),
    )
}

fn mean_of(model: &EncoderModel, spec: SignalSpec) -> ndarray::Array1<f64> {
    time_average(&encode(model, &synth(&spec).unwrap()).unwrap()).unwrap()
}

fn require_weights() -> bool {
    std::env::var("SINEPROBE_REQUIRE_WEIGHTS").is_ok_and(|v| v == "1")
}

fn missing(names: &[&str]) -> Outcome {
    let msg = format!(
        "{} not found in ${}",
        names.join(", "),
        sineprobe::cli::MODEL_DIR_ENV
    );
    if require_weights() {
        Fail(msg)
    } else {
        Skip(msg)
    }
}

fn with_base(f: impl FnOnce(&EncoderModel) -> Outcome) -> Outcome {
    match load_pretrained("base.w2vfe") {
        Some(model) => f(&model),
        None => missing(&["base.w2vfe"]),
    }
}

fn temporal_consistency() -> Outcome {
    with_base(|m| {
        let r = run_temporal_consistency(m).unwrap();
        let min = r.number("min_entry").unwrap();
        let asym = r.number("symmetry_residual").unwrap();
        check(
            min >= 0.99 && asym <= 0.01,
            format!("min entry {min:.4} (>= 0.99), max|M-M^T| {asym:.4} (<= 0.01)"),
        )
    })
}

fn bias_table() -> Outcome {
    with_base(|m| {
        let min = run_bias_invariance(m)
            .unwrap()
            .number("min_similarity")
            .unwrap();
        check(min >= 0.99, format!("min similarity {min:.4} (>= 0.99)"))
    })
}

fn f0_sweep() -> Outcome {
    with_base(|m| {
        let r = run_f0_sweep(m).unwrap();
        let mono = r.number("monotone_fraction").unwrap();
        let r2 = r.number("linearity_r2").unwrap();
        check(
            mono >= 0.95 && r2 >= 0.9,
            format!("monotone_fraction {mono:.4} (>= 0.95), linearity_r2 {r2:.4} (>= 0.9)"),
        )
    })
}

fn metric_contrast() -> Outcome {
    with_base(|m| {
        let r = run_metric_contrast(m).unwrap();
        let enc = r.summary["encoder"]["ratio"].as_f64().unwrap_or(f64::NAN);
        let spec = r.summary["spectrogram"]["ratio"]
            .as_f64()
            .unwrap_or(f64::NAN);
        check(
            enc >= 2.0 * spec,
            format!("encoder ratio {enc:.3}, spectrogram ratio {spec:.3} (need >= 2x)"),
        )
    })
}

fn grid_structure() -> Outcome {
    with_base(|m| {
        let formant = run_formant_grid(m, Some(120.0))
            .unwrap()
            .number("grid_statistic");
        let amplitude = run_amplitude_grid(m).unwrap().number("grid_statistic");
        let (f, a) = (formant.unwrap_or(f64::NAN), amplitude.unwrap_or(f64::NAN));
        check(
            f > 1.0 && a > 1.0,
            format!("formant {f:.3}, amplitude {a:.3} (> 1)"),
        )
    })
}

fn cka_ordering() -> Outcome {
    let names = ["base.w2vfe", "large.w2vfe", "xlsr.w2vfe"];
    let models: Option<Vec<_>> = names.iter().map(|n| load_pretrained(n)).collect();
    let Some(models) = models else {
        return missing(&names);
    };
    let m = run_cka_compare(&models).unwrap().matrix.unwrap().values;
    let (base_large, large_xlsr) = (m[[0, 1]], m[[1, 2]]);
    check(
        base_large > large_xlsr,
        format!("CKA(Base,Large) {base_large:.4} vs CKA(Large,XLS-R) {large_xlsr:.4}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("length_law", length_law),
        ("kernel_oracles", kernel_oracles),
        ("cka_oracle_and_invariance", cka_oracle),
        ("mds_planar_recovery", mds_recovery),
        ("burst_overlap_brute_force", burst_overlap),
        ("analytic_bias_invariance", analytic_bias_invariance),
        ("base_temporal_consistency", temporal_consistency),
        ("base_bias_table", bias_table),
        ("base_f0_sweep_ordering", f0_sweep),
        ("base_metric_contrast", metric_contrast),
        ("base_grid_statistic", grid_structure),
        ("cka_ordering_base_large_xlsr", cka_ordering),
    ];
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for (name, criterion) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Fail(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Pass(d) => {
                passed += 1;
                ("PASS", d)
            }
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => {
                skipped += 1;
                ("SKIP", d)
            }
        };
        println!("{tag} {name:<30} {detail} [{secs:.2}s]");
    }
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    if failed > 0 {
        std::process::exit(1);
    }
}
