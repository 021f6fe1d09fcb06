use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array1, Array2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::grid::{self, GridStatistic};
use super::{
    AmplitudeParams, BiasParams, BurstParams, ContrastParams, Experiment, ExperimentConfig,
    ExperimentError, ExperimentReport, FormantParams, LabeledMatrix, ModelInfo, SweepParams,
    ToneSetParams, MDS_MAX_POINTS,
};
use crate::encoder::{encode, EncoderModel, Representation};
use crate::metrics::{
    bark_scale, build_encoder_scale, consistency_matrix, cosine_distance, cosine_similarity,
    linear_cka, mds_2d, mel_scale, min_max_normalize, ordering_stats, spectrogram_features,
    time_average, DistanceMatrix,
};
use crate::signalgen::{burst_overlap_steps, synth, SignalSpec};
use crate::table::Table;

/// `n` evenly spaced values from `a` to `b` inclusive (`[a]` when `n == 1`).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Amplitudes whose squares are evenly spaced between `a_min²` and `a_max²`.
pub fn amplitude_levels(a_min: f64, a_max: f64, n: usize) -> Vec<f64> {
    let mut levels: Vec<f64> = linspace(a_min * a_min, a_max * a_max, n)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    if let Some(first) = levels.first_mut() {
        *first = a_min;
    }
    if n > 1 {
        levels[n - 1] = a_max;
    }
    levels
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    encoded: AtomicUsize,
}

#[derive(Default)]
struct Body {
    labels: Table,
    matrix: Option<LabeledMatrix>,
    neighbors: Option<Table>,
    scale: Option<Table>,
    projection: Option<Table>,
    steps: Option<Table>,
    summary: Map<String, Value>,
}

impl Ctx<'_> {
    fn encode_all(
        &self,
        model: &EncoderModel,
        specs: &[SignalSpec],
    ) -> Result<Vec<Representation>, ExperimentError> {
        let quantize = self.config.quantize_pcm16;
        let reps = specs
            .par_iter()
            .map(|spec| {
                let mut wave = synth(spec)?;
                if quantize {
                    wave = wave.quantize_pcm16();
                }
                Ok(encode(model, &wave)?.with_source(spec.clone()))
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        self.encoded.fetch_add(specs.len(), Ordering::Relaxed);
        Ok(reps)
    }

    fn encode_means(
        &self,
        model: &EncoderModel,
        specs: &[SignalSpec],
    ) -> Result<Vec<Array1<f64>>, ExperimentError> {
        let quantize = self.config.quantize_pcm16;
        let means = specs
            .par_iter()
            .map(|spec| {
                let mut wave = synth(spec)?;
                if quantize {
                    wave = wave.quantize_pcm16();
                }
                Ok(time_average(&encode(model, &wave)?)?)
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        self.encoded.fetch_add(specs.len(), Ordering::Relaxed);
        Ok(means)
    }
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidConfig(msg.into())
}

fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn grid_json(stat: &GridStatistic) -> Value {
    json!({
        "ratio": opt_num(stat.ratio),
        "mean_adjacent": opt_num(stat.mean_adjacent),
        "mean_nonadjacent": opt_num(stat.mean_nonadjacent),
        "adjacent_pairs": stat.adjacent_pairs,
        "nonadjacent_pairs": stat.nonadjacent_pairs,
        "sampled": stat.sampled,
    })
}

fn projection_table(labels: &[String], indices: &[usize], coords: &Array2<f64>) -> Table {
    let mut t = Table::with_header(&["label", "x", "y"]);
    for (row, &i) in indices.iter().enumerate() {
        t.push(vec![
            labels[i].as_str().into(),
            coords[[row, 0]].into(),
            coords[[row, 1]].into(),
        ]);
    }
    t
}

/// MDS over all points, or a seeded subsample when there are too many.
fn project(
    labels: &[String],
    vectors: &[Array1<f64>],
    full: Option<&DistanceMatrix>,
    seed: u64,
) -> Result<(Table, bool), ExperimentError> {
    let n = vectors.len();
    if n <= MDS_MAX_POINTS {
        let owned;
        let dist = match full {
            Some(d) => d,
            None => {
                owned = DistanceMatrix::cosine(labels.to_vec(), vectors)?;
                &owned
            }
        };
        let coords = mds_2d(dist)?;
        let all: Vec<usize> = (0..n).collect();
        return Ok((projection_table(labels, &all, &coords), false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, n, MDS_MAX_POINTS).into_vec();
    picked.sort_unstable();
    let sub_labels: Vec<String> = picked.iter().map(|&i| labels[i].clone()).collect();
    let sub_vecs: Vec<Array1<f64>> = picked.iter().map(|&i| vectors[i].clone()).collect();
    let coords = mds_2d(&DistanceMatrix::cosine(sub_labels, &sub_vecs)?)?;
    Ok((projection_table(labels, &picked, &coords), true))
}

fn neighbor_table(
    labels: &[String],
    vectors: &[Array1<f64>],
    pairs: &[(usize, usize)],
) -> Result<Table, ExperimentError> {
    let mut t = Table::with_header(&["a", "b", "distance"]);
    for &(i, j) in pairs {
        t.push(vec![
            labels[i].as_str().into(),
            labels[j].as_str().into(),
            cosine_distance(vectors[i].view(), vectors[j].view())?.into(),
        ]);
    }
    Ok(t)
}

fn hz(f: f64) -> String {
    format!("{f}Hz")
}

pub(super) fn execute(
    config: &ExperimentConfig,
    models: &[EncoderModel],
    infos: Vec<ModelInfo>,
) -> Result<ExperimentReport, ExperimentError> {
    let (min, max) = config.experiment.model_count();
    if models.len() < min || models.len() > max {
        return Err(invalid(format!(
            "{} needs {} model(s), got {}",
            config.experiment.kind(),
            if min == max {
                min.to_string()
            } else {
                format!("at least {min}")
            },
            models.len()
        )));
    }
    let ctx = Ctx {
        config,
        encoded: AtomicUsize::new(0),
    };
    let mut body = match &config.experiment {
        Experiment::TemporalConsistency(p) => temporal_consistency(&ctx, &models[0], p)?,
        Experiment::TemporalBurst(p) => temporal_burst(&ctx, &models[0], p)?,
        Experiment::F0Sweep(p) => f0_sweep(&ctx, &models[0], p)?,
        Experiment::BiasInvariance(p) => bias_invariance(&ctx, &models[0], p)?,
        Experiment::FormantGrid(p) => formant_grid(&ctx, &models[0], p, false)?,
        Experiment::FormantF0Grid(p) => formant_grid(&ctx, &models[0], p, true)?,
        Experiment::CkaCompare(p) => cka_compare(&ctx, models, p)?,
        Experiment::AmplitudeGrid(p) => amplitude_grid(&ctx, &models[0], p)?,
        Experiment::MetricContrast(p) => metric_contrast(&ctx, &models[0], p)?,
    };
    body.summary.insert(
        "encoded_signals".into(),
        json!(ctx.encoded.load(Ordering::Relaxed)),
    );
    let report = ExperimentReport {
        config: config.clone(),
        toolkit_version: crate::VERSION.to_string(),
        models: infos,
        labels: body.labels,
        matrix: body.matrix,
        neighbors: body.neighbors,
        scale: body.scale,
        projection: body.projection,
        steps: body.steps,
        summary: body.summary,
    };
    report.validate()?;
    Ok(report)
}

fn tone_labels(freqs: &[f64], amplitude: f64) -> (Vec<String>, Table) {
    let labels: Vec<String> = freqs.iter().map(|&f| hz(f)).collect();
    let mut t = Table::with_header(&["index", "label", "f0", "a0"]);
    for (i, (&f, l)) in freqs.iter().zip(&labels).enumerate() {
        t.push(vec![
            i.into(),
            l.as_str().into(),
            f.into(),
            amplitude.into(),
        ]);
    }
    (labels, t)
}

fn temporal_consistency(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &ToneSetParams,
) -> Result<Body, ExperimentError> {
    if p.f0s.is_empty() {
        return Err(invalid("f0s must not be empty"));
    }
    let specs: Vec<_> = p
        .f0s
        .iter()
        .map(|&f| SignalSpec::sines(&[(f, p.amplitude)]))
        .collect();
    let reps = ctx.encode_all(model, &specs)?;
    let values = consistency_matrix(&reps)?;
    let (labels, label_table) = tone_labels(&p.f0s, p.amplitude);
    let matrix = LabeledMatrix::square(labels, values);

    let mut summary = Map::new();
    let diag: Vec<f64> = matrix.values.diag().to_vec();
    summary.insert(
        "symmetry_residual".into(),
        json!(matrix.symmetry_residual()),
    );
    summary.insert(
        "min_entry".into(),
        json!(matrix.values.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    summary.insert(
        "max_entry".into(),
        json!(matrix
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)),
    );
    summary.insert(
        "min_diagonal".into(),
        json!(diag.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    summary.insert("steps".into(), json!(reps[0].steps()));
    Ok(Body {
        labels: label_table,
        matrix: Some(matrix),
        summary,
        ..Default::default()
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn temporal_burst(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &BurstParams,
) -> Result<Body, ExperimentError> {
    if p.durations_ms.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(invalid("burst durations must be finite and non-negative"));
    }
    let base = SignalSpec::sines(&[(p.base_frequency, p.amplitude)]);
    let high = SignalSpec::sines(&[(p.burst_frequency, p.amplitude)]);
    let burst_specs: Vec<_> = p
        .durations_ms
        .iter()
        .map(|&ms| {
            base.clone()
                .with_burst(&[(p.burst_frequency, p.amplitude)], ms / 1000.0)
        })
        .collect();
    let refs = ctx.encode_means(model, &[base.clone(), high])?;
    let reps = ctx.encode_all(model, &burst_specs)?;

    let mut labels = Table::with_header(&[
        "index",
        "label",
        "base_frequency",
        "burst_frequency",
        "burst_ms",
        "burst_start",
        "burst_len",
    ]);
    labels.push(vec![
        0usize.into(),
        "clean-base".into(),
        p.base_frequency.into(),
        p.base_frequency.into(),
        0.0.into(),
        0usize.into(),
        0usize.into(),
    ]);
    labels.push(vec![
        1usize.into(),
        "clean-burst".into(),
        p.burst_frequency.into(),
        p.burst_frequency.into(),
        0.0.into(),
        0usize.into(),
        0usize.into(),
    ]);

    let mut steps = Table::with_header(&[
        "burst_ms",
        "step",
        "overlaps",
        "distance_to_base",
        "distance_to_burst",
    ]);
    let mut per_duration = Vec::new();
    let mut magnitudes = Vec::new();
    for (k, ((ms, spec), rep)) in p
        .durations_ms
        .iter()
        .zip(&burst_specs)
        .zip(&reps)
        .enumerate()
    {
        let (start, len) = spec.burst_region().expect("burst present");
        labels.push(vec![
            (k + 2).into(),
            format!("burst-{ms}ms").into(),
            p.base_frequency.into(),
            p.burst_frequency.into(),
            (*ms).into(),
            start.into(),
            len.into(),
        ]);
        let overlap = burst_overlap_steps(spec.sample_count(), start, len, rep.window, rep.stride);
        let mut rows = Vec::with_capacity(rep.steps());
        for i in 0..rep.steps() {
            let d_base = cosine_distance(rep.step(i), refs[0].view())?;
            let d_burst = cosine_distance(rep.step(i), refs[1].view())?;
            let hit = overlap.contains(&i);
            steps.push(vec![
                (*ms).into(),
                i.into(),
                hit.into(),
                d_base.into(),
                d_burst.into(),
            ]);
            rows.push((hit, d_base, d_burst));
        }
        let over = mean(rows.iter().filter(|r| r.0).map(|r| r.2));
        let clear = mean(rows.iter().filter(|r| !r.0).map(|r| r.2));
        let separation = over.zip(clear).map(|(a, b)| a - b);
        if let Some(s) = separation {
            magnitudes.push(s.abs());
        }
        per_duration.push(json!({
            "burst_ms": ms,
            "overlapping_steps": overlap.len(),
            "mean_distance_to_burst_overlapping": opt_num(over),
            "mean_distance_to_burst_clear": opt_num(clear),
            "mean_distance_to_base_clear": opt_num(mean(rows.iter().filter(|r| !r.0).map(|r| r.1))),
            "separation": opt_num(separation),
        }));
    }
    let mut summary = Map::new();
    summary.insert("durations".into(), Value::Array(per_duration));
    // durations are listed longest first by default; trend is over that order
    let trend = magnitudes.windows(2).filter(|w| w[1] <= w[0]).count();
    summary.insert(
        "separation_shrinking_fraction".into(),
        if magnitudes.len() > 1 {
            json!(trend as f64 / (magnitudes.len() - 1) as f64)
        } else {
            Value::Null
        },
    );
    Ok(Body {
        labels,
        steps: Some(steps),
        summary,
        ..Default::default()
    })
}

fn f0_sweep(ctx: &Ctx, model: &EncoderModel, p: &SweepParams) -> Result<Body, ExperimentError> {
    if !(p.f_step > 0.0 && p.f_min > 0.0 && p.f_max >= p.f_min) {
        return Err(invalid("sweep needs 0 < f_min <= f_max and f_step > 0"));
    }
    let freqs = p.frequencies();
    if freqs.len() < 3 {
        return Err(invalid("sweep needs at least 3 frequencies"));
    }
    let specs: Vec<_> = freqs
        .iter()
        .map(|&f| SignalSpec::sines(&[(f, p.amplitude)]))
        .collect();
    let means = ctx.encode_means(model, &specs)?;
    let (labels, label_table) = tone_labels(&freqs, p.amplitude);

    let scale = build_encoder_scale(&freqs, &means)?;
    let stats = ordering_stats(&scale)?;
    let mel = min_max_normalize(&freqs.iter().map(|&f| mel_scale(f)).collect::<Vec<_>>());
    let bark = min_max_normalize(&freqs.iter().map(|&f| bark_scale(f)).collect::<Vec<_>>());
    let enc = min_max_normalize(&scale.cumulative);
    let mut scale_table = Table::with_header(&[
        "frequency",
        "cumulative",
        "mel_norm",
        "bark_norm",
        "encoder_norm",
    ]);
    for k in 0..freqs.len() {
        scale_table.push(vec![
            freqs[k].into(),
            scale.cumulative[k].into(),
            mel[k].into(),
            bark[k].into(),
            enc[k].into(),
        ]);
    }
    let pairs: Vec<_> = (0..freqs.len() - 1).map(|i| (i, i + 1)).collect();
    let neighbors = neighbor_table(&labels, &means, &pairs)?;

    let full = (freqs.len() <= MDS_MAX_POINTS)
        .then(|| DistanceMatrix::cosine(labels.clone(), &means))
        .transpose()?;
    let (projection, sampled) = project(&labels, &means, full.as_ref(), ctx.config.seed)?;

    let matrix = if ctx.config.full_matrix {
        match p.matrix_subsample {
            Some(k) if k < freqs.len() => {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
                let mut idx = sample(&mut rng, freqs.len(), k).into_vec();
                idx.sort_unstable();
                let l: Vec<_> = idx.iter().map(|&i| labels[i].clone()).collect();
                let v: Vec<_> = idx.iter().map(|&i| means[i].clone()).collect();
                Some(DistanceMatrix::cosine(l, &v)?.into())
            }
            _ => Some(match full {
                Some(d) => d.into(),
                None => DistanceMatrix::cosine(labels.clone(), &means)?.into(),
            }),
        }
    } else {
        None
    };

    let mut summary = Map::new();
    summary.insert("monotone_fraction".into(), json!(stats.monotone_fraction));
    summary.insert("linearity_r2".into(), json!(stats.linearity_r2));
    summary.insert(
        "total_distance".into(),
        json!(scale.cumulative.last().copied().unwrap_or(0.0)),
    );
    // mean absolute deviation of each normalized curve from the straight line
    let linear = min_max_normalize(&freqs);
    let deviation = |curve: &[f64]| {
        curve
            .iter()
            .zip(&linear)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / curve.len() as f64
    };
    summary.insert(
        "encoder_deviation_from_linear".into(),
        json!(deviation(&enc)),
    );
    summary.insert("mel_deviation_from_linear".into(), json!(deviation(&mel)));
    summary.insert("bark_deviation_from_linear".into(), json!(deviation(&bark)));
    summary.insert("projection_subsampled".into(), json!(sampled));
    Ok(Body {
        labels: label_table,
        matrix,
        neighbors: Some(neighbors),
        scale: Some(scale_table),
        projection: Some(projection),
        summary,
        ..Default::default()
    })
}

fn bias_invariance(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &BiasParams,
) -> Result<Body, ExperimentError> {
    if p.f0s.is_empty() || p.biases.is_empty() {
        return Err(invalid("f0s and biases must not be empty"));
    }
    let mut biases = p.biases.clone();
    let reference_col = match biases.iter().position(|&b| b == 0.0) {
        Some(i) => i,
        None => {
            biases.push(0.0);
            biases.len() - 1
        }
    };
    let mut specs = Vec::new();
    let mut labels = Table::with_header(&["index", "label", "f0", "a0", "bias"]);
    for &f in &p.f0s {
        for &b in &biases {
            labels.push(vec![
                specs.len().into(),
                format!("f0={f},b={b}").into(),
                f.into(),
                p.amplitude.into(),
                b.into(),
            ]);
            specs.push(SignalSpec::sines(&[(f, p.amplitude)]).with_bias(b));
        }
    }
    let means = ctx.encode_means(model, &specs)?;
    let nb = biases.len();
    let mut values = Array2::zeros((p.f0s.len(), p.biases.len()));
    for r in 0..p.f0s.len() {
        let reference = &means[r * nb + reference_col];
        for c in 0..p.biases.len() {
            values[[r, c]] = cosine_similarity(means[r * nb + c].view(), reference.view())?;
        }
    }
    let matrix = LabeledMatrix {
        row_labels: p.f0s.iter().map(|&f| format!("f0={f}")).collect(),
        col_labels: p.biases.iter().map(|&b| format!("b={b}")).collect(),
        values,
    };
    let mut summary = Map::new();
    summary.insert(
        "min_similarity".into(),
        json!(matrix.values.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    Ok(Body {
        labels,
        matrix: Some(matrix),
        summary,
        ..Default::default()
    })
}

struct FormantSet {
    specs: Vec<SignalSpec>,
    labels: Vec<String>,
    table: Table,
    shape: Vec<usize>,
}

fn formant_signals(p: &FormantParams, sweep_f0: bool) -> Result<FormantSet, ExperimentError> {
    if p.points == 0 {
        return Err(invalid("points must be at least 1"));
    }
    let f0s = if sweep_f0 {
        p.f0_sweep.clone()
    } else {
        vec![p.fix_f0]
    };
    if f0s.is_empty() {
        return Err(invalid("f0_sweep must not be empty"));
    }
    let f1s = linspace(p.f1_range[0], p.f1_range[1], p.points);
    let f2s = linspace(p.f2_range[0], p.f2_range[1], p.points);
    let [a0, a1, a2] = p.amplitudes;
    let mut specs = Vec::new();
    let mut labels = Vec::new();
    let mut table = Table::with_header(&["index", "label", "f0", "f1", "f2", "a0", "a1", "a2"]);
    for &f0 in &f0s {
        for &f1 in &f1s {
            for &f2 in &f2s {
                let label = format!("f0={f0},f1={f1},f2={f2}");
                table.push(vec![
                    specs.len().into(),
                    label.as_str().into(),
                    f0.into(),
                    f1.into(),
                    f2.into(),
                    a0.into(),
                    a1.into(),
                    a2.into(),
                ]);
                labels.push(label);
                specs.push(SignalSpec::sines(&[(f0, a0), (f1, a1), (f2, a2)]));
            }
        }
    }
    let shape = if sweep_f0 {
        vec![f0s.len(), p.points, p.points]
    } else {
        vec![p.points, p.points]
    };
    Ok(FormantSet {
        specs,
        labels,
        table,
        shape,
    })
}

/// Distances, projection and grid statistic for a parameter grid.
fn grid_body(
    ctx: &Ctx,
    labels: Vec<String>,
    label_table: Table,
    shape: &[usize],
    means: &[Array1<f64>],
    max_pairs: usize,
) -> Result<Body, ExperimentError> {
    let n = means.len();
    let full = (n <= MDS_MAX_POINTS || ctx.config.full_matrix)
        .then(|| DistanceMatrix::cosine(labels.clone(), means))
        .transpose()?;
    let stat = match &full {
        Some(d) if n <= MDS_MAX_POINTS => grid::grid_statistic(shape, d),
        _ => grid::grid_statistic_from_vectors(shape, means, max_pairs, ctx.config.seed)?,
    };
    let neighbors = neighbor_table(&labels, means, &grid::adjacent_pairs(shape))?;
    let (projection, sampled) = project(&labels, means, full.as_ref(), ctx.config.seed)?;

    let mut summary = Map::new();
    summary.insert("grid_shape".into(), json!(shape));
    summary.insert("grid_statistic".into(), opt_num(stat.ratio));
    summary.insert("grid".into(), grid_json(&stat));
    summary.insert("projection_subsampled".into(), json!(sampled));
    Ok(Body {
        labels: label_table,
        matrix: full.filter(|_| ctx.config.full_matrix).map(Into::into),
        neighbors: Some(neighbors),
        projection: Some(projection),
        summary,
        ..Default::default()
    })
}

fn formant_grid(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &FormantParams,
    sweep_f0: bool,
) -> Result<Body, ExperimentError> {
    let set = formant_signals(p, sweep_f0)?;
    let means = ctx.encode_means(model, &set.specs)?;
    grid_body(ctx, set.labels, set.table, &set.shape, &means, p.max_pairs)
}

fn cka_compare(
    ctx: &Ctx,
    models: &[EncoderModel],
    p: &FormantParams,
) -> Result<Body, ExperimentError> {
    let set = formant_signals(p, false)?;
    let mut features = Vec::with_capacity(models.len());
    for model in models {
        let means = ctx.encode_means(model, &set.specs)?;
        let views: Vec<_> = means
            .iter()
            .map(|m| m.view().insert_axis(Axis(0)))
            .collect();
        features.push(ndarray::concatenate(Axis(0), &views).expect("equal feature dims"));
    }
    let k = models.len();
    let mut values = Array2::<f64>::eye(k);
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let v = linear_cka(features[a].view(), features[b].view())?;
            values[[a, b]] = v;
            values[[b, a]] = v;
            pairs.push(json!({"a": a, "b": b, "cka": v}));
        }
    }
    let names: Vec<String> = models
        .iter()
        .enumerate()
        .map(|(i, m)| format!("{i}:{}", m.name()))
        .collect();
    let mut summary = Map::new();
    summary.insert("models".into(), json!(names));
    summary.insert("pairs".into(), Value::Array(pairs));
    summary.insert("signals_per_model".into(), json!(set.specs.len()));
    Ok(Body {
        labels: set.table,
        matrix: Some(LabeledMatrix::square(names, values)),
        summary,
        ..Default::default()
    })
}

fn amplitude_grid(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &AmplitudeParams,
) -> Result<Body, ExperimentError> {
    if p.points == 0 {
        return Err(invalid("points must be at least 1"));
    }
    if !(p.a_min >= 0.0 && p.a_max >= p.a_min) {
        return Err(invalid("amplitude range needs 0 <= a_min <= a_max"));
    }
    let levels = amplitude_levels(p.a_min, p.a_max, p.points);
    let mut specs = Vec::new();
    let mut labels = Vec::new();
    let mut table = Table::with_header(&["index", "label", "f0", "f1", "a0", "a1"]);
    for &a0 in &levels {
        for &a1 in &levels {
            let label = format!("a0={a0},a1={a1}");
            table.push(vec![
                specs.len().into(),
                label.as_str().into(),
                p.f0.into(),
                p.f1.into(),
                a0.into(),
                a1.into(),
            ]);
            labels.push(label);
            specs.push(SignalSpec::sines(&[(p.f0, a0), (p.f1, a1)]));
        }
    }
    let means = ctx.encode_means(model, &specs)?;
    let mut body = grid_body(
        ctx,
        labels,
        table,
        &[p.points, p.points],
        &means,
        usize::MAX,
    )?;
    body.summary.insert("levels".into(), json!(levels));
    Ok(body)
}

fn metric_contrast(
    ctx: &Ctx,
    model: &EncoderModel,
    p: &ContrastParams,
) -> Result<Body, ExperimentError> {
    let specs: Vec<_> = p
        .frequencies
        .iter()
        .map(|&f| SignalSpec::sines(&[(f, 1.0)]))
        .collect();
    let mut spectral = Vec::with_capacity(3);
    for spec in &specs {
        let mut wave = synth(spec)?;
        if ctx.config.quantize_pcm16 {
            wave = wave.quantize_pcm16();
        }
        let frames = spectrogram_features(&wave, p.spectrogram_window, p.spectrogram_hop)?;
        spectral.push(frames.mean_axis(Axis(0)).expect("at least one frame"));
    }
    let encoded = ctx.encode_means(model, &specs)?;
    let (labels, label_table) = tone_labels(&p.frequencies, 1.0);

    let branch = |vs: &[Array1<f64>]| -> Result<Value, ExperimentError> {
        let d12 = cosine_distance(vs[0].view(), vs[1].view())?;
        let d13 = cosine_distance(vs[0].view(), vs[2].view())?;
        let ratio = (d12 > 0.0).then(|| d13 / d12);
        Ok(json!({"d12": d12, "d13": d13, "ratio": opt_num(ratio)}))
    };
    let spec_json = branch(&spectral)?;
    let enc_json = branch(&encoded)?;

    let mut values = Array2::zeros((2, 2));
    values[[0, 0]] = spec_json["d12"].as_f64().unwrap_or(0.0);
    values[[0, 1]] = spec_json["d13"].as_f64().unwrap_or(0.0);
    values[[1, 0]] = enc_json["d12"].as_f64().unwrap_or(0.0);
    values[[1, 1]] = enc_json["d13"].as_f64().unwrap_or(0.0);
    let matrix = LabeledMatrix {
        row_labels: vec!["spectrogram".into(), "encoder".into()],
        col_labels: vec![
            format!("D({},{})", labels[0], labels[1]),
            format!("D({},{})", labels[0], labels[2]),
        ],
        values,
    };

    let mut summary = Map::new();
    let ratio_of_ratios = match (spec_json["ratio"].as_f64(), enc_json["ratio"].as_f64()) {
        (Some(s), Some(e)) if s > 0.0 => Some(e / s),
        _ => None,
    };
    summary.insert("spectrogram".into(), spec_json);
    summary.insert("encoder".into(), enc_json);
    summary.insert(
        "encoder_over_spectrogram_ratio".into(),
        opt_num(ratio_of_ratios),
    );
    Ok(Body {
        labels: label_table,
        matrix: Some(matrix),
        summary,
        ..Default::default()
    })
}
