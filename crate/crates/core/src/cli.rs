//! `sineprobe` command line.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 on runtime errors. Runtime
//! errors are reported as a single `error_code: message` line on stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::encoder::{self, format, EncodeError};
use crate::experiments::{
    self, write_atomic, AmplitudeParams, BiasParams, BurstParams, ContrastParams, Experiment,
    ExperimentConfig, ExperimentError, FormantParams, SweepParams, ToneSetParams,
};
use crate::parity::representation_table;
use crate::signalgen::{synth, Burst, SignalSpec, SineComponent};
use crate::table::Table;

/// Environment variable naming a directory searched for relative `--model` paths.
pub const MODEL_DIR_ENV: &str = "SINEPROBE_MODEL_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "sineprobe",
    version,
    about = "Probe convolutional speech feature encoders with synthetic sine signals"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// W2VFE weight file (repeat for cka-compare)
    #[arg(long, global = true)]
    model: Vec<PathBuf>,
    /// Output directory (or file, for `encode`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled subsets
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write full distance matrices for large signal sets
    #[arg(long, global = true)]
    full_matrix: bool,
    /// Round-trip signals through 16-bit PCM before encoding
    #[arg(long, global = true)]
    quantize_pcm16: bool,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

/// Inline signal description; `--spec` takes precedence over the other flags.
#[derive(Debug, Args)]
struct SignalArgs {
    /// SignalSpec JSON file
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Sinusoid as FREQ or FREQ:AMP (repeatable)
    #[arg(long = "tone", value_parser = parse_component)]
    tones: Vec<SineComponent>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bias: f64,
    /// Seconds
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Burst sinusoid as FREQ or FREQ:AMP (repeatable)
    #[arg(long = "burst-tone", value_parser = parse_component)]
    burst_tones: Vec<SineComponent>,
    /// Burst length in seconds
    #[arg(long)]
    burst_duration: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a signal to samples.csv, signal.wav and spec.json
    Synth(SignalArgs),
    /// Print a weight file's header, geometry and tensor checksums
    InspectModel {
        /// Weight file (alternatively `--model`)
        path: Option<PathBuf>,
    },
    /// Encode one signal and write the T × D representation as CSV
    Encode(SignalArgs),
    /// Consistency of time-averaged and stepwise representations of pure tones
    TemporalConsistency {
        #[arg(long, value_delimiter = ',')]
        f0s: Option<Vec<f64>>,
    },
    /// Stepwise distances for a tone with a centered high-frequency burst
    TemporalBurst {
        #[arg(long, value_delimiter = ',')]
        durations_ms: Option<Vec<f64>>,
        #[arg(long)]
        base_frequency: Option<f64>,
        #[arg(long)]
        burst_frequency: Option<f64>,
    },
    /// Pure-tone sweep and the encoder's cumulative frequency scale
    F0Sweep {
        #[arg(long)]
        f_min: Option<f64>,
        #[arg(long)]
        f_max: Option<f64>,
        #[arg(long)]
        f_step: Option<f64>,
        /// With --full-matrix, limit matrix.csv to this many seeded signals
        #[arg(long)]
        matrix_subsample: Option<usize>,
    },
    /// Similarity between biased and unbiased tones
    BiasInvariance {
        #[arg(long, value_delimiter = ',')]
        f0s: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        biases: Option<Vec<f64>>,
    },
    /// F1 × F2 grid at a fixed F0 (or F0 × F1 × F2 with --sweep-f0)
    FormantGrid {
        #[arg(long, conflicts_with = "sweep_f0")]
        fix_f0: Option<f64>,
        #[arg(long)]
        sweep_f0: bool,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Pairwise linear CKA between models over the formant grid
    CkaCompare {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Energy-equalized A0 × A1 grid
    AmplitudeGrid {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        a_min: Option<f64>,
        #[arg(long)]
        a_max: Option<f64>,
    },
    /// Spectrogram vs encoder distances for three tones
    MetricContrast {
        /// Three frequencies x1,x2,x3
        #[arg(long, value_delimiter = ',')]
        freqs: Option<Vec<f64>>,
    },
    /// Re-run an experiment from a report's config.json
    Run { config: PathBuf },
}

fn parse_component(s: &str) -> Result<SineComponent, String> {
    let (f, a) = match s.split_once(':') {
        Some((f, a)) => (f, a),
        None => (s, "1"),
    };
    let frequency = f
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad frequency {f:?}: {e}"))?;
    let amplitude = a
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad amplitude {a:?}: {e}"))?;
    Ok(SineComponent::new(frequency, amplitude))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime { code: &'static str, message: String },
}

impl CliError {
    fn runtime(code: &'static str, message: impl ToString) -> Self {
        CliError::Runtime {
            code,
            message: message.to_string(),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::runtime(e.code(), e)
    }
}

impl From<encoder::ModelError> for CliError {
    fn from(e: encoder::ModelError) -> Self {
        CliError::runtime(e.code(), e)
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<crate::signalgen::SignalError> for CliError {
    fn from(e: crate::signalgen::SignalError) -> Self {
        CliError::runtime("invalid_signal", e)
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::runtime("io_error", format!("{}: {e}", path.display()))
}

/// Relative paths that do not exist are looked up in `$SINEPROBE_MODEL_DIR`.
fn resolve_model(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(MODEL_DIR_ENV) {
        Some(dir) => {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn signal_from_args(args: &SignalArgs) -> Result<SignalSpec, CliError> {
    if let Some(path) = &args.spec {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::runtime(
                "file_not_found",
                format!("{}: no such file", path.display()),
            ),
            _ => io_error(path, e),
        })?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::runtime("invalid_signal", format!("{}: {e}", path.display())));
    }
    if args.tones.is_empty() {
        return Err(CliError::Usage(
            "give --spec FILE or at least one --tone FREQ[:AMP]".into(),
        ));
    }
    let burst = match (args.burst_tones.is_empty(), args.burst_duration) {
        (true, None) => None,
        (false, Some(duration)) => Some(Burst {
            components: args.burst_tones.clone(),
            duration,
        }),
        _ => {
            return Err(CliError::Usage(
                "--burst-tone and --burst-duration must be given together".into(),
            ))
        }
    };
    Ok(SignalSpec {
        components: args.tones.clone(),
        bias: args.bias,
        duration: args.duration,
        burst,
        ..SignalSpec::default()
    })
}

fn require_out(global: &GlobalArgs) -> Result<&Path, CliError> {
    global
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out is required".into()))
}

fn one_model(global: &GlobalArgs) -> Result<PathBuf, CliError> {
    match global.model.as_slice() {
        [path] => Ok(resolve_model(path)),
        [] => Err(CliError::Usage("--model is required".into())),
        _ => Err(CliError::Usage("exactly one --model expected".into())),
    }
}

fn cmd_synth(global: &GlobalArgs, args: &SignalArgs) -> Result<(), CliError> {
    let out = require_out(global)?;
    let spec = signal_from_args(args)?;
    let mut wave = synth(&spec)?;
    if global.quantize_pcm16 {
        wave = wave.quantize_pcm16();
    }
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let mut samples = Table::with_header(&["index", "sample"]);
    for (i, &x) in wave.samples.iter().enumerate() {
        samples.push(vec![i.into(), x.into()]);
    }
    let csv = samples.to_csv().map_err(|e| io_error(out, e))?;
    write_atomic(out, "samples.csv", &csv)?;
    let spec_json = serde_json::to_vec_pretty(&spec).expect("spec serializes");
    write_atomic(out, "spec.json", &spec_json)?;
    let tmp = out.join(".signal.wav.tmp");
    wave.write_wav(&tmp).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, out.join("signal.wav")).map_err(|e| io_error(out, e))?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_inspect(global: &GlobalArgs, path: Option<&Path>) -> Result<(), CliError> {
    let path = match path {
        Some(p) => resolve_model(p),
        None => one_model(global)?,
    };
    let header = format::read_header(&path)?;
    let model = format::load_model(&path)?;
    let doc = json!({
        "path": path,
        "header": header,
        "window": model.window(),
        "stride": model.stride(),
        "feature_dim": model.feature_dim(),
        "layers": model.layers().len(),
        "file_sha256": format::file_checksum(&path)?,
        "tensor_checksums": format::tensor_checksums(&model),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(())
}

fn cmd_encode(global: &GlobalArgs, args: &SignalArgs) -> Result<(), CliError> {
    let out = require_out(global)?;
    let model = format::load_model(one_model(global)?)?;
    let spec = signal_from_args(args)?;
    let mut wave = synth(&spec)?;
    if global.quantize_pcm16 {
        wave = wave.quantize_pcm16();
    }
    let rep = encoder::encode(&model, &wave)?;
    let csv = representation_table(&rep.matrix)
        .to_csv()
        .map_err(|e| io_error(out, e))?;
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = out
        .file_name()
        .ok_or_else(|| CliError::Usage("--out must name a file for encode".into()))?
        .to_string_lossy()
        .into_owned();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    write_atomic(dir, &name, &csv)?;
    println!("{} x {}", rep.steps(), rep.features());
    Ok(())
}

fn run_and_write(config: ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let report = experiments::run(&config)?;
    report.write(out)?;
    println!("{}", out.join("summary.json").display());
    Ok(())
}

fn experiment_config(
    global: &GlobalArgs,
    experiment: Experiment,
) -> Result<ExperimentConfig, CliError> {
    let paths: Vec<PathBuf> = global.model.iter().map(|p| resolve_model(p)).collect();
    if paths.is_empty() {
        return Err(CliError::Usage("--model is required".into()));
    }
    Ok(ExperimentConfig {
        model_paths: paths,
        experiment,
        output_dir: global.out.clone(),
        seed: global.seed,
        full_matrix: global.full_matrix,
        quantize_pcm16: global.quantize_pcm16,
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if g.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global();
    }
    let experiment = match cli.command {
        Command::Synth(ref args) => return cmd_synth(g, args),
        Command::InspectModel { ref path } => return cmd_inspect(g, path.as_deref()),
        Command::Encode(ref args) => return cmd_encode(g, args),
        Command::Run { ref config } => {
            let out = require_out(g)?;
            let bytes = fs::read(config).map_err(|e| io_error(config, e))?;
            let config: ExperimentConfig = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::runtime("invalid_config", e))?;
            return run_and_write(config, out);
        }
        Command::TemporalConsistency { f0s } => {
            let mut p = ToneSetParams::default();
            if let Some(f) = f0s {
                p.f0s = f;
            }
            Experiment::TemporalConsistency(p)
        }
        Command::TemporalBurst {
            durations_ms,
            base_frequency,
            burst_frequency,
        } => {
            let mut p = BurstParams::default();
            if let Some(d) = durations_ms {
                p.durations_ms = d;
            }
            p.base_frequency = base_frequency.unwrap_or(p.base_frequency);
            p.burst_frequency = burst_frequency.unwrap_or(p.burst_frequency);
            Experiment::TemporalBurst(p)
        }
        Command::F0Sweep {
            f_min,
            f_max,
            f_step,
            matrix_subsample,
        } => {
            let d = SweepParams::default();
            Experiment::F0Sweep(SweepParams {
                f_min: f_min.unwrap_or(d.f_min),
                f_max: f_max.unwrap_or(d.f_max),
                f_step: f_step.unwrap_or(d.f_step),
                matrix_subsample,
                ..d
            })
        }
        Command::BiasInvariance { f0s, biases } => {
            let mut p = BiasParams::default();
            if let Some(f) = f0s {
                p.f0s = f;
            }
            if let Some(b) = biases {
                p.biases = b;
            }
            Experiment::BiasInvariance(p)
        }
        Command::FormantGrid {
            fix_f0,
            sweep_f0,
            points,
        } => {
            let mut p = FormantParams::default();
            p.fix_f0 = fix_f0.unwrap_or(p.fix_f0);
            p.points = points.unwrap_or(p.points);
            if sweep_f0 {
                Experiment::FormantF0Grid(p)
            } else {
                Experiment::FormantGrid(p)
            }
        }
        Command::CkaCompare { points } => {
            let mut p = FormantParams::default();
            p.points = points.unwrap_or(p.points);
            Experiment::CkaCompare(p)
        }
        Command::AmplitudeGrid {
            points,
            a_min,
            a_max,
        } => {
            let d = AmplitudeParams::default();
            Experiment::AmplitudeGrid(AmplitudeParams {
                points: points.unwrap_or(d.points),
                a_min: a_min.unwrap_or(d.a_min),
                a_max: a_max.unwrap_or(d.a_max),
                ..d
            })
        }
        Command::MetricContrast { freqs } => {
            let mut p = ContrastParams::default();
            if let Some(f) = freqs {
                p.frequencies = f
                    .try_into()
                    .map_err(|_| CliError::Usage("--freqs takes exactly three values".into()))?;
            }
            Experiment::MetricContrast(p)
        }
    };
    let out = require_out(g)?.to_path_buf();
    run_and_write(experiment_config(g, experiment)?, &out)
}

/// Parse `argv` (including the program name), run, and return the exit status.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime { code, message }) => {
            eprintln!("{code}: {}", message.replace('\n', " "));
            1
        }
    }
}
