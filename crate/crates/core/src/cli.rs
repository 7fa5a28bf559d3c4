//! Command-line front end: `simulate`, `sweep` and `analyze`.
//!
//! Exit statuses: 0 success, 2 usage error, 3 validation error, 4 I/O error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::config::{ExperimentPlan, ScenarioFile, SweepFile};
use crate::covariance::{eigenvalues, estimate_covariance, EigenSpectrum};
use crate::error::Error;
use crate::estimators::{profile, DiffusenessProfile, Estimator};
use crate::experiments::{run_sweep, run_transition, Metric, SweepResult};
use crate::field_sim::{synthesize, ShSignalBlock, GENERATOR_NAME};
use crate::io::{self, BlockMetadata, SignalFormat};

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "DIFFUSENSE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Validation = 3,
    Io = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Usage,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            status: ExitStatus::Io,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Io(_) => ExitStatus::Io,
            Error::EmptyAxis(_) => ExitStatus::Usage,
            _ => ExitStatus::Validation,
        };
        Self {
            status,
            message: err.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "diffusense",
    version,
    about = "Spherical-harmonic sound field diffuseness analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an SH signal block from a scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output format; defaults to wav for `.wav` paths and raw otherwise.
        #[arg(long)]
        format: Option<SignalFormat>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter sweep or a direct-to-diffuse transition experiment.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Framewise diffuseness profiles of a recorded SH signal file
    /// (ACN channel order, N3D normalization).
    Analyze {
        input: PathBuf,
        /// SH order of the file; inferred from the channel count when omitted.
        #[arg(long)]
        order: Option<usize>,
        /// Frame length in samples; whole file when omitted.
        #[arg(long)]
        frame_len: Option<usize>,
        /// Hop in samples; defaults to the frame length.
        #[arg(long)]
        hop: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "comedie")]
        estimators: Vec<Estimator>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Diffuseness analysis of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisFrameReport {
    pub frame: usize,
    pub start_sample: usize,
    pub start_time: f64,
    pub profiles: Vec<DiffusenessProfile>,
    pub spectrum: EigenSpectrum,
}

/// Frame start offsets. A frame longer than the block yields one frame
/// spanning the whole block.
pub fn frame_starts(samples: usize, frame_len: usize, hop: usize) -> Vec<usize> {
    if frame_len >= samples {
        return vec![0];
    }
    (0..=(samples - frame_len)).step_by(hop).collect()
}

/// Profiles and eigenvalue spectra for every frame of `block`.
pub fn analyze_block(
    block: &ShSignalBlock,
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    estimators: &[Estimator],
) -> crate::Result<Vec<AnalysisFrameReport>> {
    if frame_len == 0 || hop == 0 {
        return Err(Error::Domain(
            "frame length and hop must be positive".into(),
        ));
    }
    let len = frame_len.min(block.samples());
    frame_starts(block.samples(), frame_len, hop)
        .into_iter()
        .enumerate()
        .map(|(frame, start)| {
            let c = estimate_covariance(&block.frame(start, len)?);
            let profiles = estimators
                .iter()
                .map(|&e| profile(&c, e))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(AnalysisFrameReport {
                frame,
                start_sample: start,
                start_time: start as f64 / sample_rate as f64,
                profiles,
                spectrum: eigenvalues(&c)?,
            })
        })
        .collect()
}

/// CSV with `frame,time_s`, then `<estimator>_d<ℓ>` columns, then `eig_<i>`.
pub fn reports_to_csv(reports: &[AnalysisFrameReport]) -> String {
    let mut s = String::from("frame,time_s");
    if let Some(first) = reports.first() {
        for p in &first.profiles {
            for l in 1..=p.order {
                let _ = write!(s, ",{}_d{l}", p.estimator);
            }
        }
        for i in 1..=first.spectrum.values().len() {
            let _ = write!(s, ",eig_{i}");
        }
    }
    s.push('\n');
    for r in reports {
        let _ = write!(s, "{},{}", r.frame, r.start_time);
        for p in &r.profiles {
            for v in &p.values {
                let _ = write!(s, ",{v}");
            }
        }
        for v in r.spectrum.values() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    io::write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?)).map_err(|e| CliError::io(path, e))
}

fn with_context(path: &Path, err: Error) -> CliError {
    let mut cli = CliError::from(err);
    cli.message = format!("{}: {}", path.display(), cli.message);
    cli
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

pub fn cmd_simulate(
    config: &Path,
    out: &Path,
    format: Option<SignalFormat>,
    seed: Option<u64>,
) -> CliResult<()> {
    let file = ScenarioFile::parse(&read_text(config)?).map_err(|e| with_context(config, e))?;
    let mut scenario = file.to_scenario().map_err(|e| with_context(config, e))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let nu = scenario.noise_power()?;
    let block = synthesize(&scenario)?;
    let format = format.unwrap_or_else(|| SignalFormat::from_path(out));
    io::write_signal_file(&block, file.sample_rate, format, out)
        .map_err(|e| CliError::io(out, e))?;
    let meta = BlockMetadata {
        format,
        order: block.order(),
        channels: block.channels(),
        samples: block.samples(),
        sample_rate: file.sample_rate,
        seed: scenario.seed,
        beta: scenario.beta,
        noise_power: nu,
        channel_order: "ACN",
        normalization: "N3D",
        generator: GENERATOR_NAME,
    };
    let sidecar = sidecar_path(out);
    write_text(
        &sidecar,
        &serde_json::to_string_pretty(&meta).expect("metadata serializes"),
    )?;
    info!(
        "wrote {} channels x {} samples to {}",
        block.channels(),
        block.samples(),
        out.display()
    );
    Ok(())
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn metric_file_name(metric: Metric, order: usize) -> String {
    format!("{metric}_L{order}.csv")
}

fn write_sweep_outputs(result: &SweepResult, dir: &Path, transition: bool) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    if transition {
        write_text(&dir.join("transition.csv"), &result.to_long_csv())?;
        write_text(
            &dir.join("transition_matrix.csv"),
            &result.transition_matrix_csv(),
        )?;
    } else {
        write_text(&dir.join("sweep.csv"), &result.to_long_csv())?;
        for (metric, order) in result.panels() {
            write_text(
                &dir.join(metric_file_name(metric, order)),
                &result.matrix_csv(metric, order),
            )?;
        }
    }
    write_text(
        &dir.join("metadata.json"),
        &serde_json::to_string_pretty(&result.metadata).expect("metadata serializes"),
    )
}

pub fn cmd_sweep(config: &Path, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let file = SweepFile::parse(&read_text(config)?).map_err(|e| with_context(config, e))?;
    let mut plan = file.to_plan().map_err(|e| with_context(config, e))?;
    if let Some(seed) = seed {
        match &mut plan {
            ExperimentPlan::Sweep(s) => s.base_seed = seed,
            ExperimentPlan::Transition(t) => t.base_seed = seed,
        }
    }
    let run = || match &plan {
        ExperimentPlan::Sweep(spec) => run_sweep(spec),
        ExperimentPlan::Transition(t) => {
            run_transition(&t.orders, &t.q_values, t.samples, t.seeds, t.base_seed)
        }
    };
    let result = match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))?
            .install(run),
        None => run(),
    }?;
    write_sweep_outputs(&result, out, matches!(plan, ExperimentPlan::Transition(_)))?;
    info!(
        "wrote {} records to {}",
        result.records.len(),
        out.display()
    );
    Ok(())
}

pub fn cmd_analyze(
    input: &Path,
    order: Option<usize>,
    frame_len: Option<usize>,
    hop: Option<usize>,
    estimators: &[Estimator],
    out: Option<&Path>,
) -> CliResult<()> {
    if estimators.is_empty() {
        return Err(CliError::usage("at least one estimator is required"));
    }
    if frame_len == Some(0) || hop == Some(0) {
        return Err(CliError::usage("--frame-len and --hop must be positive"));
    }
    let signal = io::read_signal_file(input).map_err(|e| match e {
        Error::Io(err) => CliError::io(input, err),
        other => with_context(input, other),
    })?;
    let order = match order {
        Some(o) => o,
        None => signal.implied_order().ok_or_else(|| CliError {
            status: ExitStatus::Validation,
            message: format!(
                "{}: {} channels is not (L+1)^2 for any order; pass --order",
                input.display(),
                signal.channels
            ),
        })?,
    };
    let rate = signal.sample_rate;
    let block = signal
        .into_block(order)
        .map_err(|e| with_context(input, e))?;
    let frame_len = frame_len.unwrap_or(block.samples());
    if frame_len > block.samples() {
        warn!(
            "frame length {frame_len} exceeds the {} samples in {}; analyzing the whole file as one frame",
            block.samples(),
            input.display()
        );
    }
    let hop = hop.unwrap_or(frame_len);
    let reports = analyze_block(&block, rate, frame_len, hop, estimators)?;
    let csv = reports_to_csv(&reports);
    match out {
        Some(path) => write_text(path, &csv),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            format,
            seed,
        } => cmd_simulate(&config, &out, format, seed),
        Command::Sweep { config, out, seed } => cmd_sweep(&config, &out, seed),
        Command::Analyze {
            input,
            order,
            frame_len,
            hop,
            estimators,
            out,
        } => cmd_analyze(&input, order, frame_len, hop, &estimators, out.as_deref()),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Success
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("error: {e}");
            e.status
        }
    }
}
