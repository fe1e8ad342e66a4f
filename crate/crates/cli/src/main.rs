//! `vendi`: diversity scores for paired sample/prompt embeddings.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vendi_core::ingest::Format;
use vendi_core::oracle::scenarios::Scenario;
use vendi_core::VendiError;

#[derive(Parser)]
#[command(
    name = "vendi",
    version,
    about = "Kernel-entropy diversity scores for conditional generative models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vendi, Conditional-Vendi and Information-Vendi of paired embeddings.
    Score(ScoreArgs),
    /// Pick a Gaussian bandwidth by subsample score variance.
    Bandwidth(BandwidthArgs),
    /// Per-prompt-mode diversity and representative samples.
    Decompose(DecomposeArgs),
    /// Run a synthetic experiment and write plot-ready CSV.
    Simulate(SimulateArgs),
}

/// `auto` or a positive bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    Auto,
    Fixed(f64),
}

fn parse_sigma(s: &str) -> Result<Sigma, String> {
    if s == "auto" {
        return Ok(Sigma::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Sigma::Fixed(v)),
        _ => Err(format!("expected 'auto' or a positive number, got '{s}'")),
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: VendiError| e.to_string())
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: VendiError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
#[group(multiple = false)]
struct OutputFlags {
    /// Write JSON (default).
    #[arg(long)]
    json: bool,
    /// Write CSV.
    #[arg(long)]
    csv: bool,
}

impl OutputFlags {
    fn format(&self) -> OutputFormat {
        if self.csv {
            OutputFormat::Csv
        } else {
            OutputFormat::Json
        }
    }
}

#[derive(Args)]
pub struct PairInput {
    /// Generated-sample embeddings.
    #[arg(long)]
    pub x: PathBuf,
    /// Prompt embeddings, row-aligned with `--x`.
    #[arg(long)]
    pub t: PathBuf,
    /// emb1, csv or npy.
    #[arg(long, default_value = "emb1", value_parser = parse_format)]
    pub format: Format,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma_x: Sigma,
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma_t: Sigma,
    /// Seed for `auto` bandwidth selection.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: PairInput,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
pub struct BandwidthArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long, default_value = "emb1", value_parser = parse_format)]
    pub format: Format,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// `auto`, a comma-separated list, or `lo:hi:count` (log-spaced).
    #[arg(long, default_value = "auto")]
    pub grid: String,
    #[arg(long, default_value_t = vendi_core::bandwidth::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Rows per trial; `min(n, 1000)` when omitted.
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long, default_value_t = vendi_core::bandwidth::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: PairInput,
    #[arg(long, default_value_t = 5)]
    pub modes: usize,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// One group label (1..=m) per line; adds per-group conditional scores.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// mode_growth_specified, mode_growth_unspecified, substitution or theorem1.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(feature = "parallel")]
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("VENDI_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        VendiError::Param(format!(
            "VENDI_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| anyhow::anyhow!("configuring thread pool: {e}"))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> anyhow::Result<()> {
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Score(a) => {
            let format = a.output.format();
            commands::score(&a.input, a.out.as_deref(), format)
        }
        Command::Bandwidth(a) => {
            let format = a.output.format();
            commands::bandwidth(&a, format)
        }
        Command::Decompose(a) => {
            let format = a.output.format();
            commands::decompose(&a, format)
        }
        Command::Simulate(a) => commands::simulate(&a),
    }
}

fn error_json(err: &anyhow::Error) -> String {
    let kind = match err.downcast_ref::<VendiError>() {
        Some(e) => e.kind(),
        None if err.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "internal",
    };
    let body = serde_json::json!({ "error": { "kind": kind, "message": format!("{err:#}") } });
    body.to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::FAILURE
        }
    }
}
