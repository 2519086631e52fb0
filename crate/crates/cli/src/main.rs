use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use livedesc_core::config::{ConfigOverrides, TierLatencyOverrides, ValidationResult};
use livedesc_core::sim::transcript::TranscriptRecord;
use livedesc_core::sim::{self, MetricKind, Scenario, ScenarioError, Transcript, TranscriptError};
use livedesc_core::Tier;

#[derive(Parser)]
#[command(name = "livedesc", version, about = "Replay and score scene-narration scenarios")]
struct Cli {
    /// More log output (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Only errors
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a scenario file loads
    Validate { scenario: PathBuf },
    /// Replay a scenario and write its transcript
    Run(Box<RunArgs>),
    /// Score a transcript against its scenario
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// TOML file with engine settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transcript path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigFlags,
}

#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    thres: Option<f64>,
    #[arg(long)]
    orientation_unit_deg: Option<f64>,
    #[arg(long)]
    sim_split_threshold: Option<f64>,
    #[arg(long)]
    redundancy_threshold: Option<f64>,
    #[arg(long)]
    spoken_history_window: Option<usize>,
    #[arg(long)]
    speaking_rate_wps: Option<f64>,
    #[arg(long)]
    volume_normal: Option<f64>,
    #[arg(long)]
    volume_high: Option<f64>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    label_latency: Option<f64>,
    #[arg(long)]
    general_latency: Option<f64>,
    #[arg(long)]
    detailed_latency: Option<f64>,
}

impl ConfigFlags {
    fn to_overrides(&self) -> ConfigOverrides {
        let latencies = TierLatencyOverrides {
            label: self.label_latency,
            general: self.general_latency,
            detailed: self.detailed_latency,
        };
        ConfigOverrides {
            n: self.n,
            m: self.m,
            thres: self.thres,
            orientation_unit_deg: self.orientation_unit_deg,
            sim_split_threshold: self.sim_split_threshold,
            redundancy_threshold: self.redundancy_threshold,
            spoken_history_window: self.spoken_history_window,
            speaking_rate_wps: self.speaking_rate_wps,
            volume_normal: self.volume_normal,
            volume_high: self.volume_high,
            tier_latencies: (latencies != TierLatencyOverrides::default()).then_some(latencies),
            fps: self.fps,
        }
    }
}

#[derive(Args)]
struct MetricsArgs {
    transcript: PathBuf,
    scenario: PathBuf,
    /// Report a single metric
    #[arg(long, value_enum)]
    only: Option<MetricArg>,
    /// Also write the report as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Coverage,
    Priority,
    Latency,
}

/// Exit 1: the input is invalid. Exit 2: it could not be read or written.
enum Failure {
    Invalid(anyhow::Error),
    Io(anyhow::Error),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Failure::Io(e.into()),
            _ => Failure::Invalid(e.into()),
        }
    }
}

impl From<TranscriptError> for Failure {
    fn from(e: TranscriptError) -> Self {
        match e {
            TranscriptError::Io { .. } => Failure::Io(e.into()),
            _ => Failure::Invalid(e.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Validate { scenario } => validate(&scenario),
        Command::Run(args) => run(&args),
        Command::Metrics(args) => metrics(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let sc = sim::load_scenario(path)?;
    println!(
        "{}: ok ({} frames, {} scripted outputs, {} events)",
        path.display(),
        sc.frames.len(),
        sc.outputs.len(),
        sc.intents.len() + sc.sounds.len()
    );
    Ok(())
}

fn load_overrides(path: &Path) -> Result<ConfigOverrides, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::Io)?;
    ConfigOverrides::from_toml_str(&text)
        .with_context(|| format!("config {}", path.display()))
        .map_err(Failure::Invalid)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let scenario = sim::load_scenario(&args.scenario)?;
    let mut extra = match &args.config {
        Some(path) => load_overrides(path)?,
        None => ConfigOverrides::default(),
    };
    extra = extra.merged(&args.overrides.to_overrides());
    let cfg = scenario.effective_config(&extra);
    if let ValidationResult::Invalid(v) = cfg.validate() {
        let list: Vec<String> = v.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Invalid(anyhow::anyhow!("invalid config: {}", list.join("; "))));
    }

    let transcript = sim::run(&scenario, &cfg);
    let text = transcript.to_jsonl();
    match &args.out {
        Some(path) => {
            fs::write(path, &text)
                .with_context(|| format!("writing transcript {}", path.display()))
                .map_err(Failure::Io)?;
            println!("{}", summary(&transcript, &scenario));
        }
        None => {
            print!("{text}");
            log::info!("{}", summary(&transcript, &scenario).replace('\n', "; "));
        }
    }
    Ok(())
}

fn summary(t: &Transcript, sc: &Scenario) -> String {
    let per_tier: Vec<String> = Tier::ALL
        .iter()
        .map(|tier| format!("{} {}", tier.name(), t.utterances().filter(|u| u.tier == *tier).count()))
        .collect();
    let keyframes = t.count(|r| matches!(r, TranscriptRecord::Keyframe { .. }));
    let evicted: usize = t
        .records
        .iter()
        .map(|r| match r {
            TranscriptRecord::Eviction { packet_ids, .. } => packet_ids.len(),
            _ => 0,
        })
        .sum();
    let dropped = t.count(|r| matches!(r, TranscriptRecord::Dropped { .. }));
    format!(
        "frames: {}\nkeyframes: {keyframes}\nutterances: {}\nevicted packets: {evicted}\ndropped requests: {dropped}",
        sc.frames.len(),
        per_tier.join(", ")
    )
}

fn metrics(args: &MetricsArgs) -> Result<(), Failure> {
    let transcript = Transcript::load(&args.transcript)?;
    let scenario = sim::load_scenario(&args.scenario)?;
    let which: Vec<MetricKind> = match args.only {
        None => MetricKind::ALL.to_vec(),
        Some(MetricArg::Coverage) => vec![MetricKind::Coverage],
        Some(MetricArg::Priority) => vec![MetricKind::Priority],
        Some(MetricArg::Latency) => vec![MetricKind::Latency],
    };
    let report = sim::evaluate(&transcript, &scenario, &which).map_err(|e| Failure::Invalid(e.into()))?;
    print!("{}", report.render_table());
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, json + "\n")
            .with_context(|| format!("writing report {}", path.display()))
            .map_err(Failure::Io)?;
    }
    Ok(())
}
