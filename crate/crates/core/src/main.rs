use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dagpreempt::experiment::{run_experiment, ExperimentConfig};
use dagpreempt::gantt::load_gantt;
use dagpreempt::workloads::{load_workflow_json, save_workflow_json, to_workflow_json};
use dagpreempt::{validate_schedule, Error, MetricVector, Result, WorkloadSpec};

const OUT_ENV: &str = "DAGPREEMPT_OUT";

#[derive(Parser)]
#[command(name = "dagpreempt", version, about = "Dynamic task-graph scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated workload as workflow JSON.
    Generate(GenerateArgs),
    /// Run an experiment config.
    Run(RunArgs),
    /// Check a Gantt trace against a workload. Exits 1 if invalid.
    Validate(TraceArgs),
    /// Recompute metrics from a Gantt trace.
    Metrics(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Synthetic,
    Adversarial,
}

#[derive(Args)]
struct GenerateArgs {
    /// Workload spec (TOML, or JSON by extension). Overrides --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "synthetic")]
    preset: Preset,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seeds, e.g. `1,2,3` or `0..30`.
    #[arg(long, value_parser = parse_seeds)]
    seed: Option<SeedList>,
    /// Output directory. Falls back to the config, then $DAGPREEMPT_OUT, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    emit_gantt: bool,
    #[arg(long)]
    emit_events: bool,
    #[arg(long)]
    no_validate: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// Workflow JSON.
    #[arg(long)]
    workload: PathBuf,
    /// Gantt JSON.
    #[arg(long)]
    gantt: PathBuf,
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

/// Comma-separated seeds or ranges (`a..b`, `a..=b`).
fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("bad seed '{x}': {e}"));
        if let Some((a, b)) = part.split_once("..=") {
            seeds.extend(num(a)?..=num(b)?);
        } else if let Some((a, b)) = part.split_once("..") {
            seeds.extend(num(a)?..num(b)?);
        } else {
            seeds.push(num(part)?);
        }
    }
    if seeds.is_empty() {
        return Err("empty seed list".into());
    }
    Ok(SeedList(seeds))
}

fn load_spec(path: &Path) -> Result<WorkloadSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let mut spec = match (&args.config, args.preset) {
        (Some(path), _) => load_spec(path)?,
        (None, Preset::Synthetic) => WorkloadSpec::default(),
        (None, Preset::Adversarial) => WorkloadSpec::adversarial(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let workload = spec.generate()?;
    match args.out {
        Some(path) => save_workflow_json(&workload, path)?,
        None => println!("{}", to_workflow_json(&workload)),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(SeedList(seeds)) = args.seed {
        config.seeds = seeds;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    config.emit_gantt |= args.emit_gantt;
    config.emit_events |= args.emit_events;
    if args.no_validate {
        config.validate = false;
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let rows = run_experiment(&config, &out)?;
    eprintln!("{} cells written to {}", rows.len(), out.join("results.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn validate(args: TraceArgs) -> Result<ExitCode> {
    let workload = load_workflow_json(&args.workload)?;
    let schedule = load_gantt(&args.gantt, &workload.graphs, &workload.network)?;
    let report = validate_schedule(&schedule, &workload.graphs, &workload.network);
    if report.is_ok() {
        println!("valid: {} tasks", schedule.len());
        return Ok(ExitCode::SUCCESS);
    }
    for v in &report.violations {
        println!("{v}");
    }
    Ok(ExitCode::from(1))
}

fn metrics(args: TraceArgs) -> Result<ExitCode> {
    let workload = load_workflow_json(&args.workload)?;
    let schedule = load_gantt(&args.gantt, &workload.graphs, &workload.network)?;
    let m = MetricVector::from_schedule(&schedule, &workload.graphs, &workload.network, 0.0)?;
    println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::Io { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::Metrics(a) => metrics(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(&e))
    })
}
