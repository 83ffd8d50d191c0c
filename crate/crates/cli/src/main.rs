use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tdarc::bcp::BcpParams;
use tdarc::hgs::{write_solution, HgsParams};
use tdarc::network::{generate_speed_profiles, serialize_instance, synthetic_instance, SpeedLevel, SyntheticSpec};
use tdarc::profiles::ProfileOptions;
use tdarc_cli::{compare, env_cache_dir, load_instance, load_profiles, solve, speedup_stats, CompareConfig, Engine, StatsRow};

#[derive(Parser)]
#[command(name = "tdarc", version, about = "Time-dependent capacitated arc routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance with generated speed profiles.
    Generate(GenerateArgs),
    /// Build quickest-path profiles and report their size.
    Preprocess(PreprocessArgs),
    /// Solve an instance.
    Solve(SolveArgs),
    /// Time-dependent vs static planning under perturbed speeds.
    Compare(CompareArgs),
    /// Move filter and bucket statistics with speedup toggles.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Base network; a synthetic one is built when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "M")]
    level: SpeedLevel,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    vertices: usize,
    #[arg(long, default_value_t = 10)]
    extra_edges: usize,
    #[arg(long, default_value_t = 10)]
    required_edges: usize,
    #[arg(long, default_value_t = 4)]
    required_arcs: usize,
    #[arg(long, default_value_t = 5)]
    max_demand: u32,
    #[arg(long, default_value_t = 20.0)]
    capacity: f64,
    #[arg(long)]
    vehicles: Option<usize>,
    /// Multiplies the default horizon of twice the longest greedy route.
    #[arg(long, default_value_t = 1.0)]
    duration_factor: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Buckets per indexed function.
    #[arg(long)]
    buckets: Option<usize>,
    /// Use plain binary search for every query.
    #[arg(long)]
    no_buckets: bool,
}

impl ProfileArgs {
    fn options(&self) -> ProfileOptions {
        ProfileOptions { buckets: self.buckets, use_buckets: !self.no_buckets }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    instance: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Cache directory; defaults to `TDARC_CACHE_DIR`.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "hgs")]
    engine: Engine,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seconds per engine.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Genetic search iteration cap.
    #[arg(long)]
    iterations: Option<u64>,
    /// Weight of the heuristic dominance rule in pricing.
    #[arg(long)]
    mu: Option<f64>,
    /// Recheck every filtered move exactly.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    profile: ProfileArgs,
    /// JSON result record.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Solution file.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    instance: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 20)]
    scenarios: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Genetic search iterations per solve.
    #[arg(long, default_value_t = 2000)]
    iterations: u64,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    iterations: u64,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long)]
    audit: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    emit(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let inst = match &a.input {
        Some(path) => generate_speed_profiles(&load_instance(path)?, a.level, a.seed)?,
        None => synthetic_instance(&SyntheticSpec {
            vertices: a.vertices,
            extra_edges: a.extra_edges,
            required_edges: a.required_edges,
            required_arcs: a.required_arcs,
            max_demand: a.max_demand,
            capacity: a.capacity,
            vehicles: a.vehicles,
            duration_factor: a.duration_factor,
            level: Some(a.level),
            seed: a.seed,
        })?,
    };
    emit(a.output.as_deref(), &serialize_instance(&inst))
}

#[derive(Serialize)]
struct PreprocessReport {
    instance: String,
    from_cache: bool,
    options: ProfileOptions,
    telemetry: tdarc::profiles::ProfileTelemetry,
    wall_seconds: f64,
}

fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let start = std::time::Instant::now();
    let dir = a.cache_dir.clone().or_else(env_cache_dir);
    let (pm, from_cache) = load_profiles(&inst, a.profile.options(), dir.as_deref())?;
    let report = PreprocessReport {
        instance: inst.name.clone(),
        from_cache,
        options: a.profile.options(),
        telemetry: *pm.telemetry(),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    emit_json(a.output.as_deref(), &report)
}

/// Returns whether a feasible plan was found.
fn run_solve(a: &SolveArgs) -> Result<bool> {
    let inst = load_instance(&a.instance)?;
    let (pm, _) = load_profiles(&inst, a.profile.options(), env_cache_dir().as_deref())?;
    let hgs = HgsParams { time_limit: a.time_limit, max_iterations: a.iterations, audit: a.audit, ..HgsParams::default() };
    let mut bcp = BcpParams { time_limit: a.time_limit, ..BcpParams::default() };
    if let Some(mu) = a.mu {
        bcp.heuristic_mu = mu;
    }
    let record = solve(&inst, &pm, a.engine, &hgs, &bcp, a.seed);
    if let (Some(path), Some(plan)) = (&a.solution, record.plan.as_ref().filter(|p| p.is_feasible())) {
        let stats = record.hgs.as_ref().map(|s| s.as_pairs()).unwrap_or_default();
        fs::write(path, write_solution(&inst, &pm, plan, &stats)?).with_context(|| format!("writing {}", path.display()))?;
    }
    emit_json(a.output.as_deref(), &record)?;
    Ok(record.feasible)
}

fn run_compare(a: &CompareArgs) -> Result<()> {
    if a.sigma.is_nan() || a.sigma < 0.0 {
        bail!("--sigma must be non-negative");
    }
    let inst = load_instance(&a.instance)?;
    let cfg = CompareConfig {
        sigma: a.sigma,
        scenarios: a.scenarios,
        seed: a.seed,
        hgs: HgsParams { time_limit: a.time_limit, max_iterations: Some(a.iterations), ..HgsParams::default() },
    };
    emit_json(a.output.as_deref(), &compare(&inst, &cfg)?)
}

fn run_stats(a: &StatsArgs) -> Result<()> {
    let hgs = HgsParams { time_limit: a.time_limit, max_iterations: Some(a.iterations), audit: a.audit, ..HgsParams::default() };
    let mut out = String::from(StatsRow::CSV_HEADER);
    out.push('\n');
    for path in &a.instances {
        let inst = load_instance(path)?;
        for row in speedup_stats(&inst, &hgs, a.buckets, a.seed)? {
            out.push_str(&row.csv());
            out.push('\n');
        }
    }
    emit(a.output.as_deref(), &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Preprocess(a) => preprocess(a).map(|_| true),
        Command::Solve(a) => run_solve(a),
        Command::Compare(a) => run_compare(a).map(|_| true),
        Command::Stats(a) => run_stats(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("no feasible solution found");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
