use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use railsched_core::encode::{encode, EncodeOptions};
use railsched_core::gen::{generate, GenParams};
use railsched_core::objective::{threshold_set, ThresholdScheme};
use railsched_core::preprocess::preprocess;
use railsched_core::search::{extract_solution, solve, solve_instance, SearchOutcome, SolverConfig};
use railsched_core::solution::{SolveReport, SolveStatus};
use railsched_core::validator::{approx_quality, exact_quality, oracle_cost, validate_solution, DEFAULT_BUDGET};
use railsched_core::{parse_instance, serialize_instance, validate_instance, Instance, OracleError};

mod output;

#[derive(Parser, Debug)]
#[command(name = "railsched", version, about = "Train routing and scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find an optimal route and schedule for every train.
    Solve(SolveArgs),
    /// Report reduction statistics, or dump computed area facts.
    Preprocess(PreprocessArgs),
    /// Check a solution JSON against an instance.
    Validate(ValidateArgs),
    /// Print a random small instance.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Facts,
    Text,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    /// Comma-separated subset of hs, ol1, ol2, ac.
    #[arg(long, default_value = "", value_parser = parse_groups)]
    enable: EncodeOptions,
    #[arg(long, default_value = "binary", value_parser = parse_scheme)]
    thresholds: ThresholdScheme,
    /// Wall-clock limit in seconds.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    time_limit: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Independent solver instances with consecutive seeds.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=64))]
    portfolio: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    instance: PathBuf,
    /// `facts` dumps ra, e_ra, l_ra and set facts.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long, default_value = "binary", value_parser = parse_scheme)]
    thresholds: ThresholdScheme,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 3)]
    trains: usize,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..))]
    nodes: u64,
    /// Resources spanning several edges.
    #[arg(long, default_value_t = 2)]
    multi_resources: usize,
    #[arg(long, default_value_t = 1)]
    connections: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_groups(s: &str) -> Result<EncodeOptions, String> {
    s.parse()
}

fn parse_scheme(s: &str) -> Result<ThresholdScheme, String> {
    s.parse()
}

/// Failure that ends the run with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RAILSCHED_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text).map_err(|e| Failure(format!("{}:{e}", path.display())))?;
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure(format!("{}: invalid instance\n  {}", path.display(), lines.join("\n  "))));
    }
    Ok(inst)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, Failure> {
    let inst = read_instance(&a.instance)?;
    let opts = EncodeOptions {
        scheme: a.thresholds,
        ..a.enable
    };
    let cfg = SolverConfig {
        seed: a.seed,
        time_limit: a.time_limit.map(Duration::from_secs),
        ..SolverConfig::default()
    };
    info!("solving {} with [{opts}], thresholds {}", a.instance.display(), opts.scheme);
    let report = if a.portfolio > 1 {
        portfolio(&inst, &opts, &cfg, a.portfolio)?
    } else {
        solve_instance(&inst, &opts, &cfg)?
    };
    let text = match a.format {
        Format::Json => report.to_json() + "\n",
        Format::Facts => output::solution_facts(&report),
        Format::Text => output::solution_text(&report),
    };
    emit(&text, a.output.as_deref())?;
    Ok(report.status.exit_code() as u8)
}

fn proven(status: SolveStatus) -> bool {
    matches!(status, SolveStatus::Optimal | SolveStatus::Infeasible)
}

/// Runs `n` seeded solvers on one shared model. The first proven answer
/// stops the others; otherwise the best incumbent is kept.
fn portfolio(inst: &Instance, opts: &EncodeOptions, cfg: &SolverConfig, n: u64) -> Result<SolveReport, Failure> {
    let start = Instant::now();
    let pre = preprocess(inst)?;
    let model = encode(&pre, opts)?;
    let ground_time = start.elapsed();
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel::<(u64, SearchOutcome)>();
    let best = std::thread::scope(|s| {
        for k in 0..n {
            let tx = tx.clone();
            let cfg = SolverConfig {
                seed: cfg.seed.wrapping_add(k),
                time_limit: cfg.time_limit.map(|t| t.saturating_sub(ground_time)),
                stop: Some(stop.clone()),
                ..cfg.clone()
            };
            let (model, stop) = (&model, stop.clone());
            s.spawn(move || {
                let out = solve(model, &cfg);
                if proven(out.status) {
                    stop.store(true, Ordering::Relaxed);
                }
                let _ = tx.send((k, out));
            });
        }
        drop(tx);
        let mut best: Option<(u64, SearchOutcome)> = None;
        for (k, out) in rx {
            let better = match &best {
                None => true,
                Some((_, b)) if proven(b.status) => false,
                Some((_, b)) => {
                    proven(out.status) || (out.assignment.is_some() && (b.assignment.is_none() || out.objective < b.objective))
                }
            };
            if better {
                best = Some((k, out));
            }
        }
        best
    });
    let (k, out) = best.expect("at least one solver ran");
    info!("portfolio member {k} answered with {}", out.status);
    let mut stats = out.stats.clone();
    stats.ground_time = ground_time.as_secs_f64();
    stats.total_time = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        status: out.status,
        solution: extract_solution(&pre, &model, &out),
        stats,
    })
}

fn cmd_preprocess(a: &PreprocessArgs) -> Result<u8, Failure> {
    let inst = read_instance(&a.instance)?;
    let pre = preprocess(&inst)?;
    let stats = pre.stats(inst.network.resources.len());
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&stats)? + "\n",
        Format::Text => output::preprocess_text(&stats),
        Format::Facts => serialize_instance(&Instance {
            precomputed: Some(output::area_facts(&pre)),
            ..Instance::default()
        }),
    };
    emit(&text, None)?;
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8, Failure> {
    let inst = read_instance(&a.instance)?;
    let text = fs::read_to_string(&a.solution).map_err(|e| Failure(format!("{}: {e}", a.solution.display())))?;
    let report = SolveReport::from_json(&text).map_err(|e| Failure(format!("{}: {e}", a.solution.display())))?;
    let Some(sol) = report.solution.filter(|s| !s.paths.is_empty()) else {
        return Err(Failure(format!("{}: no solution to validate (status {})", a.solution.display(), report.status)));
    };
    let violations = validate_solution(&inst, &sol);
    let exact = exact_quality(&inst, &sol);
    let approx = approx_quality(&inst, &threshold_set(&inst, a.thresholds)?, &sol);
    let text = match a.format {
        Format::Json => output::validation_json(&violations, exact, approx) + "\n",
        _ => output::validation_text(&violations, exact, approx),
    };
    emit(&text, None)?;
    Ok(if violations.is_empty() { 0 } else { 3 })
}

fn cmd_gen(a: &GenArgs) -> Result<u8, Failure> {
    let inst = generate(&GenParams {
        trains: a.trains,
        nodes: a.nodes as usize,
        multi_resources: a.multi_resources,
        connections: a.connections,
        seed: a.seed,
    });
    match oracle_cost(&inst, DEFAULT_BUDGET) {
        Ok(n) => info!("oracle would enumerate {n} schedules"),
        Err(OracleError::BudgetExceeded { needed, budget }) => {
            warn!("instance exceeds the oracle budget ({needed} > {budget} schedules)")
        }
        Err(e) => warn!("{e}"),
    }
    emit(&serialize_instance(&inst), None)?;
    Ok(0)
}
