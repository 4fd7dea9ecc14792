//! Command-line front end for the fairknap library.
//!
//! Subcommands: `gen` (random instances), `validate` (structural and
//! feasibility findings), `solve` (one instance, one method), `stats`
//! (Monte-Carlo rounding statistics at a fractional point), and `bench`
//! (a directory of instances times a list of methods, as CSV).
//!
//! Every command is deterministic given its flags and `--seed`; omitting
//! the flag picks a random seed and prints it. Exit codes: 0 success,
//! 2 invalid input, 3 infeasible instance, 4 internal invariant breach.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use fairknap::fractional::{self, GreedyConfig};
use fairknap::model::{self, FindingKind, GeneratorParams, ObjectiveKind};
use fairknap::oracle::{self, OPT_GUARD};
use fairknap::relaxed::{self, RelaxedConfig};
use fairknap::rounding::{self, Rounder};
use fairknap::seeding;
use fairknap::truncation;
use fairknap::{Error, FractionalVector, Instance};

#[derive(Parser)]
#[command(
    name = "fairknap",
    version,
    about = "Fair knapsack-constrained submodular maximization: generate, validate, solve, and measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random feasible instance file.
    Gen(GenArgs),
    /// Check instance files; prints findings and sets the exit code.
    Validate(ValidateArgs),
    /// Solve one instance with one method and print a summary line.
    Solve(SolveArgs),
    /// Monte-Carlo rounding statistics at a fractional point, as CSV.
    Stats(StatsArgs),
    /// Solve every instance in a directory with each method, as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Truncating,
    RelaxedFairness,
    RelaxedKnapsack,
    Bruteforce,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Truncating => "truncating",
            Method::RelaxedFairness => "relaxed-fairness",
            Method::RelaxedKnapsack => "relaxed-knapsack",
            Method::Bruteforce => "bruteforce",
        }
    }

    fn constraint_status(self) -> &'static str {
        match self {
            Method::Truncating | Method::Bruteforce => "weight exact, fairness exact",
            Method::RelaxedFairness => "weight exact, fairness expected",
            Method::RelaxedKnapsack => "fairness exact, weight expected",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveChoice {
    Coverage,
    Modular,
    Saturating,
}

impl From<ObjectiveChoice> for ObjectiveKind {
    fn from(choice: ObjectiveChoice) -> ObjectiveKind {
        match choice {
            ObjectiveChoice::Coverage => ObjectiveKind::Coverage,
            ObjectiveChoice::Modular => ObjectiveKind::Modular,
            ObjectiveChoice::Saturating => ObjectiveKind::Saturating,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Structured,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum XSource {
    Greedy,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum RounderChoice {
    Weighted,
    Group,
}

#[derive(Args)]
struct GenArgs {
    /// Ground-set size.
    #[arg(long)]
    n: usize,
    /// Number of color groups (each group is guaranteed a member).
    #[arg(long)]
    k: usize,
    /// Master seed; a random one is drawn and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Lower end of the element weight range.
    #[arg(long, default_value_t = 0.5)]
    weight_lo: f64,
    /// Upper end of the element weight range.
    #[arg(long, default_value_t = 2.0)]
    weight_hi: f64,
    /// 0 = loose group intervals, 1 = as tight as they get.
    #[arg(long, default_value_t = 0.3)]
    tightness: f64,
    /// Budget as a multiple of a canonical per-group fill; >= 1 keeps the
    /// instance feasible.
    #[arg(long, default_value_t = 1.6)]
    slack: f64,
    /// Objective family.
    #[arg(long, value_enum, default_value_t = ObjectiveChoice::Coverage)]
    objective: ObjectiveChoice,
    /// Destination instance file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance files to check.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Solve method.
    #[arg(long, value_enum)]
    method: Method,
    /// Master seed; a random one is drawn and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Approximation slack; also scales the truncating method's budget.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Marginal threshold of the relaxed-fairness enumeration step.
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    /// Maximum seed-set size of the relaxed-fairness enumeration step.
    #[arg(long, default_value_t = 2)]
    t_max: usize,
    /// Continuous-greedy ascent steps.
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Monte-Carlo samples per gradient estimate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Let the truncating method enumerate more than 3 groups.
    #[arg(long)]
    allow_large_k: bool,
    /// Skip the exact oracle even when the instance is small enough.
    #[arg(long)]
    skip_opt: bool,
    /// Report destination; only the summary is printed when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format for --out.
    #[arg(long, value_enum, default_value_t = OutputFormat::Structured)]
    format: OutputFormat,
}

#[derive(Args)]
struct StatsArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Where the fractional point comes from.
    #[arg(long, value_enum, default_value_t = XSource::Greedy)]
    x_source: XSource,
    /// JSON array with the fractional point (required with --x-source file).
    #[arg(long)]
    x_file: Option<PathBuf>,
    /// Rounding scheme to measure.
    #[arg(long, value_enum, default_value_t = RounderChoice::Weighted)]
    rounder: RounderChoice,
    /// Independent rounding trials.
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    /// Master seed (greedy uses stream 0, the trials use stream 1); a
    /// random one is drawn and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Continuous-greedy ascent steps (for --x-source greedy).
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Monte-Carlo samples per gradient estimate (for --x-source greedy).
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Destination CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance files.
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated methods, or "all".
    #[arg(long, default_value = "all")]
    methods: String,
    /// Master seed (row i uses stream i); a random one is drawn and
    /// printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Approximation slack passed to every method.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Marginal threshold of the relaxed-fairness enumeration step.
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    /// Maximum seed-set size of the relaxed-fairness enumeration step.
    #[arg(long, default_value_t = 2)]
    t_max: usize,
    /// Continuous-greedy ascent steps.
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Monte-Carlo samples per gradient estimate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Destination CSV file.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) | Error::ParamsInfeasible(_) => 3,
        Error::Internal(_) => 4,
        _ => 2,
    }
}

/// Honors an explicit seed and otherwise draws one; either way the seed in
/// force gets printed so runs can be reproduced.
fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(|| rand::rng().random());
    println!("seed: {seed}");
    seed
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let seed = resolve_seed(args.seed);
    let params = GeneratorParams {
        n: args.n,
        k: args.k,
        weight_range: (args.weight_lo, args.weight_hi),
        bound_tightness: args.tightness,
        budget_slack: args.slack,
        objective: args.objective.into(),
    };
    let instance = model::generate_random(&params, seed)?;
    instance.save(&args.out)?;
    println!(
        "wrote {} elements in {} groups (budget {}) to {}",
        instance.n(),
        instance.k(),
        instance.budget,
        args.out.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let mut structural = 0usize;
    let mut infeasible = 0usize;
    for path in &args.instances {
        match Instance::load(path) {
            Err(err) => {
                println!("{}: unreadable: {err}", path.display());
                structural += 1;
            }
            Ok(instance) => {
                let report = model::validate(&instance);
                if report.is_valid() {
                    println!("{}: ok", path.display());
                } else {
                    for finding in &report.findings {
                        let kind = match finding.kind {
                            FindingKind::Structural => "structural",
                            FindingKind::Infeasible => "infeasible",
                        };
                        println!("{}: {kind}: {}", path.display(), finding.message);
                    }
                    if report.has_structural() {
                        structural += 1;
                    } else {
                        infeasible += 1;
                    }
                }
            }
        }
    }
    if structural > 0 {
        Err(Error::InvalidInstance(format!(
            "{structural} of {} files failed validation",
            args.instances.len()
        )))
    } else if infeasible > 0 {
        Err(Error::Infeasible(format!(
            "{infeasible} of {} files admit no feasible set",
            args.instances.len()
        )))
    } else {
        Ok(())
    }
}

/// What a solve produced, uniform across methods.
struct Solved {
    objective: f64,
    selected: Vec<usize>,
    /// Pretty JSON of the method's full report.
    structured: String,
    csv: String,
    /// Exact optimum, when the method itself computed it.
    opt: Option<f64>,
    /// Groups whose count fell outside the interval this run (only ever
    /// nonempty for the fairness-in-expectation method).
    violated_groups: Vec<usize>,
}

fn dispatch_solve(
    instance: &Instance,
    method: Method,
    greedy: GreedyConfig,
    eta: f64,
    t_max: usize,
    allow_large_k: bool,
) -> Result<Solved, Error> {
    match method {
        Method::Truncating => {
            let report = truncation::solve_fksm_truncating(instance, &greedy, allow_large_k)?;
            Ok(Solved {
                objective: report.objective,
                selected: report.solution.selected.clone(),
                structured: serde_json::to_string_pretty(&report).map_err(Error::from)?,
                csv: report.to_csv(),
                opt: None,
                violated_groups: Vec::new(),
            })
        }
        Method::RelaxedFairness | Method::RelaxedKnapsack => {
            let report = if method == Method::RelaxedFairness {
                let config = RelaxedConfig { greedy, eta, t_max };
                relaxed::solve_relaxed_fairness(instance, &config)?
            } else {
                relaxed::solve_relaxed_knapsack(instance, &greedy)?
            };
            Ok(Solved {
                objective: report.objective,
                selected: report.solution.selected.clone(),
                structured: serde_json::to_string_pretty(&report).map_err(Error::from)?,
                csv: format!(
                    "{}{}",
                    fairknap::relaxed::RelaxedReport::csv_header(),
                    report.to_csv_row()
                ),
                opt: None,
                violated_groups: report.violated_groups.clone(),
            })
        }
        Method::Bruteforce => {
            let result = oracle::brute_force_opt(instance)?;
            let csv = format!(
                "objective,gamma,beta,selected\n{},{},{},{}\n",
                result.best_value,
                join(&result.params.gamma),
                join(&result.params.beta),
                join(&result.best_set.selected),
            );
            Ok(Solved {
                objective: result.best_value,
                selected: result.best_set.selected.clone(),
                structured: serde_json::to_string_pretty(&result).map_err(Error::from)?,
                csv,
                opt: Some(result.best_value),
                violated_groups: Vec::new(),
            })
        }
    }
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let instance = Instance::load(&args.instance)?;
    let seed = resolve_seed(args.seed);
    let greedy = GreedyConfig {
        steps: args.steps,
        samples_per_gradient: args.samples,
        seed,
        epsilon: args.epsilon,
    };
    let solved = dispatch_solve(
        &instance,
        args.method,
        greedy,
        args.eta,
        args.t_max,
        args.allow_large_k,
    )?;

    let opt = match solved.opt {
        Some(opt) => Some(opt),
        None if !args.skip_opt && instance.n() <= OPT_GUARD => {
            Some(oracle::brute_force_opt(&instance)?.best_value)
        }
        None => None,
    };

    let mut summary = format!("objective {:.4}", solved.objective);
    if let Some(opt) = opt {
        let _ = write!(
            summary,
            "; OPT {:.4}; ratio {:.4}",
            opt,
            solved.objective / opt
        );
    }
    let _ = write!(
        summary,
        "; constraints: {}",
        args.method.constraint_status()
    );
    if !solved.violated_groups.is_empty() {
        let _ = write!(
            summary,
            " (groups outside interval this run: {})",
            join(&solved.violated_groups)
        );
    }
    println!("{summary}");
    println!("selected: {}", join(&solved.selected));

    if let Some(out) = &args.out {
        let payload = match args.format {
            OutputFormat::Structured => {
                let mut text = solved.structured;
                text.push('\n');
                text
            }
            OutputFormat::Csv => solved.csv,
        };
        std::fs::write(out, payload)?;
        println!("wrote report to {}", out.display());
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Error> {
    let instance = Instance::load(&args.instance)?;
    let seed = resolve_seed(args.seed);
    let x = match args.x_source {
        XSource::Greedy => {
            let config = GreedyConfig {
                steps: args.steps,
                samples_per_gradient: args.samples,
                seed: seeding::derive(seed, 0),
                epsilon: 0.1,
            };
            fractional::continuous_greedy(&instance, &config)?
        }
        XSource::File => {
            let path = args
                .x_file
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--x-source file needs --x-file".into()))?;
            let text = std::fs::read_to_string(path)?;
            FractionalVector(serde_json::from_str(&text)?)
        }
    };
    let rounder = match args.rounder {
        RounderChoice::Weighted => Rounder::Weighted,
        RounderChoice::Group => Rounder::Group,
    };
    let stats = rounding::monte_carlo_stats(
        &instance,
        &instance.objective,
        &x,
        rounder,
        args.trials,
        seeding::derive(seed, 1),
    )?;
    std::fs::write(&args.out, stats.to_csv())?;
    println!(
        "wrote {} rounder statistics ({} trials, {} coordinates) to {}",
        rounder,
        args.trials,
        instance.n(),
        args.out.display()
    );
    Ok(())
}

fn parse_methods(spec: &str) -> Result<Vec<Method>, Error> {
    if spec == "all" {
        return Ok(vec![
            Method::Truncating,
            Method::RelaxedFairness,
            Method::RelaxedKnapsack,
            Method::Bruteforce,
        ]);
    }
    spec.split(',')
        .map(|name| {
            Method::from_str(name.trim(), true)
                .map_err(|_| Error::InvalidParameter(format!("unknown method \"{name}\"")))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let methods = parse_methods(&args.methods)?;
    let seed = resolve_seed(args.seed);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInstance(format!(
            "no files in {}",
            args.dir.display()
        )));
    }

    let mut csv =
        String::from("instance,method,objective,opt,ratio,weight,group_counts,wall_time_ms\n");
    let mut rows = 0usize;
    let mut row_index = 0u64;
    for path in &paths {
        let instance = match Instance::load(path) {
            Ok(instance) => instance,
            Err(err) => {
                eprintln!("warning: skipping {}: {err}", path.display());
                continue;
            }
        };
        let opt = if instance.n() <= OPT_GUARD {
            match oracle::brute_force_opt(&instance) {
                Ok(result) => Some(result.best_value),
                Err(err) => {
                    eprintln!("warning: skipping {}: {err}", path.display());
                    continue;
                }
            }
        } else {
            None
        };
        for &method in &methods {
            let greedy = GreedyConfig {
                steps: args.steps,
                samples_per_gradient: args.samples,
                seed: seeding::derive(seed, row_index),
                epsilon: args.epsilon,
            };
            row_index += 1;
            let started = Instant::now();
            let solved =
                match dispatch_solve(&instance, method, greedy, args.eta, args.t_max, false) {
                    Ok(solved) => solved,
                    Err(err) => {
                        eprintln!(
                            "warning: {} failed on {}: {err}",
                            method.name(),
                            path.display()
                        );
                        continue;
                    }
                };
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let set = fairknap::ElementSet::from_ids(instance.n(), &solved.selected)?;
            let (opt_cell, ratio_cell) = match opt {
                Some(opt) => (opt.to_string(), (solved.objective / opt).to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                file_label(path),
                method.name(),
                solved.objective,
                opt_cell,
                ratio_cell,
                instance.weight_of(&set),
                join(&instance.group_counts(&set)),
                wall_ms
            );
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::InvalidInstance(format!(
            "no instance in {} produced a row",
            args.dir.display()
        )));
    }
    std::fs::write(&args.out, csv)?;
    println!(
        "wrote {rows} rows ({} instances x {} methods attempted) to {}",
        paths.len(),
        methods.len(),
        args.out.display()
    );
    Ok(())
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
