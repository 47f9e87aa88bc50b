//! Command-line harness for KLR Hopfield networks.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use klr_hopfield::experiments::{
    run_capacity_experiment, run_dynamics_experiment, run_efficiency_experiment, ExperimentConfig,
};
use klr_hopfield::kernel::{BipolarVector, KernelParams, PatternSet};
use klr_hopfield::model_io::{load_model, save_model, ModelFile};
use klr_hopfield::trainer::{train_network, TrainConfig};
use klr_hopfield::{
    dynamics, inject_noise, report, seed, stability_report, NetworkState, RetrievalOutcome,
    UpdateScheme,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

// Seed-stream tags for the CLI entry points; experiment subcommands use the
// tags owned by the experiments module.
const TAG_CLI_TRAIN: u64 = 100;
const TAG_CLI_RETRIEVE_NOISE: u64 = 101;
const TAG_CLI_RETRIEVE_ORDER: u64 = 102;

#[derive(Parser)]
#[command(
    name = "klr-hopfield",
    version,
    about = "Kernel logistic regression Hopfield associative memories",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network on random patterns and save the model.
    Train(TrainArgs),
    /// Load a model, corrupt a stored pattern, and run retrieval.
    Retrieve(RetrieveArgs),
    /// Seeded, trial-averaged experiments emitting CSV.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCmd,
    },
    /// Margin / interference diagnostics for a model at a given state.
    Stability(StabilityArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("pattern_count").required(true).args(["load", "patterns"])))]
struct TrainArgs {
    /// Network size N.
    #[arg(long)]
    n: usize,
    /// Storage load P/N; P = round(load * N).
    #[arg(long)]
    load: Option<f64>,
    /// Number of stored patterns P (alternative to --load).
    #[arg(long)]
    patterns: Option<usize>,
    /// RBF kernel locality parameter.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Weight decay (L2 coefficient).
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// Gradient descent learning rate.
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Gradient descent iterations.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Seed for the random pattern set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RetrieveArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Index of the stored pattern to retrieve.
    #[arg(long, default_value_t = 0)]
    target_index: usize,
    /// Fraction of bits to corrupt before retrieval.
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    /// Update scheme: sync | async.
    #[arg(long, value_parser = parse_scheme, default_value = "async")]
    scheme: UpdateScheme,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    /// Seed for noise injection and update order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Synchronous vs asynchronous overlap trajectories at one condition.
    Dynamics(DynamicsArgs),
    /// Recall accuracy across a (size, load) grid.
    Capacity(CapacityArgs),
    /// Event counts vs initial errors across a noise grid (async only).
    Efficiency(EfficiencyArgs),
}

#[derive(Args)]
struct CommonExperimentArgs {
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Independent trials per condition.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    /// Master seed; per-trial streams are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Trial parallelism (default: all cores, or KLR_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write a companion gnuplot script next to the CSV.
    #[arg(long, default_value_t = false)]
    emit_plotscript: bool,
}

#[derive(Args)]
struct DynamicsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    load: f64,
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[command(flatten)]
    common: CommonExperimentArgs,
}

#[derive(Args)]
struct CapacityArgs {
    /// Network sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    sizes: Vec<usize>,
    /// Storage loads P/N, comma separated, ascending.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10,12,15,20,25,30")]
    loads: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[command(flatten)]
    common: CommonExperimentArgs,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    load: f64,
    /// Noise levels: `start:end:step` (inclusive) or a comma list.
    #[arg(long, value_parser = parse_noise_grid, default_value = "0.05:0.40:0.05")]
    noise_grid: NoiseGrid,
    #[command(flatten)]
    common: CommonExperimentArgs,
}

#[derive(Args)]
#[command(group(ArgGroup::new("state_source").required(true).args(["at_pattern", "state_file"])))]
struct StabilityArgs {
    #[arg(long)]
    model: PathBuf,
    /// Evaluate at stored pattern with this index.
    #[arg(long)]
    at_pattern: Option<usize>,
    /// Evaluate at a state read from a text file of +/-1 entries.
    #[arg(long)]
    state_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
struct NoiseGrid(Vec<f64>);

fn parse_scheme(s: &str) -> Result<UpdateScheme, String> {
    UpdateScheme::from_str(s).map_err(|e| e.to_string())
}

fn parse_noise_grid(s: &str) -> Result<NoiseGrid, String> {
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("expected start:end:step".into());
        }
        let start: f64 = parts[0].parse().map_err(|_| format!("bad start `{}`", parts[0]))?;
        let end: f64 = parts[1].parse().map_err(|_| format!("bad end `{}`", parts[1]))?;
        let step: f64 = parts[2].parse().map_err(|_| format!("bad step `{}`", parts[2]))?;
        if step <= 0.0 || end < start {
            return Err("need step > 0 and end >= start".into());
        }
        let count = ((end - start) / step + 0.5).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        s.split(',')
            .map(|part| part.trim().parse::<f64>().map_err(|_| format!("bad noise level `{part}`")))
            .collect::<Result<Vec<f64>, String>>()?
    };
    for &v in &values {
        if !(0.0..=1.0).contains(&v) {
            return Err(format!("noise level {v} outside [0, 1]"));
        }
    }
    if values.is_empty() {
        return Err("empty noise grid".into());
    }
    Ok(NoiseGrid(values))
}

enum RunError {
    Usage(String),
    Runtime(String),
}

impl From<klr_hopfield::Error> for RunError {
    fn from(e: klr_hopfield::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(requested: Option<usize>) -> Result<(), RunError> {
    let threads = requested.or_else(|| {
        std::env::var("KLR_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if t == 0 {
            return Err(RunError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| RunError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Retrieve(args) => retrieve(args),
        Command::Experiment { kind } => match kind {
            ExperimentCmd::Dynamics(args) => experiment_dynamics(args),
            ExperimentCmd::Capacity(args) => experiment_capacity(args),
            ExperimentCmd::Efficiency(args) => experiment_efficiency(args),
        },
        Command::Stability(args) => stability(args),
    }
}

fn train(args: TrainArgs) -> Result<(), RunError> {
    let p = match (args.load, args.patterns) {
        (Some(load), None) => {
            let p = (load * args.n as f64).round() as usize;
            if p == 0 {
                return Err(RunError::Usage(format!(
                    "load {load} at n = {} rounds to zero patterns",
                    args.n
                )));
            }
            p
        }
        (None, Some(p)) => p,
        _ => unreachable!("clap enforces exactly one of --load/--patterns"),
    };
    let params = KernelParams::new(args.gamma)?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        weight_decay: args.lambda,
        iterations: args.iters,
    };
    let mut rng = seed::rng(args.seed, &[TAG_CLI_TRAIN]);
    let patterns = PatternSet::random(args.n, p, &mut rng)?;

    eprintln!("training n={} p={p} gamma={} ...", args.n, args.gamma);
    let started = std::time::Instant::now();
    let weights = train_network(&patterns, &params, &cfg)?;
    let model = ModelFile { train: cfg, seed: args.seed, patterns, weights };
    save_model(&model, &args.out)?;
    println!(
        "saved model n={} p={p} to {} ({:.1?})",
        args.n,
        args.out.display(),
        started.elapsed()
    );
    Ok(())
}

fn outcome_label(outcome: RetrievalOutcome) -> &'static str {
    match outcome {
        RetrievalOutcome::FixedPoint => "fixed-point",
        RetrievalOutcome::TwoCycle => "2-cycle",
        RetrievalOutcome::EpochLimit => "epoch-limit",
    }
}

fn retrieve(args: RetrieveArgs) -> Result<(), RunError> {
    let model = load_model(&args.model)?;
    if args.target_index >= model.p() {
        return Err(RunError::Runtime(format!(
            "target index {} out of range: model stores {} patterns",
            args.target_index,
            model.p()
        )));
    }
    let target = model.patterns.pattern(args.target_index);
    let mut noise_rng = seed::rng(args.seed, &[TAG_CLI_RETRIEVE_NOISE]);
    let (corrupted, d) = inject_noise(target, args.noise, &mut noise_rng)?;
    let mut order_rng = seed::rng(args.seed, &[TAG_CLI_RETRIEVE_ORDER]);
    let trace = dynamics::run_retrieval(
        &model.weights,
        &model.patterns,
        &corrupted,
        target,
        args.scheme,
        args.max_epochs,
        &mut order_rng,
    )?;

    println!(
        "target {} of {} (n={}), noise {} -> {d} corrupted bits",
        args.target_index,
        model.p(),
        model.n(),
        args.noise
    );
    println!(
        "scheme {}: {} after {} epochs, {} events, final overlap {:.6}",
        args.scheme,
        outcome_label(trace.outcome),
        trace.epochs_run,
        trace.total_events(),
        trace.final_overlap()
    );
    let overlaps: Vec<String> = trace.overlaps.iter().map(|o| format!("{o:.4}")).collect();
    println!("overlap per epoch: {}", overlaps.join(" "));
    println!("energy per epoch:  {}", trace.energies.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(" "));
    Ok(())
}

fn base_config(common: &CommonExperimentArgs, n: usize, load: f64, noise: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(n, load);
    cfg.gamma = common.gamma;
    cfg.train = TrainConfig {
        learning_rate: common.lr,
        weight_decay: common.lambda,
        iterations: common.iters,
    };
    cfg.noise_fraction = noise;
    cfg.trials = common.trials;
    cfg.max_epochs = common.max_epochs;
    cfg.master_seed = common.seed;
    cfg
}

fn write_outputs(
    common: &CommonExperimentArgs,
    csv: &str,
    plotscript: Option<String>,
) -> Result<(), RunError> {
    report::write_text(&common.out, csv)?;
    println!("wrote {}", common.out.display());
    if let Some(script) = plotscript {
        let path = common.out.with_extension("gnuplot");
        report::write_text(&path, &script)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn csv_file_name(common: &CommonExperimentArgs) -> String {
    common
        .out
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| common.out.display().to_string())
}

fn experiment_dynamics(args: DynamicsArgs) -> Result<(), RunError> {
    configure_threads(args.common.threads)?;
    let cfg = base_config(&args.common, args.n, args.load, args.noise);
    let agg = run_dynamics_experiment(&cfg)?;
    for traj in &agg.schemes {
        println!(
            "{}: accuracy {:.3}, final mean overlap {:.4} after {} epochs",
            traj.scheme,
            traj.accuracy,
            traj.final_overlap_mean(),
            traj.overlap_mean.len() - 1
        );
    }
    println!(
        "async energy non-increasing in {:.0}% of trials",
        100.0 * agg.async_energy_monotone_fraction
    );
    let script = args
        .common
        .emit_plotscript
        .then(|| report::dynamics_plotscript(&csv_file_name(&args.common)));
    write_outputs(&args.common, &report::dynamics_csv(&agg), script)
}

fn experiment_capacity(args: CapacityArgs) -> Result<(), RunError> {
    configure_threads(args.common.threads)?;
    // n and load here are placeholders; the grid drives the runs.
    let first_n = *args.sizes.first().ok_or(RunError::Usage("empty --sizes".into()))?;
    let first_load = *args.loads.first().ok_or(RunError::Usage("empty --loads".into()))?;
    let cfg = base_config(&args.common, first_n, first_load, args.noise);
    let agg = run_capacity_experiment(&cfg, &args.sizes, &args.loads)?;
    for pt in &agg.points {
        println!(
            "n={} load={} {}: accuracy {:.3} +/- {:.3}",
            pt.n, pt.load, pt.scheme, pt.accuracy_mean, pt.accuracy_std
        );
    }
    let script = args
        .common
        .emit_plotscript
        .then(|| report::capacity_plotscript(&csv_file_name(&args.common), &agg.sizes));
    write_outputs(&args.common, &report::capacity_csv(&agg), script)
}

fn experiment_efficiency(args: EfficiencyArgs) -> Result<(), RunError> {
    configure_threads(args.common.threads)?;
    let grid = args.noise_grid.0.clone();
    let cfg = base_config(&args.common, args.n, args.load, grid[0]);
    let agg = run_efficiency_experiment(&cfg, &grid)?;
    for pt in &agg.points {
        println!(
            "noise {:.2}: events {:.2} +/- {:.2} (ideal {:.1}), success {:.2}",
            pt.noise_fraction, pt.mean_events, pt.std_events, pt.mean_initial_hamming, pt.success_rate
        );
    }
    let script = args
        .common
        .emit_plotscript
        .then(|| report::efficiency_plotscript(&csv_file_name(&args.common)));
    write_outputs(&args.common, &report::efficiency_csv(&agg), script)
}

fn read_state_file(path: &PathBuf, n: usize) -> Result<BipolarVector, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for token in text.split_whitespace() {
        let v: i8 = token
            .parse()
            .map_err(|_| RunError::Runtime(format!("{}: bad state entry `{token}`", path.display())))?;
        values.push(v);
    }
    if values.len() != n {
        return Err(RunError::Runtime(format!(
            "{}: state has {} entries, expected n={n}",
            path.display(),
            values.len()
        )));
    }
    Ok(BipolarVector::new(values)?)
}

fn stability(args: StabilityArgs) -> Result<(), RunError> {
    let model = load_model(&args.model)?;
    let state = match (args.at_pattern, &args.state_file) {
        (Some(mu), None) => NetworkState::at_pattern(
            &model.patterns,
            *model.weights.params(),
            mu,
        )?,
        (None, Some(path)) => {
            let s = read_state_file(path, model.n())?;
            NetworkState::new(&model.patterns, *model.weights.params(), s)?
        }
        _ => unreachable!("clap enforces exactly one state source"),
    };
    let report = stability_report(&model.weights, &state);
    let text = match args.format {
        ReportFormat::Csv => report::stability_csv(&report, model.n(), model.p(), model.gamma()),
        ReportFormat::Json => report::stability_json(&report),
    };
    match &args.out {
        Some(path) => {
            report::write_text(path, &text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
