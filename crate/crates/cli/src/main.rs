use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gencorr::io::{self, MatrixFile};
use gencorr::moments::{build_moment_cache, DEFAULT_VAR_TOLERANCE};
use gencorr::pipeline::{run_pipeline, PipelineConfig};
use gencorr::screen::{screen_interactions_cached, screen_marginal_cached, InteractionOptions};
use gencorr::sim::{parse_method, run_replications, SimConfig};
use gencorr::{dcsis_screen, sirs_screen, Dataset, Error, NormSpec, ScreenReport};

#[derive(Parser)]
#[command(name = "gencorr", version, about = "Generalized-correlation feature screening")]
struct Cli {
    /// Worker threads; output does not depend on this value.
    #[arg(long, global = true, env = "GENCORR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank individual predictors.
    Screen(ScreenArgs),
    /// Rank predictor tuples by joint cumulant with the response.
    Interact(InteractArgs),
    /// Run a named simulation design.
    Simulate(SimulateArgs),
    /// Two-pass marginal selection plus an interaction scan.
    Pipeline(PipelineArgs),
    /// Score candidate models by sAICc.
    Saicc(SaiccArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Predictor matrix, one observation per line.
    #[arg(long)]
    x: PathBuf,
    /// Response matrix, one observation per line.
    #[arg(long)]
    y: PathBuf,
    /// Field delimiter for both files.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// The predictor file starts with a header of feature names.
    #[arg(long)]
    x_header: bool,
    /// The response file starts with a header of response names.
    #[arg(long)]
    y_header: bool,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!("delimiter '{}' is not ASCII", self.delimiter)).into());
        }
        let d = self.delimiter as u8;
        let x = MatrixFile::new(&self.x).delimiter(d).header(self.x_header);
        let y = MatrixFile::new(&self.y).delimiter(d).header(self.y_header);
        Ok(io::load_dataset(&x, &y)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScreenMethod {
    Gencorr,
    Sirs,
    Dcsis,
}

#[derive(Args)]
struct ScreenArgs {
    #[command(flatten)]
    input: InputArgs,
    /// taxicab, frobenius, or lp:<exponent>.
    #[arg(long, default_value = "frobenius")]
    norm: NormSpec,
    #[arg(long, value_enum, default_value = "gencorr")]
    method: ScreenMethod,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InteractArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "frobenius")]
    norm: NormSpec,
    /// Tuple size.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Number of tuples to keep.
    #[arg(long, default_value_t = 1000)]
    top_k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of 1A 1B 1C 2A 3A 3B 3C 4A 5A 5B 5C.
    #[arg(long)]
    sim: String,
    #[arg(long, default_value_t = 400)]
    reps: usize,
    /// Base seed; chosen from the clock and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of gencorr-T, gencorr-F, sirs, dcsis.
    #[arg(long, default_value = "gencorr-T,gencorr-F")]
    methods: String,
    /// Override the number of predictors of the design.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of marginal predictors to keep; 2·round(n / ln n) by default.
    #[arg(long)]
    d: Option<usize>,
    /// Seed for the training/validation split.
    #[arg(long)]
    split_seed: Option<u64>,
    /// Number of pairwise interactions to keep; d by default.
    #[arg(long)]
    interaction_budget: Option<usize>,
    #[arg(long, default_value = "frobenius")]
    norm: NormSpec,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SaiccArgs {
    /// CSV with columns model_id,k,deviance,null_deviance.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn clock_seed() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

fn resolve_seed(seed: Option<u64>, what: &str) -> u64 {
    seed.unwrap_or_else(|| {
        let s = clock_seed();
        eprintln!("{what}: {s}");
        s
    })
}

fn emit_report(report: &ScreenReport, data: &Dataset, out: Option<&Path>) -> Result<()> {
    let names = data.feature_names();
    match out {
        Some(path) => io::write_report(report, names, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            io::write_report_to(&mut w, report, names)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn screen(args: &ScreenArgs) -> Result<()> {
    let data = args.input.load()?;
    let report = match args.method {
        ScreenMethod::Gencorr => {
            let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE)?;
            screen_marginal_cached(&cache, args.norm)?
        }
        ScreenMethod::Sirs => sirs_screen(&data)?,
        ScreenMethod::Dcsis => dcsis_screen(&data)?,
    };
    if !report.meta().degenerate.is_empty() {
        log::warn!("{} degenerate predictors skipped", report.meta().degenerate.len());
    }
    emit_report(&report, &data, args.out.as_deref())
}

fn interact(args: &InteractArgs) -> Result<()> {
    let data = args.input.load()?;
    let cache = build_moment_cache(&data, DEFAULT_VAR_TOLERANCE)?;
    let report = screen_interactions_cached(&cache, args.order, args.norm, InteractionOptions::top_k(args.top_k))?;
    emit_report(&report, &data, args.out.as_deref())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let seed = resolve_seed(args.seed, "seed");
    let mut config = SimConfig::named(&args.sim)?.with_reps(args.reps).with_seed(seed);
    if let Some(p) = args.p {
        config.p = p;
    }
    let methods = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_method)
        .collect::<gencorr::Result<Vec<_>>>()?;
    let result = run_replications(&config, &methods)?;
    if result.regenerations > 0 {
        log::info!("{} overflowing draws regenerated", result.regenerations);
    }
    io::write_sim_result(&result, &args.out_dir)
        .with_context(|| format!("writing results to {}", args.out_dir.display()))?;
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let data = args.input.load()?;
    let seed = resolve_seed(args.split_seed, "split seed");
    let mut config = PipelineConfig::for_sample_size(data.n(), seed);
    config.norm = args.norm;
    if let Some(d) = args.d {
        config.d = d;
        config.interaction_budget = d;
    }
    if let Some(b) = args.interaction_budget {
        config.interaction_budget = b;
    }
    let outcome = run_pipeline(&data, &config)?;
    io::write_pipeline(&outcome, data.feature_names(), &args.out_dir)?;
    Ok(())
}

fn saicc(args: &SaiccArgs) -> Result<()> {
    let models = io::read_candidates(&args.input)?;
    let scores = io::score_candidates(&models, args.n, args.q)?;
    match &args.out {
        Some(path) => io::write_saicc(&scores, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            io::write_saicc_to(&mut w, &scores)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_numeric() => 4,
        Some(Error::Config(_)) => 2,
        Some(Error::Replicate { source, .. }) if matches!(**source, Error::Config(_)) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be at least 1".into()).into()),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting worker pool")?;
    match &cli.command {
        Command::Screen(a) => screen(a),
        Command::Interact(a) => interact(a),
        Command::Simulate(a) => simulate(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Saicc(a) => saicc(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
