use std::path::{Path, PathBuf};
use std::process::ExitCode;

use archive_core::experiment::{self, ExperimentConfig};
use archive_core::refsets::{build_sequence, write_sequence, BatchSize, FrontKind};
use archive_core::selftest::{run_selftest, SelftestOptions};
use archive_core::Error;
use clap::{Args, Parser, Subcommand};

/// Bounded archive truncation benchmark.
#[derive(Debug, Parser)]
#[command(name = "archtrunc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a front, shuffle it and write it as a sequence file.
    Generate(GenerateArgs),
    /// Run the experiment grid and print the summary table.
    Run(RunArgs),
    /// Recompute the summary from raw_results.csv in a results directory.
    Stats(ResultsArgs),
    /// Rewrite plot-data files from raw_results.csv and the median archives.
    Plotdata(ResultsArgs),
    /// Check the core routines against embedded oracles.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// `simplex` or `inverted`.
    #[arg(long)]
    front: FrontKind,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Seed of the sampled point set.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seed of the arrival order; defaults to `--seed`.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Batch size written into the file: a positive integer or `all`.
    #[arg(long, default_value = "all", value_parser = parse_batch)]
    batch_size: BatchSize,
    /// Number of objectives.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Output file; defaults to `<front>_<n>_<seed>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long, conflicts_with = "smoke")]
    config: Option<PathBuf>,
    /// Use the small smoke-test grid instead of a config file.
    #[arg(long)]
    smoke: bool,
    /// Worker thread cap; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Results directory; overrides the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResultsArgs {
    /// Directory written by `run`.
    #[arg(long)]
    results: PathBuf,
    /// Significance level; defaults to the one in the directory's config.json.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Scale every hypervolume under test (negative control).
    #[arg(long, hide = true, default_value_t = 1.0)]
    perturb_hv: f64,
    #[arg(long, hide = true, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, hide = true)]
    seed: Option<u64>,
}

fn parse_batch(s: &str) -> Result<BatchSize, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(BatchSize::All);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or `all`, got `{s}`")),
        Ok(k) => Ok(BatchSize::Fixed(k)),
    }
}

fn generate(args: GenerateArgs) -> Result<(), Error> {
    let seq = build_sequence(
        args.front,
        args.m,
        args.n,
        args.seed,
        args.shuffle_seed.unwrap_or(args.seed),
        args.batch_size,
    )?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}_{}.csv", args.front.name(), args.n, args.seed)));
    write_sequence(&out, &seq.batches)?;
    println!("wrote {} solutions in {} batches to {}", seq.len(), seq.batches.len(), out.display());
    Ok(())
}

fn run(args: RunArgs) -> Result<bool, Error> {
    let mut config = match (&args.config, args.smoke) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, true) => ExperimentConfig::smoke(),
        (None, false) => ExperimentConfig::default(),
    };
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    let outcome = experiment::run_experiment(&config)?;
    print!("{}", experiment::render_summary_table(&outcome.cells));
    println!(
        "{} runs written to {}",
        outcome.runs.len(),
        outcome.output_dir.display()
    );
    for f in &outcome.failures {
        eprintln!(
            "failed: {} shuffle {}: {}",
            f.cell.file_stem(),
            f.shuffle,
            f.message
        );
    }
    Ok(outcome.failures.is_empty())
}

fn alpha_for(dir: &Path, alpha: Option<f64>) -> Result<f64, Error> {
    if let Some(a) = alpha {
        return Ok(a);
    }
    let path = dir.join("config.json");
    if path.exists() {
        Ok(ExperimentConfig::from_path(&path)?.alpha)
    } else {
        Ok(ExperimentConfig::default().alpha)
    }
}

fn selftest(args: SelftestArgs) -> bool {
    let defaults = SelftestOptions::default();
    let report = run_selftest(&SelftestOptions {
        hv_scale: args.perturb_hv,
        mc_samples: args.mc_samples,
        seed: args.seed.unwrap_or(defaults.seed),
    });
    for check in &report.checks {
        let status = if check.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} ({} cases)", check.name, check.cases);
        for f in &check.failures {
            println!("    {f}");
        }
    }
    report.passed()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => generate(args).map(|_| true),
        Command::Run(args) => run(args),
        Command::Stats(args) => alpha_for(&args.results, args.alpha).and_then(|alpha| {
            let cells = experiment::rebuild_summary(&args.results, alpha)?;
            print!("{}", experiment::render_summary_table(&cells));
            Ok(true)
        }),
        Command::Plotdata(args) => alpha_for(&args.results, args.alpha).and_then(|alpha| {
            let n = experiment::rebuild_plot_data(&args.results, alpha)?;
            println!("wrote {n} plot-data files to {}", args.results.join("plotdata").display());
            Ok(true)
        }),
        Command::Selftest(args) => Ok(selftest(args)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
