use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ifi_cli::{
    cmd_decode, cmd_experiment, cmd_gen, cmd_report, cmd_sketch, parse_fraction, CliError,
    DecodeOptions, ExperimentConfig, GenOptions, ReportOptions, SketchOptions,
};
use ifi_core::sketch::SketchKind;
use ifi_core::Ratio64;

/// Itemset-frequency-indicator sketch experiments: generate permutation-
/// encoding hard instances, build sketches, decode the permutations back
/// through sketch queries, and report sizes against the encoded entropy.
#[derive(Parser)]
#[command(name = "ifi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SketchArg {
    Sampling,
    Exact,
}

impl From<SketchArg> for SketchKind {
    fn from(value: SketchArg) -> Self {
        match value {
            SketchArg::Sampling => SketchKind::Sampling,
            SketchArg::Exact => SketchKind::ExactPairs,
        }
    }
}

fn fraction(s: &str) -> Result<Ratio64, String> {
    parse_fraction(s)
}

#[derive(Args)]
struct GenArgs {
    /// Number of columns; eps*d/2 must be an integer
    #[arg(long)]
    d: usize,
    /// Instance epsilon as an exact fraction p/q; 1/eps must be an integer
    #[arg(long, value_parser = fraction)]
    eps: Ratio64,
    /// Base seed for permutations and rows
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows per block; default ceil(48 ln max(d,3))
    #[arg(long)]
    rows_per_block: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SketchArgs {
    /// Directory holding instance.ifdb / instance.manifest
    #[arg(long)]
    out: PathBuf,
    /// Database file (defaults to OUT/instance.ifdb)
    #[arg(long)]
    db: Option<PathBuf>,
    /// Sketch kind
    #[arg(long, value_enum, default_value = "exact")]
    sketch: SketchArg,
    /// Sketch epsilon p/q (defaults to instance eps / 8 from the manifest)
    #[arg(long, value_parser = fraction)]
    sketch_eps: Option<Ratio64>,
    /// Seed for the sampling sketch
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DecodeArgs {
    /// Directory holding sketch.ifsk / instance.manifest
    #[arg(long)]
    out: PathBuf,
    /// Sketch file (defaults to OUT/sketch.ifsk)
    #[arg(long)]
    sketch: Option<PathBuf>,
    /// Manifest file (defaults to OUT/instance.manifest)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, value_parser = fraction)]
    eps: Ratio64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    rows_per_block: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    sketch: SketchArg,
    /// Sketch epsilon p/q (defaults to eps / 8)
    #[arg(long, value_parser = fraction)]
    sketch_eps: Option<Ratio64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV written by `experiment`
    #[arg(long)]
    records: PathBuf,
    /// Write the canonical CSV here instead of stdout
    #[arg(long)]
    out_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hard instance: hidden permutations plus their database
    Gen(GenArgs),
    /// Build an indicator sketch over a generated database
    Sketch(SketchArgs),
    /// Decode permutations through a sketch and compare to the manifest
    Decode(DecodeArgs),
    /// Run seeded end-to-end trials and write per-trial records
    Experiment(ExperimentArgs),
    /// Re-emit a records file as canonical CSV
    Report(ReportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => {
            cmd_gen(&GenOptions {
                d: args.d,
                epsilon: args.eps,
                rows_per_block: args.rows_per_block,
                seed: args.seed,
                out: args.out,
            })?;
        }
        Command::Sketch(args) => {
            cmd_sketch(&SketchOptions {
                out: args.out,
                db: args.db,
                kind: args.sketch.into(),
                sketch_epsilon: args.sketch_eps,
                seed: args.seed,
            })?;
        }
        Command::Decode(args) => {
            cmd_decode(&DecodeOptions {
                out: args.out,
                sketch: args.sketch,
                manifest: args.manifest,
            })?;
        }
        Command::Experiment(args) => {
            let config = ExperimentConfig::new(
                args.d,
                args.eps,
                args.rows_per_block,
                args.seed,
                args.trials,
                args.sketch.into(),
                args.sketch_eps,
            )?;
            cmd_experiment(&config, &args.out)?;
        }
        Command::Report(args) => {
            cmd_report(&ReportOptions {
                records: args.records,
                out_file: args.out_file,
            })?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
