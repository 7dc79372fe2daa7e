//! Subcommand implementations. Each is an ordinary function over plain
//! option structs so the test suites drive them directly.

use std::cell::Cell;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use ifi_core::dataset::{Database, Itemset};
use ifi_core::lowerbound::{
    decode_any, entropy_bits, generate_instance, verify_gap, CodecError, Manifest, PermutationGrid,
};
use ifi_core::sketch::{
    build_exact_pairs, build_sampling, IndicatorAnswer, IndicatorOracle, SketchBlob, SketchError,
    SketchKind, SketchParams,
};
use ifi_core::Ratio64;

use crate::config::{CliError, ExperimentConfig};
use crate::record::{write_records, Summary, TrialRecord};

pub const DB_FILE: &str = "instance.ifdb";
pub const MANIFEST_FILE: &str = "instance.manifest";
pub const SKETCH_FILE: &str = "sketch.ifsk";
pub const DECODED_FILE: &str = "decoded.manifest";
pub const RECORDS_FILE: &str = "records.csv";

#[derive(Debug, Clone)]
pub struct GenOptions {
    pub d: usize,
    pub epsilon: Ratio64,
    pub rows_per_block: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct SketchOptions {
    pub out: PathBuf,
    pub db: Option<PathBuf>,
    pub kind: SketchKind,
    pub sketch_epsilon: Option<Ratio64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DecodeOptions {
    pub out: PathBuf,
    pub sketch: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub records: PathBuf,
    pub out_file: Option<PathBuf>,
}

/// Generate an instance and write `instance.manifest` + `instance.ifdb`
/// into the output directory. Deterministic per seed: rerunning with the
/// same options rewrites identical bytes.
pub fn cmd_gen(opts: &GenOptions) -> Result<Manifest, CliError> {
    let config = ExperimentConfig::new(
        opts.d,
        opts.epsilon,
        opts.rows_per_block,
        opts.seed,
        1,
        SketchKind::ExactPairs,
        None,
    )?;
    let (blocks, m) = layout_of(&config)?;
    let grid = PermutationGrid::random_from_seed(opts.seed, blocks, m);
    let inst = generate_instance(opts.d, opts.epsilon, grid, config.rows_per_block, opts.seed)?;
    let manifest = Manifest::from_instance(&inst);

    fs::create_dir_all(&opts.out)?;
    let manifest_path = opts.out.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_string())?;
    let db_path = opts.out.join(DB_FILE);
    write_db(&db_path, inst.db())?;

    println!(
        "wrote {} ({} permutations of {}) and {} ({} rows x {} cols)",
        manifest_path.display(),
        manifest.blocks * manifest.blocks,
        manifest.m,
        db_path.display(),
        manifest.n,
        manifest.d
    );
    Ok(manifest)
}

/// Build a sketch over a generated database and write `sketch.ifsk`.
/// The sketch epsilon defaults to one eighth of the instance epsilon
/// recorded in the manifest.
pub fn cmd_sketch(opts: &SketchOptions) -> Result<SketchBlob, CliError> {
    let db_path = opts.db.clone().unwrap_or_else(|| opts.out.join(DB_FILE));
    let db = read_db(&db_path)?;

    let sketch_epsilon = match opts.sketch_epsilon {
        Some(eps) => eps,
        None => {
            let manifest = read_manifest(&opts.out.join(MANIFEST_FILE))?;
            manifest.epsilon / Ratio64::new(8, 1)
        }
    };
    let params = SketchParams::new(sketch_epsilon, 2, db.d())?;
    let blob = match opts.kind {
        SketchKind::ExactPairs => build_exact_pairs(&db, &params)?,
        SketchKind::Sampling => build_sampling(&db, &params, opts.seed)?,
    };

    let sketch_path = opts.out.join(SKETCH_FILE);
    let mut file = io::BufWriter::new(fs::File::create(&sketch_path)?);
    blob.write_to(&mut file)?;
    use io::Write as _;
    file.flush()?;
    println!(
        "wrote {} ({:?}, {} bits)",
        sketch_path.display(),
        blob.kind(),
        blob.size_bits()
    );
    Ok(blob)
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub decode_ok: bool,
    pub queries: u64,
    /// Present when decoding refused to guess (ambiguous answers).
    pub ambiguity: Option<String>,
}

/// Decode permutations back out of a sketch and compare them to the
/// generated manifest. Writes `decoded.manifest` on a successful decode;
/// decode_ok means it is byte-identical to the instance manifest.
pub fn cmd_decode(opts: &DecodeOptions) -> Result<DecodeOutcome, CliError> {
    let manifest_path = opts
        .manifest
        .clone()
        .unwrap_or_else(|| opts.out.join(MANIFEST_FILE));
    let manifest = read_manifest(&manifest_path)?;
    let sketch_path = opts
        .sketch
        .clone()
        .unwrap_or_else(|| opts.out.join(SKETCH_FILE));
    let blob = read_sketch(&sketch_path)?;

    let counter = CountingOracle::new(&blob);
    let outcome = match decode_any(&counter, manifest.d, manifest.epsilon) {
        Ok(decoded) => {
            let mut decoded_manifest = manifest.clone();
            decoded_manifest.perms = decoded;
            let decoded_path = opts.out.join(DECODED_FILE);
            fs::write(&decoded_path, decoded_manifest.to_string())?;
            let generated = fs::read(&manifest_path)?;
            let recovered = fs::read(&decoded_path)?;
            DecodeOutcome {
                decode_ok: generated == recovered,
                queries: counter.count(),
                ambiguity: None,
            }
        }
        Err(err @ CodecError::DecodeAmbiguous { .. }) => DecodeOutcome {
            decode_ok: false,
            queries: counter.count(),
            ambiguity: Some(err.to_string()),
        },
        Err(other) => return Err(other.into()),
    };

    match &outcome.ambiguity {
        Some(reason) => println!("decode_ok false ({reason})"),
        None => println!(
            "decode_ok {} ({} queries)",
            outcome.decode_ok, outcome.queries
        ),
    }
    Ok(outcome)
}

/// Run the full seeded pipeline for every trial and summarize.
///
/// Trials are independent and run in parallel; records come back in trial
/// order regardless of completion order. Each trial: derive the trial
/// seed, draw fresh permutations, generate the instance, audit the gap,
/// build the sketch, and (only if the gap passed) decode and compare.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary), CliError> {
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial))
        .collect::<Result<_, _>>()?;
    let summary = Summary::from_records(&records);
    Ok((records, summary))
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRecord, CliError> {
    let started = Instant::now();
    let seed = config.trial_seed(trial);
    let (blocks, m) = layout_of(config)?;
    let grid = PermutationGrid::random_from_seed(seed, blocks, m);
    let inst = generate_instance(
        config.d,
        config.epsilon,
        grid.clone(),
        config.rows_per_block,
        seed,
    )?;
    let report = verify_gap(&inst);

    let params = SketchParams::new(config.sketch_epsilon, 2, config.d)?;
    let blob = match config.sketch_kind {
        SketchKind::ExactPairs => build_exact_pairs(inst.db(), &params)?,
        SketchKind::Sampling => build_sampling(inst.db(), &params, seed)?,
    };

    // A failed gap leaves decoding undefined; skip it rather than guess.
    let mut queries = 0;
    let decode_ok = if report.pass {
        let counter = CountingOracle::new(&blob);
        let ok = matches!(
            decode_any(&counter, config.d, config.epsilon),
            Ok(decoded) if decoded == grid
        );
        queries = counter.count();
        ok
    } else {
        false
    };

    Ok(TrialRecord {
        trial,
        seed,
        gap_pass: report.pass,
        decode_ok,
        sketch_bits: blob.size_bits(),
        entropy_bits: entropy_bits(config.d, config.epsilon)?,
        queries,
        ms: started.elapsed().as_millis() as u64,
    })
}

/// `experiment` subcommand: run trials, write `records.csv`, print the
/// summary.
pub fn cmd_experiment(
    config: &ExperimentConfig,
    out: &Path,
) -> Result<(Vec<TrialRecord>, Summary), CliError> {
    let (records, summary) = run_experiment(config)?;
    fs::create_dir_all(out)?;
    let records_path = out.join(RECORDS_FILE);
    let file = fs::File::create(&records_path)?;
    write_records(io::BufWriter::new(file), &records).map_err(CliError::io)?;
    println!("wrote {}", records_path.display());
    println!("{summary}");
    Ok((records, summary))
}

/// Re-emit a records file as canonical CSV, to stdout or a file.
pub fn cmd_report(opts: &ReportOptions) -> Result<Vec<TrialRecord>, CliError> {
    let file = fs::File::open(&opts.records)
        .map_err(|e| CliError::io(format!("{}: {e}", opts.records.display())))?;
    let records = read_records(io::BufReader::new(file))?;
    match &opts.out_file {
        Some(path) => {
            let out = fs::File::create(path)?;
            write_records(io::BufWriter::new(out), &records).map_err(CliError::io)?;
        }
        None => {
            let stdout = io::stdout();
            write_records(stdout.lock(), &records).map_err(CliError::io)?;
        }
    }
    Ok(records)
}

fn read_records<R: io::Read>(r: R) -> Result<Vec<TrialRecord>, CliError> {
    crate::record::read_records(r).map_err(|e| CliError::io(format!("bad records file: {e}")))
}

fn layout_of(config: &ExperimentConfig) -> Result<(usize, usize), CliError> {
    let layout = ifi_core::lowerbound::BlockLayout::for_epsilon(config.d, config.epsilon)?;
    Ok((layout.blocks(), layout.m()))
}

fn write_db(path: &Path, db: &Database) -> Result<(), CliError> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    db.write_to(&mut file)?;
    use io::Write as _;
    file.flush()?;
    Ok(())
}

fn read_db(path: &Path) -> Result<Database, CliError> {
    let mut file = io::BufReader::new(
        fs::File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
    );
    Database::read_from(&mut file).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn read_sketch(path: &Path) -> Result<SketchBlob, CliError> {
    let mut file = io::BufReader::new(
        fs::File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
    );
    SketchBlob::read_from(&mut file).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|e: CodecError| CliError::io(format!("{}: {e}", path.display())))
}

/// Oracle wrapper that counts queries without changing answers.
pub struct CountingOracle<'a, O: ?Sized> {
    inner: &'a O,
    count: Cell<u64>,
}

impl<'a, O: IndicatorOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOracle {
            inner,
            count: Cell::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }
}

impl<O: IndicatorOracle + ?Sized> IndicatorOracle for CountingOracle<'_, O> {
    fn query(&self, t: &Itemset) -> Result<IndicatorAnswer, SketchError> {
        self.count.set(self.count.get() + 1);
        self.inner.query(t)
    }
}
