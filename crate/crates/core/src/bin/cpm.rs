use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cpm_core::bench::{self, BenchOptions};
use cpm_core::morphometrics::{evaluate_pair, Connectivity, EvalOptions, LacunaeOptions, MetricsCsvRow, TwoChannel};
use cpm_core::pipeline::{self, CorpusOptions, Window, DEFAULT_HORIZON};
use cpm_core::snapshot::{import_snapshot, list_snapshots};
use cpm_core::{Error, ParamSet, Result};

#[derive(Parser)]
#[command(name = "cpm", version, about = "Cellular-Potts vasculogenesis engine and tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML parameter file; defaults apply to missing keys
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ParamSet> {
        match &self.config {
            Some(p) => ParamSet::load(p),
            None => Ok(ParamSet::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its snapshot stream
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Window::DEFAULT)]
        window: Window,
        #[arg(long, default_value_t = 1)]
        every: u64,
        /// Run id recorded in the manifest (defaults to the output directory name)
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Training-pair manifests
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Run many seeded simulations and build a split corpus
    Corpus {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// File with one seed per line
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
        #[arg(long, default_value_t = Window::DEFAULT)]
        window: Window,
        #[arg(long, default_value_t = 1)]
        every: u64,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        /// Simulations run concurrently
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Score predicted snapshots against ground truth and a fixed reference
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value = "metrics.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Conn::Four)]
        connectivity: Conn,
        #[arg(long, default_value_t = 3)]
        min_area: usize,
    },
    /// Time the native engine over a directory of configuration snapshots
    Bench {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        configs: PathBuf,
        #[arg(long, default_value_t = 100)]
        mcs: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Allow timing several configurations at once
        #[arg(long)]
        concurrent: bool,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value = "timings.csv")]
        out: PathBuf,
    },
    /// Descriptive statistics over one or more timing CSVs
    Summarize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Recompute ratios from the published reference medians instead
        #[arg(long)]
        reference: bool,
    },
    /// Print the effective parameter set as TOML
    Params {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Write pairs.json for one run directory
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        #[arg(long)]
        allow_zero_horizon: bool,
    },
    /// Import every snapshot referenced by pairs.json
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Conn {
    Four,
    Eight,
}

fn dir_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn snapshots_by_mcs(dir: &Path) -> Result<BTreeMap<u64, PathBuf>> {
    let mut out = BTreeMap::new();
    for path in list_snapshots(dir)? {
        let header = cpm_core::snapshot::read_header(&path)?;
        out.insert(header.mcs, path);
    }
    Ok(out)
}

fn metrics(pred: &Path, truth: &Path, reference: &Path, out: &Path, opts: &EvalOptions) -> Result<usize> {
    let reference = TwoChannel::from(&import_snapshot(reference)?);
    let truths = snapshots_by_mcs(truth)?;
    let preds = snapshots_by_mcs(pred)?;
    if preds.is_empty() {
        return Err(Error::EmptySample(format!("snapshots in {}", pred.display())));
    }
    let mut writer = csv::Writer::from_path(out).map_err(Error::from)?;
    for (mcs, pred_path) in &preds {
        let truth_path = truths.get(mcs).ok_or_else(|| Error::MissingSnapshots(vec![*mcs]))?;
        let p = TwoChannel::from(&import_snapshot(pred_path)?);
        let t = TwoChannel::from(&import_snapshot(truth_path)?);
        let (pred_row, ref_row) = evaluate_pair(&p, &t, &reference, opts)?;
        writer.serialize(MetricsCsvRow::new(&pred_row, &ref_row, &t, opts.threshold)?)?;
    }
    writer.flush().map_err(|e| Error::Io { path: out.into(), source: e })?;
    Ok(preds.len())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, seed, out, window, every, run_id } => {
            let params = config.load()?;
            let id = run_id.unwrap_or_else(|| dir_name(&out));
            let m = pipeline::simulate_to_dir(&params, seed, window, every, &out, &id)?;
            println!("{}: {} snapshots", out.display(), m.snapshots.len());
        }
        Command::Dataset { command } => match command {
            DatasetCommand::Build { input, horizon, allow_zero_horizon } => {
                let m = pipeline::build_dataset(&input, horizon, allow_zero_horizon)?;
                println!("{}: {} pairs", input.display(), m.entries.len());
            }
            DatasetCommand::Verify { input } => {
                let n = pipeline::verify_dataset(&input)?;
                println!("{}: {n} snapshots verified", input.display());
            }
        },
        Command::Corpus { config, runs, seeds, out, window, every, horizon, threads } => {
            let params = config.load()?;
            let all = pipeline::read_seeds(&seeds)?;
            if all.len() < runs {
                return Err(Error::NotEnoughSeeds { needed: runs, found: all.len() });
            }
            let opts = CorpusOptions { window, every, horizon, threads };
            let m = pipeline::generate_corpus(&params, &all[..runs], &opts, &out)?;
            println!(
                "{}: {} runs ({} train, {} test), {} pairs",
                out.display(),
                m.runs.len(),
                m.train_runs,
                m.test_runs,
                m.total_pairs
            );
        }
        Command::Metrics { pred, truth, reference, out, threshold, connectivity, min_area } => {
            let opts = EvalOptions {
                threshold,
                lacunae: LacunaeOptions {
                    connectivity: match connectivity {
                        Conn::Four => Connectivity::Four,
                        Conn::Eight => Connectivity::Eight,
                    },
                    min_area,
                },
            };
            let n = metrics(&pred, &truth, &reference, &out, &opts)?;
            println!("{}: {n} rows", out.display());
        }
        Command::Bench { config, configs, mcs, threads, concurrent, warmup, out } => {
            let params = config.load()?;
            let paths = list_snapshots(&configs)?;
            let opts = BenchOptions { mcs, warmup, threads, concurrent };
            let outcome = bench::time_native(&paths, &params, &opts)?;
            for (path, e) in &outcome.failures {
                eprintln!("skipped {}: {e}", path.display());
            }
            bench::write_samples(&out, &outcome.samples)?;
            if concurrent && threads > 1 {
                println!("note: {threads} configurations timed concurrently");
            }
            if !outcome.samples.is_empty() {
                print!("{}", bench::summarize(&outcome.samples)?);
            }
        }
        Command::Summarize { inputs, reference } => {
            if reference {
                for s in bench::reference_speedups() {
                    println!("{:<24} {:<24} {:>12.3}", s.baseline, s.method, s.ratio);
                }
            }
            let mut samples = Vec::new();
            for p in &inputs {
                samples.extend(bench::read_samples(p)?);
            }
            print!("{}", bench::summarize(&samples)?);
        }
        Command::Params { config } => {
            print!("{}", config.load()?.to_toml_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
