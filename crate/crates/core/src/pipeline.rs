//! Run initialization, snapshot streams, training-pair manifests and corpora.
//!
//! A run directory holds `snap_XXXXXXXX.cpms` files, a `run.json` manifest and,
//! after [`build_dataset`], a `pairs.json` manifest. A corpus directory holds
//! one run directory per seed plus `corpus.json`. Paths inside manifests are
//! relative to the manifest's own directory.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::ChemField;
use crate::engine::{init_rng, SimState};
use crate::error::{Error, Result};
use crate::lattice::{CellId, Lattice};
use crate::params::ParamSet;
use crate::snapshot::{self, export_state, read_header, snapshot_file_name};

pub const RUN_MANIFEST: &str = "run.json";
pub const PAIR_MANIFEST: &str = "pairs.json";
pub const CORPUS_MANIFEST: &str = "corpus.json";
pub const DEFAULT_HORIZON: u64 = 100;
pub const TRAIN_FRACTION: f64 = 0.8;

/// `cell_count` single-site cells at distinct uniformly random sites, zero
/// field, MCS 0. Placement uses random stream 0 of `seed`.
pub fn init_state(params: &ParamSet, seed: u64, cell_count: usize) -> Result<SimState> {
    params.validate()?;
    let mut lattice = Lattice::new(params.width, params.height)?;
    let capacity = lattice.len();
    if cell_count > capacity {
        return Err(Error::CapacityExceeded {
            count: cell_count,
            capacity,
        });
    }
    let mut rng = init_rng(seed);
    for (i, site) in index::sample(&mut rng, capacity, cell_count).into_iter().enumerate() {
        lattice.set(site, i as CellId + 1);
    }
    let field = ChemField::zeros(params.width, params.height);
    SimState::new(lattice, field, 0, seed)
}

/// Inclusive MCS range of emitted snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub first: u64,
    pub last: u64,
}

impl Window {
    pub const DEFAULT: Window = Window {
        first: 200,
        last: 20_000,
    };

    pub fn new(first: u64, last: u64) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidWindow { first, last });
        }
        Ok(Window { first, last })
    }

    pub fn contains(&self, mcs: u64, every: u64) -> bool {
        mcs >= self.first && mcs <= self.last && (mcs - self.first).is_multiple_of(every)
    }

    /// Number of snapshots emitted at stride `every`.
    pub fn count(&self, every: u64) -> u64 {
        (self.last - self.first) / every + 1
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::DEFAULT
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `first:last`, e.g. `200:20000`.
    fn from_str(s: &str) -> Result<Self> {
        let parsed = s
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        match parsed {
            Some((first, last)) => Window::new(first, last),
            None => Err(Error::InvalidParams(format!(
                "window must look like first:last, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

/// Runs MCS `0..=window.last` from `state`, calling `sink` for every MCS
/// inside the window at stride `every` (including MCS 0 when it is).
pub fn run_from(
    mut state: SimState,
    params: &ParamSet,
    window: Window,
    every: u64,
    mut sink: impl FnMut(&SimState) -> Result<()>,
) -> Result<SimState> {
    let every = every.max(1);
    if window.contains(state.mcs(), every) {
        sink(&state)?;
    }
    while state.mcs() < window.last {
        state.run_mcs(params);
        if window.contains(state.mcs(), every) {
            sink(&state)?;
        }
    }
    Ok(state)
}

/// Initializes from `seed` and streams the window to `sink`.
pub fn run_simulation(
    params: &ParamSet,
    seed: u64,
    window: Window,
    every: u64,
    sink: impl FnMut(&SimState) -> Result<()>,
) -> Result<SimState> {
    let state = init_state(params, seed, params.cell_count)?;
    run_from(state, params, window, every, sink)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Incomplete,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub seed: u64,
    pub params_hash: String,
    pub width: usize,
    pub height: usize,
    pub cell_count: usize,
    pub window: Window,
    pub every: u64,
    pub status: RunStatus,
    pub snapshots: Vec<String>,
}

impl RunManifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        read_json(&dir.as_ref().join(RUN_MANIFEST))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
}

/// Runs one simulation and writes its snapshots and `run.json` into `out`.
/// The manifest is marked incomplete until the last snapshot is on disk.
pub fn simulate_to_dir(
    params: &ParamSet,
    seed: u64,
    window: Window,
    every: u64,
    out: impl AsRef<Path>,
    run_id: &str,
) -> Result<RunManifest> {
    let out = out.as_ref();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let every = every.max(1);
    let mut manifest = RunManifest {
        run_id: run_id.to_string(),
        seed,
        params_hash: params.hash_hex(),
        width: params.width,
        height: params.height,
        cell_count: params.cell_count,
        window,
        every,
        status: RunStatus::Incomplete,
        snapshots: Vec::new(),
    };
    let manifest_path = out.join(RUN_MANIFEST);
    write_json(&manifest_path, &manifest)?;

    let mut names = Vec::with_capacity(window.count(every) as usize);
    run_simulation(params, seed, window, every, |state| {
        let name = snapshot_file_name(state.mcs());
        export_state(state, out.join(&name)).map_err(|e| Error::Run {
            run: run_id.to_string(),
            mcs: state.mcs(),
            source: Box::new(e),
        })?;
        names.push(name);
        Ok(())
    })?;

    manifest.status = RunStatus::Complete;
    manifest.snapshots = names;
    write_json(&manifest_path, &manifest)?;
    log::info!("run {run_id}: {} snapshots in {}", manifest.snapshots.len(), out.display());
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub input: String,
    pub target: String,
    pub input_mcs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairManifest {
    pub run_id: String,
    pub seed: u64,
    pub horizon: u64,
    pub entries: Vec<PairEntry>,
}

impl PairManifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        read_json(&dir.as_ref().join(PAIR_MANIFEST))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Pairs each step `t` with `t + horizon`. `steps` must be strictly
/// increasing; gaps relative to the common stride are reported as missing.
pub fn plan_pairs(steps: &[u64], horizon: u64) -> Result<Vec<(u64, u64)>> {
    if steps.len() < 2 {
        return Ok(steps
            .iter()
            .filter(|_| horizon == 0)
            .map(|&t| (t, t))
            .collect());
    }
    let stride = steps.windows(2).fold(0, |g, w| gcd(g, w[1] - w[0]));
    let present: HashSet<u64> = steps.iter().copied().collect();
    let (first, last) = (steps[0], *steps.last().unwrap());
    let missing: Vec<u64> = (first..=last)
        .step_by(stride as usize)
        .filter(|t| !present.contains(t))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSnapshots(missing));
    }
    Ok(steps
        .iter()
        .filter_map(|&t| present.contains(&(t + horizon)).then_some((t, t + horizon)))
        .collect())
}

fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

/// Builds `pairs.json` for the snapshots in `dir`. Every snapshot's header and
/// length are checked.
pub fn build_dataset(dir: impl AsRef<Path>, horizon: u64, allow_zero_horizon: bool) -> Result<PairManifest> {
    let dir = dir.as_ref();
    if horizon == 0 && !allow_zero_horizon {
        return Err(Error::ZeroHorizon);
    }
    let mut by_mcs: BTreeMap<u64, String> = BTreeMap::new();
    let mut seed = None;
    for path in snapshot::list_snapshots(dir)? {
        let header = read_header(&path)?;
        seed.get_or_insert(header.seed);
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if let Some(prev) = by_mcs.insert(header.mcs, name.clone()) {
            return Err(Error::InvalidParams(format!(
                "{prev} and {name} both hold mcs {}",
                header.mcs
            ))
            .in_file(dir));
        }
    }
    let (run_id, seed) = match RunManifest::load(dir) {
        Ok(m) => (m.run_id, m.seed),
        Err(_) => (dir_name(dir), seed.unwrap_or(0)),
    };
    let steps: Vec<u64> = by_mcs.keys().copied().collect();
    let pairs = plan_pairs(&steps, horizon).map_err(|e| e.in_file(dir))?;
    if pairs.is_empty() {
        log::warn!(
            "{}: no pairs at horizon {horizon} ({} snapshots)",
            dir.display(),
            steps.len()
        );
    }
    let manifest = PairManifest {
        run_id,
        seed,
        horizon,
        entries: pairs
            .into_iter()
            .map(|(t, u)| PairEntry {
                input: by_mcs[&t].clone(),
                target: by_mcs[&u].clone(),
                input_mcs: t,
            })
            .collect(),
    };
    write_json(&dir.join(PAIR_MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Fully imports every snapshot referenced by the pair manifest in `dir`.
pub fn verify_dataset(dir: impl AsRef<Path>) -> Result<usize> {
    let dir = dir.as_ref();
    let manifest = PairManifest::load(dir)?;
    let mut seen = HashSet::new();
    for entry in &manifest.entries {
        let input = snapshot::import_snapshot(dir.join(&entry.input))?;
        let target = snapshot::import_snapshot(dir.join(&entry.target))?;
        if input.mcs != entry.input_mcs || target.mcs != input.mcs + manifest.horizon {
            return Err(Error::InvalidParams(format!(
                "pair {} -> {} does not span the horizon",
                entry.input, entry.target
            ))
            .in_file(dir));
        }
        seen.insert(entry.input.clone());
        seen.insert(entry.target.clone());
    }
    Ok(seen.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRun {
    pub run_id: String,
    pub seed: u64,
    pub dir: String,
    pub pairs: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub params_hash: String,
    pub horizon: u64,
    pub window: Window,
    pub every: u64,
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub train_runs: usize,
    pub test_runs: usize,
    pub total_pairs: usize,
    pub runs: Vec<CorpusRun>,
}

impl CorpusManifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        read_json(&dir.as_ref().join(CORPUS_MANIFEST))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusOptions {
    pub window: Window,
    pub every: u64,
    pub horizon: u64,
    /// Simulations run concurrently.
    pub threads: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            window: Window::DEFAULT,
            every: 1,
            horizon: DEFAULT_HORIZON,
            threads: 1,
        }
    }
}

/// Number of training runs out of `n` for the by-run split.
pub fn train_run_count(n: usize) -> usize {
    match n {
        0 => 0,
        1 => 1,
        n => ((n as f64 * TRAIN_FRACTION).round() as usize).clamp(1, n - 1),
    }
}

/// Runs one simulation per seed (at most `threads` at a time), builds each
/// run's pairs, and writes `corpus.json` with a by-run train/test split.
pub fn generate_corpus(
    params: &ParamSet,
    seeds: &[u64],
    opts: &CorpusOptions,
    out: impl AsRef<Path>,
) -> Result<CorpusManifest> {
    let out = out.as_ref();
    let mut seen = HashSet::new();
    for &s in seeds {
        if !seen.insert(s) {
            return Err(Error::DuplicateSeed(s));
        }
    }
    params.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let results: Vec<Result<(String, u64, usize)>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| {
                let run_id = format!("run_{i:03}");
                let dir = out.join(&run_id);
                simulate_to_dir(params, seed, opts.window, opts.every, &dir, &run_id)?;
                let pairs = build_dataset(&dir, opts.horizon, false)?;
                Ok((run_id, seed, pairs.entries.len()))
            })
            .collect()
    });
    let runs: Vec<(String, u64, usize)> = results.into_iter().collect::<Result<_>>()?;

    let n_train = train_run_count(runs.len());
    if runs.len() == 1 {
        log::warn!("single-run corpus: the run is assigned to train and the test split is empty");
    }
    let runs: Vec<CorpusRun> = runs
        .into_iter()
        .enumerate()
        .map(|(i, (run_id, seed, pairs))| CorpusRun {
            dir: run_id.clone(),
            run_id,
            seed,
            pairs,
            split: if i < n_train { Split::Train } else { Split::Test },
        })
        .collect();
    let manifest = CorpusManifest {
        params_hash: params.hash_hex(),
        horizon: opts.horizon,
        window: opts.window,
        every: opts.every,
        train_fraction: TRAIN_FRACTION,
        test_fraction: 1.0 - TRAIN_FRACTION,
        train_runs: n_train,
        test_runs: runs.len() - n_train,
        total_pairs: runs.iter().map(|r| r.pairs).sum(),
        runs,
    };
    write_json(&out.join(CORPUS_MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Reads seeds, one integer per line; blank lines and `#` comments ignored.
pub fn read_seeds(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<u64>()
                .map_err(|e| Error::InvalidParams(format!("bad seed {l:?}: {e}")).in_file(path))
        })
        .collect()
}
