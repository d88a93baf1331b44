//! Wall-clock timing of the native engine and descriptive statistics over
//! timing samples from any method.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::snapshot::import_snapshot;

/// Published median seconds per 100 MCS used for the ratio self-check.
pub const REFERENCE_MEDIANS: [(&str, f64); 4] = [
    ("surrogate_gpu", 0.004171),
    ("surrogate_32cpu", 0.169648),
    ("cc3d_32core", 0.607681),
    ("cc3d_1core", 2.345840),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSample {
    pub method: String,
    pub config_id: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub mcs: u64,
    pub warmup: usize,
    /// Configurations timed at once. Values above 1 need `concurrent`.
    pub threads: usize,
    pub concurrent: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            mcs: 100,
            warmup: 3,
            threads: 1,
            concurrent: false,
        }
    }
}

impl BenchOptions {
    pub fn method_label(&self) -> String {
        if self.threads > 1 {
            format!("native_concurrent{}", self.threads)
        } else {
            "native".to_string()
        }
    }
}

#[derive(Debug, Default)]
pub struct BenchOutcome {
    pub samples: Vec<TimingSample>,
    pub failures: Vec<(PathBuf, Error)>,
    /// States after the timed MCS, in sample order.
    pub final_states: Vec<SimState>,
}

/// Advances `state` by `mcs` steps and returns the elapsed seconds.
pub fn time_state(state: &mut SimState, params: &ParamSet, mcs: u64) -> f64 {
    let start = Instant::now();
    state.advance(params, mcs);
    start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE)
}

fn config_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Times `opts.mcs` steps from every configuration snapshot. Only the MCS
/// loop is timed. Unreadable configurations are skipped and reported.
pub fn time_native(configs: &[PathBuf], params: &ParamSet, opts: &BenchOptions) -> Result<BenchOutcome> {
    if configs.is_empty() {
        return Err(Error::EmptySample("configurations".into()));
    }
    if opts.threads > 1 && !opts.concurrent {
        return Err(Error::InvalidParams(
            "timing with more than one thread requires the concurrent flag".into(),
        ));
    }
    params.validate()?;

    let mut outcome = BenchOutcome::default();
    let mut loaded = Vec::new();
    for path in configs {
        match import_snapshot(path).and_then(|s| s.to_state()) {
            Ok(state) => loaded.push((config_id(path), state)),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                outcome.failures.push((path.clone(), e));
            }
        }
    }
    if let Some((_, first)) = loaded.first() {
        for _ in 0..opts.warmup {
            time_state(&mut first.clone(), params, opts.mcs);
        }
    }

    let method = opts.method_label();
    let timed: Vec<(String, f64, SimState)> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        pool.install(|| {
            loaded
                .into_par_iter()
                .map(|(id, mut s)| {
                    let t = time_state(&mut s, params, opts.mcs);
                    (id, t, s)
                })
                .collect()
        })
    } else {
        loaded
            .into_iter()
            .map(|(id, mut s)| {
                let t = time_state(&mut s, params, opts.mcs);
                (id, t, s)
            })
            .collect()
    };
    for (config_id, seconds, state) in timed {
        outcome.samples.push(TimingSample {
            method: method.clone(),
            config_id,
            seconds,
        });
        outcome.final_states.push(state);
    }
    Ok(outcome)
}

/// Median; mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample("median".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample("standard deviation".into()));
    }
    let n = values.len();
    if n == 1 {
        return Ok(0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodStats {
    pub method: String,
    pub n: usize,
    pub median: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// `median(slower) / median(faster)` for an ordered method pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Speedup {
    pub baseline: String,
    pub method: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub methods: Vec<MethodStats>,
    pub speedups: Vec<Speedup>,
}

/// Ratios `median(baseline) / median(method)` for every ordered pair of
/// distinct methods.
pub fn speedups(medians: &[(String, f64)]) -> Vec<Speedup> {
    let mut out = Vec::new();
    for (baseline, mb) in medians {
        for (method, mm) in medians {
            if baseline != method {
                out.push(Speedup {
                    baseline: baseline.clone(),
                    method: method.clone(),
                    ratio: mb / mm,
                });
            }
        }
    }
    out
}

/// Per-method statistics, methods sorted by name.
pub fn summarize(samples: &[TimingSample]) -> Result<BenchReport> {
    if samples.is_empty() {
        return Err(Error::EmptySample("timing samples".into()));
    }
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in samples {
        if !(s.seconds > 0.0 && s.seconds.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "{}/{}: wall time must be positive, got {}",
                s.method, s.config_id, s.seconds
            )));
        }
        groups.entry(&s.method).or_default().push(s.seconds);
    }
    let mut methods = Vec::new();
    for (method, values) in groups {
        methods.push(MethodStats {
            method: method.to_string(),
            n: values.len(),
            median: median(&values)?,
            std_dev: std_dev(&values)?,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let medians: Vec<(String, f64)> = methods.iter().map(|m| (m.method.clone(), m.median)).collect();
    Ok(BenchReport {
        speedups: speedups(&medians),
        methods,
    })
}

/// Speedups recomputed from [`REFERENCE_MEDIANS`].
pub fn reference_speedups() -> Vec<Speedup> {
    let medians: Vec<(String, f64)> = REFERENCE_MEDIANS
        .iter()
        .map(|&(m, t)| (m.to_string(), t))
        .collect();
    speedups(&medians)
}

impl BenchReport {
    pub fn ratio(&self, baseline: &str, method: &str) -> Option<f64> {
        self.speedups
            .iter()
            .find(|s| s.baseline == baseline && s.method == method)
            .map(|s| s.ratio)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24} {:>5} {:>12} {:>12} {:>12} {:>12}", "method", "n", "median_s", "sd_s", "min_s", "max_s")?;
        for m in &self.methods {
            writeln!(
                f,
                "{:<24} {:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                m.method, m.n, m.median, m.std_dev, m.min, m.max
            )?;
        }
        if !self.speedups.is_empty() {
            writeln!(f)?;
            writeln!(f, "{:<24} {:<24} {:>12}", "baseline", "method", "speedup")?;
            for s in &self.speedups {
                writeln!(f, "{:<24} {:<24} {:>12.3}", s.baseline, s.method, s.ratio)?;
            }
        }
        Ok(())
    }
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[TimingSample]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).in_file(path))?;
    for s in samples {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<Vec<TimingSample>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::from(e).in_file(path))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::from(e).in_file(path)))
        .collect()
}
