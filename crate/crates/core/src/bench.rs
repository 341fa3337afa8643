//! Wall-clock benchmarks for the screening kernels.
//!
//! Each (n, p, method) cell is timed over fresh synthetic datasets: one
//! warm-up run is discarded, then every replicate records the screen call
//! alone, never data generation or standardization. Replicates run
//! sequentially on one thread so the numbers are comparable across cells.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::airholp::{air_holp, AirHolpConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, StandardizeOptions};
use crate::screening::default_threshold;
use crate::simgen::{gen_dataset, mix_seed, SimSetting};

/// Kernels the harness can time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    /// Primal ridge solve (X'X + rI)^{-1} X'y: the O(p^3) yardstick.
    RidgePrimal,
    /// Dual ridge screen through one Cholesky solve of XX' + rI.
    RidgeHolp,
    /// Full adaptive run, including its internal eigendecomposition.
    AirHolp,
}

impl BenchMethod {
    /// Every method, in reporting order.
    pub const ALL: [BenchMethod; 3] = [
        BenchMethod::RidgePrimal,
        BenchMethod::RidgeHolp,
        BenchMethod::AirHolp,
    ];

    /// Kebab-case name used in CSV output and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::RidgePrimal => "ridge-primal",
            BenchMethod::RidgeHolp => "ridge-holp",
            BenchMethod::AirHolp => "air-holp",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge-primal" => Ok(BenchMethod::RidgePrimal),
            "ridge-holp" => Ok(BenchMethod::RidgeHolp),
            "air-holp" => Ok(BenchMethod::AirHolp),
            other => Err(Error::InvalidArgument(format!(
                "unknown benchmark method '{other}' (expected ridge-primal, ridge-holp, or air-holp)"
            ))),
        }
    }
}

/// One timed replicate.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub method: BenchMethod,
    pub n: usize,
    pub p: usize,
    /// One-based replicate index; the warm-up run is not recorded.
    pub rep: usize,
    pub millis: f64,
}

/// Benchmark controls.
#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    /// Recorded replicates per cell, at least 3; a warm-up precedes them.
    pub reps: usize,
    /// Base seed; per-replicate dataset seeds derive from it.
    pub seed: u64,
    /// Penalty for the fixed-ridge kernels.
    pub ridge_penalty: f64,
    /// Cells whose estimated working set exceeds this many bytes are
    /// skipped instead of thrashing the machine.
    pub mem_limit: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: 5,
            seed: 42,
            ridge_penalty: 10.0,
            mem_limit: 3 * 1024 * 1024 * 1024,
        }
    }
}

/// A cell the memory guard refused to run.
#[derive(Clone, Debug, Serialize)]
pub struct SkippedCell {
    pub method: BenchMethod,
    pub n: usize,
    pub p: usize,
    pub reason: String,
}

/// Raw records plus any guarded-out cells.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedCell>,
}

fn estimated_bytes(method: BenchMethod, n: usize, p: usize) -> usize {
    // the raw and standardized designs, and the factored matrix
    let design = 2 * n * p;
    let factor = match method {
        BenchMethod::RidgePrimal => 2 * p * p,
        BenchMethod::RidgeHolp | BenchMethod::AirHolp => 4 * n * n,
    };
    8 * (design + factor)
}

/// Times every (size, method) cell sequentially.
///
/// Each replicate gets a fresh dataset (rho = 0, p0 = min(10, p),
/// r2 = 0.9) seeded from the config seed, the cell, and the replicate
/// index; standardization happens outside the timer.
pub fn run_bench(
    sizes: &[(usize, usize)],
    methods: &[BenchMethod],
    cfg: &BenchConfig,
) -> Result<BenchOutcome> {
    if cfg.reps < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 replicates for stable summaries, got {}",
            cfg.reps
        )));
    }
    if sizes.is_empty() || methods.is_empty() {
        return Err(Error::InvalidArgument(
            "benchmark needs at least one size and one method".into(),
        ));
    }
    let mut outcome = BenchOutcome::default();
    for &(n, p) in sizes {
        for &method in methods {
            let bytes = estimated_bytes(method, n, p);
            if bytes > cfg.mem_limit {
                outcome.skipped.push(SkippedCell {
                    method,
                    n,
                    p,
                    reason: format!(
                        "estimated working set {} MiB exceeds the {} MiB limit",
                        bytes >> 20,
                        cfg.mem_limit >> 20
                    ),
                });
                continue;
            }
            // rep 0 is the warm-up; only reps 1..=reps are recorded
            for rep in 0..=cfg.reps {
                let setting = SimSetting {
                    n,
                    p,
                    rho: 0.0,
                    p0: 10.min(p),
                    r2: 0.9,
                    seed: mix_seed(&[cfg.seed, n as u64, p as u64, rep as u64]),
                };
                let data = gen_dataset(&setting)?;
                let (x, _) = linalg::standardize(&data.x, StandardizeOptions::default());
                let (y, _) = linalg::center_response(&data.y);
                let start = Instant::now();
                match method {
                    BenchMethod::RidgePrimal => {
                        linalg::ridge_primal(&x, &y, cfg.ridge_penalty)?;
                    }
                    BenchMethod::RidgeHolp => {
                        linalg::ridge_dual_direct(&x, &y, cfg.ridge_penalty)?;
                    }
                    BenchMethod::AirHolp => {
                        air_holp(&x, &y, &AirHolpConfig::new(default_threshold(n)?))?;
                    }
                }
                let millis = start.elapsed().as_secs_f64() * 1e3;
                if rep > 0 {
                    outcome.records.push(BenchRecord {
                        method,
                        n,
                        p,
                        rep,
                        millis,
                    });
                }
            }
        }
    }
    Ok(outcome)
}

/// Fraction trimmed from each tail of the log-time sample.
pub const TRIM_FRACTION: f64 = 0.1;

/// Aggregate timings for one (method, n, p) cell.
#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub method: BenchMethod,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    /// Mean of ln(milliseconds) after dropping floor(0.1 B) values from
    /// each tail; robust against scheduler outliers.
    pub trimmed_mean_log_ms: f64,
    pub median_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

/// Mean of natural-log milliseconds with floor(trim * len) values dropped
/// from each tail of the sorted sample.
pub fn trimmed_mean_log(millis: &[f64], trim: f64) -> Result<f64> {
    if millis.is_empty() {
        return Err(Error::InvalidArgument("no timings to summarize".into()));
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::InvalidArgument(format!(
            "trim fraction must lie in [0, 0.5), got {trim}"
        )));
    }
    let mut sorted = millis.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let drop = (trim * sorted.len() as f64).floor() as usize;
    let kept = &sorted[drop..sorted.len() - drop];
    Ok(kept.iter().map(|&ms| ms.max(f64::MIN_POSITIVE).ln()).sum::<f64>() / kept.len() as f64)
}

fn median(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

/// Collapses records into per-cell summaries, ordered by (method, n, p).
pub fn summarize(records: &[BenchRecord]) -> Result<Vec<BenchSummary>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let mut groups: std::collections::BTreeMap<(BenchMethod, usize, usize), Vec<f64>> =
        std::collections::BTreeMap::new();
    for record in records {
        groups
            .entry((record.method, record.n, record.p))
            .or_default()
            .push(record.millis);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((method, n, p), mut millis) in groups {
        millis.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        out.push(BenchSummary {
            method,
            n,
            p,
            reps: millis.len(),
            trimmed_mean_log_ms: trimmed_mean_log(&millis, TRIM_FRACTION)?,
            median_ms: median(&millis),
            min_ms: millis[0],
            max_ms: *millis.last().expect("non-empty"),
        });
    }
    Ok(out)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "slope needs at least two points".into(),
        ));
    }
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::InvalidArgument(
                "log-log slope needs strictly positive coordinates".into(),
            ));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|&(x, _)| x).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|&(_, y)| y).sum::<f64>() / logs.len() as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "slope needs at least two distinct sizes".into(),
        ));
    }
    Ok(sxy / sxx)
}
