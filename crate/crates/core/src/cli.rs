//! Command implementations behind the `airholp` binary.
//!
//! Three subcommands: `screen` ranks the features of a CSV dataset,
//! `simulate` runs a manifest-driven Monte Carlo grid, and `bench` times the
//! kernels over a size sweep. Tables land as CSV, traces as JSON, and every
//! file opens with a provenance header. Exit codes: 0 success, 2 usage
//! error, 3 data or computation error.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::airholp::{
    air_holp, AirHolpConfig, DEFAULT_C, DEFAULT_DELTA, DEFAULT_MAX_ITER, DEFAULT_R0,
};
use crate::bench::{run_bench, summarize, BenchConfig, BenchMethod, BenchOutcome};
use crate::error::{Error, Result};
use crate::linalg::{self, DesignMatrix, StandardizeOptions};
use crate::manifest::{GridCell, RunManifest, SimMethod};
use crate::metrics::{
    multiple_r, sure_screening_probability, sure_screening_threshold, BatchOutcome,
    MultipleROptions,
};
use crate::report::{write_csv, write_json, Provenance};
use crate::screening::{
    default_threshold, screen_fixed_ridge, screen_holp, screen_sis, MethodTag, ScreeningResult,
};
use crate::simgen::{gen_dataset, mix_seed, SimSetting};

/// Errors split by exit code: usage problems exit 2, data and computation
/// problems exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Failure(err) => write!(f, "{err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Failure(err)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Feature screening for regressions with far more predictors than rows.
#[derive(Debug, Parser)]
#[command(name = "airholp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the features of a CSV dataset and keep the strongest.
    Screen(ScreenArgs),
    /// Run a simulation grid described by a TOML manifest.
    Simulate(SimulateArgs),
    /// Time the screening kernels over an (n, p) sweep.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Design matrix CSV: one header row of feature names, then n numeric rows.
    #[arg(long = "x", value_name = "FILE")]
    pub x: PathBuf,

    /// Response CSV: a single numeric column, optional header.
    #[arg(long = "y", value_name = "FILE")]
    pub y: PathBuf,

    /// Screening method: sis, holp, ridge-holp, or air-holp.
    #[arg(long, default_value = "air-holp")]
    pub method: String,

    /// Ridge penalty for ridge-holp.
    #[arg(long, default_value_t = 10.0)]
    pub r: f64,

    /// Starting penalty for air-holp.
    #[arg(long, default_value_t = DEFAULT_R0)]
    pub r0: f64,

    /// Penalty interval constant for air-holp: candidates stay in [0, c sqrt(n)].
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,

    /// Relative stopping tolerance for air-holp.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,

    /// Iteration cap for air-holp.
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,

    /// Features to retain; defaults to ceil(n / ln n).
    #[arg(long)]
    pub m: Option<usize>,

    /// Use columns and response as given: no standardization, no centering.
    #[arg(long = "no-standardize")]
    pub no_standardize: bool,

    /// Also report the best multiple correlation for every model size 1..=K
    /// over the screened features.
    #[arg(long = "multiple-r", value_name = "K")]
    pub multiple_r: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long = "out-dir", default_value = "airholp-out")]
    pub out_dir: PathBuf,

    /// Omit the timestamp line from output files.
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML manifest describing the grid.
    #[arg(value_name = "MANIFEST")]
    pub manifest: PathBuf,

    /// Output directory; overrides the manifest's out_dir.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,

    /// Base seed; overrides the manifest's seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Also write every replicate's threshold to replicates.csv.
    #[arg(long = "per-replicate")]
    pub per_replicate: bool,

    /// Omit the timestamp line from output files.
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Problem size as n,p; repeat for a sweep. Defaults to n = 100 with p
    /// doubling from 1000 to 16000.
    #[arg(long = "size", value_name = "N,P", value_parser = parse_size)]
    pub size: Vec<(usize, usize)>,

    /// Kernel to time: ridge-primal, ridge-holp, or air-holp; repeatable.
    /// Defaults to all three (ridge-primal capped at p <= 4000).
    #[arg(long = "method", value_parser = parse_bench_method)]
    pub method: Vec<BenchMethod>,

    /// Recorded replicates per cell (a discarded warm-up precedes them).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,

    /// Base seed for the generated datasets.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Output directory, created if missing.
    #[arg(long = "out-dir", default_value = "airholp-out")]
    pub out_dir: PathBuf,

    /// Omit the timestamp line from output files.
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, p) = s
        .split_once(',')
        .ok_or_else(|| format!("expected n,p but got '{s}'"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad n in '{s}'"))?;
    let p: usize = p.trim().parse().map_err(|_| format!("bad p in '{s}'"))?;
    if n < 2 || p == 0 {
        return Err(format!("size must satisfy n >= 2 and p >= 1, got '{s}'"));
    }
    Ok((n, p))
}

fn parse_bench_method(s: &str) -> std::result::Result<BenchMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Screen(args) => cmd_screen(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Bench(args) => cmd_bench(&args),
    }
}

/// The invoking command line with the binary path reduced to its file name,
/// so provenance stays identical across checkouts.
fn current_command() -> String {
    let mut parts: Vec<String> = std::env::args().collect();
    if let Some(first) = parts.first_mut() {
        if let Some(name) = Path::new(first).file_name() {
            *first = name.to_string_lossy().into_owned();
        }
    }
    parts.join(" ")
}

fn create_out_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::Failure(Error::Data(format!("{}: {e}", dir.display())))
    })
}

// ---------------------------------------------------------------- screen --

#[derive(Serialize)]
struct TraceReport {
    penalties: Vec<f64>,
    objective_values: Vec<f64>,
    iterations: usize,
    converged: bool,
    final_penalty: f64,
}

#[derive(Serialize)]
struct MultipleRRow {
    k: usize,
    r: f64,
    exhaustive: bool,
    features: Vec<String>,
}

#[derive(Serialize)]
struct ScreenReport<'a> {
    provenance: &'a Provenance,
    n: usize,
    p: usize,
    m: usize,
    standardized: bool,
    method: MethodTag,
    warnings: &'a [String],
    screened_indices: &'a [usize],
    screened_features: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiple_r: Option<&'a [MultipleRRow]>,
}

pub fn cmd_screen(args: &ScreenArgs) -> CliResult<()> {
    let method: SimMethod = args
        .method
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    if !(args.r.is_finite() && args.r >= 0.0) {
        return Err(CliError::Usage(format!(
            "--r must be finite and non-negative, got {}",
            args.r
        )));
    }
    if args.m == Some(0) {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    if method == SimMethod::AirHolp {
        // surface air-holp flag mistakes as usage errors before reading data
        AirHolpConfig {
            r0: args.r0,
            c: args.c,
            m: 1,
            delta: args.delta,
            max_iter: args.max_iter,
        }
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    }

    let (x_raw, names) = read_design_csv(&args.x)?;
    let y_raw = read_response_csv(&args.y)?;
    if y_raw.len() != x_raw.n() {
        return Err(CliError::Failure(Error::DimensionMismatch(format!(
            "{} has {} data rows but {} has {} responses",
            args.x.display(),
            x_raw.n(),
            args.y.display(),
            y_raw.len()
        ))));
    }
    let n = x_raw.n();
    let p = x_raw.p();
    let m = match args.m {
        Some(m) => m,
        None => default_threshold(n)?,
    };
    let standardized = !args.no_standardize;
    let (x, y) = if standardized {
        let (x, _) = linalg::standardize(&x_raw, StandardizeOptions::default());
        let (y, _) = linalg::center_response(&y_raw);
        (x, y)
    } else {
        (x_raw, y_raw)
    };

    let (result, trace) = match method {
        SimMethod::Sis => (screen_sis(&x, &y, m)?, None),
        SimMethod::Holp => {
            let eig = linalg::sym_eigen(&linalg::row_gram(&x), linalg::DEFAULT_RANK_TOL)?;
            (screen_holp(&x, &y, &eig, m)?, None)
        }
        SimMethod::RidgeHolp => (screen_fixed_ridge(&x, &y, args.r, m)?, None),
        SimMethod::AirHolp => {
            let config = AirHolpConfig {
                r0: args.r0,
                c: args.c,
                m,
                delta: args.delta,
                max_iter: args.max_iter,
            };
            let trace = air_holp(&x, &y, &config)?;
            (trace.result.clone(), Some(trace))
        }
    };

    let multiple_r_rows = match args.multiple_r {
        None => None,
        Some(k_max) => {
            if k_max == 0 || k_max > result.screened.len() {
                return Err(CliError::Usage(format!(
                    "--multiple-r must lie in 1..={}, got {k_max}",
                    result.screened.len()
                )));
            }
            Some(multiple_r_table(&x, &y, &result, &names, k_max)?)
        }
    };

    create_out_dir(&args.out_dir)?;
    let prov = Provenance::new(current_command(), None, !args.no_timestamp);

    let ranking_rows: Vec<Vec<String>> = result
        .ranking
        .iter()
        .enumerate()
        .map(|(pos, &f)| {
            vec![
                (pos + 1).to_string(),
                f.to_string(),
                names[f].clone(),
                format!("{:.12e}", result.scores[f]),
                (pos < result.screened.len()).to_string(),
            ]
        })
        .collect();
    let ranking_path = args.out_dir.join("ranking.csv");
    write_csv(
        &ranking_path,
        &prov,
        &["rank", "index", "feature", "score", "screened"],
        &ranking_rows,
    )?;

    if let Some(rows) = &multiple_r_rows {
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|row| {
                vec![
                    row.k.to_string(),
                    format!("{:.12}", row.r),
                    row.exhaustive.to_string(),
                    row.features.join(";"),
                ]
            })
            .collect();
        write_csv(
            &args.out_dir.join("multiple_r.csv"),
            &prov,
            &["k", "multiple_r", "exhaustive", "features"],
            &csv_rows,
        )?;
    }

    let report = ScreenReport {
        provenance: &prov,
        n,
        p,
        m,
        standardized,
        method: result.method,
        warnings: &result.warnings,
        screened_indices: &result.screened,
        screened_features: result.screened.iter().map(|&f| names[f].as_str()).collect(),
        trace: trace.map(|t| TraceReport {
            final_penalty: *t.penalties.last().expect("non-empty path"),
            penalties: t.penalties,
            objective_values: t.objective_values,
            iterations: t.iterations,
            converged: t.converged,
        }),
        multiple_r: multiple_r_rows.as_deref(),
    };
    let json_path = args.out_dir.join("result.json");
    write_json(&json_path, &report)?;

    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "screened {} of {} features with {}",
        result.screened.len(),
        p,
        result.method
    );
    println!("wrote {}", ranking_path.display());
    if multiple_r_rows.is_some() {
        println!("wrote {}", args.out_dir.join("multiple_r.csv").display());
    }
    println!("wrote {}", json_path.display());
    Ok(())
}

fn multiple_r_table(
    x: &DesignMatrix,
    y: &DVector<f64>,
    result: &ScreeningResult,
    names: &[String],
    k_max: usize,
) -> Result<Vec<MultipleRRow>> {
    let n = x.n();
    let mut screened = DMatrix::zeros(n, result.screened.len());
    for (j, &f) in result.screened.iter().enumerate() {
        screened.set_column(j, &x.matrix().column(f));
    }
    let opts = MultipleROptions::default();
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let best = multiple_r(y, &screened, k, &opts)?;
        if !best.exhaustive {
            eprintln!(
                "warning: model size {k}: subset count exceeds {}, using greedy forward selection",
                opts.subset_cap
            );
        }
        rows.push(MultipleRRow {
            k,
            r: best.r,
            exhaustive: best.exhaustive,
            features: best
                .subset
                .iter()
                .map(|&j| names[result.screened[j]].clone())
                .collect(),
        });
    }
    Ok(rows)
}

pub(crate) fn read_design_csv(path: &Path) -> Result<(DesignMatrix, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(Error::Data(format!("{}: no columns", path.display())));
    }
    let mut data = Vec::new();
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |pos| pos.line());
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::Data(format!(
                    "{}: non-numeric cell '{}' at line {}, column '{}'",
                    path.display(),
                    field,
                    line,
                    names[j]
                ))
            })?;
            data.push(value);
        }
        n += 1;
    }
    if n < 2 {
        return Err(Error::Data(format!(
            "{}: need at least 2 data rows, found {n}",
            path.display()
        )));
    }
    DesignMatrix::from_row_major(n, names.len(), &data).map(|x| (x, names))
}

pub(crate) fn read_response_csv(path: &Path) -> Result<DVector<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if record.len() != 1 {
            return Err(Error::Data(format!(
                "{}: expected a single column, found {} fields at line {}",
                path.display(),
                record.len(),
                record.position().map_or(0, |pos| pos.line())
            )));
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            // a non-numeric first row is a header; anywhere else it is data rot
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Data(format!(
                    "{}: non-numeric response '{}' at line {}",
                    path.display(),
                    field,
                    record.position().map_or(0, |pos| pos.line())
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Data(format!("{}: no responses", path.display())));
    }
    Ok(DVector::from_vec(values))
}

// -------------------------------------------------------------- simulate --

struct MethodOutcome {
    threshold: usize,
    /// (final penalty, iterations, converged) for the adaptive method.
    air: Option<(f64, usize, bool)>,
}

struct RepOutcome {
    cell: usize,
    rep: usize,
    seed: u64,
    per_method: Vec<MethodOutcome>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let manifest = RunManifest::from_path(&args.manifest)?;
    let methods = manifest.parsed_methods()?;
    let seed = args.seed.unwrap_or(manifest.seed);
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| manifest.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("airholp-out"));
    let cells = manifest.cells();

    let jobs: Vec<(GridCell, usize)> = cells
        .iter()
        .flat_map(|cell| (0..manifest.replicates).map(move |rep| (*cell, rep)))
        .collect();
    let mut outcomes = jobs
        .par_iter()
        .map(|&(cell, rep)| run_replicate(&manifest, &methods, seed, cell, rep))
        .collect::<Result<Vec<RepOutcome>>>()?;
    // canonical order regardless of scheduling
    outcomes.sort_by_key(|o| (o.cell, o.rep));

    create_out_dir(&out_dir)?;
    let prov = Provenance::new(current_command(), Some(seed), !args.no_timestamp);

    let mut summary_rows = Vec::new();
    for cell in &cells {
        let m = match manifest.m {
            Some(m) => m,
            None => default_threshold(cell.n)?,
        };
        let cell_outcomes: Vec<&RepOutcome> =
            outcomes.iter().filter(|o| o.cell == cell.index).collect();
        for (mi, method) in methods.iter().enumerate() {
            let thresholds: Vec<usize> = cell_outcomes
                .iter()
                .map(|o| o.per_method[mi].threshold)
                .collect();
            let mut batch = BatchOutcome::new(m)?;
            for &t in &thresholds {
                batch.push_ranks(vec![t])?;
            }
            let ssp = sure_screening_probability(&batch)?;
            let mut sorted: Vec<f64> = thresholds.iter().map(|&t| t as f64).collect();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
            let (conv_rate, med_iters) = if *method == SimMethod::AirHolp {
                let iters: Vec<f64> = cell_outcomes
                    .iter()
                    .filter_map(|o| o.per_method[mi].air.map(|(_, i, _)| i as f64))
                    .collect();
                let converged = cell_outcomes
                    .iter()
                    .filter(|o| matches!(o.per_method[mi].air, Some((_, _, true))))
                    .count();
                let mut sorted_iters = iters.clone();
                sorted_iters.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                (
                    format!("{:.4}", converged as f64 / cell_outcomes.len() as f64),
                    format!("{:.1}", quantile(&sorted_iters, 0.5)),
                )
            } else {
                (String::new(), String::new())
            };
            println!(
                "n={} p={} rho={} p0={} r2={} {}: ssp={ssp:.4} median_threshold={:.1}",
                cell.n,
                cell.p,
                cell.rho,
                cell.p0,
                cell.r2,
                method,
                quantile(&sorted, 0.5)
            );
            summary_rows.push(vec![
                cell.n.to_string(),
                cell.p.to_string(),
                cell.rho.to_string(),
                cell.p0.to_string(),
                cell.r2.to_string(),
                method.to_string(),
                thresholds.len().to_string(),
                m.to_string(),
                format!("{ssp:.4}"),
                format!("{mean:.2}"),
                format!("{:.1}", quantile(&sorted, 0.5)),
                format!("{:.1}", quantile(&sorted, 0.25)),
                format!("{:.1}", quantile(&sorted, 0.75)),
                conv_rate,
                med_iters,
            ]);
        }
    }
    let summary_path = out_dir.join("summary.csv");
    write_csv(
        &summary_path,
        &prov,
        &[
            "n",
            "p",
            "rho",
            "p0",
            "r2",
            "method",
            "replicates",
            "m",
            "ssp",
            "threshold_mean",
            "threshold_median",
            "threshold_q1",
            "threshold_q3",
            "convergence_rate",
            "median_iterations",
        ],
        &summary_rows,
    )?;
    println!("wrote {}", summary_path.display());

    if args.per_replicate {
        let mut rows = Vec::new();
        for outcome in &outcomes {
            let cell = &cells[outcome.cell];
            for (mi, method) in methods.iter().enumerate() {
                let per = &outcome.per_method[mi];
                let (penalty, iterations, converged) = match per.air {
                    Some((r, i, c)) => (format!("{r:.6}"), i.to_string(), c.to_string()),
                    None => (String::new(), String::new(), String::new()),
                };
                rows.push(vec![
                    cell.n.to_string(),
                    cell.p.to_string(),
                    cell.rho.to_string(),
                    cell.p0.to_string(),
                    cell.r2.to_string(),
                    method.to_string(),
                    outcome.rep.to_string(),
                    outcome.seed.to_string(),
                    per.threshold.to_string(),
                    penalty,
                    iterations,
                    converged,
                ]);
            }
        }
        let rep_path = out_dir.join("replicates.csv");
        write_csv(
            &rep_path,
            &prov,
            &[
                "n",
                "p",
                "rho",
                "p0",
                "r2",
                "method",
                "rep",
                "seed",
                "threshold",
                "penalty",
                "iterations",
                "converged",
            ],
            &rows,
        )?;
        println!("wrote {}", rep_path.display());
    }
    Ok(())
}

fn run_replicate(
    manifest: &RunManifest,
    methods: &[SimMethod],
    base_seed: u64,
    cell: GridCell,
    rep: usize,
) -> Result<RepOutcome> {
    let rep_seed = mix_seed(&[base_seed, cell.index as u64, rep as u64]);
    let setting = SimSetting {
        n: cell.n,
        p: cell.p,
        rho: cell.rho,
        p0: cell.p0,
        r2: cell.r2,
        seed: rep_seed,
    };
    let data = gen_dataset(&setting)?;
    let (x, _) = linalg::standardize(&data.x, StandardizeOptions::default());
    let (y, _) = linalg::center_response(&data.y);
    let m = match manifest.m {
        Some(m) => m,
        None => default_threshold(cell.n)?,
    };
    // sis and the direct ridge route never need the spectrum; holp does
    let mut eig = None;
    let mut per_method = Vec::with_capacity(methods.len());
    for method in methods {
        let (result, air) = match method {
            SimMethod::Sis => (screen_sis(&x, &y, m)?, None),
            SimMethod::Holp => {
                if eig.is_none() {
                    eig = Some(linalg::sym_eigen(
                        &linalg::row_gram(&x),
                        linalg::DEFAULT_RANK_TOL,
                    )?);
                }
                (
                    screen_holp(&x, &y, eig.as_ref().expect("just set"), m)?,
                    None,
                )
            }
            SimMethod::RidgeHolp => (screen_fixed_ridge(&x, &y, manifest.ridge_penalty, m)?, None),
            SimMethod::AirHolp => {
                let trace = air_holp(&x, &y, &manifest.air.config(m))?;
                let stats = (
                    *trace.penalties.last().expect("non-empty path"),
                    trace.iterations,
                    trace.converged,
                );
                (trace.result, Some(stats))
            }
        };
        per_method.push(MethodOutcome {
            threshold: sure_screening_threshold(&result, &data.true_features)?,
            air,
        });
    }
    Ok(RepOutcome {
        cell: cell.index,
        rep,
        seed: rep_seed,
        per_method,
    })
}

/// Linear-interpolation quantile of an ascending sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

// ----------------------------------------------------------------- bench --

/// Default sweep: n = 100 with p doubling from 1000 to 16000.
const DEFAULT_BENCH_SIZES: [(usize, usize); 5] = [
    (100, 1000),
    (100, 2000),
    (100, 4000),
    (100, 8000),
    (100, 16000),
];

/// In the default preset the primal kernel stops here: its O(p^3) solve and
/// p-by-p matrix dwarf everything else well before p = 16000.
const DEFAULT_PRIMAL_P_CAP: usize = 4000;

#[derive(Serialize)]
struct BenchReport<'a> {
    provenance: &'a Provenance,
    summaries: &'a [crate::bench::BenchSummary],
    skipped: &'a [crate::bench::SkippedCell],
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    if args.reps < 3 {
        return Err(CliError::Usage(format!(
            "--reps must be at least 3, got {}",
            args.reps
        )));
    }
    let cfg = BenchConfig {
        reps: args.reps,
        seed: args.seed,
        ..BenchConfig::default()
    };

    let mut outcome = BenchOutcome::default();
    if args.size.is_empty() && args.method.is_empty() {
        // preset: full sweep for the dual kernels, capped sweep for primal
        let dual: Vec<(usize, usize)> = DEFAULT_BENCH_SIZES.to_vec();
        let primal: Vec<(usize, usize)> = DEFAULT_BENCH_SIZES
            .iter()
            .copied()
            .filter(|&(_, p)| p <= DEFAULT_PRIMAL_P_CAP)
            .collect();
        merge_outcome(
            &mut outcome,
            run_bench(&dual, &[BenchMethod::RidgeHolp, BenchMethod::AirHolp], &cfg)?,
        );
        merge_outcome(&mut outcome, run_bench(&primal, &[BenchMethod::RidgePrimal], &cfg)?);
    } else {
        let sizes: Vec<(usize, usize)> = if args.size.is_empty() {
            DEFAULT_BENCH_SIZES.to_vec()
        } else {
            args.size.clone()
        };
        let methods: Vec<BenchMethod> = if args.method.is_empty() {
            BenchMethod::ALL.to_vec()
        } else {
            args.method.clone()
        };
        merge_outcome(&mut outcome, run_bench(&sizes, &methods, &cfg)?);
    }

    let summaries = summarize(&outcome.records)?;
    create_out_dir(&args.out_dir)?;
    let prov = Provenance::new(current_command(), Some(args.seed), !args.no_timestamp);

    let record_rows: Vec<Vec<String>> = outcome
        .records
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.rep.to_string(),
                format!("{:.6}", r.millis),
            ]
        })
        .collect();
    write_csv(
        &args.out_dir.join("records.csv"),
        &prov,
        &["method", "n", "p", "rep", "ms"],
        &record_rows,
    )?;

    let summary_rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.method.to_string(),
                s.n.to_string(),
                s.p.to_string(),
                s.reps.to_string(),
                format!("{:.6}", s.trimmed_mean_log_ms),
                format!("{:.6}", s.median_ms),
                format!("{:.6}", s.min_ms),
                format!("{:.6}", s.max_ms),
            ]
        })
        .collect();
    write_csv(
        &args.out_dir.join("summary.csv"),
        &prov,
        &[
            "method",
            "n",
            "p",
            "reps",
            "trimmed_mean_log_ms",
            "median_ms",
            "min_ms",
            "max_ms",
        ],
        &summary_rows,
    )?;
    write_json(
        &args.out_dir.join("summary.json"),
        &BenchReport {
            provenance: &prov,
            summaries: &summaries,
            skipped: &outcome.skipped,
        },
    )?;

    for s in &summaries {
        println!(
            "{} n={} p={}: median {:.3} ms over {} reps",
            s.method, s.n, s.p, s.median_ms, s.reps
        );
    }
    for skip in &outcome.skipped {
        eprintln!("skipped {} n={} p={}: {}", skip.method, skip.n, skip.p, skip.reason);
    }
    println!("wrote {}", args.out_dir.join("records.csv").display());
    println!("wrote {}", args.out_dir.join("summary.csv").display());
    println!("wrote {}", args.out_dir.join("summary.json").display());
    Ok(())
}

fn merge_outcome(into: &mut BenchOutcome, from: BenchOutcome) {
    into.records.extend(from.records);
    into.skipped.extend(from.skipped);
}
