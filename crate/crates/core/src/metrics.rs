//! Screening quality metrics.
//!
//! The central quantity is the sure screening threshold of one replicate:
//! the smallest retention size that keeps every true feature. Aggregating
//! the indicator {threshold <= m} over replicates gives the sure screening
//! probability. [`multiple_r`] measures how much response variation a small
//! subset of the screened features can explain.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::screening::ScreeningResult;

/// One-based ranks of the true features across a batch of replicates, with
/// the retention size they are judged against.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    ranks: Vec<Vec<usize>>,
    m: usize,
}

impl BatchOutcome {
    /// Empty batch judged against retention size `m`.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "retention size must be at least 1".into(),
            ));
        }
        Ok(Self {
            ranks: Vec::new(),
            m,
        })
    }

    /// Records one replicate from a screening result.
    pub fn push(&mut self, result: &ScreeningResult, true_features: &[usize]) -> Result<()> {
        let ranks = true_feature_ranks(result, true_features)?;
        self.ranks.push(ranks);
        Ok(())
    }

    /// Records one replicate from precomputed one-based ranks.
    pub fn push_ranks(&mut self, ranks: Vec<usize>) -> Result<()> {
        if ranks.is_empty() {
            return Err(Error::InvalidArgument("no true-feature ranks given".into()));
        }
        if ranks.iter().any(|&r| r == 0) {
            return Err(Error::InvalidArgument("ranks are one-based".into()));
        }
        self.ranks.push(ranks);
        Ok(())
    }

    /// Number of replicates recorded so far.
    pub fn replicates(&self) -> usize {
        self.ranks.len()
    }

    /// Retention size the probability is judged against.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Per-replicate sure screening thresholds (largest true-feature rank).
    pub fn thresholds(&self) -> Vec<usize> {
        self.ranks
            .iter()
            .map(|ranks| *ranks.iter().max().expect("non-empty ranks"))
            .collect()
    }
}

fn true_feature_ranks(result: &ScreeningResult, true_features: &[usize]) -> Result<Vec<usize>> {
    if true_features.is_empty() {
        return Err(Error::InvalidArgument("no true features given".into()));
    }
    true_features
        .iter()
        .map(|&f| {
            result
                .rank_of(f)
                .ok_or_else(|| Error::InvalidArgument(format!("feature {f} is not in the ranking")))
        })
        .collect()
}

/// Smallest retention size that keeps every true feature: the largest
/// one-based rank among them.
pub fn sure_screening_threshold(
    result: &ScreeningResult,
    true_features: &[usize],
) -> Result<usize> {
    let ranks = true_feature_ranks(result, true_features)?;
    Ok(*ranks.iter().max().expect("non-empty ranks"))
}

/// Fraction of replicates whose threshold fits within the batch's retention
/// size.
pub fn sure_screening_probability(batch: &BatchOutcome) -> Result<f64> {
    if batch.replicates() == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let hits = batch
        .thresholds()
        .iter()
        .filter(|&&t| t <= batch.m())
        .count();
    Ok(hits as f64 / batch.replicates() as f64)
}

/// Controls for the subset search in [`multiple_r`].
#[derive(Clone, Copy, Debug)]
pub struct MultipleROptions {
    /// Exhaustive enumeration runs while C(m, k) stays at or below this;
    /// beyond it the search falls back to greedy forward selection.
    pub subset_cap: u128,
}

impl Default for MultipleROptions {
    fn default() -> Self {
        Self {
            subset_cap: 1_000_000,
        }
    }
}

/// Best multiple correlation over size-k subsets.
#[derive(Clone, Debug, Serialize)]
pub struct MultipleR {
    /// max over subsets of sqrt(explained variation / total variation),
    /// with an intercept always included.
    pub r: f64,
    /// Zero-based columns of the screened matrix achieving it.
    pub subset: Vec<usize>,
    /// False when the subset count exceeded the cap and greedy forward
    /// selection produced the answer instead.
    pub exhaustive: bool,
}

/// Largest multiple correlation between `y` and any k columns of
/// `screened`, intercept included.
///
/// All C(m, k) subsets are tried while their count stays within
/// `opts.subset_cap`; beyond that, greedy forward selection adds one column
/// at a time and the result carries `exhaustive = false`. Rank-deficient
/// subsets are handled through a pseudo-inverse solve.
pub fn multiple_r(
    y: &DVector<f64>,
    screened: &DMatrix<f64>,
    k: usize,
    opts: &MultipleROptions,
) -> Result<MultipleR> {
    let n = screened.nrows();
    let m = screened.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but the matrix has {n} rows",
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 observations".into()));
    }
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "subset size must lie in 1..={m}, got {k}"
        )));
    }
    crate::linalg::check_vector_finite(y, "response")?;
    for j in 0..m {
        for i in 0..n {
            if !screened[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    context: "screened matrix",
                    row: i,
                    col: j,
                });
            }
        }
    }
    let y_mean = y.sum() / n as f64;
    let yc = y.add_scalar(-y_mean);
    let tss = yc.norm_squared();
    if tss == 0.0 {
        return Err(Error::ZeroVarianceResponse);
    }
    let mut xc = screened.clone();
    for j in 0..m {
        let mut col = xc.column_mut(j);
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
    }
    let gram = xc.tr_mul(&xc);
    let h = xc.tr_mul(&yc);

    let exhaustive = binomial(m, k).map_or(false, |count| count <= opts.subset_cap);
    let (best_rss, best_subset) = if exhaustive {
        let mut best = (f64::INFINITY, Vec::new());
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let rss = subset_rss(&gram, &h, tss, &subset);
            if rss < best.0 {
                best = (rss, subset.clone());
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
        best
    } else {
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        let mut best_rss = tss;
        for _ in 0..k {
            let mut step_best: Option<(f64, usize)> = None;
            for j in 0..m {
                if chosen.contains(&j) {
                    continue;
                }
                let mut trial = chosen.clone();
                trial.push(j);
                trial.sort_unstable();
                let rss = subset_rss(&gram, &h, tss, &trial);
                if step_best.map_or(true, |(b, _)| rss < b) {
                    step_best = Some((rss, j));
                }
            }
            let (rss, j) = step_best.expect("at least one remaining column");
            chosen.push(j);
            best_rss = rss;
        }
        chosen.sort_unstable();
        (best_rss, chosen)
    };

    let explained = (tss - best_rss).max(0.0);
    Ok(MultipleR {
        r: (explained / tss).sqrt(),
        subset: best_subset,
        exhaustive,
    })
}

/// Residual sum of squares of the centered regression of y on the given
/// columns. For any solution of G_s b = h_s the identity
/// rss = tss - h_s'b holds, including pseudo-inverse solutions.
fn subset_rss(gram: &DMatrix<f64>, h: &DVector<f64>, tss: f64, subset: &[usize]) -> f64 {
    let k = subset.len();
    let gs = DMatrix::from_fn(k, k, |i, j| gram[(subset[i], subset[j])]);
    let hs = DVector::from_fn(k, |i, _| h[subset[i]]);
    let solution = match Cholesky::new(gs.clone()) {
        Some(chol) => chol.solve(&hs),
        // collinear subset: fall back to the minimum-norm solution
        None => gs
            .svd(true, true)
            .solve(&hs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(k)),
    };
    (tss - hs.dot(&solution)).max(0.0)
}

fn binomial(m: usize, k: usize) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.checked_mul((m - i) as u128)?;
        result /= (i + 1) as u128;
    }
    Some(result)
}

/// Advances `idx` to the next k-combination of 0..m in lexicographic order;
/// false once the last combination has been visited.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + m - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
