//! Feature screening: scoring rules, rankings, and retention sets.

use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, DesignMatrix, EigenSystem};

/// Which scoring rule produced a result, carrying the penalty actually used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "method", content = "penalty")]
pub enum MethodTag {
    #[serde(rename = "sis")]
    Sis,
    #[serde(rename = "holp")]
    Holp,
    #[serde(rename = "ridge-holp")]
    RidgeHolp(f64),
    #[serde(rename = "air-holp")]
    AirHolp(f64),
}

impl MethodTag {
    /// Short method name without the penalty.
    pub fn name(&self) -> &'static str {
        match self {
            MethodTag::Sis => "sis",
            MethodTag::Holp => "holp",
            MethodTag::RidgeHolp(_) => "ridge-holp",
            MethodTag::AirHolp(_) => "air-holp",
        }
    }

    /// The ridge penalty behind the scores, if the method has one.
    pub fn penalty(&self) -> Option<f64> {
        match self {
            MethodTag::Sis | MethodTag::Holp => None,
            MethodTag::RidgeHolp(r) | MethodTag::AirHolp(r) => Some(*r),
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.penalty() {
            Some(r) => write!(f, "{}(r={r})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Per-feature scores with the ranking and retention set they induce.
#[derive(Clone, Debug, Serialize)]
pub struct ScreeningResult {
    /// Raw scores, one per feature; magnitude is what matters.
    pub scores: Vec<f64>,
    /// Zero-based feature indices sorted by |score| descending; ties break
    /// toward the smaller index, identically across runs.
    pub ranking: Vec<usize>,
    /// The first m entries of `ranking`.
    pub screened: Vec<usize>,
    /// The rule that produced the scores.
    pub method: MethodTag,
    /// Notes about degenerate inputs: rank deficiency, constant columns,
    /// clamped retention sizes.
    pub warnings: Vec<String>,
}

impl ScreeningResult {
    /// Ranks `scores` by absolute value and keeps the top `m` features.
    ///
    /// `m` larger than the number of features is clamped with a warning.
    pub fn from_scores(scores: Vec<f64>, m: usize, method: MethodTag) -> Result<Self> {
        let p = scores.len();
        if p == 0 {
            return Err(Error::InvalidArgument("no features to rank".into()));
        }
        if m == 0 {
            return Err(Error::InvalidArgument(
                "must retain at least one feature".into(),
            ));
        }
        for (j, s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFinite {
                    context: "scores",
                    row: 0,
                    col: j,
                });
            }
        }
        let ranking = rank_by_magnitude(&scores);
        let mut warnings = Vec::new();
        let m_eff = if m > p {
            warnings.push(format!("requested top {m} of {p} features; keeping all {p}"));
            p
        } else {
            m
        };
        let screened = ranking[..m_eff].to_vec();
        Ok(Self {
            scores,
            ranking,
            screened,
            method,
            warnings,
        })
    }

    /// One-based position of `feature` in the ranking, if it exists.
    pub fn rank_of(&self, feature: usize) -> Option<usize> {
        self.ranking.iter().position(|&f| f == feature).map(|k| k + 1)
    }
}

/// Feature indices sorted by |score| descending; the stable sort breaks ties
/// toward the smaller index.
pub fn rank_by_magnitude(scores: &[f64]) -> Vec<usize> {
    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    ranking.sort_by(|&a, &b| {
        scores[b]
            .abs()
            .partial_cmp(&scores[a].abs())
            .expect("scores are finite")
    });
    ranking
}

/// Default retention size ceil(n / ln n) for n observations.
pub fn default_threshold(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "retention size is defined for n >= 2, got {n}"
        )));
    }
    let n = n as f64;
    Ok((n / n.ln()).ceil() as usize)
}

/// OLS-projection screening: ranks features by X'(XX')^+ y.
///
/// A rank-deficient row Gram matrix gets a warning; the scores then come
/// from the pseudo-inverse rather than a true inverse.
pub fn screen_holp(
    x: &DesignMatrix,
    y: &DVector<f64>,
    eig: &EigenSystem,
    m: usize,
) -> Result<ScreeningResult> {
    let coef = linalg::ridge_dual(x, y, 0.0, eig)?;
    let mut result = ScreeningResult::from_scores(coef.iter().copied().collect(), m, MethodTag::Holp)?;
    if !eig.is_full_rank() {
        result.warnings.push(format!(
            "row Gram matrix has numerical rank {} out of {}; scores use its pseudo-inverse",
            eig.numerical_rank(),
            eig.n()
        ));
    }
    Ok(result)
}

/// Penalized projection screening: ranks features by X'(XX' + rI)^{-1} y.
pub fn screen_ridge_holp(
    x: &DesignMatrix,
    y: &DVector<f64>,
    r: f64,
    eig: &EigenSystem,
    m: usize,
) -> Result<ScreeningResult> {
    let coef = linalg::ridge_dual(x, y, r, eig)?;
    ScreeningResult::from_scores(coef.iter().copied().collect(), m, MethodTag::RidgeHolp(r))
}

/// Penalized projection screening at one fixed penalty, choosing the
/// cheapest route: a single Cholesky solve for r > 0, the spectral
/// pseudo-inverse for r = 0.
pub fn screen_fixed_ridge(
    x: &DesignMatrix,
    y: &DVector<f64>,
    r: f64,
    m: usize,
) -> Result<ScreeningResult> {
    if r > 0.0 {
        let coef = linalg::ridge_dual_direct(x, y, r)?;
        ScreeningResult::from_scores(coef.iter().copied().collect(), m, MethodTag::RidgeHolp(r))
    } else {
        let eig = linalg::sym_eigen(&linalg::row_gram(x), linalg::DEFAULT_RANK_TOL)?;
        screen_ridge_holp(x, y, r, &eig, m)
    }
}

/// Marginal correlation screening: ranks features by |Pearson correlation|
/// with the response.
///
/// Constant columns have undefined correlation; they score zero and are
/// listed in a warning. A constant response is an error.
pub fn screen_sis(x: &DesignMatrix, y: &DVector<f64>, m: usize) -> Result<ScreeningResult> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but the design has {} rows",
            y.len(),
            x.n()
        )));
    }
    crate::linalg::check_vector_finite(y, "response")?;
    let n = x.n();
    let y_mean = y.sum() / n as f64;
    let yc: DVector<f64> = y.add_scalar(-y_mean);
    let syy = yc.norm_squared();
    if syy == 0.0 {
        return Err(Error::ZeroVarianceResponse);
    }
    let m_x = x.matrix();
    let mut scores = vec![0.0; x.p()];
    let mut constant = Vec::new();
    for j in 0..x.p() {
        let col = m_x.column(j);
        let mean = col.sum() / n as f64;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for i in 0..n {
            let dx = col[i] - mean;
            sxy += dx * yc[i];
            sxx += dx * dx;
        }
        if sxx == 0.0 {
            constant.push(j);
        } else {
            scores[j] = sxy / (sxx * syy).sqrt();
        }
    }
    let mut result = ScreeningResult::from_scores(scores, m, MethodTag::Sis)?;
    if !constant.is_empty() {
        result.warnings.push(format!(
            "{} constant column(s) {:?} scored zero: correlation with a constant is undefined",
            constant.len(),
            constant
        ));
    }
    Ok(result)
}
