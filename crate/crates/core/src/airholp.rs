//! Adaptive ridge penalty selection for projection screening.
//!
//! The ridge penalty r trades shrinkage noise against the distortion it
//! introduces in the dual projection X'(XX' + rI)^{-1} y. Write XX' = U D U'
//! with eigenvalues d, let a = U'y, and let b = U'yt for a pilot estimate yt
//! of E[y | X]. Up to a constant that does not involve r, the expected
//! squared distance between the penalized fit and the pilot target is
//!
//! ```text
//! g(r) = sum_j a_j^2 d_j^2 / (d_j + r)^2 - 2 sum_j a_j b_j d_j / (d_j + r)
//! ```
//!
//! One adaptive round screens with the current penalty, refits the retained
//! features by least squares to refresh the pilot estimate, and minimizes g
//! over [0, c sqrt(n)] to obtain the next penalty. The loop stops once two
//! successive penalties agree to a relative tolerance. Everything reuses a
//! single eigendecomposition of XX', so one run costs one factorization plus
//! cheap per-round work.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, DesignMatrix, EigenSystem, DEFAULT_RANK_TOL};
use crate::screening::{rank_by_magnitude, MethodTag, ScreeningResult};

/// Default starting penalty.
pub const DEFAULT_R0: f64 = 10.0;
/// Default interval constant: candidate penalties live in [0, c sqrt(n)].
pub const DEFAULT_C: f64 = 1000.0;
/// Default relative tolerance for the stopping rule.
pub const DEFAULT_DELTA: f64 = 0.01;
/// Default cap on penalty updates.
pub const DEFAULT_MAX_ITER: usize = 10;

/// Singular values below this fraction of the largest are dropped when
/// refitting the screened features, which makes rank-deficient refits the
/// minimum-norm ones.
const REFIT_SV_CUTOFF: f64 = 1e-10;
/// Number of log-spaced points scanned when bracketing minima of g.
const SCAN_POINTS: usize = 4096;
/// Lower end of the log-spaced scan, as a fraction of the interval width.
const SCAN_FLOOR: f64 = 1e-6;
/// Relative step size at which Newton refinement of a stationary point stops.
const NEWTON_STEP_TOL: f64 = 1e-8;
/// Iteration cap for one Newton refinement.
const NEWTON_MAX_STEPS: usize = 100;

/// Fixed quantities behind the penalty objective: spectral coordinates of
/// the response (a = U'y) and of the pilot target (b = U'yt), eigenvalues d,
/// and the search interval [0, r_max].
#[derive(Clone, Debug)]
pub struct PenaltyObjectiveContext {
    a: DVector<f64>,
    b: DVector<f64>,
    d: DVector<f64>,
    r_max: f64,
    zero_cutoff: f64,
    /// (d, a^2, a b) for coordinates above the cutoff; the scan's hot loop
    /// reads these instead of recomputing the products per grid point.
    terms: Vec<(f64, f64, f64)>,
}

impl PenaltyObjectiveContext {
    /// Builds a context from raw spectral coordinates.
    ///
    /// Eigenvalues at or below `zero_cutoff` are excluded from every sum;
    /// their spectral directions carry no signal.
    pub fn new(
        a: DVector<f64>,
        b: DVector<f64>,
        d: DVector<f64>,
        r_max: f64,
        zero_cutoff: f64,
    ) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty spectral coordinates".into()));
        }
        if b.len() != n || d.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "spectral coordinate lengths differ: a = {n}, b = {}, d = {}",
                b.len(),
                d.len()
            )));
        }
        linalg::check_vector_finite(&a, "spectral response")?;
        linalg::check_vector_finite(&b, "spectral target")?;
        linalg::check_vector_finite(&d, "eigenvalues")?;
        if d.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("eigenvalues must be non-negative".into()));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "penalty interval must have positive finite width, got {r_max}"
            )));
        }
        if !(zero_cutoff.is_finite() && zero_cutoff >= 0.0) {
            return Err(Error::InvalidArgument(
                "zero cutoff must be finite and non-negative".into(),
            ));
        }
        let terms = d
            .iter()
            .zip(a.iter().zip(b.iter()))
            .filter(|&(&dj, _)| dj > zero_cutoff)
            .map(|(&dj, (&aj, &bj))| (dj, aj * aj, aj * bj))
            .collect();
        Ok(Self {
            a,
            b,
            d,
            r_max,
            zero_cutoff,
            terms,
        })
    }

    /// Builds a context from an eigensystem: a = U'y, b = U'target, and the
    /// search interval [0, c sqrt(n)].
    pub fn from_eigen(
        eig: &EigenSystem,
        y: &DVector<f64>,
        target: &DVector<f64>,
        c: f64,
    ) -> Result<Self> {
        if y.len() != eig.n() || target.len() != eig.n() {
            return Err(Error::DimensionMismatch(format!(
                "eigensystem is {}-dimensional, response has {} entries, target {}",
                eig.n(),
                y.len(),
                target.len()
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interval constant must be positive and finite, got {c}"
            )));
        }
        let a = eig.eigvecs().tr_mul(y);
        let b = eig.eigvecs().tr_mul(target);
        let r_max = c * (eig.n() as f64).sqrt();
        Self::new(a, b, eig.eigvals().clone_owned(), r_max, eig.zero_cutoff())
    }

    /// Upper end of the penalty search interval.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !(r.is_finite() && (0.0..=self.r_max).contains(&r)) {
            return Err(Error::InvalidArgument(format!(
                "penalty {r} is outside [0, {}]",
                self.r_max
            )));
        }
        Ok(())
    }

    /// Objective and slope in one pass with one division per coordinate;
    /// `r` must already lie inside [0, r_max].
    fn value_and_slope(&self, r: f64) -> (f64, f64) {
        let mut g = 0.0;
        let mut g1 = 0.0;
        for &(d, aa, ab) in &self.terms {
            let inv = 1.0 / (d + r);
            let s = d * inv;
            g += s * (aa * s - 2.0 * ab);
            g1 += 2.0 * d * inv * inv * (ab - aa * s);
        }
        (g, g1)
    }
}

/// Evaluates the penalty objective g at r in [0, r_max].
pub fn penalty_objective(ctx: &PenaltyObjectiveContext, r: f64) -> Result<f64> {
    ctx.check_r(r)?;
    let mut quad = 0.0;
    let mut cross = 0.0;
    for j in 0..ctx.d.len() {
        let d = ctx.d[j];
        if d <= ctx.zero_cutoff {
            continue;
        }
        let s = d / (d + r);
        quad += ctx.a[j] * ctx.a[j] * s * s;
        cross += ctx.a[j] * ctx.b[j] * s;
    }
    Ok(quad - 2.0 * cross)
}

/// First and second derivatives of the penalty objective at r.
pub fn objective_derivatives(ctx: &PenaltyObjectiveContext, r: f64) -> Result<(f64, f64)> {
    ctx.check_r(r)?;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for j in 0..ctx.d.len() {
        let d = ctx.d[j];
        if d <= ctx.zero_cutoff {
            continue;
        }
        let a2 = ctx.a[j] * ctx.a[j];
        let ab = ctx.a[j] * ctx.b[j];
        let u = d + r;
        let u2 = u * u;
        g1 += -2.0 * a2 * d * d / (u2 * u) + 2.0 * ab * d / u2;
        g2 += 6.0 * a2 * d * d / (u2 * u2) - 4.0 * ab * d / (u2 * u);
    }
    Ok((g1, g2))
}

fn scan_grid(r_max: f64) -> Vec<f64> {
    let lo = SCAN_FLOOR * r_max;
    let span = (r_max / lo).ln();
    let mut grid = Vec::with_capacity(SCAN_POINTS + 1);
    grid.push(0.0);
    for k in 0..SCAN_POINTS {
        let t = k as f64 / (SCAN_POINTS - 1) as f64;
        grid.push(lo * (span * t).exp());
    }
    // exp rounding can land just past the endpoint; force it exactly
    *grid.last_mut().expect("non-empty grid") = r_max;
    grid
}

/// Polishes a stationary point of g inside a bracket where g' changes sign.
///
/// Newton steps on g' use g'' as the slope; any step that leaves the bracket
/// or meets a vanishing g'' falls back to bisection, so the bracket never
/// breaks.
fn refine_stationary(
    ctx: &PenaltyObjectiveContext,
    mut lo: f64,
    mut hi: f64,
    sign_lo: f64,
) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_MAX_STEPS {
        let (g1, g2) = objective_derivatives(ctx, x)?;
        if g1 == 0.0 {
            return Ok(x);
        }
        if g1.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if g2 != 0.0 { x - g1 / g2 } else { f64::NAN };
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= NEWTON_STEP_TOL * (1.0 + next.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Global minimizer of the penalty objective over [0, r_max].
///
/// g is a smooth rational function, so every interior minimum is a root of
/// g'. A log-spaced scan brackets each sign change of g', safeguarded Newton
/// polishes every bracket, and the best value among the refined points, all
/// scan points, and the endpoints wins. Ties resolve to the smaller penalty.
pub fn minimize_penalty(ctx: &PenaltyObjectiveContext) -> Result<f64> {
    let grid = scan_grid(ctx.r_max);
    let mut best_r = grid[0];
    let (mut best_g, mut d_prev) = ctx.value_and_slope(grid[0]);
    let mut r_prev = grid[0];
    let mut brackets = Vec::new();
    for &r in &grid[1..] {
        let (g, d_here) = ctx.value_and_slope(r);
        if g < best_g {
            best_g = g;
            best_r = r;
        }
        if d_prev < 0.0 && d_here > 0.0 {
            brackets.push((r_prev, r, d_prev.signum()));
        }
        d_prev = d_here;
        r_prev = r;
    }
    for (lo, hi, sign_lo) in brackets {
        let root = refine_stationary(ctx, lo, hi, sign_lo)?;
        let g = penalty_objective(ctx, root)?;
        if g < best_g {
            best_g = g;
            best_r = root;
        }
    }
    Ok(best_r)
}

/// Least-squares refit of the top `m` features screened at penalty `r`,
/// returning fitted values that serve as the next pilot estimate of E[y | X].
///
/// The refit regression includes an intercept and goes through a thin SVD;
/// singular values below 1e-10 of the largest are dropped, so a
/// rank-deficient screened block yields the minimum-norm fit instead of an
/// error.
pub fn estimate_expected_response(
    x: &DesignMatrix,
    y: &DVector<f64>,
    r: f64,
    m: usize,
    eig: &EigenSystem,
) -> Result<DVector<f64>> {
    if m < 1 || m > x.p() {
        return Err(Error::InvalidArgument(format!(
            "refit size {m} is outside 1..={}",
            x.p()
        )));
    }
    let coef = linalg::ridge_dual(x, y, r, eig)?;
    let scores: Vec<f64> = coef.iter().copied().collect();
    let order = rank_by_magnitude(&scores);
    let n = x.n();
    let mut design = DMatrix::zeros(n, m + 1);
    design.column_mut(0).fill(1.0);
    for (k, &j) in order[..m].iter().enumerate() {
        design.set_column(k + 1, &x.matrix().column(j));
    }
    let svd = design.svd(true, false);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not produce singular vectors".into()))?;
    let cutoff = REFIT_SV_CUTOFF * svd.singular_values.max();
    let mut fitted = DVector::zeros(n);
    for k in 0..svd.singular_values.len() {
        if svd.singular_values[k] > cutoff {
            let uk = u.column(k);
            fitted.axpy(uk.dot(y), &uk, 1.0);
        }
    }
    Ok(fitted)
}

/// Tuning knobs for [`air_holp`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AirHolpConfig {
    /// Starting penalty; clamped into [0, c sqrt(n)] at run time.
    pub r0: f64,
    /// Interval constant: candidate penalties stay in [0, c sqrt(n)].
    pub c: f64,
    /// Features retained at each round and in the final result.
    pub m: usize,
    /// Stopping tolerance: stop once |r_new - r_old| < delta * r_new.
    /// A new penalty of exactly zero only counts as converged when the old
    /// one was zero too.
    pub delta: f64,
    /// Cap on penalty updates.
    pub max_iter: usize,
}

impl AirHolpConfig {
    /// Defaults with a caller-chosen retention size.
    pub fn new(m: usize) -> Self {
        Self {
            r0: DEFAULT_R0,
            c: DEFAULT_C,
            m,
            delta: DEFAULT_DELTA,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "starting penalty must be finite and non-negative, got {}",
                self.r0
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interval constant must be positive and finite, got {}",
                self.c
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument(
                "must retain at least one feature".into(),
            ));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stopping tolerance must be positive, got {}",
                self.delta
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "need at least one penalty update".into(),
            ));
        }
        Ok(())
    }
}

/// Full record of one adaptive run.
#[derive(Clone, Debug, Serialize)]
pub struct AirHolpTrace {
    /// Penalty path r_0, r_1, ..., r_k; r_0 is the starting value.
    pub penalties: Vec<f64>,
    /// Objective value at each accepted update r_1, ..., r_k, each under the
    /// pilot estimate that produced it.
    pub objective_values: Vec<f64>,
    /// Whether the stopping rule fired (rather than the iteration cap).
    pub converged: bool,
    /// Number of penalty updates performed; equals penalties.len() - 1.
    pub iterations: usize,
    /// Screening at the final penalty.
    pub result: ScreeningResult,
}

/// Adaptive projection screening on a prepared design.
///
/// Columns are used as given; standardize beforehand when scale
/// comparability matters. The row Gram matrix is decomposed exactly once and
/// every round reuses that eigensystem. Each round refits the current top-m
/// features to refresh the pilot estimate, minimizes the penalty objective,
/// and accepts the minimizer; the loop stops when two successive penalties
/// agree to `delta` relative tolerance or after `max_iter` updates.
pub fn air_holp(x: &DesignMatrix, y: &DVector<f64>, config: &AirHolpConfig) -> Result<AirHolpTrace> {
    config.validate()?;
    let gram = linalg::row_gram(x);
    let eig = linalg::sym_eigen(&gram, DEFAULT_RANK_TOL)?;
    let r_max = config.c * (x.n() as f64).sqrt();
    let m_fit = config.m.min(x.p());
    let mut penalties = vec![config.r0.min(r_max)];
    let mut objective_values = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iter {
        let r_cur = *penalties.last().expect("non-empty path");
        let target = estimate_expected_response(x, y, r_cur, m_fit, &eig)?;
        let ctx = PenaltyObjectiveContext::from_eigen(&eig, y, &target, config.c)?;
        let r_next = minimize_penalty(&ctx)?;
        objective_values.push(penalty_objective(&ctx, r_next)?);
        penalties.push(r_next);
        let stop = if r_next == 0.0 {
            r_cur == 0.0
        } else {
            (r_next - r_cur).abs() < config.delta * r_next
        };
        if stop {
            converged = true;
            break;
        }
    }
    let r_final = *penalties.last().expect("non-empty path");
    let coef = linalg::ridge_dual(x, y, r_final, &eig)?;
    let mut result = ScreeningResult::from_scores(
        coef.iter().copied().collect(),
        config.m,
        MethodTag::AirHolp(r_final),
    )?;
    if r_final == 0.0 && !eig.is_full_rank() {
        result.warnings.push(format!(
            "row Gram matrix has numerical rank {} out of {}; zero-penalty scores use its pseudo-inverse",
            eig.numerical_rank(),
            eig.n()
        ));
    }
    Ok(AirHolpTrace {
        iterations: penalties.len() - 1,
        penalties,
        objective_values,
        converged,
        result,
    })
}
