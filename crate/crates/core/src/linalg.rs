//! Dense linear algebra kernels for ridge screening.
//!
//! Everything here is organized around the dual (observation-space) form of
//! ridge regression. With n rows and p columns, p may run into the tens of
//! thousands while n stays in the hundreds, so the kernels factor the n-by-n
//! row Gram matrix XX' instead of the p-by-p product X'X. The primal route
//! is kept alive in [`ridge_primal`] as an expensive cross-check; the two
//! must agree to high precision on any well-posed problem.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff: eigenvalues below `DEFAULT_RANK_TOL` times the
/// largest one are treated as exact zeros when inverting the row Gram matrix.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Ridge coefficient estimates, one entry per predictor.
pub type CoefficientVector = DVector<f64>;

static SYM_EIGEN_CALLS: AtomicUsize = AtomicUsize::new(0);

/// Number of [`sym_eigen`] calls made by this process so far.
///
/// Decompositions dominate the cost of adaptive screening, so tests pin down
/// exactly how many a routine performs by differencing this counter.
pub fn sym_eigen_call_count() -> usize {
    SYM_EIGEN_CALLS.load(Ordering::Relaxed)
}

/// A dense n-by-p design matrix with finite entries, n >= 2 and p >= 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
}

impl DesignMatrix {
    /// Wraps a matrix after checking shape and finiteness.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "design matrix needs at least 2 rows, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "design matrix needs at least 1 column".into(),
            ));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite {
                        context: "design matrix",
                        row: i,
                        col: j,
                    });
                }
            }
        }
        Ok(Self { values })
    }

    /// Builds from a row-major buffer of length n * p.
    pub fn from_row_major(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{p} matrix, got {}",
                n * p,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, p, data))
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of predictors.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Column treatment for [`standardize`].
#[derive(Clone, Copy, Debug)]
pub struct StandardizeOptions {
    /// Subtract each column mean.
    pub center: bool,
    /// Divide each column by its sample standard deviation (n - 1 divisor).
    pub scale: bool,
}

impl Default for StandardizeOptions {
    fn default() -> Self {
        Self {
            center: true,
            scale: true,
        }
    }
}

/// Columns that could not be scaled.
#[derive(Clone, Debug, Default)]
pub struct StandardizeReport {
    /// Zero-variance columns, left unscaled; centering maps them to zero.
    pub constant_columns: Vec<usize>,
}

/// Centers and/or scales every column of `x`.
///
/// Scaling uses the sample standard deviation with an n - 1 divisor.
/// Constant columns are never divided by their zero deviation; they are
/// listed in the report instead.
pub fn standardize(x: &DesignMatrix, opts: StandardizeOptions) -> (DesignMatrix, StandardizeReport) {
    let n = x.n() as f64;
    let mut out = x.values.clone();
    let mut report = StandardizeReport::default();
    for j in 0..x.p() {
        let mut col = out.column_mut(j);
        let mean = col.sum() / n;
        if opts.center {
            col.add_scalar_mut(-mean);
        }
        if opts.scale {
            let shift = if opts.center { 0.0 } else { mean };
            let ss: f64 = col.iter().map(|v| (v - shift) * (v - shift)).sum();
            let sd = (ss / (n - 1.0)).sqrt();
            if sd > 0.0 {
                col /= sd;
            } else {
                report.constant_columns.push(j);
            }
        }
    }
    (DesignMatrix { values: out }, report)
}

/// Centers a response vector, returning the centered copy and the mean.
pub fn center_response(y: &DVector<f64>) -> (DVector<f64>, f64) {
    let mean = y.sum() / y.len() as f64;
    (y.add_scalar(-mean), mean)
}

/// Columns per panel in [`row_gram`]. A panel of 512 columns at n in the
/// hundreds stays inside the last-level cache, which keeps the product
/// linear in p instead of degrading once X outgrows the cache.
const GRAM_PANEL_COLS: usize = 512;

/// The n-by-n row Gram matrix XX', exactly symmetric.
///
/// The product accumulates over column panels, transposing one panel at a
/// time into a reused buffer rather than materializing all of X'. The upper
/// triangle is then mirrored, so downstream symmetric solvers never see
/// last-ulp asymmetry.
pub fn row_gram(x: &DesignMatrix) -> DMatrix<f64> {
    let m = &x.values;
    let n = m.nrows();
    let p = m.ncols();
    let mut g = DMatrix::zeros(n, n);
    let mut buf = DMatrix::zeros(GRAM_PANEL_COLS.min(p), n);
    let mut start = 0;
    while start < p {
        let width = GRAM_PANEL_COLS.min(p - start);
        let panel = m.columns(start, width);
        let mut t = buf.rows_mut(0, width);
        panel.transpose_to(&mut t);
        // panel * panel' accumulates into g, with panel' read from the buffer
        g.gemm(1.0, &panel, &buf.rows(0, width), 1.0);
        start += width;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = g[(i, j)];
            g[(j, i)] = v;
        }
    }
    g
}

/// Eigendecomposition of a symmetric positive semidefinite matrix with
/// eigenvalues sorted descending and clamped at zero.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigvecs: DMatrix<f64>,
    eigvals: DVector<f64>,
    rank_tol: f64,
}

impl EigenSystem {
    /// Orthonormal eigenvectors, one per column, matching [`Self::eigvals`].
    pub fn eigvecs(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    /// Eigenvalues in descending order; never negative.
    pub fn eigvals(&self) -> &DVector<f64> {
        &self.eigvals
    }

    /// Relative cutoff this system was built with.
    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Dimension of the decomposed matrix.
    pub fn n(&self) -> usize {
        self.eigvals.len()
    }

    /// Absolute threshold below which an eigenvalue counts as zero.
    pub fn zero_cutoff(&self) -> f64 {
        self.rank_tol * self.eigvals[0]
    }

    /// Number of eigenvalues strictly above the zero cutoff.
    pub fn numerical_rank(&self) -> usize {
        let cutoff = self.zero_cutoff();
        self.eigvals.iter().filter(|&&d| d > cutoff).count()
    }

    /// True when no eigenvalue falls at or below the zero cutoff.
    pub fn is_full_rank(&self) -> bool {
        self.numerical_rank() == self.n()
    }
}

/// Symmetric eigendecomposition of `g`.
///
/// `g` must be square and symmetric to about 1e-10 relative to its largest
/// entry. Tiny negative eigenvalues produced by rounding are clamped to
/// zero; anything below `rank_tol` times the top eigenvalue is treated as an
/// exact zero by the solvers that consume the result.
pub fn sym_eigen(g: &DMatrix<f64>, rank_tol: f64) -> Result<EigenSystem> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            n,
            g.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if !(rank_tol.is_finite() && rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "rank tolerance must be finite and non-negative".into(),
        ));
    }
    let scale = g.amax();
    if !scale.is_finite() {
        return Err(Error::NonFinite {
            context: "gram matrix",
            row: 0,
            col: 0,
        });
    }
    let sym_tol = 1e-10 * (1.0 + scale);
    for i in 0..n {
        for j in (i + 1)..n {
            if (g[(i, j)] - g[(j, i)]).abs() > sym_tol {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    SYM_EIGEN_CALLS.fetch_add(1, Ordering::Relaxed);
    let sym = g
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[b].partial_cmp(&sym.eigenvalues[a]).unwrap());
    let mut eigvals = DVector::zeros(n);
    let mut eigvecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigvals[k] = sym.eigenvalues[i].max(0.0);
        eigvecs.set_column(k, &sym.eigenvectors.column(i));
    }
    Ok(EigenSystem {
        eigvecs,
        eigvals,
        rank_tol,
    })
}

fn check_response(x: &DesignMatrix, y: &DVector<f64>) -> Result<()> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but the design has {} rows",
            y.len(),
            x.n()
        )));
    }
    check_vector_finite(y, "response")
}

/// Errors on the first NaN or infinite entry, reported under `context`.
pub fn check_vector_finite(v: &DVector<f64>, context: &'static str) -> Result<()> {
    for (i, value) in v.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context,
                row: i,
                col: 0,
            });
        }
    }
    Ok(())
}

fn check_penalty(r: f64, allow_zero: bool) -> Result<()> {
    let ok = r.is_finite() && if allow_zero { r >= 0.0 } else { r > 0.0 };
    if !ok {
        let bound = if allow_zero { "non-negative" } else { "positive" };
        return Err(Error::InvalidArgument(format!(
            "ridge penalty must be finite and {bound}, got {r}"
        )));
    }
    Ok(())
}

/// Ridge coefficients through the dual form X'(XX' + rI)^{-1} y, using a
/// precomputed eigendecomposition of XX'.
///
/// Spectral directions whose eigenvalue sits at numerical zero are skipped:
/// the exact-arithmetic coefficient along them vanishes, so at r = 0 this
/// reproduces the Moore-Penrose solution X'(XX')^+ y. Costs O(n^2 + np)
/// once the eigensystem is in hand.
pub fn ridge_dual(
    x: &DesignMatrix,
    y: &DVector<f64>,
    r: f64,
    eig: &EigenSystem,
) -> Result<CoefficientVector> {
    check_response(x, y)?;
    check_penalty(r, true)?;
    if eig.n() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "eigensystem is {}-dimensional but the design has {} rows",
            eig.n(),
            x.n()
        )));
    }
    let cutoff = eig.zero_cutoff();
    let a = eig.eigvecs().tr_mul(y);
    let mut w = DVector::zeros(eig.n());
    for j in 0..eig.n() {
        let d = eig.eigvals()[j];
        if d > cutoff {
            w[j] = a[j] / (d + r);
        }
    }
    let v = eig.eigvecs() * w;
    Ok(x.values.tr_mul(&v))
}

/// Ridge coefficients through one Cholesky solve of XX' + rI.
///
/// Same estimator as [`ridge_dual`] for r > 0, without the eigendecomposition;
/// this is the cheapest single-penalty route and the one benchmarks time.
pub fn ridge_dual_direct(x: &DesignMatrix, y: &DVector<f64>, r: f64) -> Result<CoefficientVector> {
    check_response(x, y)?;
    check_penalty(r, false)?;
    let mut g = row_gram(x);
    for i in 0..x.n() {
        g[(i, i)] += r;
    }
    let chol = nalgebra::Cholesky::new(g)
        .ok_or_else(|| Error::Numerical("XX' + rI is not positive definite".into()))?;
    let v = chol.solve(y);
    Ok(x.values.tr_mul(&v))
}

/// Ridge coefficients through the primal form (X'X + rI)^{-1} X'y.
///
/// Costs O(p^3 + p^2 n); it exists as the classical reference the dual form
/// is checked against, not as a production path.
pub fn ridge_primal(x: &DesignMatrix, y: &DVector<f64>, r: f64) -> Result<CoefficientVector> {
    check_response(x, y)?;
    check_penalty(r, false)?;
    let m = &x.values;
    let mut gram = m.tr_mul(m);
    for j in 0..x.p() {
        gram[(j, j)] += r;
    }
    let rhs = m.tr_mul(y);
    let chol = nalgebra::Cholesky::new(gram)
        .ok_or_else(|| Error::Numerical("X'X + rI is not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// Fitted values of the dual ridge estimator, X beta_r, computed spectrally
/// as U diag(d / (d + r)) U'y in O(n^2) without forming the coefficients.
pub fn fitted_response(y: &DVector<f64>, r: f64, eig: &EigenSystem) -> Result<DVector<f64>> {
    if y.len() != eig.n() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries but the eigensystem is {}-dimensional",
            y.len(),
            eig.n()
        )));
    }
    check_vector_finite(y, "response")?;
    check_penalty(r, true)?;
    let cutoff = eig.zero_cutoff();
    let a = eig.eigvecs().tr_mul(y);
    let mut w = DVector::zeros(eig.n());
    for j in 0..eig.n() {
        let d = eig.eigvals()[j];
        if d > cutoff {
            w[j] = a[j] * d / (d + r);
        }
    }
    Ok(eig.eigvecs() * w)
}
