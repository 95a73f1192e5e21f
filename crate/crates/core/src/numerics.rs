//! Dense linear-algebra kernels everything else is built on.
//!
//! Scope is deliberately small: the matrices here are regression designs and
//! their Gram/correlation matrices — at most a few dozen columns — so the
//! implementations favour determinism and transparency over asymptotics:
//!
//! * OLS solves the normal equations with a diagonally pivoted Cholesky
//!   factorization; a pivot below `RANK_TOLERANCE` times the largest Gram
//!   diagonal marks the design rank deficient.
//! * Symmetric eigendecomposition uses cyclic Jacobi rotations, converging
//!   when the off-diagonal Frobenius norm drops below `JACOBI_TOLERANCE`
//!   times the diagonal norm. Eigenvalues are sorted descending and each
//!   eigenvector is sign-fixed (largest-magnitude entry positive) so results
//!   are bit-stable across runs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A pivot below this fraction of the largest Gram diagonal is treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Jacobi sweep convergence: off-diagonal Frobenius norm vs diagonal norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Input asymmetry allowed by [`sym_eigen`], relative to the largest entry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Mean/norm slack allowed by [`correlation_matrix`] on standardized columns.
pub const STANDARDIZATION_TOLERANCE: f64 = 1e-8;

/// Dense row-major matrix of finite floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from a flat row-major buffer. Panics on length mismatch — this is
    /// a programming error, not an input error.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix buffer length mismatch");
        assert!(rows >= 1 && cols >= 1, "matrix must be non-empty");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        assert!(r >= 1, "matrix must have rows");
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix::new(r, c, data)
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        assert!(c >= 1, "matrix must have columns");
        let r = cols[0].len();
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// New matrix keeping only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, columns.len());
        for (jj, &j) in columns.iter().enumerate() {
            for i in 0..self.rows {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.set(i, j, out.get(i, j) + a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// X'X of this matrix (symmetric positive semidefinite).
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for a in 0..self.cols {
            for b in a..self.cols {
                let mut s = 0.0;
                for i in 0..self.rows {
                    s += self.get(i, a) * self.get(i, b);
                }
                g.set(a, b, s);
                g.set(b, a, s);
            }
        }
        g
    }

    /// X'v of this matrix with a vector.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "dimension mismatch");
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * v[i]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

/// A completed least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// One coefficient per design column, in design order.
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    /// Residual standard error `sqrt(rss / (n - p))`.
    pub rse: f64,
    /// Coefficient of determination against the response mean, in `[0, 1]`.
    pub cd: f64,
}

/// Eigen-decomposition of a symmetric matrix: descending eigenvalues with
/// sign-fixed orthonormal eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// p×p matrix whose j-th column pairs with `eigenvalues[j]`.
    pub eigenvectors: Matrix,
}

/// Diagonally pivoted Cholesky of a symmetric PSD matrix.
///
/// Returns the numerical rank `r`, the permutation (pivot order), and the
/// factor limited to the first `r` pivots, such that with `P` the permutation,
/// `(P A P')[..r, ..r] = L L'`. The rank cut-off is `RANK_TOLERANCE` times the
/// largest initial diagonal.
fn pivoted_cholesky(gram: &Matrix) -> (usize, Vec<usize>, Matrix) {
    let p = gram.rows();
    let mut a = gram.clone();
    let mut perm: Vec<usize> = (0..p).collect();
    let max_diag = (0..p).fold(0.0f64, |m, i| m.max(a.get(i, i)));
    let tol = RANK_TOLERANCE * max_diag.max(f64::MIN_POSITIVE);
    let mut l = Matrix::zeros(p, p);
    let mut rank = p;

    for k in 0..p {
        // Choose the largest remaining updated diagonal as pivot.
        let mut best = k;
        for i in (k + 1)..p {
            if a.get(i, i) > a.get(best, best) {
                best = i;
            }
        }
        if a.get(best, best) <= tol {
            rank = k;
            break;
        }
        if best != k {
            swap_sym(&mut a, k, best);
            perm.swap(k, best);
            swap_rows_upto(&mut l, k, best, k);
        }
        let d = a.get(k, k).sqrt();
        l.set(k, k, d);
        for i in (k + 1)..p {
            l.set(i, k, a.get(i, k) / d);
        }
        for i in (k + 1)..p {
            for j in (k + 1)..=i {
                let v = a.get(i, j) - l.get(i, k) * l.get(j, k);
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
    }
    (rank, perm, l)
}

fn swap_sym(a: &mut Matrix, i: usize, j: usize) {
    let p = a.rows();
    for k in 0..p {
        let (x, y) = (a.get(i, k), a.get(j, k));
        a.set(i, k, y);
        a.set(j, k, x);
    }
    for k in 0..p {
        let (x, y) = (a.get(k, i), a.get(k, j));
        a.set(k, i, y);
        a.set(k, j, x);
    }
}

fn swap_rows_upto(l: &mut Matrix, i: usize, j: usize, upto: usize) {
    for k in 0..upto {
        let (x, y) = (l.get(i, k), l.get(j, k));
        l.set(i, k, y);
        l.set(j, k, x);
    }
}

/// Solve `gram · beta = rhs` via pivoted Cholesky, regularizing nothing.
///
/// Dependent columns (pivots under tolerance) receive a zero coefficient; the
/// returned rank says how many pivots were accepted. For a consistent system
/// (Gram and right-hand side from the same design) the fitted values of the
/// induced least-squares problem are unaffected by the dropped columns.
#[allow(clippy::needless_range_loop)] // triangular back/forward substitution reads clearest indexed
fn solve_gram(gram: &Matrix, rhs: &[f64]) -> (Vec<f64>, usize) {
    let p = gram.rows();
    let (rank, perm, l) = pivoted_cholesky(gram);
    // Forward substitution on the permuted right-hand side.
    let mut z = vec![0.0; rank];
    for i in 0..rank {
        let mut s = rhs[perm[i]];
        for k in 0..i {
            s -= l.get(i, k) * z[k];
        }
        z[i] = s / l.get(i, i);
    }
    // Back substitution.
    let mut w = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = z[i];
        for k in (i + 1)..rank {
            s -= l.get(k, i) * w[k];
        }
        w[i] = s / l.get(i, i);
    }
    let mut beta = vec![0.0; p];
    for i in 0..rank {
        beta[perm[i]] = w[i];
    }
    (beta, rank)
}

/// Total sum of squares about the mean.
fn centered_tss(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// Coefficient of determination of a fit, measured against the response mean.
///
/// A constant response fitted exactly scores 1; a constant response fitted
/// with any residual scores 0.
fn coefficient_of_determination(rss: f64, tss: f64, scale: f64) -> f64 {
    if tss <= f64::EPSILON * scale {
        if rss <= f64::EPSILON * scale {
            return 1.0;
        }
        return 0.0;
    }
    (1.0 - rss / tss).clamp(0.0, 1.0)
}

/// Ordinary least squares of `response` on the columns of `design`.
///
/// Requires more rows than columns and a full-rank design; coefficients are
/// otherwise not identified.
pub fn ols_fit(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let (n, p) = (design.rows(), design.cols());
    if response.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows, response has {}",
            response.len()
        )));
    }
    if n <= p {
        return Err(Error::TooFewRows { rows: n, columns: p });
    }
    let gram = design.gram();
    let rhs = design.tr_matvec(response);
    let (coefficients, rank) = solve_gram(&gram, &rhs);
    if rank < p {
        return Err(Error::RankDeficient(format!(
            "numerical rank {rank} of {p} columns"
        )));
    }
    let fitted = design.matvec(&coefficients);
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let rse = (rss / (n - p) as f64).sqrt();
    let scale = response.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let cd = coefficient_of_determination(rss, centered_tss(response), scale);
    Ok(OlsFit {
        coefficients,
        fitted,
        residuals,
        rss,
        rse,
        cd,
    })
}

/// Residual sum of squares of projecting `target` onto the span of `design`,
/// tolerating dependent design columns (they are pivoted away; the projection
/// is unaffected).
pub(crate) fn projection_rss(design: &Matrix, target: &[f64]) -> f64 {
    let gram = design.gram();
    let rhs = design.tr_matvec(target);
    let (beta, _rank) = solve_gram(&gram, &rhs);
    let fitted = design.matvec(&beta);
    target
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f) * (y - f))
        .sum()
}

/// Coefficient of determination of regressing design column `target_col` on
/// all the *other* columns of `design` (which must include the intercept):
/// the share of the column's centered variation explained by its peers.
///
/// Dependent columns among the peers are pivoted away rather than rejected —
/// the projection, and hence the result, is unaffected by how a dependent set
/// is parameterized.
pub fn cd_of_regression(target_col: usize, design: &Matrix) -> Result<f64> {
    let p = design.cols();
    if target_col >= p {
        return Err(Error::IndexOutOfRange(format!(
            "column {target_col} of {p}"
        )));
    }
    let target = design.column(target_col);
    let tss = centered_tss(&target);
    let scale = target.iter().map(|x| x * x).sum::<f64>().max(1.0);
    if tss <= f64::EPSILON * scale {
        return Err(Error::ConstantColumn { column: target_col });
    }
    let others: Vec<usize> = (0..p).filter(|&j| j != target_col).collect();
    let rest = design.select_columns(&others);
    let rss = projection_rss(&rest, &target);
    Ok((1.0 - rss / tss).clamp(0.0, 1.0))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Convention: eigenvalues descending; within each eigenvector the entry of
/// largest magnitude is positive (ties broken by the lowest index).
pub fn sym_eigen(symmetric: &Matrix) -> Result<EigenDecomposition> {
    let p = symmetric.rows();
    if symmetric.cols() != p {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            symmetric.rows(),
            symmetric.cols()
        )));
    }
    if !symmetric.is_symmetric(SYMMETRY_TOLERANCE) {
        let mut max_delta = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                max_delta = max_delta.max((symmetric.get(i, j) - symmetric.get(j, i)).abs());
            }
        }
        return Err(Error::NotSymmetric { max_delta });
    }

    let mut a = symmetric.clone();
    let mut v = Matrix::identity(p);
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..p {
            diag += a.get(i, i) * a.get(i, i);
            for j in (i + 1)..p {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= JACOBI_TOLERANCE * diag.sqrt().max(f64::MIN_POSITIVE) {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let apq = a.get(i, j);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(j, j) - a.get(i, i)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let aii = a.get(i, i);
                let ajj = a.get(j, j);
                a.set(i, i, aii - t * apq);
                a.set(j, j, ajj + t * apq);
                a.set(i, j, 0.0);
                a.set(j, i, 0.0);
                for k in 0..p {
                    if k != i && k != j {
                        let aki = a.get(k, i);
                        let akj = a.get(k, j);
                        a.set(k, i, aki - s * (akj + tau * aki));
                        a.set(i, k, a.get(k, i));
                        a.set(k, j, akj + s * (aki - tau * akj));
                        a.set(j, k, a.get(k, j));
                    }
                }
                for k in 0..p {
                    let vki = v.get(k, i);
                    let vkj = v.get(k, j);
                    v.set(k, i, vki - s * (vkj + tau * vki));
                    v.set(k, j, vkj + s * (vki - tau * vkj));
                }
            }
        }
    }

    // Sort descending by eigenvalue, stably by original position on ties.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| {
        a.get(y, y)
            .partial_cmp(&a.get(x, x))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a.get(k, k)).collect();
    let mut eigenvectors = Matrix::zeros(p, p);
    for (jj, &k) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..p).map(|r| v.get(r, k)).collect();
        // Sign convention: the largest-magnitude entry is positive.
        let mut lead = 0;
        for (idx, val) in col.iter().enumerate() {
            if val.abs() > col[lead].abs() {
                lead = idx;
            }
        }
        if col[lead] < 0.0 {
            for val in &mut col {
                *val = -*val;
            }
        }
        for (r, val) in col.iter().enumerate() {
            eigenvectors.set(r, jj, *val);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Gram matrix of standardized columns: symmetric with unit diagonal, entries
/// clamped into `[-1, 1]`. Columns must have zero mean and unit norm.
pub fn correlation_matrix(standardized: &Matrix) -> Result<Matrix> {
    let (n, k) = (standardized.rows(), standardized.cols());
    for j in 0..k {
        let col = standardized.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if mean.abs() > STANDARDIZATION_TOLERANCE
            || (norm - 1.0).abs() > STANDARDIZATION_TOLERANCE
        {
            return Err(Error::NotStandardized {
                column: j,
                mean,
                norm,
            });
        }
    }
    let mut r = standardized.gram();
    for i in 0..k {
        r.set(i, i, 1.0);
        for j in (i + 1)..k {
            let v = r.get(i, j).clamp(-1.0, 1.0);
            r.set(i, j, v);
            r.set(j, i, v);
        }
    }
    Ok(r)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(spd: &Matrix) -> Result<Matrix> {
    let p = spd.rows();
    if spd.cols() != p {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            spd.rows(),
            spd.cols()
        )));
    }
    if !spd.is_symmetric(SYMMETRY_TOLERANCE) {
        return Err(Error::NotSymmetric {
            max_delta: (0..p)
                .flat_map(|i| (0..p).map(move |j| (i, j)))
                .map(|(i, j)| (spd.get(i, j) - spd.get(j, i)).abs())
                .fold(0.0, f64::max),
        });
    }
    let max_diag = (0..p).fold(0.0f64, |m, i| m.max(spd.get(i, i).abs())).max(1.0);
    let mut l = Matrix::zeros(p, p);
    for j in 0..p {
        let mut d = spd.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d <= RANK_TOLERANCE * RANK_TOLERANCE * max_diag {
            return Err(Error::NotPositiveDefinite { pivot: d, index: j });
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in (j + 1)..p {
            let mut s = spd.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Rescale every column to zero mean and unit norm. Returns the standardized
/// matrix along with the per-column means and (population) standard deviations.
pub fn standardize_columns(m: &Matrix) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    let (n, k) = (m.rows(), m.cols());
    let mut z = Matrix::zeros(n, k);
    let mut means = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for j in 0..k {
        let col = m.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let scale = col.iter().map(|x| x * x).sum::<f64>() / n as f64;
        if var <= f64::EPSILON * scale.max(1.0) {
            return Err(Error::ConstantColumn { column: j });
        }
        let denom = (n as f64).sqrt() * var.sqrt();
        for (i, &value) in col.iter().enumerate() {
            z.set(i, j, (value - mean) / denom);
        }
        means.push(mean);
        stds.push(var.sqrt());
    }
    Ok((z, means, stds))
}
