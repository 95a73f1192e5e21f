//! Per-variable design diagnostics.
//!
//! For each non-intercept column `x_k` of a design (intercept `e` in column
//! 0), two multiplicative penalties on the coefficient's sampling variance
//! are measured:
//!
//! * the **inefficiency index** `I_k = 1/(1 − q_k²)` with
//!   `q_k² = (Σx)²/(N·Σx²)` — the squared cosine of the angle between `x_k`
//!   and the intercept; it grows as the column mean dominates its spread,
//!   and equals `1 + x̄²/s²`;
//! * the **collinearity index** `C_k = 1/(1 − Ř_k²)` — the classical
//!   variance inflation factor, where `Ř_k²` is the coefficient of
//!   determination of `x_k` regressed on all the other columns.
//!
//! Their product `H_k = I_k·C_k` scales the ideal variance `σ²/N` up to the
//! actual potential sampling variance, and `EEF_k² = N·s_k²·(1 − Ř_k²)` is
//! the effective squared norm the coefficient's variance is `σ²` divided by.
//! Both index routes to the standard error must agree; [`se_and_pse`]
//! computes them and the unit tests pin the identity.
//!
//! All indices are dimensionless: rescaling any column leaves every value
//! unchanged, so thresholds on them transfer across measurement units.
//!
//! One convention matters in the two-column case: when a variable's only
//! peer is the intercept, the centered CD against it is identically zero and
//! carries no information, so the peer CD is taken to be `q²` itself — the
//! raw squared correlation with the intercept. Inefficiency and collinearity
//! then coincide (`C = I`), which is exactly right: with one variable the
//! only collinearity there can be is collinearity with the intercept.

use crate::error::{Error, Result};
use crate::numerics::{cd_of_regression, Matrix, OlsFit};
use serde::{Deserialize, Serialize};

/// `Ř²` at or above `1 − PERFECT_COLLINEARITY_TOLERANCE` counts as exact
/// linear dependence (the collinearity index would overflow).
pub const PERFECT_COLLINEARITY_TOLERANCE: f64 = 1e-10;

/// Full diagnostic record for one non-intercept design column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableIndexReport {
    /// Column index within the parent design (intercept is 0, so ≥ 1).
    pub variable_index: usize,
    pub name: String,
    /// Column mean `x̄`.
    pub mean: f64,
    /// Population (1/N) standard deviation `s`.
    pub std_dev: f64,
    /// `‖x‖² = Σ x²`.
    pub norm_squared: f64,
    /// Squared cosine with the intercept, `(Σx)²/(N·Σx²)`.
    pub q_squared: f64,
    /// Inefficiency index `1/(1 − q²) = 1 + x̄²/s²`.
    pub i_index: f64,
    /// CD of this column regressed on all other design columns.
    pub peer_cd: f64,
    /// Collinearity index (VIF) `1/(1 − peer_cd)`.
    pub c_index: f64,
    /// Combined index `i_index · c_index`.
    pub h_index: f64,
    /// Effective squared norm `N·s²·(1 − peer_cd)`; the coefficient's
    /// sampling variance is `σ²` divided by this.
    pub eef_squared: f64,
}

/// Worst-case index pair of a model: the risk a model's least favourable
/// variable exposes every comparison to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskIndex {
    /// Maximum inefficiency index over the model's variables (`c_M`).
    pub max_inefficiency: f64,
    /// Maximum collinearity index over the model's variables (`d_M`).
    pub max_collinearity: f64,
}

impl RiskIndex {
    /// Whether the pair stays within control levels `(c, d)`.
    pub fn within(&self, c: f64, d: f64) -> bool {
        self.max_inefficiency <= c && self.max_collinearity <= d
    }
}

/// Diagnostics for a whole model: one record per non-intercept column plus
/// the aggregate mean H and worst-case risk pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIndexReport {
    pub per_variable: Vec<VariableIndexReport>,
    /// Average of `h_index` across the variables.
    pub mean_h: f64,
    pub risk: RiskIndex,
    /// Number of design columns including the intercept.
    pub column_size: usize,
}

/// Squared cosine of the angle between a column and the all-ones vector:
/// `(Σx)² / (N·Σx²)`.
pub fn q_squared(column: &[f64]) -> Result<f64> {
    let norm_sq: f64 = column.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let sum: f64 = column.iter().sum();
    Ok((sum * sum / (column.len() as f64 * norm_sq)).clamp(0.0, 1.0))
}

/// Inefficiency index `1/(1 − q²) = 1 + x̄²/s²` of a single column.
///
/// A constant column has `q² = 1` and an infinite index (the variable adds
/// no information beyond the intercept); that is rejected as
/// [`Error::ConstantColumn`] with column 0 — callers that know the column's
/// position in a wider design re-key the error.
pub fn inefficiency_index(column: &[f64]) -> Result<f64> {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let scale = column.iter().map(|x| x * x).sum::<f64>() / n;
    if var <= f64::EPSILON * scale.max(1.0) {
        return Err(Error::ConstantColumn { column: 0 });
    }
    Ok(1.0 + mean * mean / var)
}

/// Collinearity index (VIF) of design column `target`: `1/(1 − Ř²)` where
/// `Ř²` is the CD of that column regressed on all the others.
pub fn collinearity_index(target: usize, design: &Matrix) -> Result<f64> {
    let peer_cd = cd_of_regression(target, design)?;
    if peer_cd >= 1.0 - PERFECT_COLLINEARITY_TOLERANCE {
        return Err(Error::PerfectCollinearity {
            column: target,
            r_squared: peer_cd,
        });
    }
    Ok(1.0 / (1.0 - peer_cd))
}

/// Combined index `H = I·C`: the joint variance-inflation factor relative to
/// an ideal (mean-zero, orthogonal) column.
pub fn h_index(i: f64, c: f64) -> f64 {
    i * c
}

/// Potential sampling variance `σ²·H/N` of a coefficient whose column has
/// combined index `h`, at noise variance `sigma_sq` and sample size `n`.
pub fn potential_sampling_variance(h: f64, sigma_sq: f64, n: usize) -> f64 {
    sigma_sq * h / n as f64
}

/// Sampling variance `σ²·VIF/(N·s²)` of a coefficient computed from the
/// column's spread and collinearity index.
pub fn sampling_variance(sigma_sq: f64, n: usize, s_xk: f64, vif: f64) -> f64 {
    sigma_sq * vif / (n as f64 * s_xk * s_xk)
}

/// Standard error and potential standard error of one coefficient:
/// `se = σ̂·(N·s²)^{-1/2}·√C` and `pse = σ̂·N^{-1/2}·√H`.
///
/// `se` is the exact OLS standard error of the coefficient. `pse` is its
/// scale-free counterpart — the standard error the coefficient would have if
/// the column were rescaled to unit root mean square (`pse = se·‖x‖/√N`),
/// which is what makes thresholds on `H` transfer across measurement units.
/// Equivalently `se = σ̂·‖x‖⁻¹·√I·√C`; the tests pin both identities.
pub fn se_and_pse(fit: &OlsFit, report: &VariableIndexReport, n: usize) -> (f64, f64) {
    let root_n = (n as f64).sqrt();
    let se = fit.rse / (root_n * report.std_dev) * report.c_index.sqrt();
    let pse = fit.rse / root_n * report.h_index.sqrt();
    (se, pse)
}

/// Check that column 0 of a design is exactly the all-ones intercept.
pub(crate) fn require_intercept(design: &Matrix) -> Result<()> {
    for i in 0..design.rows() {
        if (design.get(i, 0) - 1.0).abs() > 1e-12 {
            return Err(Error::InterceptMissing { row: i + 1 });
        }
    }
    Ok(())
}

/// All diagnostics for one non-intercept column of a design.
pub fn variable_index_report(
    design: &Matrix,
    column: usize,
    name: &str,
) -> Result<VariableIndexReport> {
    let x = design.column(column);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let norm_squared: f64 = x.iter().map(|v| v * v).sum();
    let q_sq = q_squared(&x)?;
    let i_index = inefficiency_index(&x).map_err(|e| match e {
        Error::ConstantColumn { .. } => Error::ConstantColumn { column },
        other => other,
    })?;
    // Intercept-only peer set: the peer CD is the raw squared correlation
    // with the intercept (see the module docs on the two-column convention).
    let peer_cd = if design.cols() == 2 {
        q_sq
    } else {
        cd_of_regression(column, design)?
    };
    if peer_cd >= 1.0 - PERFECT_COLLINEARITY_TOLERANCE {
        return Err(Error::PerfectCollinearity {
            column,
            r_squared: peer_cd,
        });
    }
    let c_index = 1.0 / (1.0 - peer_cd);
    Ok(VariableIndexReport {
        variable_index: column,
        name: name.to_string(),
        mean,
        std_dev: var.sqrt(),
        norm_squared,
        q_squared: q_sq,
        i_index,
        peer_cd,
        c_index,
        h_index: h_index(i_index, c_index),
        eef_squared: n * var * (1.0 - peer_cd),
    })
}

/// Diagnostics for every non-intercept column of a design (column 0 must be
/// the intercept), with the aggregate mean H and worst-case risk pair.
pub fn model_index_report(design: &Matrix, names: &[String]) -> Result<ModelIndexReport> {
    if names.len() != design.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} design columns",
            names.len(),
            design.cols()
        )));
    }
    require_intercept(design)?;
    let mut per_variable = Vec::with_capacity(design.cols().saturating_sub(1));
    for (k, name) in names.iter().enumerate().skip(1) {
        per_variable.push(variable_index_report(design, k, name)?);
    }
    if per_variable.is_empty() {
        return Err(Error::SizeOutOfRange {
            column_size: 1,
            total_columns: design.cols(),
        });
    }
    let mean_h =
        per_variable.iter().map(|r| r.h_index).sum::<f64>() / per_variable.len() as f64;
    let risk = RiskIndex {
        max_inefficiency: per_variable.iter().map(|r| r.i_index).fold(1.0, f64::max),
        max_collinearity: per_variable.iter().map(|r| r.c_index).fold(1.0, f64::max),
    };
    Ok(ModelIndexReport {
        per_variable,
        mean_h,
        risk,
        column_size: design.cols(),
    })
}
