//! Deterministic design generators with analytically known index behavior:
//! orthogonal designs (the ideal case where every variable's combined index
//! is exactly 1), exactly duplicated pairs (the worst case), and a tunable
//! near-collinear family in between.
//!
//! The orthogonal construction stacks the classical Helmert contrasts: the
//! i-th contrast has its first `i−1` entries equal to `1/√(i(i−1))`, its
//! i-th entry equal to `−(i−1)/√(i(i−1))`, and zeros after — unit length,
//! zero mean, mutually orthogonal, and orthogonal to the all-ones column.
//! The first column is the all-ones intercept itself (the `e/√N` contrast
//! rescaled to match the artifact-wide intercept convention).

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Kinds of generated designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Orthogonal Helmert design; `parameter` is ignored.
    Helmert,
    /// Orthogonal design plus an exact duplicate of the first contrast,
    /// rescaled by `parameter` (a default of 2 is used when 0).
    DuplicatePair,
    /// Orthogonal design plus a column at angle `ε = parameter` from the
    /// first contrast: its CD on the others is exactly `1/(1+ε²)`.
    NearCollinear,
    /// Alias of [`FixtureKind::Helmert`] — standardizing its columns gives
    /// an exactly identity correlation matrix.
    IdentityCorr,
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureKind::Helmert => "helmert",
            FixtureKind::DuplicatePair => "duplicate_pair",
            FixtureKind::NearCollinear => "near_collinear",
            FixtureKind::IdentityCorr => "identity_corr",
        })
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<FixtureKind> {
        match s {
            "helmert" => Ok(FixtureKind::Helmert),
            "duplicate_pair" => Ok(FixtureKind::DuplicatePair),
            "near_collinear" => Ok(FixtureKind::NearCollinear),
            "identity_corr" => Ok(FixtureKind::IdentityCorr),
            other => Err(Error::ParamOutOfRange(format!(
                "unknown fixture kind {other:?}"
            ))),
        }
    }
}

/// A fully specified generated design: `n` rows, `k` columns including the
/// intercept, plus one kind-specific real parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub n: usize,
    pub k: usize,
    pub parameter: f64,
}

impl FixtureSpec {
    pub fn new(kind: FixtureKind, n: usize, k: usize, parameter: f64) -> Result<FixtureSpec> {
        if !(2..n).contains(&k) {
            return Err(Error::SizeError(format!(
                "need n > k ≥ 2, got n = {n}, k = {k}"
            )));
        }
        Ok(FixtureSpec {
            kind,
            n,
            k,
            parameter,
        })
    }

    /// Generate the design matrix (intercept in column 0). Same spec, same
    /// matrix — generators are pure.
    pub fn build(&self) -> Result<Matrix> {
        match self.kind {
            FixtureKind::Helmert | FixtureKind::IdentityCorr => {
                helmert_design(self.n, self.k, &vec![1.0; self.k])
            }
            FixtureKind::DuplicatePair => duplicate_pair_design(self.n, self.k, self.parameter),
            FixtureKind::NearCollinear => {
                near_collinear_design(self.n, self.k - 1, self.parameter)
            }
        }
    }
}

/// The i-th Helmert contrast (i ≥ 2) over n rows.
fn helmert_contrast(n: usize, i: usize) -> Vec<f64> {
    let scale = 1.0 / ((i * (i - 1)) as f64).sqrt();
    let mut column = vec![0.0; n];
    for entry in column.iter_mut().take(i - 1) {
        *entry = scale;
    }
    column[i - 1] = -((i - 1) as f64) * scale;
    column
}

/// n×k orthogonal design: all-ones intercept, then the Helmert contrasts
/// scaled by `scales[1..]` (the intercept's scale slot is accepted for
/// shape symmetry but ignored — the intercept is always exactly all ones).
/// Its Gram matrix is diagonal, so every variable scores the ideal combined
/// index of 1.
pub fn helmert_design(n: usize, k: usize, scales: &[f64]) -> Result<Matrix> {
    if k < 2 || k > n {
        return Err(Error::SizeError(format!(
            "need 2 ≤ k ≤ n, got n = {n}, k = {k}"
        )));
    }
    if scales.len() != k {
        return Err(Error::SizeError(format!(
            "expected {k} scales, got {}",
            scales.len()
        )));
    }
    if scales.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::SizeError("scales must be positive".into()));
    }
    let mut columns = Vec::with_capacity(k);
    columns.push(vec![1.0; n]);
    for i in 2..=k {
        let mut column = helmert_contrast(n, i);
        for v in &mut column {
            *v *= scales[i - 1];
        }
        columns.push(column);
    }
    Ok(Matrix::from_columns(&columns))
}

/// Orthogonal design whose last column exactly duplicates the first
/// contrast, rescaled by `scale` (default 2 when `scale` is 0). The
/// duplicated pair has correlation 1 and makes the full design singular.
pub fn duplicate_pair_design(n: usize, k: usize, scale: f64) -> Result<Matrix> {
    if k < 3 {
        return Err(Error::SizeError(format!(
            "a duplicated pair needs k ≥ 3 columns, got {k}"
        )));
    }
    let base = helmert_design(n, k - 1, &vec![1.0; k - 1])?;
    let effective = if scale == 0.0 { 2.0 } else { scale };
    let duplicate: Vec<f64> = base.column(1).iter().map(|v| v * effective).collect();
    let mut columns: Vec<Vec<f64>> = (0..base.cols()).map(|j| base.column(j)).collect();
    columns.push(duplicate);
    Ok(Matrix::from_columns(&columns))
}

/// Orthogonal design on `base_cols` columns plus one extra column
/// `δ₂ + ε·δ_extra` built from a fresh contrast: regressed on the others,
/// the extra column's CD is exactly `1/(1+ε²)`, so `ε` dials how close the
/// design sits to singularity.
pub fn near_collinear_design(n: usize, base_cols: usize, epsilon: f64) -> Result<Matrix> {
    if base_cols < 2 || base_cols + 1 > n {
        return Err(Error::SizeError(format!(
            "need 2 ≤ base_cols and base_cols + 1 ≤ n, got n = {n}, base_cols = {base_cols}"
        )));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::SizeError(format!(
            "perturbation must be positive, got {epsilon}"
        )));
    }
    let base = helmert_design(n, base_cols, &vec![1.0; base_cols])?;
    let fresh = helmert_contrast(n, base_cols + 1);
    let near: Vec<f64> = base
        .column(1)
        .iter()
        .zip(&fresh)
        .map(|(b, f)| b + epsilon * f)
        .collect();
    let mut columns: Vec<Vec<f64>> = (0..base.cols()).map(|j| base.column(j)).collect();
    columns.push(near);
    Ok(Matrix::from_columns(&columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::model_index_report;
    use crate::numerics::cd_of_regression;
    use approx::assert_abs_diff_eq;

    #[test]
    fn second_column_is_the_first_contrast() {
        let design = helmert_design(3, 2, &[1.0, 1.0]).unwrap();
        let col = design.column(1);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(col[0], inv_sqrt2, epsilon = 1e-15);
        assert_abs_diff_eq!(col[1], -inv_sqrt2, epsilon = 1e-15);
        assert_abs_diff_eq!(col[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_matrix_is_diagonal() {
        let design = helmert_design(6, 4, &[1.0, 2.0, 0.5, 3.0]).unwrap();
        let gram = design.gram();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_abs_diff_eq!(gram.get(i, j), 0.0, epsilon = 1e-12);
                }
            }
        }
        assert_abs_diff_eq!(gram.get(0, 0), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn every_combined_index_is_one() {
        for k in 2..=5 {
            let design = helmert_design(7, k, &vec![1.5; k]).unwrap();
            let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
            let report = model_index_report(&design, &names).unwrap();
            for row in &report.per_variable {
                assert_abs_diff_eq!(row.h_index, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn helmert_rejects_bad_shapes_and_scales() {
        assert!(helmert_design(3, 4, &[1.0; 4]).is_err());
        assert!(helmert_design(5, 3, &[1.0; 2]).is_err());
        assert!(helmert_design(5, 3, &[1.0, -1.0, 1.0]).is_err());
        assert!(helmert_design(5, 1, &[1.0]).is_err());
    }

    #[test]
    fn near_collinear_cd_is_exactly_the_angle_formula() {
        for epsilon in [0.1, 0.25, 0.5, 1.0] {
            let design = near_collinear_design(8, 3, epsilon).unwrap();
            let last = design.cols() - 1;
            let cd = cd_of_regression(last, &design).unwrap();
            assert_abs_diff_eq!(cd, 1.0 / (1.0 + epsilon * epsilon), epsilon = 1e-12);
        }
    }

    #[test]
    fn tiny_perturbation_approaches_singularity() {
        let design = near_collinear_design(8, 3, 1e-3).unwrap();
        let last = design.cols() - 1;
        assert!(cd_of_regression(last, &design).unwrap() > 0.999);
    }

    #[test]
    fn perturbation_dials_cd_across_a_threshold() {
        // 1/(1+ε²) straddles 0.9 at ε = 1/3.
        let tight = near_collinear_design(8, 3, 0.2).unwrap();
        let loose = near_collinear_design(8, 3, 0.5).unwrap();
        let last = tight.cols() - 1;
        assert!(cd_of_regression(last, &tight).unwrap() > 0.9);
        assert!(cd_of_regression(last, &loose).unwrap() < 0.9);
    }

    #[test]
    fn duplicate_pair_has_unit_correlation() {
        let design = duplicate_pair_design(6, 4, 3.0).unwrap();
        let first = design.column(1);
        let last = design.column(design.cols() - 1);
        for (f, l) in first.iter().zip(&last) {
            assert_abs_diff_eq!(3.0 * f, *l, epsilon = 1e-15);
        }
    }

    #[test]
    fn specs_build_deterministically() {
        for kind in [
            FixtureKind::Helmert,
            FixtureKind::DuplicatePair,
            FixtureKind::NearCollinear,
            FixtureKind::IdentityCorr,
        ] {
            let spec = FixtureSpec::new(kind, 8, 4, 0.5).unwrap();
            assert_eq!(spec.build().unwrap(), spec.build().unwrap());
        }
        assert!(FixtureSpec::new(FixtureKind::Helmert, 4, 4, 0.0).is_err());
        assert!(FixtureSpec::new(FixtureKind::Helmert, 4, 1, 0.0).is_err());
    }

    #[test]
    fn kind_tokens_round_trip() {
        for kind in [
            FixtureKind::Helmert,
            FixtureKind::DuplicatePair,
            FixtureKind::NearCollinear,
            FixtureKind::IdentityCorr,
        ] {
            assert_eq!(kind.to_string().parse::<FixtureKind>().unwrap(), kind);
        }
        assert!("latin_square".parse::<FixtureKind>().is_err());
    }
}
