//! Response-based scoring: fit each candidate model against the observed
//! response by OLS and rank the candidates under a whole-model criterion.
//!
//! Criteria use the Gaussian concentrated log-likelihood forms with constant
//! terms dropped (they cancel in comparisons): `aic = N·ln(rss/N) + 2J` and
//! `bic = N·ln(rss/N) + J·ln N`. An exact fit (`rss = 0`) makes both `−∞`,
//! which ranks best and is flagged as a degenerate exact fit; the JSON form
//! writes non-finite values as strings so reports round-trip.
//!
//! Coefficient standard errors are the classical ones,
//! `se_k = σ̂·√[(X'X)⁻¹]_kk`, computed from each column's peer-regression
//! residual norm; the scale-free counterpart rescales the column to unit
//! root-mean-square, `pse_k = se_k·‖x_k‖/√N` (so the intercept's pse equals
//! its se). Deliberately not offered: any stepwise/pre-testing selection on
//! the response — candidates come from the design-only stage, the response
//! enters only here.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indices::model_index_report;
use crate::model_space::{ModelSubset, SelectionClass};
use crate::numerics::{ols_fit, projection_rss};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Relative threshold under which a residual sum of squares counts as an
/// exact fit.
const EXACT_FIT_TOLERANCE: f64 = 1e-24;

/// One coefficient with its standard error and the scale-free counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefScore {
    pub column: usize,
    pub name: String,
    pub coefficient: f64,
    pub se: f64,
    pub pse: f64,
}

/// Whole-model fit summary for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: ModelSubset,
    /// Residual standard error σ̂ = √(rss/(N−J)).
    pub rse: f64,
    /// Coefficient of determination of the fit.
    pub cd: f64,
    /// `1 − (1−cd)·(N−1)/(N−J)`; can be negative, never exceeds `cd`.
    pub adjusted_cd: f64,
    #[serde(with = "crate::serde_util::nonfinite_as_string")]
    pub aic: f64,
    #[serde(with = "crate::serde_util::nonfinite_as_string")]
    pub bic: f64,
    /// One entry per model column, intercept first.
    pub per_coef: Vec<CoefScore>,
    /// σ̂·H̄/√N — the model's average potential-variance scale.
    pub mean_h_scaled: f64,
    /// True when rss is zero to machine precision ("degenerate exact fit").
    pub degenerate_exact_fit: bool,
}

/// Whole-model ranking criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreCriterion {
    Aic,
    Bic,
    AdjustedCd,
    Rse,
}

impl ScoreCriterion {
    /// Criterion value of a score, negated where larger is better, so that
    /// smaller is uniformly better.
    fn badness(self, score: &ModelScore) -> f64 {
        match self {
            ScoreCriterion::Aic => score.aic,
            ScoreCriterion::Bic => score.bic,
            ScoreCriterion::AdjustedCd => -score.adjusted_cd,
            ScoreCriterion::Rse => score.rse,
        }
    }
}

impl fmt::Display for ScoreCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreCriterion::Aic => "aic",
            ScoreCriterion::Bic => "bic",
            ScoreCriterion::AdjustedCd => "adjr2",
            ScoreCriterion::Rse => "rse",
        })
    }
}

impl FromStr for ScoreCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScoreCriterion> {
        match s {
            "aic" => Ok(ScoreCriterion::Aic),
            "bic" => Ok(ScoreCriterion::Bic),
            "adjr2" | "adjusted_cd" => Ok(ScoreCriterion::AdjustedCd),
            "rse" => Ok(ScoreCriterion::Rse),
            other => Err(Error::ParamOutOfRange(format!(
                "unknown criterion {other:?} (expected aic, bic, adjr2, or rse)"
            ))),
        }
    }
}

/// A scored model's place in a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedScore {
    /// 1-based position, best first.
    pub rank: usize,
    pub best: bool,
    pub score: ModelScore,
}

/// Fit one model against the dataset's response and summarize it.
pub fn score_model(model: &ModelSubset, dataset: &Dataset) -> Result<ModelScore> {
    let response = dataset.response().ok_or(Error::NoResponse)?;
    model.check_against(dataset)?;
    let design = model.submatrix(dataset);
    let fit = ols_fit(&design, response)?;
    let n = design.rows() as f64;
    let j = model.column_size() as f64;
    let response_scale = response.iter().map(|y| y * y).sum::<f64>();
    let degenerate = fit.rss <= EXACT_FIT_TOLERANCE * response_scale.max(1.0);
    let rss = if degenerate { 0.0 } else { fit.rss };
    let adjusted_cd = 1.0 - (1.0 - fit.cd) * (n - 1.0) / (n - j);
    let aic = n * (rss / n).ln() + 2.0 * j;
    let bic = n * (rss / n).ln() + j * n.ln();

    let mut per_coef = Vec::with_capacity(model.column_size());
    for (pos, &column) in model.columns().iter().enumerate() {
        let peers: Vec<usize> = (0..design.cols()).filter(|&p| p != pos).collect();
        let x = design.column(pos);
        // 1/[(X'X)⁻¹]_kk is exactly the residual sum of squares of x_k on
        // the other columns.
        let eef_squared = projection_rss(&design.select_columns(&peers), &x);
        if eef_squared <= 0.0 {
            return Err(Error::RankDeficient(format!(
                "column {column} is spanned by the model's other columns"
            )));
        }
        let se = fit.rse / eef_squared.sqrt();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        per_coef.push(CoefScore {
            column,
            name: dataset.name_of(column).to_string(),
            coefficient: fit.coefficients[pos],
            se,
            pse: se * norm / n.sqrt(),
        });
    }

    // H̄ over the model's variables; an intercept-only model takes the
    // orthogonal-baseline value H̄ = 1.
    let mean_h = if model.column_size() == 1 {
        1.0
    } else {
        let names: Vec<String> = model
            .names(dataset)
            .into_iter()
            .map(str::to_string)
            .collect();
        model_index_report(&design, &names)?.mean_h
    };
    Ok(ModelScore {
        model: model.clone(),
        rse: fit.rse,
        cd: fit.cd,
        adjusted_cd,
        aic,
        bic,
        per_coef,
        mean_h_scaled: fit.rse * mean_h / n.sqrt(),
        degenerate_exact_fit: degenerate,
    })
}

/// Score every member of a class and rank best-first under the criterion
/// (lower aic/bic/rse, higher adjusted_cd). Ties break lexicographically by
/// model columns, so the ranking does not depend on input order.
pub fn select_optimal(
    class: &SelectionClass,
    dataset: &Dataset,
    criterion: ScoreCriterion,
) -> Result<Vec<RankedScore>> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut scores: Vec<ModelScore> = class
        .models()
        .map(|m| score_model(m, dataset))
        .collect::<Result<_>>()?;
    scores.sort_by(|a, b| compare_scores(a, b, criterion));
    Ok(scores
        .into_iter()
        .enumerate()
        .map(|(i, score)| RankedScore {
            rank: i + 1,
            best: i == 0,
            score,
        })
        .collect())
}

fn compare_scores(a: &ModelScore, b: &ModelScore, criterion: ScoreCriterion) -> Ordering {
    criterion
        .badness(a)
        .total_cmp(&criterion.badness(b))
        .then_with(|| a.model.columns().cmp(b.model.columns()))
}
