//! End-to-end runs: inefficiency screen, design-only model selection by the
//! chosen algorithm, class annotation (risk, admissibility, maximality),
//! and — when a response is present — whole-model scoring, all folded into
//! one serializable report.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indices::{model_index_report, q_squared, ModelIndexReport};
use crate::model_space::{brute_force_class, in_class, ControlParams, ModelSubset, SelectionClass};
use crate::scoring::{select_optimal, RankedScore, ScoreCriterion};
use crate::vi_select::vi_algorithm;
use crate::vr_select::vr_algorithm;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Design-only selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionAlgorithm {
    /// Grow models one admissible variable at a time.
    Vi,
    /// Reduce from the full model guided by principal components.
    Vr,
    /// Exhaustive membership enumeration (exponential; budgeted).
    Brute,
}

impl fmt::Display for SelectionAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionAlgorithm::Vi => "vi",
            SelectionAlgorithm::Vr => "vr",
            SelectionAlgorithm::Brute => "brute",
        })
    }
}

impl FromStr for SelectionAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<SelectionAlgorithm> {
        match s {
            "vi" => Ok(SelectionAlgorithm::Vi),
            "vr" => Ok(SelectionAlgorithm::Vr),
            "brute" => Ok(SelectionAlgorithm::Brute),
            other => Err(Error::ParamOutOfRange(format!(
                "unknown algorithm {other:?} (expected vi, vr, or brute)"
            ))),
        }
    }
}

/// A column removed by the inefficiency screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: usize,
    pub name: String,
    /// Squared raw correlation with the intercept; 1 for zero columns (no
    /// direction at all).
    pub q_squared: f64,
    /// Inefficiency index 1/(1−q²); "inf" for zero or constant columns.
    #[serde(with = "crate::serde_util::nonfinite_as_string")]
    pub i_index: f64,
}

/// Outcome of the inefficiency screen: the surviving model plus what was
/// dropped and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub survivors: ModelSubset,
    pub dropped: Vec<DroppedColumn>,
}

/// Keep every column whose squared raw correlation with the intercept is at
/// most `c_q`; report the rest with their index values. Zero columns are
/// always dropped.
pub fn i_screen(dataset: &Dataset, c_q: f64) -> Result<ScreenOutcome> {
    if !(0.0..1.0).contains(&c_q) {
        return Err(Error::ParamOutOfRange(format!(
            "c_q must lie in [0,1), got {c_q}"
        )));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for k in 1..dataset.k() {
        let q_sq = match q_squared(&dataset.design().column(k)) {
            Ok(q) => q,
            Err(Error::ZeroVector) => 1.0,
            Err(e) => return Err(e),
        };
        if q_sq <= c_q {
            kept.push(k);
        } else {
            dropped.push(DroppedColumn {
                column: k,
                name: dataset.name_of(k).to_string(),
                q_squared: q_sq,
                i_index: if q_sq < 1.0 {
                    1.0 / (1.0 - q_sq)
                } else {
                    f64::INFINITY
                },
            });
        }
    }
    Ok(ScreenOutcome {
        survivors: ModelSubset::new(&kept, dataset)?,
        dropped,
    })
}

/// Everything one run produces. Serializes deterministically (all fields
/// are ordered), so identical inputs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset_id: String,
    pub params: ControlParams,
    pub algorithm: SelectionAlgorithm,
    pub criterion: ScoreCriterion,
    /// Per-variable indices of the full design; absent (with a warning)
    /// when the full design is singular, which leaves peer CDs undefined.
    pub index_table: Option<ModelIndexReport>,
    pub i_screen: ScreenOutcome,
    /// Selected models annotated with risk pairs, admissibility, and
    /// maximality. Every member passes the class test at `params`.
    pub selection_class: SelectionClass,
    /// Ranked scores, present when the dataset has a response and the class
    /// is non-empty.
    pub scores: Option<Vec<RankedScore>>,
    pub warnings: Vec<String>,
}

/// Run screen → selection → annotation → optional scoring. Degenerate
/// situations (empty class, enumeration budget exhausted, singular full
/// design, repaired growth results) become warnings, not errors.
pub fn run_pipeline(
    dataset: &Dataset,
    params: &ControlParams,
    algorithm: SelectionAlgorithm,
    criterion: ScoreCriterion,
    enumeration_budget: Option<u128>,
) -> Result<RunReport> {
    let mut warnings = Vec::new();

    let full: Vec<usize> = (1..dataset.k()).collect();
    let full_model = ModelSubset::new(&full, dataset)?;
    let full_design = full_model.submatrix(dataset);
    let full_names: Vec<String> = full_model
        .names(dataset)
        .into_iter()
        .map(str::to_string)
        .collect();
    let index_table = match model_index_report(&full_design, &full_names) {
        Ok(report) => Some(report),
        Err(Error::PerfectCollinearity { column, .. }) => {
            warnings.push(format!(
                "full-design index table unavailable: column {} lies in the span of the others",
                full_names
                    .get(column.saturating_sub(1))
                    .map_or("?", |s| s.as_str())
            ));
            None
        }
        Err(Error::ConstantColumn { column }) => {
            warnings.push(format!(
                "full-design index table unavailable: column {} is constant",
                dataset.name_of(column)
            ));
            None
        }
        Err(e) => return Err(e),
    };

    let screen = i_screen(dataset, params.c_q())?;

    let mut models: Vec<ModelSubset> = match algorithm {
        SelectionAlgorithm::Vi => {
            let outcomes = vi_algorithm(dataset, params.d_r(), params.c_q())?;
            for outcome in &outcomes {
                if outcome.repaired {
                    warnings.push(format!(
                        "growth result {:?} needed repair: a variable admitted early exceeded \
                         the CD bound against its final peers",
                        outcome.model.names(dataset)
                    ));
                }
            }
            outcomes.into_iter().map(|o| o.model).collect()
        }
        SelectionAlgorithm::Vr => vr_algorithm(dataset, params)?,
        SelectionAlgorithm::Brute => match brute_force_class(dataset, params, None, enumeration_budget)
        {
            Ok(class) => class.members.into_iter().map(|m| m.model).collect(),
            Err(Error::BudgetExceeded { required, budget }) => {
                warnings.push(format!(
                    "enumeration budget exhausted: {required} candidate models exceed the \
                     budget of {budget}; raise the budget to enumerate"
                ));
                Vec::new()
            }
            Err(e) => return Err(e),
        },
    };

    // The report's guarantee: every listed model is a class member at the
    // run's parameters. The growth/reduction algorithms enforce the q² and
    // CD bounds but not a norm floor, so re-check when one is set.
    if params.e_norm().is_some() {
        let mut kept = Vec::with_capacity(models.len());
        for model in models {
            if in_class(&model, dataset, params)?.member {
                kept.push(model);
            } else {
                warnings.push(format!(
                    "selected model {:?} dropped: below the column-norm floor",
                    model.names(dataset)
                ));
            }
        }
        models = kept;
    }

    let selection_class = SelectionClass::from_models(models, dataset)?;
    if selection_class.is_empty() {
        warnings.push("selection class is empty at these thresholds".to_string());
    }

    let scores = if dataset.response().is_some() && !selection_class.is_empty() {
        Some(select_optimal(&selection_class, dataset, criterion)?)
    } else {
        None
    };

    Ok(RunReport {
        dataset_id: dataset.id().to_string(),
        params: params.clone(),
        algorithm,
        criterion,
        index_table,
        i_screen: screen,
        selection_class,
        scores,
        warnings,
    })
}
