//! Variable-increasing pre-selection: grow models one variable at a time,
//! admitting a candidate only while its CD on the already-selected columns
//! stays within `d_r`, and branch over every admissible candidate.
//!
//! The search starts from the bare intercept. The first admission step uses
//! the candidate's raw squared correlation with the intercept (`q²`), capped
//! at `min(c_q, d_r)` — the inefficiency screen is built into the growth
//! rule. Later steps use the centered CD of the candidate regressed on the
//! selected columns. Because that CD can only grow as the selected set grows,
//! a candidate that fails once against a set fails against every superset,
//! so branches never need to revisit rejected candidates and the search can
//! memoize on the selected set alone.
//!
//! Terminal sets (no admissible extension) are deduplicated, proper subsets
//! of other terminals are dropped, and each survivor is post-checked for
//! *simultaneous* CD control: admission only ever checked the incoming
//! variable, so an early variable's CD on its final peers can exceed `d_r`.
//! When that happens the latest-admitted offender is removed until the model
//! complies, and the result is flagged as repaired.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indices::q_squared;
use crate::model_space::ModelSubset;
use crate::numerics::cd_of_regression;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// One frame of the growth search: the selected columns so far and the
/// candidates still eligible for admission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViState {
    /// Sorted column indices, always starting with the intercept 0.
    pub selected: Vec<usize>,
    /// Candidate columns not yet selected, ascending.
    pub available: Vec<usize>,
    /// Growth step, equal to the number of selected columns.
    pub depth: usize,
}

/// A model produced by the growth search. `repaired` marks models that
/// failed the simultaneous CD post-check and had variables removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViOutcome {
    pub model: ModelSubset,
    pub repaired: bool,
}

/// CD governing admission of `candidate` into `selected`: the raw squared
/// correlation `q²` when only the intercept is selected, otherwise the
/// centered CD of the candidate column regressed on the selected columns.
pub fn incremental_cd(
    candidate: usize,
    selected: &ModelSubset,
    dataset: &Dataset,
) -> Result<f64> {
    selected.check_against(dataset)?;
    if candidate == 0 || candidate >= dataset.k() {
        return Err(Error::IndexOutOfRange(format!(
            "candidate column {candidate} of {}",
            dataset.k()
        )));
    }
    if selected.contains(candidate) {
        return Err(Error::InvalidModel(format!(
            "candidate column {candidate} is already selected"
        )));
    }
    if selected.column_size() == 1 {
        return q_squared(&dataset.design().column(candidate));
    }
    let mut columns = selected.columns().to_vec();
    columns.push(candidate);
    let sub = dataset.submatrix(&columns);
    cd_of_regression(columns.len() - 1, &sub).map_err(|e| match e {
        Error::ConstantColumn { .. } => Error::ConstantColumn { column: candidate },
        other => other,
    })
}

/// Run the full growth search. Candidates are all non-intercept dataset
/// columns; the first admission is capped at `min(c_q, d_r)`, later ones at
/// `d_r`. Returns set-maximal terminal models (lexicographic order), each
/// flagged if the simultaneous-CD repair had to remove variables. An empty
/// result means no single variable passed the first admission step.
pub fn vi_algorithm(dataset: &Dataset, d_r: f64, c_q: f64) -> Result<Vec<ViOutcome>> {
    for (bound, name) in [(d_r, "d_r"), (c_q, "c_q")] {
        if !(0.0..1.0).contains(&bound) {
            return Err(Error::ParamOutOfRange(format!(
                "{name} must lie in [0,1), got {bound}"
            )));
        }
    }
    let first_step_cap = c_q.min(d_r);
    // First admission step: q² against the intercept. Zero columns have no
    // defined angle with the intercept and can never be admitted.
    let mut pool = Vec::new();
    for k in 1..dataset.k() {
        match q_squared(&dataset.design().column(k)) {
            Ok(q) if q <= first_step_cap => pool.push(k),
            Ok(_) | Err(Error::ZeroVector) => {}
            Err(e) => return Err(e),
        }
    }

    // Depth-first growth over subsets of the pool, memoized on the selected
    // set; terminals keep the first-encountered admission order (candidates
    // are explored in ascending index order) for the repair step.
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut terminals: Vec<Vec<usize>> = Vec::new(); // admission order, no intercept
    let mut seen_terminal: HashSet<Vec<usize>> = HashSet::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(order) = stack.pop() {
        let mut selected: Vec<usize> = Vec::with_capacity(order.len() + 1);
        selected.push(0);
        selected.extend_from_slice(&order);
        selected.sort_unstable();
        if !visited.insert(selected.clone()) {
            continue;
        }
        let model = ModelSubset::new(&selected, dataset)?;
        let mut extended = false;
        for &candidate in &pool {
            if model.contains(candidate) {
                continue;
            }
            if incremental_cd(candidate, &model, dataset)? <= d_r {
                extended = true;
                let mut next = order.clone();
                next.push(candidate);
                stack.push(next);
            }
        }
        if !extended && !order.is_empty() {
            let mut key = order.clone();
            key.sort_unstable();
            if seen_terminal.insert(key) {
                terminals.push(order);
            }
        }
    }

    // Simultaneous-CD repair: drop the latest-admitted variable whose CD on
    // its final peers exceeds d_r, until the whole set complies.
    let mut outcomes = Vec::new();
    for order in drop_covered(terminals) {
        let mut order = order;
        let mut repaired = false;
        loop {
            let mut columns: Vec<usize> = Vec::with_capacity(order.len() + 1);
            columns.push(0);
            columns.extend_from_slice(&order);
            columns.sort_unstable();
            let offenders: Vec<usize> = crate::model_space::peer_cds(&columns, dataset)?
                .into_iter()
                .filter(|&(_, cd)| cd > d_r)
                .map(|(column, _)| column)
                .collect();
            if offenders.is_empty() {
                if !order.is_empty() {
                    outcomes.push((order, repaired));
                }
                break;
            }
            repaired = true;
            let victim = order
                .iter()
                .rposition(|c| offenders.contains(c))
                .expect("offending column must be in the admission order");
            order.remove(victim);
        }
    }

    // Repair may have produced duplicates or subsets of other results.
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut unique: Vec<(Vec<usize>, bool)> = Vec::new();
    for (order, repaired) in outcomes {
        let mut key = order;
        key.sort_unstable();
        if seen.insert(key.clone()) {
            unique.push((key, repaired));
        }
    }
    let mut results: Vec<ViOutcome> = unique
        .iter()
        .filter(|(set, _)| {
            !unique.iter().any(|(other, _)| {
                other.len() > set.len() && set.iter().all(|c| other.contains(c))
            })
        })
        .map(|(set, repaired)| {
            Ok(ViOutcome {
                model: ModelSubset::new(set, dataset)?,
                repaired: *repaired,
            })
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| a.model.columns().cmp(b.model.columns()));
    Ok(results)
}

/// Keep only admission orders whose variable sets are not proper subsets of
/// another terminal's set.
fn drop_covered(terminals: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let sets: Vec<Vec<usize>> = terminals
        .iter()
        .map(|order| {
            let mut s = order.clone();
            s.sort_unstable();
            s
        })
        .collect();
    terminals
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            !sets.iter().enumerate().any(|(j, other)| {
                j != *i && other.len() > sets[*i].len() && sets[*i].iter().all(|c| other.contains(c))
            })
        })
        .map(|(_, order)| order.clone())
        .collect()
}
