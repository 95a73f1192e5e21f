//! Human-readable rendering: aligned tables with numbers at four
//! significant digits. The machine format (`--format json`) serializes the
//! same structures at full precision instead of going through this module.

use eemx_core::dataset::Dataset;
use eemx_core::indices::ModelIndexReport;
use eemx_core::model_space::{ControlParams, ModelSubset};
use eemx_core::pipeline::{RunReport, ScreenOutcome};
use eemx_core::scoring::RankedScore;
use eemx_core::simulate::FrequencyTable;

/// Format a number with four significant digits; very large or small
/// magnitudes switch to scientific notation, non-finite values print as
/// words.
pub fn sig4(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if !(1e-4..1e7).contains(&magnitude) {
        return format!("{x:.3e}");
    }
    let exponent = magnitude.log10().floor() as i32;
    let decimals = (3 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Align a header row and data rows into fixed-width columns: first column
/// left-aligned (labels), the rest right-aligned (numbers).
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let render_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        line.trim_end().to_string()
    };
    let mut out = String::new();
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    out.push_str(&render_row(&header_cells));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

/// Non-intercept variable names of a model, or a placeholder for the
/// intercept-only model.
pub fn model_label(model: &ModelSubset, dataset: &Dataset) -> String {
    let names: Vec<&str> = model
        .columns()
        .iter()
        .skip(1)
        .map(|&c| dataset.name_of(c))
        .collect();
    if names.is_empty() {
        "(intercept only)".to_string()
    } else {
        names.join("+")
    }
}

pub fn index_table(report: &ModelIndexReport) -> String {
    let rows: Vec<Vec<String>> = report
        .per_variable
        .iter()
        .map(|v| {
            vec![
                v.name.clone(),
                sig4(v.mean),
                sig4(v.std_dev),
                sig4(v.q_squared),
                sig4(v.i_index),
                sig4(v.peer_cd),
                sig4(v.c_index),
                sig4(v.h_index),
            ]
        })
        .collect();
    let mut out = table(
        &["variable", "mean", "std", "q²", "I", "Ř²", "C", "H"],
        &rows,
    );
    out.push_str(&format!(
        "columns incl. intercept: {}   mean H: {}   risk (c_M, d_M): ({}, {})\n",
        report.column_size,
        sig4(report.mean_h),
        sig4(report.risk.max_inefficiency),
        sig4(report.risk.max_collinearity),
    ));
    out
}

pub fn screen_outcome(outcome: &ScreenOutcome, dataset: &Dataset, c_q: f64) -> String {
    let survivors: Vec<&str> = outcome
        .survivors
        .columns()
        .iter()
        .skip(1)
        .map(|&c| dataset.name_of(c))
        .collect();
    let mut out = format!(
        "screen at q² ≤ {}: {} of {} variables survive: {}\n",
        sig4(c_q),
        survivors.len(),
        dataset.k() - 1,
        if survivors.is_empty() {
            "(none)".to_string()
        } else {
            survivors.join(", ")
        }
    );
    if outcome.dropped.is_empty() {
        out.push_str("dropped: none\n");
    } else {
        let rows: Vec<Vec<String>> = outcome
            .dropped
            .iter()
            .map(|d| vec![d.name.clone(), sig4(d.q_squared), sig4(d.i_index)])
            .collect();
        out.push_str(&table(&["dropped", "q²", "I"], &rows));
    }
    out
}

pub fn params_line(params: &ControlParams) -> String {
    let mut line = format!(
        "levels: c_q = {} (c = {}), d_R = {} (d = {}), a = {}, b = {}",
        sig4(params.c_q()),
        sig4(params.c()),
        sig4(params.d_r()),
        sig4(params.d()),
        sig4(params.a()),
        sig4(params.b()),
    );
    if let Some(e) = params.e_norm() {
        line.push_str(&format!(", e-norm = {}", sig4(e)));
    }
    line.push('\n');
    line
}

fn score_rows(scores: &[RankedScore], dataset: &Dataset) -> Vec<Vec<String>> {
    scores
        .iter()
        .map(|r| {
            vec![
                format!("{}{}", r.rank, if r.best { "*" } else { "" }),
                model_label(&r.score.model, dataset),
                sig4(r.score.rse),
                sig4(r.score.cd),
                sig4(r.score.adjusted_cd),
                sig4(r.score.aic),
                sig4(r.score.bic),
            ]
        })
        .collect()
}

pub fn run_report(report: &RunReport, dataset: &Dataset) -> String {
    let mut out = format!(
        "dataset {} — algorithm {}, criterion {}\n",
        &report.dataset_id[..12.min(report.dataset_id.len())],
        report.algorithm,
        report.criterion,
    );
    out.push_str(&params_line(&report.params));
    out.push('\n');
    out.push_str(&screen_outcome(
        &report.i_screen,
        dataset,
        report.params.c_q(),
    ));
    if let Some(index_table_report) = &report.index_table {
        out.push('\n');
        out.push_str(&index_table(index_table_report));
    }
    out.push('\n');
    if report.selection_class.is_empty() {
        out.push_str("selection class: empty\n");
    } else {
        let rows: Vec<Vec<String>> = report
            .selection_class
            .members
            .iter()
            .map(|m| {
                vec![
                    model_label(&m.model, dataset),
                    m.model.column_size().to_string(),
                    sig4(m.risk.max_inefficiency),
                    sig4(m.risk.max_collinearity),
                    if m.admissible { "yes" } else { "no" }.to_string(),
                    if m.maximal { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        out.push_str(&format!(
            "selection class ({} members):\n",
            report.selection_class.len()
        ));
        out.push_str(&table(
            &["model", "size", "c_M", "d_M", "admissible", "maximal"],
            &rows,
        ));
    }
    if let Some(scores) = &report.scores {
        out.push('\n');
        out.push_str("scores (best marked *):\n");
        out.push_str(&table(
            &["rank", "model", "rse", "R²", "adj R²", "AIC", "BIC"],
            &score_rows(scores, dataset),
        ));
        if let Some(best) = scores.iter().find(|r| r.best) {
            let rows: Vec<Vec<String>> = best
                .score
                .per_coef
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        sig4(c.coefficient),
                        sig4(c.se),
                        sig4(c.pse),
                    ]
                })
                .collect();
            out.push('\n');
            out.push_str(&format!(
                "best model {} coefficients:\n",
                model_label(&best.score.model, dataset)
            ));
            out.push_str(&table(&["term", "coefficient", "se", "pse"], &rows));
        }
    }
    for warning in &report.warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    out
}

pub fn frequency_table(
    table_data: &FrequencyTable,
    n: usize,
    trials: u64,
    a: f64,
    b: f64,
    seed: u64,
) -> String {
    let mut out = format!(
        "frequency study: {} trials of {} rows, a = {}, b = {}, seed = {}\n",
        trials,
        n,
        sig4(a),
        sig4(b),
        seed
    );
    let rows: Vec<Vec<String>> = table_data
        .rows
        .iter()
        .map(|r| {
            let members = if r.members.is_empty() {
                "(none)".to_string()
            } else {
                r.members
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let share = r.count as f64 / table_data.total.max(1) as f64;
            vec![members, r.count.to_string(), sig4(share)]
        })
        .collect();
    out.push_str(&table(&["members (0-based)", "count", "share"], &rows));
    out
}
