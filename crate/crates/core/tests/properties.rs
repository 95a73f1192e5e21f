//! Cross-module mathematical properties checked on randomized inputs:
//! algebraic identities between the index formulas, closure laws of the
//! controlled model class, order axioms of the risk comparison, and the
//! component-class correlation bounds on simulated draws.

use std::collections::{BTreeMap, HashSet};

use eemx_core::dataset::Dataset;
use eemx_core::fixtures::helmert_design;
use eemx_core::indices::{
    inefficiency_index, model_index_report, variable_index_report, RiskIndex,
};
use eemx_core::model_space::{
    admissible_set, better_accommodates, brute_force_class, in_class, risk_index, Accommodation,
    ControlParams, ModelSubset, SelectionClass,
};
use eemx_core::numerics::{
    cd_of_regression, cholesky_lower, ols_fit, sym_eigen, Matrix,
};
use eemx_core::scoring::{score_model, select_optimal, ScoreCriterion};
use eemx_core::simulate::{generate_mvn, SimConfig};
use eemx_core::vi_select::vi_algorithm;
use eemx_core::vr_select::{
    cd_reduce, collinearity_identifier, pair_correlation_bounds, pcc_classes, standardize, vr_algorithm,
};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

// ---------------------------------------------------------------------------
// Randomized-input helpers.
// ---------------------------------------------------------------------------

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in [0,1) with 53 bits of precision.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * 2f64.powi(-53)
}

fn span(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn usize_in(rng: &mut ChaCha8Rng, lo: usize, hi_inclusive: usize) -> usize {
    lo + (rng.next_u64() as usize) % (hi_inclusive - lo + 1)
}

fn random_columns(rng: &mut ChaCha8Rng, n: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..cols)
        .map(|_| (0..n).map(|_| span(rng, -4.0, 4.0)).collect())
        .collect()
}

/// A dataset of i.i.d. uniform columns, optionally with a response that is a
/// noisy linear combination of them. Full rank with probability one.
fn random_dataset(rng: &mut ChaCha8Rng, n: usize, cols: usize, with_response: bool) -> Dataset {
    let columns = random_columns(rng, n, cols);
    let names: Vec<String> = (0..cols).map(|j| format!("x{}", j + 2)).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let response = if with_response {
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let signal: f64 = columns
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (j as f64 + 1.0) * 0.5 * c[i])
                    .sum();
                signal + span(rng, -1.0, 1.0)
            })
            .collect();
        Some(("y", y))
    } else {
        None
    };
    Dataset::from_parts(&name_refs, &columns, response).expect("random dataset is well formed")
}

/// A dataset whose first `2·pairs` columns come in near-duplicate pairs, so
/// strong collinearity (and hence non-trivial component classes) is certain.
fn near_duplicate_dataset(rng: &mut ChaCha8Rng, n: usize, pairs: usize, extras: usize) -> Dataset {
    let mut columns = Vec::new();
    for _ in 0..pairs {
        let base: Vec<f64> = (0..n).map(|_| span(rng, -3.0, 3.0)).collect();
        let twin: Vec<f64> = base.iter().map(|v| v + span(rng, -0.05, 0.05)).collect();
        columns.push(base);
        columns.push(twin);
    }
    columns.extend(random_columns(rng, n, extras));
    let names: Vec<String> = (0..columns.len()).map(|j| format!("x{}", j + 2)).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Dataset::from_parts(&name_refs, &columns, None).expect("near-duplicate dataset is well formed")
}

fn full_model(dataset: &Dataset) -> ModelSubset {
    let all: Vec<usize> = (0..dataset.k()).collect();
    ModelSubset::new(&all, dataset).expect("full model is valid")
}

fn model_names(model: &ModelSubset, dataset: &Dataset) -> Vec<String> {
    model.names(dataset).iter().map(|s| s.to_string()).collect()
}

/// Every proper non-empty subset of the model's variables, each returned as a
/// sorted column list including the intercept.
fn proper_subsets_with_intercept(columns: &[usize]) -> Vec<Vec<usize>> {
    let rest = &columns[1..];
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << rest.len()) {
        if mask.count_ones() as usize == rest.len() {
            continue;
        }
        let mut subset = vec![0usize];
        for (i, &c) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                subset.push(c);
            }
        }
        out.push(subset);
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// Numerical kernel properties.
// ---------------------------------------------------------------------------

#[test]
fn projection_is_idempotent() {
    let mut r = rng(11);
    for _ in 0..20 {
        let ds = random_dataset(&mut r, 12, 4, true);
        let fit = ols_fit(ds.design(), ds.response().unwrap()).unwrap();
        let refit = ols_fit(ds.design(), &fit.fitted).unwrap();
        for (a, b) in fit.fitted.iter().zip(&refit.fitted) {
            assert!(
                (a - b).abs() <= 1e-8,
                "projecting fitted values moved them: {a} vs {b}"
            );
        }
    }
}

#[test]
fn determination_agrees_between_projection_and_residual_routes() {
    let mut r = rng(12);
    for _ in 0..20 {
        let ds = random_dataset(&mut r, 14, 5, false);
        let design = ds.design();
        for k in 1..ds.k() {
            let via_projection = cd_of_regression(k, design).unwrap();
            let x = design.column(k);
            let peers: Vec<usize> = (0..ds.k()).filter(|&j| j != k).collect();
            let fit = ols_fit(&design.select_columns(&peers), &x).unwrap();
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            let centered_ssq: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
            let direct = 1.0 - fit.rss / centered_ssq;
            assert!(
                (via_projection - direct).abs() <= 1e-10,
                "column {k}: {via_projection} vs {direct}"
            );
        }
    }
}

#[test]
fn eigen_reconstruction_orthonormality_and_trace() {
    let mut r = rng(13);
    for _ in 0..20 {
        let p = usize_in(&mut r, 3, 6);
        let mut m = Matrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = span(&mut r, -3.0, 3.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let eig = sym_eigen(&m).unwrap();
        let scale = m.max_abs().max(1.0);
        for i in 0..p {
            for j in 0..p {
                let recon: f64 = (0..p)
                    .map(|t| {
                        eig.eigenvalues[t]
                            * eig.eigenvectors.get(i, t)
                            * eig.eigenvectors.get(j, t)
                    })
                    .sum();
                assert!(
                    (recon - m.get(i, j)).abs() <= 1e-10 * scale,
                    "reconstruction off at ({i},{j})"
                );
            }
        }
        for a in 0..p {
            for b in 0..p {
                let dot: f64 = (0..p)
                    .map(|t| eig.eigenvectors.get(t, a) * eig.eigenvectors.get(t, b))
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() <= 1e-10, "columns {a},{b} not orthonormal");
            }
        }
        let trace: f64 = (0..p).map(|i| m.get(i, i)).sum();
        let lambda_sum: f64 = eig.eigenvalues.iter().sum();
        assert!(
            (trace - lambda_sum).abs() <= 1e-10 * scale,
            "trace {trace} vs eigenvalue sum {lambda_sum}"
        );
    }
}

#[test]
fn cholesky_factor_reproduces_spd_input() {
    let mut r = rng(14);
    for _ in 0..20 {
        let p = usize_in(&mut r, 2, 5);
        let b = Matrix::from_columns(&random_columns(&mut r, p + 3, p));
        let mut spd = b.gram();
        for i in 0..p {
            spd.set(i, i, spd.get(i, i) + 0.5);
        }
        let l = cholesky_lower(&spd).unwrap();
        let scale = spd.max_abs();
        for i in 0..p {
            for j in 0..p {
                let prod: f64 = (0..p).map(|t| l.get(i, t) * l.get(j, t)).sum();
                assert!(
                    (prod - spd.get(i, j)).abs() <= 1e-10 * scale,
                    "LL' differs from input at ({i},{j})"
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Index algebra.
// ---------------------------------------------------------------------------

#[test]
fn indices_are_invariant_under_column_rescaling() {
    let mut r = rng(15);
    for _ in 0..100 {
        let n = usize_in(&mut r, 8, 15);
        let cols = usize_in(&mut r, 3, 5);
        let raw = random_columns(&mut r, n, cols);
        let mut design_cols = vec![vec![1.0; n]];
        design_cols.extend(raw.iter().cloned());
        let design = Matrix::from_columns(&design_cols);
        let k = usize_in(&mut r, 1, cols);
        let before = variable_index_report(&design, k, "x").unwrap();

        let mut scaled_cols = design_cols.clone();
        for col in scaled_cols.iter_mut().skip(1) {
            let magnitude = span(&mut r, 0.1, 6.0);
            let alpha = if unit(&mut r) < 0.5 { -magnitude } else { magnitude };
            for v in col.iter_mut() {
                *v *= alpha;
            }
        }
        let scaled = Matrix::from_columns(&scaled_cols);
        let after = variable_index_report(&scaled, k, "x").unwrap();

        assert!(close(before.q_squared, after.q_squared, 1e-10));
        assert!(close(before.i_index, after.i_index, 1e-10));
        assert!(close(before.peer_cd, after.peer_cd, 1e-10));
        assert!(close(before.c_index, after.c_index, 1e-10));
        assert!(close(before.h_index, after.h_index, 1e-10));
    }
}

#[test]
fn peer_determination_never_shrinks_as_peers_accumulate() {
    let mut r = rng(16);
    for _ in 0..30 {
        let ds = random_dataset(&mut r, 15, 6, false);
        let mut cds = Vec::new();
        for top in 2..ds.k() {
            let cols: Vec<usize> = (0..=top).collect();
            let sub = ds.submatrix(&cols);
            cds.push(cd_of_regression(1, &sub).unwrap());
        }
        for pair in cds.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-12,
                "determination dropped when a peer was added: {pair:?}"
            );
        }
    }
}

#[test]
fn unit_h_characterizes_centered_orthogonal_designs() {
    let mut r = rng(17);
    for _ in 0..20 {
        let n = usize_in(&mut r, 6, 12);
        let k = usize_in(&mut r, 3, 6.min(n - 1));
        let scales: Vec<f64> = (0..k).map(|_| span(&mut r, 0.3, 3.0)).collect();
        let design = helmert_design(n, k, &scales).unwrap();
        let names: Vec<String> = (0..k).map(|j| format!("v{j}")).collect();

        // Forward direction: zero column means plus a diagonal Gram matrix
        // (true by construction, any scaling) force every H to one.
        let report = model_index_report(&design, &names).unwrap();
        for v in &report.per_variable {
            assert!(
                (v.h_index - 1.0).abs() <= 1e-10,
                "orthogonal centered column {} has H = {}",
                v.name,
                v.h_index
            );
        }

        // Reverse direction, as the contrapositive: break the premise by
        // shifting one entry and the all-ones H profile must break with it.
        let col = usize_in(&mut r, 1, k - 1);
        let row = usize_in(&mut r, 0, n - 1);
        let mut perturbed = design.clone();
        perturbed.set(row, col, perturbed.get(row, col) + span(&mut r, 0.05, 0.5));
        let report = model_index_report(&perturbed, &names).unwrap();
        let max_h = report
            .per_variable
            .iter()
            .map(|v| v.h_index)
            .fold(f64::MIN, f64::max);
        assert!(
            max_h > 1.0 + 1e-9,
            "perturbed design kept all H at one (max {max_h})"
        );
    }
}

#[test]
fn sole_variable_indices_coincide() {
    let mut r = rng(18);
    for _ in 0..50 {
        let n = usize_in(&mut r, 5, 14);
        let x: Vec<f64> = (0..n).map(|_| span(&mut r, -3.0, 5.0)).collect();
        let design = Matrix::from_columns(&[vec![1.0; n], x]);
        let report = variable_index_report(&design, 1, "x").unwrap();
        assert!(
            close(report.i_index, report.c_index, 1e-10),
            "I {} vs C {}",
            report.i_index,
            report.c_index
        );
        let expected_h = 1.0 / ((1.0 - report.q_squared) * (1.0 - report.q_squared));
        assert!(close(report.h_index, expected_h, 1e-10));
    }
}

#[test]
fn peer_determination_is_preserved_by_standardization() {
    let mut r = rng(19);
    for _ in 0..120 {
        let n = usize_in(&mut r, 8, 17);
        let cols = usize_in(&mut r, 2, 5);
        let ds = random_dataset(&mut r, n, cols, false);
        let std = standardize(&ds, &full_model(&ds)).unwrap();
        let mut z_cols = vec![vec![1.0; ds.n()]];
        for j in 0..std.z_matrix.cols() {
            z_cols.push(std.z_matrix.column(j));
        }
        let z_star = Matrix::from_columns(&z_cols);
        for k in 1..ds.k() {
            let raw = cd_of_regression(k, ds.design()).unwrap();
            let standardized = cd_of_regression(k, &z_star).unwrap();
            assert!(
                (raw - standardized).abs() <= 1e-8,
                "column {k}: raw {raw} vs standardized {standardized}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Controlled-class structure.
// ---------------------------------------------------------------------------

fn assert_closure_and_intersections(seed: u64, level_c: f64, level_d: f64, min_size: usize) {
    let mut r = rng(seed);
    let mut members_seen = 0usize;
    for _ in 0..12 {
        let n = usize_in(&mut r, 10, 17);
        let cols = usize_in(&mut r, 4, 7);
        let ds = random_dataset(&mut r, n, cols, false);
        let params = ControlParams::from_levels(level_c, level_d).unwrap();
        let class = brute_force_class(&ds, &params, None, None).unwrap();
        let member_cols: Vec<Vec<usize>> = class
            .members
            .iter()
            .map(|m| m.model.columns().to_vec())
            .collect();
        members_seen += member_cols.len();

        for cols_m in &member_cols {
            for subset in proper_subsets_with_intercept(cols_m) {
                if subset.len() < min_size {
                    continue;
                }
                let model = ModelSubset::new(&subset, &ds).unwrap();
                let verdict = in_class(&model, &ds, &params).unwrap();
                assert!(
                    verdict.member,
                    "submodel {subset:?} of member {cols_m:?} left the class: {:?}",
                    verdict.violations
                );
                assert!(class.contains_columns(&subset));
            }
        }

        for (i, a) in member_cols.iter().enumerate() {
            for b in member_cols.iter().skip(i + 1) {
                let intersection: Vec<usize> =
                    a.iter().filter(|c| b.contains(c)).copied().collect();
                if intersection.len() < min_size.max(2) {
                    continue;
                }
                assert!(
                    class.contains_columns(&intersection),
                    "intersection {intersection:?} of members {a:?} and {b:?} is not a member"
                );
            }
        }
    }
    assert!(
        members_seen > 20,
        "levels ({level_c},{level_d}) produced almost no members; test is vacuous"
    );
}

#[test]
fn class_is_closed_under_submodels_and_intersections() {
    assert_closure_and_intersections(21, 12.0, 12.0, 2);
}

#[test]
fn class_closure_holds_beyond_two_columns_at_split_levels() {
    // With distinct levels the two-column convention couples both bounds to
    // the same quantity, so closure is asserted from three columns up.
    assert_closure_and_intersections(22, 30.0, 4.0, 3);
    assert_closure_and_intersections(23, 4.0, 30.0, 3);
}

proptest! {
    #[test]
    fn risk_comparison_is_a_strict_partial_order(
        raw in proptest::collection::vec(1.0f64..40.0, 6),
    ) {
        let mut risks: Vec<RiskIndex> = raw
            .chunks(2)
            .map(|pair| RiskIndex {
                max_inefficiency: pair[0],
                max_collinearity: pair[1],
            })
            .collect();
        // Seed a guaranteed dominance chain so the Better branches always run.
        risks.push(RiskIndex { max_inefficiency: 1.0, max_collinearity: 1.0 });
        risks.push(RiskIndex { max_inefficiency: 2.0, max_collinearity: 3.0 });
        risks.push(RiskIndex { max_inefficiency: 5.0, max_collinearity: 9.0 });
        let size = 3usize;

        for a in &risks {
            prop_assert!(matches!(
                better_accommodates(a, size, a, size).unwrap(),
                Accommodation::Equal
            ));
        }
        for a in &risks {
            for b in &risks {
                let forward = better_accommodates(a, size, b, size).unwrap();
                let backward = better_accommodates(b, size, a, size).unwrap();
                let expected = match forward {
                    Accommodation::Better => Accommodation::Worse,
                    Accommodation::Worse => Accommodation::Better,
                    Accommodation::Equal => Accommodation::Equal,
                    Accommodation::Incomparable => Accommodation::Incomparable,
                };
                prop_assert!(backward == expected);
            }
        }
        for a in &risks {
            for b in &risks {
                for c in &risks {
                    let ab = better_accommodates(a, size, b, size).unwrap();
                    let bc = better_accommodates(b, size, c, size).unwrap();
                    if matches!(ab, Accommodation::Better) && matches!(bc, Accommodation::Better) {
                        prop_assert!(matches!(
                            better_accommodates(a, size, c, size).unwrap(),
                            Accommodation::Better
                        ));
                    }
                }
            }
        }
        prop_assert!(better_accommodates(&risks[0], 2, &risks[1], 3).is_err());
    }
}

#[test]
fn admissible_set_matches_pairwise_domination() {
    let mut r = rng(24);
    let mut groups_checked = 0usize;
    for _ in 0..15 {
        let n = usize_in(&mut r, 12, 17);
        let cols = usize_in(&mut r, 5, 7);
        let ds = random_dataset(&mut r, n, cols, false);
        let params = ControlParams::from_levels(40.0, 40.0).unwrap();
        let class = brute_force_class(&ds, &params, None, None).unwrap();

        let mut by_size: BTreeMap<usize, Vec<ModelSubset>> = BTreeMap::new();
        for member in &class.members {
            by_size
                .entry(member.model.column_size())
                .or_default()
                .push(member.model.clone());
        }
        for (size, group) in by_size {
            if group.len() < 2 {
                continue;
            }
            groups_checked += 1;
            let fast = admissible_set(&group, &ds, &params).unwrap();
            let risks: Vec<RiskIndex> = group
                .iter()
                .map(|m| risk_index(m, &ds).unwrap())
                .collect();
            let mut slow: Vec<ModelSubset> = group
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    !risks.iter().enumerate().any(|(j, other)| {
                        j != *i
                            && matches!(
                                better_accommodates(other, size, &risks[*i], size).unwrap(),
                                Accommodation::Better
                            )
                    })
                })
                .map(|(_, m)| m.clone())
                .collect();
            slow.sort();
            slow.dedup();
            assert_eq!(fast, slow, "column size {size}");
        }
    }
    assert!(groups_checked > 10, "domination check barely exercised");
}

#[test]
fn member_h_indices_respect_the_level_product() {
    let mut r = rng(25);
    let mut variables_checked = 0usize;
    for _ in 0..10 {
        let n = usize_in(&mut r, 12, 17);
        let ds = random_dataset(&mut r, n, 6, false);
        let params = ControlParams::from_levels(8.0, 8.0).unwrap();
        let class = brute_force_class(&ds, &params, None, None).unwrap();
        for member in &class.members {
            let sub = member.model.submatrix(&ds);
            let names = model_names(&member.model, &ds);
            let report = model_index_report(&sub, &names).unwrap();
            let cap = (report.risk.max_inefficiency * report.risk.max_collinearity)
                .min(params.c() * params.d());
            for v in &report.per_variable {
                variables_checked += 1;
                assert!(
                    v.h_index <= cap * (1.0 + 1e-12),
                    "H {} above cap {cap} in member {:?}",
                    v.h_index,
                    member.model.columns()
                );
            }
        }
    }
    assert!(variables_checked > 50);
}

// ---------------------------------------------------------------------------
// Selection algorithms against exhaustive enumeration.
// ---------------------------------------------------------------------------

#[test]
fn greedy_selections_are_class_members() {
    let mut r = rng(26);
    let mut outputs_seen = 0usize;
    for trial in 0..12 {
        let n = usize_in(&mut r, 12, 19);
        let cols = usize_in(&mut r, 4, 7);
        let ds = if trial % 3 == 0 {
            near_duplicate_dataset(&mut r, n, 1, cols - 2)
        } else {
            random_dataset(&mut r, n, cols, false)
        };
        let params = ControlParams::new(0.9, 0.9).unwrap();
        let brute = brute_force_class(&ds, &params, None, None).unwrap();

        let vi_outcomes = vi_algorithm(&ds, 0.9, 0.9).unwrap();
        for outcome in &vi_outcomes {
            outputs_seen += 1;
            assert!(
                in_class(&outcome.model, &ds, &params).unwrap().member,
                "incremental search returned a non-member {:?}",
                outcome.model.columns()
            );
            assert!(brute.contains_columns(outcome.model.columns()));
        }
        for a in &vi_outcomes {
            for b in &vi_outcomes {
                if a.model != b.model {
                    assert!(
                        !a.model.is_subset_of(&b.model),
                        "incremental search kept a dominated subset"
                    );
                }
            }
        }

        for model in vr_algorithm(&ds, &params).unwrap() {
            outputs_seen += 1;
            assert!(
                in_class(&model, &ds, &params).unwrap().member,
                "reduction search returned a non-member {:?}",
                model.columns()
            );
            assert!(brute.contains_columns(model.columns()));
        }
    }
    assert!(outputs_seen > 12, "selection algorithms produced almost nothing");
}

// ---------------------------------------------------------------------------
// Component-class structure.
// ---------------------------------------------------------------------------

#[test]
fn component_identifiers_partition_unit_variance() {
    let mut r = rng(27);
    for _ in 0..25 {
        let n = usize_in(&mut r, 10, 17);
        let cols = usize_in(&mut r, 3, 6);
        let ds = random_dataset(&mut r, n, cols, false);
        let std = standardize(&ds, &full_model(&ds)).unwrap();
        let eig = sym_eigen(&std.correlation().unwrap()).unwrap();
        let p = std.z_matrix.cols();

        let lambda_sum: f64 = eig.eigenvalues.iter().sum();
        assert!(
            (lambda_sum - p as f64).abs() <= 1e-8,
            "eigenvalues sum to {lambda_sum}, expected {p}"
        );
        for &lambda in &eig.eigenvalues {
            assert!(lambda >= -1e-10, "correlation eigenvalue {lambda} below zero");
        }
        for k in 2..=(p + 1) {
            let total: f64 = (2..=(p + 1))
                .map(|m| {
                    let d = collinearity_identifier(&eig, m, k).unwrap();
                    d * d
                })
                .sum();
            assert!(
                (total - 1.0).abs() <= 1e-8,
                "identifier energy of variable {k} is {total}"
            );
        }
    }
}

#[test]
fn component_classes_are_disjoint_with_bounded_eigenvalues() {
    let mut r = rng(28);
    let mut nonempty = 0usize;
    for trial in 0..30 {
        let n = usize_in(&mut r, 12, 19);
        let ds = if trial % 2 == 0 {
            let cols = usize_in(&mut r, 3, 6);
            random_dataset(&mut r, n, cols, false)
        } else {
            let pairs = usize_in(&mut r, 1, 2);
            near_duplicate_dataset(&mut r, n, pairs, 1)
        };
        let std = standardize(&ds, &full_model(&ds)).unwrap();
        for &a in &[0.9, 0.95] {
            let classes = pcc_classes(&std, a, 0.05).unwrap();
            let mut seen = HashSet::new();
            for class in &classes {
                for member in &class.members {
                    assert!(
                        seen.insert(member.column),
                        "column {} appears in two classes at a = {a}",
                        member.column
                    );
                    assert!(member.identifier >= a - 1e-12);
                }
                if !class.members.is_empty() {
                    nonempty += 1;
                    assert!(
                        class.eigenvalue >= a * a - 1e-9,
                        "class on eigenvalue {} cannot reach identifier {a}",
                        class.eigenvalue
                    );
                }
            }
        }
    }
    assert!(nonempty > 10, "no populated classes were ever formed");
}

#[test]
fn determination_reduction_controls_every_peer_and_stays_closed() {
    let mut r = rng(29);
    let d_r = 0.6;
    let cap = 1.0 / (1.0 - d_r);
    for trial in 0..20 {
        let n = usize_in(&mut r, 14, 19);
        let ds = if trial % 2 == 0 {
            near_duplicate_dataset(&mut r, n, 2, 1)
        } else {
            random_dataset(&mut r, n, 5, false)
        };
        let reduced = cd_reduce(&full_model(&ds), &ds, d_r).unwrap();
        if reduced.column_size() < 2 {
            continue;
        }
        let report =
            model_index_report(&reduced.submatrix(&ds), &model_names(&reduced, &ds)).unwrap();
        assert!(
            report.risk.max_collinearity <= cap + 1e-9,
            "reduction left collinearity index {}",
            report.risk.max_collinearity
        );
        for subset in proper_subsets_with_intercept(reduced.columns()) {
            if subset.len() < 3 {
                continue;
            }
            let model = ModelSubset::new(&subset, &ds).unwrap();
            let sub_report =
                model_index_report(&model.submatrix(&ds), &model_names(&model, &ds)).unwrap();
            assert!(
                sub_report.risk.max_collinearity <= cap + 1e-9,
                "submodel {subset:?} exceeds the reduced model's bound"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Scoring identities and bounds.
// ---------------------------------------------------------------------------

#[test]
fn coefficient_errors_match_the_index_identity() {
    let mut r = rng(30);
    for _ in 0..30 {
        let n = usize_in(&mut r, 14, 19);
        let ds = random_dataset(&mut r, n, 5, true);
        for _ in 0..4 {
            let size = usize_in(&mut r, 1, 4);
            let mut picked: Vec<usize> = (1..ds.k()).collect();
            for i in (1..picked.len()).rev() {
                let j = (r.next_u64() as usize) % (i + 1);
                picked.swap(i, j);
            }
            picked.truncate(size);
            let model = ModelSubset::new(&picked, &ds).unwrap();
            let score = score_model(&model, &ds).unwrap();
            if score.degenerate_exact_fit {
                continue;
            }
            let sub = model.submatrix(&ds);
            let nf = ds.n() as f64;
            for (pos, coef) in score.per_coef.iter().enumerate() {
                let x = sub.column(pos);
                let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if pos == 0 {
                    assert!(close(coef.pse, coef.se, 1e-12));
                    continue;
                }
                let i_index = inefficiency_index(&x).unwrap();
                let c_index = if sub.cols() == 2 {
                    1.0
                } else {
                    1.0 / (1.0 - cd_of_regression(pos, &sub).unwrap())
                };
                let mean = x.iter().sum::<f64>() / nf;
                let variance = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
                // Two equivalent routes to the same standard error: through
                // the column norm with both indices, and through the centered
                // variance with the collinearity index alone.
                let via_norm = score.rse * (i_index * c_index).sqrt() / norm;
                let via_variance = score.rse * c_index.sqrt() / (nf * variance).sqrt();
                assert!(
                    close(coef.se, via_norm, 1e-10),
                    "norm route: {} vs {}",
                    coef.se,
                    via_norm
                );
                assert!(
                    close(coef.se, via_variance, 1e-10),
                    "variance route: {} vs {}",
                    coef.se,
                    via_variance
                );
                assert!(close(coef.pse, coef.se * norm / nf.sqrt(), 1e-10));
            }
        }
    }
}

#[test]
fn fit_grows_with_columns_but_its_adjustment_may_not() {
    let mut r = rng(31);
    for _ in 0..25 {
        let ds = random_dataset(&mut r, 12, 5, true);
        let mut previous_cd = -1.0;
        for top in 1..ds.k() {
            let cols: Vec<usize> = (0..=top).collect();
            let model = ModelSubset::new(&cols, &ds).unwrap();
            let score = score_model(&model, &ds).unwrap();
            assert!(
                score.adjusted_cd <= score.cd + 1e-12,
                "adjustment exceeded the raw determination"
            );
            assert!(
                score.cd >= previous_cd - 1e-12,
                "adding a column lowered the determination"
            );
            previous_cd = score.cd;
        }
    }
}

#[test]
fn class_member_predictive_errors_stay_under_the_level_budget() {
    let mut r = rng(32);
    let mut scored = 0usize;
    for _ in 0..10 {
        let n = usize_in(&mut r, 13, 17);
        let ds = random_dataset(&mut r, n, 5, true);
        let params = ControlParams::from_levels(10.0, 10.0).unwrap();
        let class = brute_force_class(&ds, &params, None, None).unwrap();
        let budget = (params.c() * params.d()).sqrt() / (ds.n() as f64).sqrt();
        for member in &class.members {
            let score = score_model(&member.model, &ds).unwrap();
            if score.degenerate_exact_fit {
                continue;
            }
            scored += 1;
            for coef in score.per_coef.iter().skip(1) {
                assert!(
                    coef.pse <= score.rse * budget * (1.0 + 1e-9),
                    "predictive error {} breaks the budget {} for {:?}",
                    coef.pse,
                    score.rse * budget,
                    member.model.columns()
                );
            }
        }
    }
    assert!(scored > 20, "budget check barely exercised");
}

#[test]
fn ranking_ignores_model_supply_order() {
    let mut r = rng(33);
    let mut rankings_compared = 0usize;
    for _ in 0..6 {
        let ds = random_dataset(&mut r, 13, 5, true);
        let params = ControlParams::from_levels(50.0, 50.0).unwrap();
        let class = brute_force_class(&ds, &params, None, None).unwrap();
        if class.is_empty() {
            continue;
        }
        let models: Vec<ModelSubset> = class.models().cloned().collect();
        let mut reversed = models.clone();
        reversed.reverse();
        let forward = SelectionClass::from_models(models, &ds).unwrap();
        let backward = SelectionClass::from_models(reversed, &ds).unwrap();
        for criterion in [
            ScoreCriterion::Aic,
            ScoreCriterion::Bic,
            ScoreCriterion::AdjustedCd,
            ScoreCriterion::Rse,
        ] {
            let a = select_optimal(&forward, &ds, criterion).unwrap();
            let b = select_optimal(&backward, &ds, criterion).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap(),
                "criterion {criterion} ranked differently for a permuted supply"
            );
            rankings_compared += 1;
        }
    }
    assert!(rankings_compared >= 12);
}

// ---------------------------------------------------------------------------
// Simulated draws: component classes keep their pairwise correlation bounds.
// ---------------------------------------------------------------------------

#[test]
fn simulated_component_classes_obey_pair_bounds() {
    let phi = Matrix::from_rows(&[
        vec![1.0, 0.99, 0.10, 0.10],
        vec![0.99, 1.0, 0.10, 0.10],
        vec![0.10, 0.10, 1.0, 0.30],
        vec![0.10, 0.10, 0.30, 1.0],
    ]);
    let config = SimConfig::new(phi, 40, 30, 0.9, 0.4, 7).unwrap();
    let mut separating_classes = 0usize;
    for trial in 0..config.trials {
        let draws = generate_mvn(&config, trial).unwrap();
        let columns: Vec<Vec<f64>> = (0..draws.cols()).map(|j| draws.column(j)).collect();
        let names: Vec<String> = (0..columns.len()).map(|j| format!("x{}", j + 2)).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let ds = Dataset::from_parts(&refs, &columns, None).unwrap();
        let std = standardize(&ds, &full_model(&ds)).unwrap();

        // Per-draw spectral invariants.
        let eig = sym_eigen(&std.correlation().unwrap()).unwrap();
        let p = std.z_matrix.cols();
        for k in 2..=(p + 1) {
            let total: f64 = (2..=(p + 1))
                .map(|m| {
                    let d = collinearity_identifier(&eig, m, k).unwrap();
                    d * d
                })
                .sum();
            assert!((total - 1.0).abs() <= 1e-8);
        }

        let classes = pcc_classes(&std, 0.9, 0.05).unwrap();
        let mut seen = HashSet::new();
        for class in &classes {
            for member in &class.members {
                assert!(seen.insert(member.column));
            }
            if !class.is_separating() {
                continue;
            }
            separating_classes += 1;
            for bound in pair_correlation_bounds(class, &std).unwrap() {
                assert!(
                    bound.within,
                    "pair ({}, {}): |r| = {} outside [{}, {}], floor {}",
                    bound.first,
                    bound.second,
                    bound.abs_correlation,
                    bound.lower,
                    bound.upper,
                    bound.floor
                );
                assert!(bound.floor <= bound.lower + 1e-12);
            }
        }
    }
    assert!(
        separating_classes >= 25,
        "the near-duplicate pair should form a class in most draws, saw {separating_classes}"
    );
}
