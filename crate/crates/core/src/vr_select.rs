//! Variable-reducing pre-selection: standardize the candidate columns, run a
//! principal-component analysis of their correlation matrix, group variables
//! that load heavily on the same leading component into collinearity classes,
//! spawn one candidate model per way of keeping a single variable from each
//! class, then prune each candidate with a CD-reduction loop.
//!
//! Component labels are offset by one throughout: slot 1 is reserved for the
//! constant column, so the leading eigenpair is "component 2", the next is
//! "component 3", and so on. Variable labels inside a standardized design
//! follow the same convention. Reports show both labellings.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indices::q_squared;
use crate::model_space::{peer_cds, ControlParams, ModelSubset};
use crate::numerics::{
    correlation_matrix, standardize_columns, sym_eigen, EigenDecomposition, Matrix,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Column-standardized view of a model's non-intercept variables:
/// `z = (x − x̄)/(√N s)`, so every column has mean 0 and norm 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedDesign {
    /// N×(J−1) matrix of standardized columns.
    pub z_matrix: Matrix,
    /// Mean of each source column.
    pub source_means: Vec<f64>,
    /// Population standard deviation of each source column.
    pub source_stds: Vec<f64>,
    /// Original dataset column index behind each standardized column.
    pub column_map: Vec<usize>,
}

impl StandardizedDesign {
    /// Correlation matrix of the standardized columns.
    pub fn correlation(&self) -> Result<Matrix> {
        correlation_matrix(&self.z_matrix)
    }

    fn position_of(&self, column: usize) -> Result<usize> {
        self.column_map
            .iter()
            .position(|&c| c == column)
            .ok_or_else(|| {
                Error::IndexOutOfRange(format!(
                    "column {column} is not part of the standardized design"
                ))
            })
    }
}

/// One variable's membership of a component class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PccMember {
    /// Original dataset column index.
    pub column: usize,
    /// Collinearity identifier `d(m,k) = |√λ_m · p_km|`, the absolute
    /// correlation between the standardized column and the component.
    pub identifier: f64,
}

/// The set of variables loading at least `threshold` on one component.
/// Classes of two or more members flag a collinearity that candidate models
/// must split up; smaller classes are reported but impose nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PccClass {
    /// Component label in the constant-offset convention (2 = leading
    /// eigenpair).
    pub component_index: usize,
    /// Eigenvalue λ of the component.
    pub eigenvalue: f64,
    /// Share of total variance, λ/(number of standardized columns).
    pub contribution: f64,
    pub members: Vec<PccMember>,
    /// Identifier threshold `a` the members passed.
    pub threshold: f64,
}

impl PccClass {
    /// Whether the class actually forces candidate models apart.
    pub fn is_separating(&self) -> bool {
        self.members.len() >= 2
    }
}

/// Bounds check for one pair of same-class variables: the absolute
/// correlation of their standardized columns must lie within `(1 − a²)` of
/// the product of their identifiers, and above the floor `2a² − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBound {
    pub first: usize,
    pub second: usize,
    pub abs_correlation: f64,
    pub lower: f64,
    pub upper: f64,
    /// Class-wide floor `2a² − 1` that `lower` must dominate.
    pub floor: f64,
    pub within: bool,
}

/// Standardize a model's non-intercept columns over a dataset.
pub fn standardize(dataset: &Dataset, columns: &ModelSubset) -> Result<StandardizedDesign> {
    columns.check_against(dataset)?;
    let variables = columns.variables().to_vec();
    let sub = dataset.submatrix(&variables);
    let (z_matrix, source_means, source_stds) =
        standardize_columns(&sub).map_err(|e| match e {
            Error::ConstantColumn { column } => Error::ConstantColumn {
                column: variables[column],
            },
            other => other,
        })?;
    Ok(StandardizedDesign {
        z_matrix,
        source_means,
        source_stds,
        column_map: variables,
    })
}

/// Identifier `d(m,k) = |√λ_m · p_km|` of variable `k` on component `m`,
/// both in the constant-offset labelling (first component and first
/// standardized column are both labelled 2).
pub fn collinearity_identifier(eig: &EigenDecomposition, m: usize, k: usize) -> Result<f64> {
    let p = eig.eigenvalues.len();
    for (label, what) in [(m, "component"), (k, "variable")] {
        if label < 2 || label > p + 1 {
            return Err(Error::IndexOutOfRange(format!(
                "{what} label {label} outside 2..={}",
                p + 1
            )));
        }
    }
    let lambda = eig.eigenvalues[m - 2].max(0.0);
    Ok((lambda.sqrt() * eig.eigenvectors.get(k - 2, m - 2)).abs())
}

/// Build the component classes of a standardized design. Components are
/// taken in descending-eigenvalue order while their variance share stays at
/// least `b`; within each, variables with identifier at least `a` become
/// members. For `a ≥ 1/√2` the classes are necessarily disjoint.
pub fn pcc_classes(std: &StandardizedDesign, a: f64, b: f64) -> Result<Vec<PccClass>> {
    let kz = std.z_matrix.cols();
    if kz == 0 {
        return Ok(Vec::new());
    }
    let corr = std.correlation()?;
    let eig = sym_eigen(&corr)?;
    let total = kz as f64;
    let mut classes = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let contribution = lambda / total;
        if contribution < b {
            break;
        }
        let component_index = idx + 2;
        let members = (0..kz)
            .filter_map(|pos| {
                let identifier = collinearity_identifier(&eig, component_index, pos + 2)
                    .expect("labels are in range by construction");
                (identifier >= a).then_some(PccMember {
                    column: std.column_map[pos],
                    identifier,
                })
            })
            .collect();
        classes.push(PccClass {
            component_index,
            eigenvalue: lambda,
            contribution,
            members,
            threshold: a,
        });
    }
    Ok(classes)
}

/// Verify the pairwise correlation bounds within a class: for members `k`
/// and `j` with identifiers `d_k`, `d_j`, the absolute correlation of their
/// standardized columns lies in `[d_k·d_j − (1−a²), d_k·d_j + (1−a²)]`, and
/// the lower end dominates the floor `2a² − 1`.
pub fn pair_correlation_bounds(class: &PccClass, std: &StandardizedDesign) -> Result<Vec<PairBound>> {
    if class.members.len() < 2 {
        return Err(Error::ClassTooSmall(class.members.len()));
    }
    let slack = 1.0 - class.threshold * class.threshold;
    let floor = 2.0 * class.threshold * class.threshold - 1.0;
    let mut bounds = Vec::new();
    for (i, first) in class.members.iter().enumerate() {
        for second in &class.members[i + 1..] {
            let zi = std.z_matrix.column(std.position_of(first.column)?);
            let zj = std.z_matrix.column(std.position_of(second.column)?);
            let abs_correlation = zi
                .iter()
                .zip(&zj)
                .map(|(x, y)| x * y)
                .sum::<f64>()
                .abs();
            let product = first.identifier * second.identifier;
            let (lower, upper) = (product - slack, product + slack);
            bounds.push(PairBound {
                first: first.column,
                second: second.column,
                abs_correlation,
                lower,
                upper,
                floor,
                within: lower <= abs_correlation && abs_correlation <= upper && floor <= lower,
            });
        }
    }
    Ok(bounds)
}

/// Spawn candidate models from the classes: variables in no separating class
/// are kept everywhere; each separating class contributes exactly one of its
/// members per candidate (Cartesian product). With no separating class the
/// single candidate is the full model.
pub fn spawn_candidates(
    full_columns: &ModelSubset,
    classes: &[PccClass],
) -> Result<Vec<ModelSubset>> {
    let separating: Vec<&PccClass> = classes.iter().filter(|c| c.is_separating()).collect();
    let claimed: BTreeSet<usize> = separating
        .iter()
        .flat_map(|c| c.members.iter().map(|m| m.column))
        .collect();
    let keepers: Vec<usize> = full_columns
        .variables()
        .iter()
        .copied()
        .filter(|c| !claimed.contains(c))
        .collect();
    let mut picks: Vec<Vec<usize>> = vec![Vec::new()];
    for class in &separating {
        let mut next = Vec::with_capacity(picks.len() * class.members.len());
        for pick in &picks {
            for member in &class.members {
                let mut extended = pick.clone();
                extended.push(member.column);
                next.push(extended);
            }
        }
        picks = next;
    }
    picks
        .into_iter()
        .map(|pick| {
            let mut columns: BTreeSet<usize> = keepers.iter().copied().collect();
            columns.extend(pick);
            columns.insert(0);
            ModelSubset::from_columns(&columns.into_iter().collect::<Vec<_>>())
        })
        .collect()
}

/// Shrink a candidate until every variable's CD on its peers is at most
/// `d_r`: repeatedly delete the variable with the largest CD (ties go to the
/// smallest column index). Can reduce to the bare intercept.
pub fn cd_reduce(candidate: &ModelSubset, dataset: &Dataset, d_r: f64) -> Result<ModelSubset> {
    candidate.check_against(dataset)?;
    let mut columns = candidate.columns().to_vec();
    while columns.len() > 1 {
        let cds = peer_cds(&columns, dataset)?;
        let &(worst_column, worst_cd) = cds
            .iter()
            .reduce(|best, next| if next.1 > best.1 { next } else { best })
            .expect("at least one non-intercept column");
        if worst_cd <= d_r {
            break;
        }
        columns.retain(|&c| c != worst_column);
    }
    ModelSubset::new(&columns, dataset)
}

/// Run the reduction pipeline end to end: inefficiency-screen the dataset's
/// columns by `q² ≤ c_q` (zero columns are dropped), standardize the
/// survivors, form component classes at `(a, b)`, spawn candidates, shrink
/// each with [`cd_reduce`] at `d_r`, and return the distinct surviving
/// models (bare-intercept reductions are discarded), sorted.
pub fn vr_algorithm(dataset: &Dataset, params: &ControlParams) -> Result<Vec<ModelSubset>> {
    let mut survivors = Vec::new();
    for k in 1..dataset.k() {
        match q_squared(&dataset.design().column(k)) {
            Ok(q) if q <= params.c_q() => survivors.push(k),
            Ok(_) | Err(Error::ZeroVector) => {}
            Err(e) => return Err(e),
        }
    }
    if survivors.is_empty() {
        return Ok(Vec::new());
    }
    let full = ModelSubset::new(&survivors, dataset)?;
    let standardized = standardize(dataset, &full)?;
    let classes = pcc_classes(&standardized, params.a(), params.b())?;
    let mut results: BTreeSet<ModelSubset> = BTreeSet::new();
    for candidate in spawn_candidates(&full, &classes)? {
        let bound = ModelSubset::new(candidate.columns(), dataset)?;
        let reduced = cd_reduce(&bound, dataset, params.d_r())?;
        if reduced.column_size() >= 2 {
            results.insert(reduced);
        }
    }
    Ok(results.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cd_of_regression;
    use approx::assert_abs_diff_eq;

    /// Mutually orthogonal, mean-zero sign patterns over 8 rows; columns
    /// "dup_a" and "dup_b" are proportional (correlation 1).
    fn duplicated_pair_dataset() -> Dataset {
        let h1 = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let h2 = vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let h3 = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        let dup: Vec<f64> = h1.iter().map(|v| 3.0 * v).collect();
        Dataset::from_parts(&["dup_a", "dup_b", "ortho_c", "ortho_d"], &[h1, dup, h2, h3], None)
            .unwrap()
    }

    fn full_model(d: &Dataset) -> ModelSubset {
        ModelSubset::new(&(1..d.k()).collect::<Vec<_>>(), d).unwrap()
    }

    #[test]
    fn standardize_centers_and_normalizes() {
        let d = Dataset::from_parts(&["x"], &[vec![1.0, 2.0, 3.0]], None).unwrap();
        let std = standardize(&d, &full_model(&d)).unwrap();
        let z = std.z_matrix.column(0);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(z[0], -inv_sqrt2, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], inv_sqrt2, epsilon = 1e-12);
        assert_eq!(std.column_map, vec![1]);
        assert_abs_diff_eq!(std.source_means[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(std.source_stds[0], (2.0 / 3.0_f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn standardize_is_idempotent_on_standardized_columns() {
        let d = Dataset::from_parts(&["x"], &[vec![1.0, 2.0, 3.0]], None).unwrap();
        let once = standardize(&d, &full_model(&d)).unwrap();
        let z_col = once.z_matrix.column(0);
        let d2 = Dataset::from_parts(&["z"], std::slice::from_ref(&z_col), None).unwrap();
        let twice = standardize(&d2, &full_model(&d2)).unwrap();
        for (a, b) in z_col.iter().zip(&twice.z_matrix.column(0)) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn standardize_rekeys_constant_column_errors() {
        let d = Dataset::from_parts(
            &["x", "flat"],
            &[vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 4.0]],
            None,
        )
        .unwrap();
        match standardize(&d, &full_model(&d)) {
            Err(Error::ConstantColumn { column }) => assert_eq!(column, 2),
            other => panic!("expected ConstantColumn, got {other:?}"),
        }
    }

    #[test]
    fn identifier_on_identity_correlation_is_a_coordinate_pattern() {
        let eig = sym_eigen(&Matrix::identity(3)).unwrap();
        for m in 2..=4 {
            for k in 2..=4 {
                let d = collinearity_identifier(&eig, m, k).unwrap();
                let expected = if m == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(d, expected, epsilon = 1e-12);
            }
        }
        assert!(collinearity_identifier(&eig, 1, 2).is_err());
        assert!(collinearity_identifier(&eig, 2, 5).is_err());
    }

    #[test]
    fn identifier_squares_sum_to_one_per_variable() {
        let d = duplicated_pair_dataset();
        let std = standardize(&d, &full_model(&d)).unwrap();
        let eig = sym_eigen(&std.correlation().unwrap()).unwrap();
        let p = eig.eigenvalues.len();
        assert_abs_diff_eq!(eig.eigenvalues.iter().sum::<f64>(), p as f64, epsilon = 1e-10);
        for k in 2..=p + 1 {
            let total: f64 = (2..=p + 1)
                .map(|m| collinearity_identifier(&eig, m, k).unwrap().powi(2))
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn duplicated_pair_forms_one_class_and_two_candidates() {
        let d = duplicated_pair_dataset();
        let full = full_model(&d);
        let std = standardize(&d, &full).unwrap();
        let classes = pcc_classes(&std, 0.95, 0.4).unwrap();
        assert_eq!(classes.len(), 1);
        let class = &classes[0];
        assert_eq!(class.component_index, 2);
        assert_abs_diff_eq!(class.eigenvalue, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(class.contribution, 0.5, epsilon = 1e-10);
        assert!(class.is_separating());
        let members: Vec<usize> = class.members.iter().map(|m| m.column).collect();
        assert_eq!(members, vec![1, 2]);
        for member in &class.members {
            assert_abs_diff_eq!(member.identifier, 1.0, epsilon = 1e-10);
        }
        // No class has an eigenvalue below a² (identifiers can't reach a
        // otherwise).
        assert!(classes
            .iter()
            .filter(|c| !c.members.is_empty())
            .all(|c| c.eigenvalue >= 0.95 * 0.95 - 1e-12));

        let candidates = spawn_candidates(&full, &classes).unwrap();
        let sets: Vec<&[usize]> = candidates.iter().map(|c| c.columns()).collect();
        assert_eq!(sets, vec![&[0, 1, 3, 4][..], &[0, 2, 3, 4][..]]);
    }

    #[test]
    fn identity_like_design_yields_no_class_and_one_candidate() {
        let d = duplicated_pair_dataset();
        // Drop one of the duplicates: remaining columns are orthogonal, so
        // every variance share is 1/3 < 0.4.
        let model = ModelSubset::new(&[1, 3, 4], &d).unwrap();
        let std = standardize(&d, &model).unwrap();
        let classes = pcc_classes(&std, 0.9, 0.4).unwrap();
        assert!(classes.is_empty());
        let candidates = spawn_candidates(&model, &classes).unwrap();
        assert_eq!(candidates.len(), 1);
        assert_eq!(candidates[0].columns(), model.columns());
    }

    #[test]
    fn pair_bounds_hold_for_the_duplicated_class() {
        let d = duplicated_pair_dataset();
        let std = standardize(&d, &full_model(&d)).unwrap();
        let classes = pcc_classes(&std, 0.95, 0.4).unwrap();
        let bounds = pair_correlation_bounds(&classes[0], &std).unwrap();
        assert_eq!(bounds.len(), 1);
        let b = &bounds[0];
        assert_abs_diff_eq!(b.abs_correlation, 1.0, epsilon = 1e-10);
        assert!(b.within);
        assert!(b.floor <= b.lower);
        assert!(b.lower <= b.abs_correlation && b.abs_correlation <= b.upper);

        let singleton = PccClass {
            component_index: 2,
            eigenvalue: 1.0,
            contribution: 0.25,
            members: vec![PccMember {
                column: 1,
                identifier: 1.0,
            }],
            threshold: 0.9,
        };
        assert!(matches!(
            pair_correlation_bounds(&singleton, &std),
            Err(Error::ClassTooSmall(1))
        ));
    }

    #[test]
    fn cd_reduce_deletes_the_smallest_index_on_ties() {
        // Both variables see the same peer CD (their shared squared
        // correlation ≈ 0.9657 > 0.9), so the tie rule must delete column 1.
        let d = Dataset::from_parts(
            &["x2", "x3"],
            &[vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 5.0]],
            None,
        )
        .unwrap();
        let full = full_model(&d);
        let reduced = cd_reduce(&full, &d, 0.9).unwrap();
        assert_eq!(reduced.columns(), &[0, 2]);

        let lenient = cd_reduce(&full, &d, 0.97).unwrap();
        assert_eq!(lenient.columns(), full.columns());
    }

    #[test]
    fn cd_reduce_can_shrink_to_the_bare_intercept() {
        let d = Dataset::from_parts(
            &["high_mean"],
            &[vec![10.0, 10.5, 9.5, 10.2]],
            None,
        )
        .unwrap();
        let reduced = cd_reduce(&full_model(&d), &d, 0.5).unwrap();
        assert_eq!(reduced.columns(), &[0]);
    }

    #[test]
    fn vr_algorithm_splits_the_duplicated_pair() {
        let d = duplicated_pair_dataset();
        let params = ControlParams::new(0.9, 0.9).unwrap();
        let models = vr_algorithm(&d, &params).unwrap();
        let sets: Vec<&[usize]> = models.iter().map(|m| m.columns()).collect();
        assert_eq!(sets, vec![&[0, 1, 3, 4][..], &[0, 2, 3, 4][..]]);
    }

    #[test]
    fn vr_algorithm_screens_high_mean_columns_first() {
        let d = Dataset::from_parts(
            &["high_mean", "signal"],
            &[
                vec![10.0, 11.0, 10.5, 9.5, 10.2, 9.8],
                vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5],
            ],
            None,
        )
        .unwrap();
        let params = ControlParams::new(0.9, 0.9).unwrap();
        let models = vr_algorithm(&d, &params).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].columns(), &[0, 2]);
    }

    #[test]
    fn peer_cd_is_invariant_under_standardization() {
        let d = Dataset::from_parts(
            &["a", "b", "c"],
            &[
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                vec![1.5, 1.9, 3.2, 4.1, 4.8, 6.3],
                vec![2.0, 1.0, 2.5, 0.5, 3.0, 1.2],
            ],
            None,
        )
        .unwrap();
        let std = standardize(&d, &full_model(&d)).unwrap();
        let with_intercept = {
            let mut cols: Vec<Vec<f64>> = vec![vec![1.0; 6]];
            for j in 0..3 {
                cols.push(std.z_matrix.column(j));
            }
            Matrix::from_columns(&cols)
        };
        for k in 1..d.k() {
            let raw = cd_of_regression(k, d.design()).unwrap();
            let standardized = cd_of_regression(k, &with_intercept).unwrap();
            assert_abs_diff_eq!(raw, standardized, epsilon = 1e-8);
        }
    }
}
