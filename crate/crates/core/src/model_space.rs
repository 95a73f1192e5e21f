//! Submodels as column subsets, the control-level parameters, membership
//! tests, and the structure of the controlled model class.
//!
//! A *model* is a subset of design columns that always includes the
//! intercept. The class of interest at control levels `(c, d)` contains the
//! models whose every variable keeps its inefficiency index within `c` and
//! its collinearity index within `d`. [`brute_force_class`] materializes the
//! class exhaustively (within a budget) and serves as the oracle the two
//! pre-selection algorithms are validated against; [`admissible_set`]
//! extracts the Pareto-optimal members within one column size.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::indices::{
    inefficiency_index, model_index_report, RiskIndex, PERFECT_COLLINEARITY_TOLERANCE,
};
use crate::numerics::{cd_of_regression, Matrix};
use serde::{Deserialize, Serialize};

/// Default ceiling on how many models an exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 20;

/// A submodel: strictly increasing column indices into a parent dataset,
/// always containing the intercept column 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelSubset {
    columns: Vec<usize>,
    /// Content hash of the dataset the indices refer to; `None` for subsets
    /// produced by bare enumeration, before binding to data.
    parent_id: Option<String>,
}

impl ModelSubset {
    /// Build a model over a dataset's columns. The intercept (column 0) is
    /// added if missing; duplicates and out-of-range indices are rejected.
    pub fn new(columns: &[usize], dataset: &Dataset) -> Result<ModelSubset> {
        let mut model = Self::from_columns(columns)?;
        for &c in &model.columns {
            if c >= dataset.k() {
                return Err(Error::IndexOutOfRange(format!(
                    "column {c} of {}",
                    dataset.k()
                )));
            }
        }
        model.parent_id = Some(dataset.id().to_string());
        Ok(model)
    }

    /// Build a model by column names (intercept implied).
    pub fn from_names(names: &[&str], dataset: &Dataset) -> Result<ModelSubset> {
        let columns: Vec<usize> = names
            .iter()
            .map(|n| dataset.index_of(n))
            .collect::<Result<_>>()?;
        Self::new(&columns, dataset)
    }

    /// Canonicalize a bare index list (no dataset binding yet).
    pub fn from_columns(columns: &[usize]) -> Result<ModelSubset> {
        let mut sorted: Vec<usize> = columns.to_vec();
        if !sorted.contains(&0) {
            sorted.push(0);
        }
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!(
                "duplicate column indices in {columns:?}"
            )));
        }
        Ok(ModelSubset {
            columns: sorted,
            parent_id: None,
        })
    }

    /// Sorted column indices, intercept first.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Column size J (intercept included).
    pub fn column_size(&self) -> usize {
        self.columns.len()
    }

    /// Non-intercept column indices.
    pub fn variables(&self) -> &[usize] {
        &self.columns[1..]
    }

    pub fn parent_id(&self) -> Option<&str> {
        self.parent_id.as_deref()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.columns.binary_search(&column).is_ok()
    }

    pub fn is_subset_of(&self, other: &ModelSubset) -> bool {
        self.columns.iter().all(|c| other.contains(*c))
    }

    pub fn is_proper_subset_of(&self, other: &ModelSubset) -> bool {
        self.column_size() < other.column_size() && self.is_subset_of(other)
    }

    /// Set intersection, keeping this model's parent binding.
    pub fn intersect(&self, other: &ModelSubset) -> ModelSubset {
        ModelSubset {
            columns: self
                .columns
                .iter()
                .copied()
                .filter(|c| other.contains(*c))
                .collect(),
            parent_id: self.parent_id.clone(),
        }
    }

    /// Column names of the model within its dataset.
    pub fn names<'d>(&self, dataset: &'d Dataset) -> Vec<&'d str> {
        self.columns.iter().map(|&c| dataset.name_of(c)).collect()
    }

    /// The model's design submatrix.
    pub fn submatrix(&self, dataset: &Dataset) -> Matrix {
        dataset.submatrix(&self.columns)
    }

    /// Error unless the model's indices are valid for (and bound to) the
    /// given dataset.
    pub fn check_against(&self, dataset: &Dataset) -> Result<()> {
        if let Some(id) = &self.parent_id {
            if id != dataset.id() {
                return Err(Error::InvalidModel(format!(
                    "model was built against dataset {id}, not {}",
                    dataset.id()
                )));
            }
        }
        if let Some(&max) = self.columns.last() {
            if max >= dataset.k() {
                return Err(Error::IndexOutOfRange(format!(
                    "column {max} of {}",
                    dataset.k()
                )));
            }
        }
        Ok(())
    }
}

/// The thresholds governing screening and selection.
///
/// `c_q` bounds each variable's squared cosine with the intercept
/// (equivalently its inefficiency index by `c = 1/(1 − c_q)`); `d_r` bounds
/// each variable's CD on its peers (collinearity index `d = 1/(1 − d_r)`).
/// `a` and `b` drive the eigenstructure-based selection: `a` is the loading
/// threshold for class membership, `b` the minimum share of total variance a
/// component must explain to be considered. `e_norm`, when set, additionally
/// requires every variable's Euclidean norm to reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    c_q: f64,
    d_r: f64,
    a: f64,
    b: f64,
    e_norm: Option<f64>,
}

impl ControlParams {
    pub const DEFAULT_A: f64 = 0.9;
    pub const DEFAULT_B: f64 = 0.4;

    /// Thresholds in the `[0,1)` parameterization (bounds on q² and Ř²).
    pub fn new(c_q: f64, d_r: f64) -> Result<ControlParams> {
        if !(0.0..1.0).contains(&c_q) || !c_q.is_finite() {
            return Err(Error::ParamOutOfRange(format!(
                "c_q must lie in [0,1), got {c_q}"
            )));
        }
        if !(0.0..1.0).contains(&d_r) || !d_r.is_finite() {
            return Err(Error::ParamOutOfRange(format!(
                "d_r must lie in [0,1), got {d_r}"
            )));
        }
        Ok(ControlParams {
            c_q,
            d_r,
            a: Self::DEFAULT_A,
            b: Self::DEFAULT_B,
            e_norm: None,
        })
    }

    /// Thresholds in the index parameterization: bounds `c ≥ 1` on the
    /// inefficiency index and `d ≥ 1` on the collinearity index.
    pub fn from_levels(c: f64, d: f64) -> Result<ControlParams> {
        if c < 1.0 || !c.is_finite() {
            return Err(Error::ParamOutOfRange(format!("c must be ≥ 1, got {c}")));
        }
        if d < 1.0 || !d.is_finite() {
            return Err(Error::ParamOutOfRange(format!("d must be ≥ 1, got {d}")));
        }
        Self::new(1.0 - 1.0 / c, 1.0 - 1.0 / d)
    }

    pub fn with_a(mut self, a: f64) -> Result<ControlParams> {
        if !(0.9..=1.0).contains(&a) {
            return Err(Error::ParamOutOfRange(format!(
                "a must lie in [0.9, 1], got {a}"
            )));
        }
        self.a = a;
        Ok(self)
    }

    pub fn with_b(mut self, b: f64) -> Result<ControlParams> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "b must lie in (0,1), got {b}"
            )));
        }
        self.b = b;
        Ok(self)
    }

    pub fn with_e_norm(mut self, e_norm: f64) -> Result<ControlParams> {
        if !(e_norm >= 0.0 && e_norm.is_finite()) {
            return Err(Error::ParamOutOfRange(format!(
                "e_norm must be a finite value ≥ 0, got {e_norm}"
            )));
        }
        self.e_norm = Some(e_norm);
        Ok(self)
    }

    /// Bound on q² (squared cosine with the intercept).
    pub fn c_q(&self) -> f64 {
        self.c_q
    }

    /// Bound on Ř² (CD of a variable on its peers).
    pub fn d_r(&self) -> f64 {
        self.d_r
    }

    /// Bound on the inefficiency index, `1/(1 − c_q)`.
    pub fn c(&self) -> f64 {
        1.0 / (1.0 - self.c_q)
    }

    /// Bound on the collinearity index, `1/(1 − d_r)`.
    pub fn d(&self) -> f64 {
        1.0 / (1.0 - self.d_r)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn e_norm(&self) -> Option<f64> {
        self.e_norm
    }
}

/// One failed membership condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub column: usize,
    pub kind: ViolationKind,
    /// The offending index value (infinite for exact degeneracy).
    pub value: f64,
    /// The level it had to stay within (below, for `NormTooSmall`).
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Inefficiency index above `c` (the variable leans too much on the
    /// intercept; infinite when the column is constant).
    Inefficiency,
    /// Collinearity index above `d` (infinite when the column is linearly
    /// dependent on its peers, i.e. the submatrix is rank deficient).
    Collinearity,
    /// Column norm below the configured `e_norm` floor.
    NormTooSmall,
}

/// Outcome of a class-membership test, with every violated condition listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub member: bool,
    pub violations: Vec<Violation>,
}

/// Test whether a model belongs to the controlled class at the given levels:
/// every non-intercept variable must keep `I ≤ c`, `C ≤ d`, and (if set)
/// `‖x‖ ≥ e_norm`. Rank-deficient submodels are non-members (infinite
/// collinearity at the dependent column), not errors.
pub fn in_class(model: &ModelSubset, dataset: &Dataset, params: &ControlParams) -> Result<Verdict> {
    model.check_against(dataset)?;
    let sub = model.submatrix(dataset);
    let mut violations = Vec::new();
    for (pos, &column) in model.columns().iter().enumerate().skip(1) {
        let x = sub.column(pos);
        let i_index = match inefficiency_index(&x) {
            Ok(v) => v,
            Err(Error::ConstantColumn { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if i_index > params.c() {
            violations.push(Violation {
                column,
                kind: ViolationKind::Inefficiency,
                value: i_index,
                limit: params.c(),
            });
        }
        let c_index = if i_index.is_infinite() {
            // Constant column: the peer regression is undefined; the
            // inefficiency violation above already disqualifies the model.
            1.0
        } else {
            // A sole variable's peer CD is its raw squared correlation with
            // the intercept (two-column convention, see the indices module).
            let peer_cd = if sub.cols() == 2 {
                crate::indices::q_squared(&x)?
            } else {
                cd_of_regression(pos, &sub)?
            };
            if peer_cd >= 1.0 - PERFECT_COLLINEARITY_TOLERANCE {
                f64::INFINITY
            } else {
                1.0 / (1.0 - peer_cd)
            }
        };
        if c_index > params.d() {
            violations.push(Violation {
                column,
                kind: ViolationKind::Collinearity,
                value: c_index,
                limit: params.d(),
            });
        }
        if let Some(floor) = params.e_norm() {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < floor {
                violations.push(Violation {
                    column,
                    kind: ViolationKind::NormTooSmall,
                    value: norm,
                    limit: floor,
                });
            }
        }
    }
    Ok(Verdict {
        member: violations.is_empty(),
        violations,
    })
}

/// CD of every non-intercept column on its peers within the model, as
/// `(column, cd)` pairs. Applies the two-column `q²` convention. `columns`
/// must be sorted, in range, and start with the intercept.
pub(crate) fn peer_cds(columns: &[usize], dataset: &Dataset) -> Result<Vec<(usize, f64)>> {
    let sub = dataset.submatrix(columns);
    let mut cds = Vec::with_capacity(columns.len().saturating_sub(1));
    for (pos, &column) in columns.iter().enumerate().skip(1) {
        let cd = if columns.len() == 2 {
            crate::indices::q_squared(&sub.column(pos))?
        } else {
            cd_of_regression(pos, &sub)?
        };
        cds.push((column, cd));
    }
    Ok(cds)
}

/// Worst-case index pair of a model over a dataset. The intercept-only model
/// has unit risk by convention.
pub fn risk_index(model: &ModelSubset, dataset: &Dataset) -> Result<RiskIndex> {
    model.check_against(dataset)?;
    if model.column_size() == 1 {
        return Ok(RiskIndex {
            max_inefficiency: 1.0,
            max_collinearity: 1.0,
        });
    }
    let sub = model.submatrix(dataset);
    let names: Vec<String> = model
        .names(dataset)
        .into_iter()
        .map(str::to_string)
        .collect();
    Ok(model_index_report(&sub, &names)?.risk)
}

/// How one model's risk pair compares with another's of the same column size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Accommodation {
    /// Componentwise ≤ with at least one strict inequality.
    Better,
    Worse,
    Equal,
    /// Crossed components: neither dominates.
    Incomparable,
}

/// Compare two models' risk pairs. Only defined within a column size: a
/// smaller model is structurally favoured, so cross-size comparison would be
/// meaningless.
pub fn better_accommodates(
    first: &RiskIndex,
    first_size: usize,
    second: &RiskIndex,
    second_size: usize,
) -> Result<Accommodation> {
    if first_size != second_size {
        return Err(Error::DifferentColumnSizes(first_size, second_size));
    }
    let le = first.max_inefficiency <= second.max_inefficiency
        && first.max_collinearity <= second.max_collinearity;
    let ge = first.max_inefficiency >= second.max_inefficiency
        && first.max_collinearity >= second.max_collinearity;
    Ok(match (le, ge) {
        (true, true) => Accommodation::Equal,
        (true, false) => Accommodation::Better,
        (false, true) => Accommodation::Worse,
        (false, false) => Accommodation::Incomparable,
    })
}

/// Pareto-optimal models among class members of one column size: those with
/// no peer whose risk pair dominates. Every input must already be a class
/// member at the given levels.
pub fn admissible_set(
    models: &[ModelSubset],
    dataset: &Dataset,
    params: &ControlParams,
) -> Result<Vec<ModelSubset>> {
    let Some(first) = models.first() else {
        return Ok(Vec::new());
    };
    let size = first.column_size();
    for m in models {
        if m.column_size() != size {
            return Err(Error::MixedColumnSizes(size, m.column_size()));
        }
        let verdict = in_class(m, dataset, params)?;
        if !verdict.member {
            return Err(Error::InvalidModel(format!(
                "model {:?} is not a class member at the given levels",
                m.columns()
            )));
        }
    }
    let risks: Vec<RiskIndex> = models
        .iter()
        .map(|m| risk_index(m, dataset))
        .collect::<Result<_>>()?;
    let mut admissible = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let dominated = risks.iter().enumerate().any(|(j, other)| {
            i != j
                && matches!(
                    better_accommodates(other, size, &risks[i], size),
                    Ok(Accommodation::Better)
                )
        });
        if !dominated {
            admissible.push(model.clone());
        }
    }
    admissible.sort();
    admissible.dedup();
    Ok(admissible)
}

/// A materialized model class: members with their risk pairs and structural
/// flags, sorted by column size then lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMember {
    pub model: ModelSubset,
    pub risk: RiskIndex,
    /// Pareto-optimal among members of the same column size.
    pub admissible: bool,
    /// No member of the class is a proper superset.
    pub maximal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionClass {
    pub members: Vec<ClassMember>,
}

impl SelectionClass {
    /// Annotate a list of member models with risk pairs, admissibility (per
    /// column size, within this class), and maximality (within this class).
    pub fn from_models(models: Vec<ModelSubset>, dataset: &Dataset) -> Result<SelectionClass> {
        let mut models = models;
        models.sort_by(|a, b| {
            a.column_size()
                .cmp(&b.column_size())
                .then_with(|| a.columns().cmp(b.columns()))
        });
        models.dedup();
        let risks: Vec<RiskIndex> = models
            .iter()
            .map(|m| risk_index(m, dataset))
            .collect::<Result<_>>()?;
        let mut members = Vec::with_capacity(models.len());
        for (i, model) in models.iter().enumerate() {
            let maximal = !models
                .iter()
                .any(|other| model.is_proper_subset_of(other));
            let dominated = models.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.column_size() == model.column_size()
                    && matches!(
                        better_accommodates(
                            &risks[j],
                            other.column_size(),
                            &risks[i],
                            model.column_size()
                        ),
                        Ok(Accommodation::Better)
                    )
            });
            members.push(ClassMember {
                model: model.clone(),
                risk: risks[i],
                admissible: !dominated,
                maximal,
            });
        }
        Ok(SelectionClass { members })
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelSubset> {
        self.members.iter().map(|m| &m.model)
    }

    /// Members no other member properly contains.
    pub fn maximal_members(&self) -> Vec<&ClassMember> {
        self.members.iter().filter(|m| m.maximal).collect()
    }

    pub fn contains_columns(&self, columns: &[usize]) -> bool {
        self.members.iter().any(|m| m.model.columns() == columns)
    }
}

/// Lexicographic enumeration of all column subsets of a given size that
/// include the intercept.
pub fn enumerate_models(
    total_columns: usize,
    column_size: usize,
) -> Result<impl Iterator<Item = ModelSubset>> {
    if column_size < 2 || column_size > total_columns {
        return Err(Error::SizeOutOfRange {
            column_size,
            total_columns,
        });
    }
    let picks = column_size - 1;
    let mut current: Vec<usize> = (1..=picks).collect();
    let mut exhausted = false;
    Ok(std::iter::from_fn(move || {
        if exhausted {
            return None;
        }
        let mut columns = Vec::with_capacity(picks + 1);
        columns.push(0);
        columns.extend_from_slice(&current);
        // Advance to the next combination of `picks` indices out of
        // 1..total_columns, or mark the stream exhausted.
        let mut i = picks;
        loop {
            if i == 0 {
                exhausted = true;
                break;
            }
            i -= 1;
            if current[i] < total_columns - (picks - i) {
                current[i] += 1;
                for j in (i + 1)..picks {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
        Some(ModelSubset {
            columns,
            parent_id: None,
        })
    }))
}

/// `C(n, k)` saturating at `u128::MAX`.
fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustively materialize the controlled class by testing every subset of
/// column size 2..=`max_column_size` (default: all sizes). Rank-deficient
/// subsets are skipped as non-members. Refuses enumerations larger than
/// `budget` (default [`DEFAULT_ENUMERATION_BUDGET`]).
pub fn brute_force_class(
    dataset: &Dataset,
    params: &ControlParams,
    max_column_size: Option<usize>,
    budget: Option<u128>,
) -> Result<SelectionClass> {
    let k = dataset.k();
    let top = max_column_size.unwrap_or(k).min(k);
    let budget = budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
    let mut required: u128 = 0;
    for j in 2..=top {
        required = required.saturating_add(binomial(k - 1, j - 1));
    }
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut members = Vec::new();
    for j in 2..=top {
        for mut model in enumerate_models(k, j)? {
            model.parent_id = Some(dataset.id().to_string());
            if in_class(&model, dataset, params)?.member {
                members.push(model);
            }
        }
    }
    SelectionClass::from_models(members, dataset)
}
