//! Python bindings: a `Dataset` class plus functions mirroring the library's
//! main operations (index tables, screening, model selection, scoring,
//! frequency studies, fixture generation). Structured reports cross the
//! boundary as plain dicts/lists produced from the same serialization the
//! CLI's JSON output uses, so both front-ends always agree.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde::Serialize;
use serde_json::Value;

use eemx_core::dataset::Dataset as CoreDataset;
use eemx_core::error::{Error, ErrorClass};
use eemx_core::fixtures::helmert_design;
use eemx_core::indices::model_index_report;
use eemx_core::model_space::{ControlParams, ModelSubset};
use eemx_core::numerics::Matrix;
use eemx_core::pipeline::{i_screen, run_pipeline, SelectionAlgorithm};
use eemx_core::scoring::{score_model, ScoreCriterion};
use eemx_core::simulate::{pcc_frequency_study, SimConfig};

fn core_err(e: Error) -> PyErr {
    match e.class() {
        ErrorClass::Usage => PyValueError::new_err(e.to_string()),
        ErrorClass::Data => match e {
            Error::Io { .. } => PyIOError::new_err(e.to_string()),
            other => PyValueError::new_err(other.to_string()),
        },
        ErrorClass::Numerical => PyArithmeticError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64()
                    .expect("JSON numbers are i64, u64, or f64")
                    .into_pyobject(py)?
                    .into_any()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report_to_py<'py, T: Serialize>(py: Python<'py>, report: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn parse_algorithm(name: &str) -> PyResult<SelectionAlgorithm> {
    match name {
        "vi" => Ok(SelectionAlgorithm::Vi),
        "vr" => Ok(SelectionAlgorithm::Vr),
        "brute" => Ok(SelectionAlgorithm::Brute),
        other => Err(PyValueError::new_err(format!(
            "algo must be \"vi\", \"vr\", or \"brute\", got {other:?}"
        ))),
    }
}

fn parse_criterion(name: &str) -> PyResult<ScoreCriterion> {
    match name {
        "aic" => Ok(ScoreCriterion::Aic),
        "bic" => Ok(ScoreCriterion::Bic),
        "adjr2" => Ok(ScoreCriterion::AdjustedCd),
        "rse" => Ok(ScoreCriterion::Rse),
        other => Err(PyValueError::new_err(format!(
            "criterion must be \"aic\", \"bic\", \"adjr2\", or \"rse\", got {other:?}"
        ))),
    }
}

fn build_params(
    cq: f64,
    dr: f64,
    a: f64,
    b: f64,
    e_norm: Option<f64>,
) -> PyResult<ControlParams> {
    let mut params = ControlParams::new(cq, dr)
        .and_then(|p| p.with_a(a))
        .and_then(|p| p.with_b(b))
        .map_err(core_err)?;
    if let Some(e_norm) = e_norm {
        params = params.with_e_norm(e_norm).map_err(core_err)?;
    }
    Ok(params)
}

/// A numeric dataset: named columns, an automatic all-ones intercept, and an
/// optional response vector.
#[pyclass(frozen, module = "eemx_py")]
struct Dataset {
    inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    /// Load a CSV with a header row and numeric cells; `response` names a
    /// column to set aside as the response.
    #[staticmethod]
    #[pyo3(signature = (path, response=None))]
    fn load_csv(path: &str, response: Option<&str>) -> PyResult<Dataset> {
        let inner =
            CoreDataset::load_csv(std::path::Path::new(path), response).map_err(core_err)?;
        Ok(Dataset { inner })
    }

    /// Build a dataset from named columns (the intercept is added
    /// automatically). `response` is an optional `(name, values)` pair.
    #[staticmethod]
    #[pyo3(signature = (names, columns, response=None))]
    fn from_columns(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        response: Option<(String, Vec<f64>)>,
    ) -> PyResult<Dataset> {
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let response_ref = response.as_ref().map(|(n, v)| (n.as_str(), v.clone()));
        let inner =
            CoreDataset::from_parts(&name_refs, &columns, response_ref).map_err(core_err)?;
        Ok(Dataset { inner })
    }

    /// All design column names, intercept first.
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    /// Number of rows.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of design columns including the intercept.
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    /// Content hash identifying the data.
    #[getter]
    fn id(&self) -> String {
        self.inner.id().to_string()
    }

    #[getter]
    fn response_name(&self) -> Option<String> {
        self.inner.response_name().map(str::to_string)
    }

    /// Values of one design column, by name.
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let index = self.inner.index_of(name).map_err(core_err)?;
        Ok(self.inner.design().column(index))
    }

    /// The response values, if a response column was designated.
    fn response(&self) -> Option<Vec<f64>> {
        self.inner.response().map(<[f64]>::to_vec)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(id={:?}, n={}, k={}, response={:?})",
            &self.inner.id()[..12.min(self.inner.id().len())],
            self.inner.n(),
            self.inner.k(),
            self.inner.response_name(),
        )
    }
}

/// Per-variable index table of the dataset's full design, as a dict.
#[pyfunction]
fn indices<'py>(py: Python<'py>, dataset: PyRef<'_, Dataset>) -> PyResult<Bound<'py, PyAny>> {
    let report =
        model_index_report(dataset.inner.design(), dataset.inner.names()).map_err(core_err)?;
    report_to_py(py, &report)
}

/// Drop variables with squared intercept alignment above `cq`; returns the
/// survivors and the dropped columns with their index values.
#[pyfunction]
#[pyo3(signature = (dataset, cq=0.9))]
fn screen<'py>(
    py: Python<'py>,
    dataset: PyRef<'_, Dataset>,
    cq: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let outcome = i_screen(&dataset.inner, cq).map_err(core_err)?;
    report_to_py(py, &outcome)
}

/// Run screen → model search → annotation (→ scoring, when the dataset has
/// a response); returns the full run report as a dict.
#[pyfunction]
#[pyo3(signature = (dataset, algo="vi", cq=0.9, dr=0.9, a=0.9, b=0.4, e_norm=None,
                    criterion="adjr2", max_enum=None))]
#[allow(clippy::too_many_arguments)]
fn select<'py>(
    py: Python<'py>,
    dataset: PyRef<'_, Dataset>,
    algo: &str,
    cq: f64,
    dr: f64,
    a: f64,
    b: f64,
    e_norm: Option<f64>,
    criterion: &str,
    max_enum: Option<u128>,
) -> PyResult<Bound<'py, PyAny>> {
    let params = build_params(cq, dr, a, b, e_norm)?;
    let report = run_pipeline(
        &dataset.inner,
        &params,
        parse_algorithm(algo)?,
        parse_criterion(criterion)?,
        max_enum,
    )
    .map_err(core_err)?;
    report_to_py(py, &report)
}

/// Fit one model (given as a list of non-intercept column names) against the
/// dataset's response and return its score summary.
#[pyfunction]
fn score<'py>(
    py: Python<'py>,
    dataset: PyRef<'_, Dataset>,
    model: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let name_refs: Vec<&str> = model.iter().map(String::as_str).collect();
    let subset = ModelSubset::from_names(&name_refs, &dataset.inner).map_err(core_err)?;
    let model_score = score_model(&subset, &dataset.inner).map_err(core_err)?;
    report_to_py(py, &model_score)
}

/// Monte Carlo frequency study: how often each variable subset forms the
/// leading-component class of data drawn with correlation matrix `phi`.
#[pyfunction]
#[pyo3(signature = (phi, n=50, trials=1000, a=0.9, b=0.4, seed=0))]
fn simulate<'py>(
    py: Python<'py>,
    phi: Vec<Vec<f64>>,
    n: usize,
    trials: u64,
    a: f64,
    b: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    if phi.is_empty() || phi.iter().any(|row| row.len() != phi.len()) {
        return Err(PyValueError::new_err("phi must be a non-empty square matrix"));
    }
    let config =
        SimConfig::new(Matrix::from_rows(&phi), n, trials, a, b, seed).map_err(core_err)?;
    let table = pcc_frequency_study(&config).map_err(core_err)?;
    report_to_py(py, &table)
}

/// Columns of an orthogonal design (intercept first): zero-mean, mutually
/// orthogonal contrasts where every variable has the ideal combined index.
#[pyfunction]
#[pyo3(signature = (n, k, scales=None))]
fn helmert(n: usize, k: usize, scales: Option<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let scales = scales.unwrap_or_else(|| vec![1.0; k]);
    let design = helmert_design(n, k, &scales).map_err(core_err)?;
    Ok((0..design.cols()).map(|j| design.column(j)).collect())
}

#[pymodule]
fn eemx_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(indices, m)?)?;
    m.add_function(wrap_pyfunction!(screen, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(helmert, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
