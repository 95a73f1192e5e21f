//! Collinearity-aware regression diagnostics and submodel pre-selection.
//!
//! The crate measures how much of a regression design's sampling variance is
//! self-inflicted — inflated by column means sitting far from zero and by
//! near-dependence between columns — and uses those measurements to screen
//! the space of candidate submodels *before* any response data is consulted.
//!
//! The pieces, bottom-up:
//!
//! * [`numerics`] — dense matrix kernels: pivoted-Cholesky least squares,
//!   cyclic-Jacobi symmetric eigendecomposition, correlation matrices.
//! * [`indices`] — per-column inefficiency/collinearity diagnostics and the
//!   standard-error identities that motivate them.
//! * [`dataset`] — named-column datasets, CSV ingestion, intercept handling.
//! * [`model_space`] — column subsets as models, admissibility verdicts, and
//!   partial-order structure over candidate models.
//! * [`vi_select`] — depth-first pre-selection driven by per-step variance
//!   inflation bounds.
//! * [`vr_select`] — eigenstructure-driven pre-selection: correlation-matrix
//!   classes spawn candidates, which are reduced until admissible.
//! * [`scoring`] — response-aware scoring (fit quality, information criteria)
//!   of the pre-selected models.
//! * [`simulate`] — Monte Carlo study of how stable the eigenstructure
//!   classes are across resampled designs.
//! * [`fixtures`] — synthetic designs with known diagnostics, for tests and
//!   demos.
//! * [`pipeline`] — one-call orchestration producing serializable run
//!   reports for the command-line interface and language bindings.

pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod indices;
pub mod model_space;
pub mod numerics;
pub mod pipeline;
pub mod scoring;
mod serde_util;
pub mod simulate;
pub mod vi_select;
pub mod vr_select;

pub use dataset::Dataset;
pub use error::{Error, ErrorClass, Result};
pub use model_space::{ControlParams, ModelSubset, SelectionClass};
pub use numerics::{ols_fit, sym_eigen, EigenDecomposition, Matrix, OlsFit};
pub use pipeline::{run_pipeline, RunReport, SelectionAlgorithm};
pub use scoring::{score_model, select_optimal, ModelScore, ScoreCriterion};
