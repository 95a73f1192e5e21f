//! `eemx` — batch front-end for regression design diagnostics: per-variable
//! inefficiency/collinearity indices, screening, controlled-submodel
//! selection, response scoring, and Monte Carlo frequency studies.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error
//! (rank or positive-definiteness failures). Relative input paths that do
//! not resolve from the working directory are retried under `EEMX_DATA_DIR`.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eemx_core::dataset::Dataset;
use eemx_core::error::{Error, ErrorClass};
use eemx_core::fixtures::{FixtureKind, FixtureSpec};
use eemx_core::indices::model_index_report;
use eemx_core::model_space::ControlParams;
use eemx_core::numerics::Matrix;
use eemx_core::pipeline::{i_screen, run_pipeline, SelectionAlgorithm};
use eemx_core::scoring::ScoreCriterion;
use eemx_core::simulate::{pcc_frequency_study, FrequencyTable, SimConfig};

#[derive(Parser)]
#[command(
    name = "eemx",
    version,
    about = "Regression design diagnostics: index tables, screening, \
             controlled model selection, scoring, and frequency studies"
)]
struct Cli {
    /// Output format: aligned text (4 significant digits) or JSON (full
    /// precision).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    /// Grow models one admissible variable at a time.
    Vi,
    /// Reduce from the full model guided by principal components.
    Vr,
    /// Exhaustive enumeration (exponential; bound it with --max-enum).
    Brute,
}

impl From<Algo> for SelectionAlgorithm {
    fn from(a: Algo) -> SelectionAlgorithm {
        match a {
            Algo::Vi => SelectionAlgorithm::Vi,
            Algo::Vr => SelectionAlgorithm::Vr,
            Algo::Brute => SelectionAlgorithm::Brute,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
    /// Adjusted coefficient of determination (default).
    Adjr2,
    /// Residual standard error.
    Rse,
}

impl From<CriterionArg> for ScoreCriterion {
    fn from(c: CriterionArg) -> ScoreCriterion {
        match c {
            CriterionArg::Aic => ScoreCriterion::Aic,
            CriterionArg::Bic => ScoreCriterion::Bic,
            CriterionArg::Adjr2 => ScoreCriterion::AdjustedCd,
            CriterionArg::Rse => ScoreCriterion::Rse,
        }
    }
}

/// Control thresholds, accepted in either parameterization: alignment and
/// determination ceilings (`--cq`, `--dr`, both default 0.9) or the
/// equivalent index levels (`--c`, `--d`, via level = 1/(1 − ceiling)).
/// Giving both forms is fine only when they agree.
#[derive(Args)]
struct ThresholdArgs {
    /// Intercept-alignment ceiling: keep variables with q² ≤ cq (0 ≤ cq < 1).
    #[arg(long)]
    cq: Option<f64>,
    /// Peer-determination ceiling: keep models with Ř² ≤ dr (0 ≤ dr < 1).
    #[arg(long)]
    dr: Option<f64>,
    /// Inefficiency level c ≥ 1, alternative form of --cq.
    #[arg(long)]
    c: Option<f64>,
    /// Collinearity level d ≥ 1, alternative form of --dr.
    #[arg(long)]
    d: Option<f64>,
    /// Component-identifier threshold for the reduction algorithm, in [0.9, 1).
    #[arg(long, default_value_t = 0.9)]
    a: f64,
    /// Variance-share cutoff for retained components, in (0, 1).
    #[arg(long, default_value_t = 0.4)]
    b: f64,
    /// Optional design-scale normalizer echoed into reports.
    #[arg(long)]
    e_norm: Option<f64>,
}

impl ThresholdArgs {
    fn params(&self) -> Result<ControlParams, CliError> {
        let c_q = resolve_threshold(self.cq, self.c, "cq", "c")?;
        let d_r = resolve_threshold(self.dr, self.d, "dr", "d")?;
        let mut params = ControlParams::new(c_q, d_r)?
            .with_a(self.a)?
            .with_b(self.b)?;
        if let Some(e_norm) = self.e_norm {
            params = params.with_e_norm(e_norm)?;
        }
        Ok(params)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-variable index table of a dataset's full design.
    Indices {
        /// CSV with a header row and numeric cells; an intercept column is
        /// added automatically.
        file: PathBuf,
        /// Column to set aside as the response (excluded from the design).
        #[arg(long)]
        response: Option<String>,
    },
    /// Drop variables too aligned with the intercept; print the survivors.
    Screen {
        file: PathBuf,
        #[arg(long)]
        response: Option<String>,
        /// Alignment ceiling: keep variables with q² ≤ cq (default 0.9).
        #[arg(long)]
        cq: Option<f64>,
        /// Inefficiency level c ≥ 1, alternative form of --cq.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Select the class of controlled submodels (screen, search, annotate;
    /// scores too when a response is named).
    Select {
        file: PathBuf,
        /// Search algorithm.
        #[arg(long, value_enum, default_value_t = Algo::Vi)]
        algo: Algo,
        #[arg(long)]
        response: Option<String>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        /// Ranking criterion applied when a response is present.
        #[arg(long, value_enum, default_value_t = CriterionArg::Adjr2)]
        criterion: CriterionArg,
        /// Budget on exhaustively enumerated models (brute force only).
        #[arg(long)]
        max_enum: Option<u128>,
    },
    /// Run the full pipeline and rank the selected models against a response.
    Score {
        file: PathBuf,
        /// Response column name.
        #[arg(long)]
        response: String,
        #[arg(long, value_enum, default_value_t = Algo::Vi)]
        algo: Algo,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long, value_enum, default_value_t = CriterionArg::Adjr2)]
        criterion: CriterionArg,
        #[arg(long)]
        max_enum: Option<u128>,
    },
    /// Monte Carlo frequency study of leading-component variable classes.
    Simulate {
        /// Square correlation matrix as a headerless numeric CSV.
        #[arg(long)]
        phi: PathBuf,
        /// Rows drawn per trial.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Component-identifier threshold, in [0.9, 1).
        #[arg(long, default_value_t = 0.9)]
        a: f64,
        /// Variance-share cutoff, in (0, 1).
        #[arg(long, default_value_t = 0.4)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write analytically known example designs as CSV files.
    Fixtures {
        /// Output directory, created if missing.
        #[arg(default_value = ".")]
        out_dir: PathBuf,
        /// Rows of each generated design.
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Design columns including the intercept (the CSVs omit the
        /// intercept itself; loaders re-add it).
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if informational {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::Indices { file, response } => {
            let dataset = load_dataset(&file, response.as_deref())?;
            let report = model_index_report(dataset.design(), dataset.names())?;
            emit(format, &report, || render::index_table(&report))
        }
        Command::Screen {
            file,
            response,
            cq,
            c,
        } => {
            let c_q = resolve_threshold(cq, c, "cq", "c")?;
            let dataset = load_dataset(&file, response.as_deref())?;
            let outcome = i_screen(&dataset, c_q)?;
            emit(format, &outcome, || {
                render::screen_outcome(&outcome, &dataset, c_q)
            })
        }
        Command::Select {
            file,
            algo,
            response,
            thresholds,
            criterion,
            max_enum,
        } => pipeline_command(
            &file,
            response.as_deref(),
            algo,
            &thresholds,
            criterion,
            max_enum,
            format,
        ),
        Command::Score {
            file,
            response,
            algo,
            thresholds,
            criterion,
            max_enum,
        } => pipeline_command(
            &file,
            Some(response.as_str()),
            algo,
            &thresholds,
            criterion,
            max_enum,
            format,
        ),
        Command::Simulate {
            phi,
            n,
            trials,
            a,
            b,
            seed,
        } => {
            let matrix = load_matrix(&phi)?;
            let config = SimConfig::new(matrix, n, trials, a, b, seed)?;
            let table = pcc_frequency_study(&config)?;
            let report = SimulateReport {
                n,
                trials,
                a,
                b,
                seed,
                table: &table,
            };
            emit(format, &report, || {
                render::frequency_table(&table, n, trials, a, b, seed)
            })
        }
        Command::Fixtures { out_dir, n, k } => fixtures_command(&out_dir, n, k, format),
    }
}

fn pipeline_command(
    file: &Path,
    response: Option<&str>,
    algo: Algo,
    thresholds: &ThresholdArgs,
    criterion: CriterionArg,
    max_enum: Option<u128>,
    format: Format,
) -> Result<(), CliError> {
    let dataset = load_dataset(file, response)?;
    let params = thresholds.params()?;
    let report = run_pipeline(&dataset, &params, algo.into(), criterion.into(), max_enum)?;
    emit(format, &report, || render::run_report(&report, &dataset))
}

#[derive(serde::Serialize)]
struct SimulateReport<'a> {
    n: usize,
    trials: u64,
    a: f64,
    b: f64,
    seed: u64,
    table: &'a FrequencyTable,
}

fn fixtures_command(out_dir: &Path, n: usize, k: usize, format: Format) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    for (kind, parameter, file_name) in [
        (FixtureKind::Helmert, 0.0, "helmert.csv"),
        (FixtureKind::DuplicatePair, 2.0, "duplicate_pair.csv"),
        (FixtureKind::NearCollinear, 0.05, "near_collinear.csv"),
    ] {
        let design = FixtureSpec::new(kind, n, k, parameter)?.build()?;
        let path = out_dir.join(file_name);
        write_design_csv(&path, &design)?;
        written.push(path.display().to_string());
    }
    // A ready-to-use `--phi` input: the correlation matrix of a standardized
    // orthogonal design is the identity.
    let identity_path = out_dir.join("identity_corr.csv");
    write_identity_csv(&identity_path, k - 1)?;
    written.push(identity_path.display().to_string());

    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "written": written }))
                .expect("path list serializes")
        ),
        Format::Text => {
            for path in &written {
                println!("wrote {path}");
            }
        }
    }
    Ok(())
}

fn emit<T: serde::Serialize>(
    format: Format,
    value: &T,
    text: impl FnOnce() -> String,
) -> Result<(), CliError> {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("reports serialize")
        ),
        Format::Text => print!("{}", text()),
    }
    Ok(())
}

/// Convert between the two threshold parameterizations; reject the pair
/// only when both are given and disagree.
fn resolve_threshold(
    ceiling: Option<f64>,
    level: Option<f64>,
    ceiling_flag: &str,
    level_flag: &str,
) -> Result<f64, CliError> {
    match (ceiling, level) {
        (None, None) => Ok(0.9),
        (Some(q), None) => Ok(q),
        (None, Some(l)) => {
            if l.is_nan() || l < 1.0 {
                return Err(CliError::Usage(format!(
                    "--{level_flag} must be at least 1, got {l}"
                )));
            }
            Ok(1.0 - 1.0 / l)
        }
        (Some(q), Some(l)) => {
            if !(0.0..1.0).contains(&q) {
                return Err(CliError::Usage(format!(
                    "--{ceiling_flag} must lie in [0, 1), got {q}"
                )));
            }
            let implied = 1.0 / (1.0 - q);
            if (implied - l).abs() > 1e-9 * implied.max(l).max(1.0) {
                return Err(CliError::Usage(format!(
                    "--{ceiling_flag} {q} is equivalent to --{level_flag} {implied}, but \
                     --{level_flag} {l} was given; supply one form or make them agree"
                )));
            }
            Ok(q)
        }
    }
}

/// Use the path as given when it exists; otherwise retry relative paths
/// under `EEMX_DATA_DIR` before letting the loader report the miss.
fn resolve_input(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if path.is_relative() {
        if let Ok(dir) = std::env::var("EEMX_DATA_DIR") {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load_dataset(path: &Path, response: Option<&str>) -> Result<Dataset, CliError> {
    Ok(Dataset::load_csv(&resolve_input(path), response)?)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => Error::ParseError {
            row: 0,
            detail: format!("{other:?}"),
        },
    }
}

/// Load a square numeric matrix from a headerless CSV.
fn load_matrix(path: &Path) -> Result<Matrix, CliError> {
    let resolved = resolve_input(path);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&resolved)
        .map_err(|e| csv_error(&resolved, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(&resolved, e))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                row: i + 1,
                column: j + 1,
                name: format!("column {}", j + 1),
                cell: cell.to_string(),
            })?;
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::RaggedRows {
                    row: i + 1,
                    got: row.len(),
                    expected: first.len(),
                }
                .into());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            row: 0,
            detail: "correlation file is empty".to_string(),
        }
        .into());
    }
    if rows.len() != rows[0].len() {
        return Err(Error::DimensionMismatch(format!(
            "correlation matrix must be square, got {}×{}",
            rows.len(),
            rows[0].len()
        ))
        .into());
    }
    Ok(Matrix::from_rows(&rows))
}

/// Write a design's non-intercept columns with generated headers; loading
/// the file back reconstructs the design because loaders prepend the
/// intercept.
fn write_design_csv(path: &Path, design: &Matrix) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = (2..=design.cols()).map(|j| format!("x{j}")).collect();
    writer
        .write_record(&headers)
        .map_err(|e| csv_error(path, e))?;
    for i in 0..design.rows() {
        let row: Vec<String> = (1..design.cols())
            .map(|j| design.get(i, j).to_string())
            .collect();
        writer.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}

fn write_identity_csv(path: &Path, size: usize) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for i in 0..size {
        let row: Vec<String> = (0..size)
            .map(|j| if i == j { "1" } else { "0" }.to_string())
            .collect();
        writer.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}
