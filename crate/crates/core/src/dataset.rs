//! Named regression datasets: a design matrix with a mandatory all-ones
//! intercept column, an optional response vector, and a content hash used to
//! tie derived artifacts (model subsets, reports) back to their source.
//!
//! CSV ingestion is strict by design: every cell must be numeric, rows must
//! be rectangular, headers must be unique, and missing values are rejected
//! rather than imputed. The intercept is never read from the file — it is
//! prepended on load under the reserved name `_const`.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Reserved name of the auto-prepended intercept column.
pub const INTERCEPT_NAME: &str = "_const";

/// Index of the intercept column within every [`Dataset`] design.
pub const INTERCEPT_INDEX: usize = 0;

/// A named N×K design with column 0 the intercept, plus an optional response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    names: Vec<String>,
    design: Matrix,
    response: Option<Vec<f64>>,
    response_name: Option<String>,
    id: String,
}

impl Dataset {
    /// Assemble a dataset from raw columns (intercept *not* included — it is
    /// prepended here). `response` is kept out of the design.
    pub fn from_parts(
        names: &[&str],
        columns: &[Vec<f64>],
        response: Option<(&str, Vec<f64>)>,
    ) -> Result<Dataset> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::ParseError {
                row: 0,
                detail: "no data columns".into(),
            });
        }
        let n = columns[0].len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::RaggedRows {
                    row: 0,
                    got: col.len(),
                    expected: n,
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonNumericCell {
                    row: col.iter().position(|v| !v.is_finite()).unwrap() + 1,
                    column: j + 1,
                    name: names[j].to_string(),
                    cell: "non-finite".into(),
                });
            }
        }
        if n == 0 {
            return Err(Error::ParseError {
                row: 0,
                detail: "no data rows".into(),
            });
        }
        let mut all_names = vec![INTERCEPT_NAME.to_string()];
        for name in names {
            if all_names.iter().any(|existing| existing == name) {
                return Err(Error::DuplicateHeader {
                    name: name.to_string(),
                });
            }
            all_names.push(name.to_string());
        }
        let (response_name, response) = match response {
            Some((name, values)) => {
                if values.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "response has {} values for {} rows",
                        values.len(),
                        n
                    )));
                }
                (Some(name.to_string()), Some(values))
            }
            None => (None, None),
        };
        let mut with_intercept = vec![vec![1.0; n]];
        with_intercept.extend_from_slice(columns);
        let design = Matrix::from_columns(&with_intercept);
        let id = content_hash(&all_names, &design, response.as_deref(), response_name.as_deref());
        Ok(Dataset {
            names: all_names,
            design,
            response,
            response_name,
            id,
        })
    }

    /// Read a CSV file: first row is the header, every cell numeric, no
    /// missing values. The column named `response_column` (if given) is
    /// removed from the design and stored as the response.
    pub fn load_csv(path: &Path, response_column: Option<&str>) -> Result<Dataset> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut dataset = Self::parse_csv_bytes(&bytes, response_column)?;
        // Identify file-loaded datasets by their content bytes, so that the
        // same file always yields the same id regardless of parse layout.
        dataset.id = hex_digest(&bytes);
        Ok(dataset)
    }

    /// Parse CSV content from memory (used by `load_csv` and by bindings that
    /// receive file contents rather than paths).
    pub fn parse_csv_bytes(bytes: &[u8], response_column: Option<&str>) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(bytes);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::ParseError {
                row: 1,
                detail: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() {
            return Err(Error::ParseError {
                row: 1,
                detail: "empty header row".into(),
            });
        }
        for (j, name) in headers.iter().enumerate() {
            if name == INTERCEPT_NAME
                || headers[..j].iter().any(|earlier| earlier == name)
            {
                return Err(Error::DuplicateHeader { name: name.clone() });
            }
        }

        let expected = headers.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); expected];
        for (i, record) in reader.records().enumerate() {
            let row = i + 2; // 1-based, after the header row
            let record = record.map_err(|e| Error::ParseError {
                row,
                detail: e.to_string(),
            })?;
            if record.len() != expected {
                return Err(Error::RaggedRows {
                    row,
                    got: record.len(),
                    expected,
                });
            }
            for (j, cell) in record.iter().enumerate() {
                let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                    row,
                    column: j + 1,
                    name: headers[j].clone(),
                    cell: cell.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(Error::NonNumericCell {
                        row,
                        column: j + 1,
                        name: headers[j].clone(),
                        cell: cell.to_string(),
                    });
                }
                columns[j].push(value);
            }
        }
        if columns[0].is_empty() {
            return Err(Error::ParseError {
                row: 2,
                detail: "no data rows after the header".into(),
            });
        }

        let response_slot = match response_column {
            Some(wanted) => Some(
                headers
                    .iter()
                    .position(|h| h == wanted)
                    .ok_or_else(|| Error::UnknownColumn {
                        name: wanted.to_string(),
                    })?,
            ),
            None => None,
        };
        let mut names: Vec<&str> = Vec::new();
        let mut design_cols: Vec<Vec<f64>> = Vec::new();
        let mut response = None;
        for (j, col) in columns.into_iter().enumerate() {
            if Some(j) == response_slot {
                response = Some((headers[j].as_str(), col));
            } else {
                names.push(&headers[j]);
                design_cols.push(col);
            }
        }
        Dataset::from_parts(&names, &design_cols, response)
    }

    /// Number of rows N.
    pub fn n(&self) -> usize {
        self.design.rows()
    }

    /// Number of design columns K, intercept included.
    pub fn k(&self) -> usize {
        self.design.cols()
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_of(&self, column: usize) -> &str {
        &self.names[column]
    }

    /// Dataset column index of a named column.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn {
                name: name.to_string(),
            })
    }

    pub fn response(&self) -> Option<&[f64]> {
        self.response.as_deref()
    }

    pub fn response_name(&self) -> Option<&str> {
        self.response_name.as_deref()
    }

    /// Content hash identifying this dataset.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The design restricted to the given columns, in the given order.
    pub fn submatrix(&self, columns: &[usize]) -> Matrix {
        self.design.select_columns(columns)
    }

    /// All non-intercept column indices, ascending.
    pub fn variable_indices(&self) -> Vec<usize> {
        (1..self.k()).collect()
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of an in-memory dataset: header line plus little-endian row bytes.
fn content_hash(
    names: &[String],
    design: &Matrix,
    response: Option<&[f64]>,
    response_name: Option<&str>,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(names.join(",").as_bytes());
    hasher.update([0u8]);
    if let Some(name) = response_name {
        hasher.update(name.as_bytes());
    }
    hasher.update([0u8]);
    for i in 0..design.rows() {
        for v in design.row(i) {
            hasher.update(v.to_le_bytes());
        }
        if let Some(y) = response {
            hasher.update(y[i].to_le_bytes());
        }
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_small_csv_and_prepends_intercept() {
        let f = write_temp("a,b\n1,2\n3,4\n5,6\n");
        let d = Dataset::load_csv(f.path(), None).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.k(), 3);
        assert_eq!(d.names(), &["_const", "a", "b"]);
        assert_eq!(d.design().column(0), vec![1.0, 1.0, 1.0]);
        assert_eq!(d.design().column(2), vec![2.0, 4.0, 6.0]);
        assert!(d.response().is_none());
    }

    #[test]
    fn response_column_is_split_out() {
        let f = write_temp("y,a\n1,2\n3,4\n5,6\n");
        let d = Dataset::load_csv(f.path(), Some("y")).unwrap();
        assert_eq!(d.k(), 2);
        assert_eq!(d.response(), Some(&[1.0, 3.0, 5.0][..]));
        assert_eq!(d.response_name(), Some("y"));
        assert_eq!(d.names(), &["_const", "a"]);
    }

    #[test]
    fn missing_response_column_is_reported() {
        let f = write_temp("a,b\n1,2\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), Some("nope")),
            Err(Error::UnknownColumn { .. })
        ));
    }

    #[test]
    fn blank_cell_is_a_named_non_numeric_error() {
        let f = write_temp("a,b\n1,\n3,4\n");
        match Dataset::load_csv(f.path(), None) {
            Err(Error::NonNumericCell { row, column, name, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, 2);
                assert_eq!(name, "b");
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_rejected() {
        let f = write_temp("a,b\n1,2\n3\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), None),
            Err(Error::RaggedRows { row: 3, got: 1, expected: 2 })
        ));
    }

    #[test]
    fn duplicate_and_reserved_headers_are_rejected() {
        let f = write_temp("a,a\n1,2\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), None),
            Err(Error::DuplicateHeader { .. })
        ));
        let f = write_temp("_const,b\n1,2\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), None),
            Err(Error::DuplicateHeader { .. })
        ));
    }

    #[test]
    fn same_file_hashes_identically() {
        let f = write_temp("a,b\n1,2\n3,4\n");
        let d1 = Dataset::load_csv(f.path(), None).unwrap();
        let d2 = Dataset::load_csv(f.path(), None).unwrap();
        assert_eq!(d1.id(), d2.id());
        assert_eq!(d1.id().len(), 64);
    }

    #[test]
    fn different_content_hashes_differently() {
        let f1 = write_temp("a,b\n1,2\n3,4\n");
        let f2 = write_temp("a,b\n1,2\n3,5\n");
        let d1 = Dataset::load_csv(f1.path(), None).unwrap();
        let d2 = Dataset::load_csv(f2.path(), None).unwrap();
        assert_ne!(d1.id(), d2.id());
    }

    #[test]
    fn from_parts_checks_shapes() {
        assert!(matches!(
            Dataset::from_parts(&["a"], &[vec![1.0], vec![2.0]], None),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Dataset::from_parts(&["a", "b"], &[vec![1.0, 2.0], vec![3.0]], None),
            Err(Error::RaggedRows { .. })
        ));
        let d = Dataset::from_parts(&["a"], &[vec![1.0, 2.0]], Some(("y", vec![5.0, 6.0])))
            .unwrap();
        assert_eq!(d.index_of("a").unwrap(), 1);
        assert_eq!(d.response(), Some(&[5.0, 6.0][..]));
    }
}
