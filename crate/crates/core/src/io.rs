//! Covariance JSON documents and sample-stream readers.
//!
//! ```json
//! {"modes": 3, "ordering": "pq-interleaved", "normalization": "vacuum=1",
//!  "matrix": [[...], ...], "errors": [[...], ...], "meta": {"sigma_pump": 1.24}}
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, StateMeta};

pub const ORDERING: &str = "pq-interleaved";
pub const NORMALIZATION: &str = "vacuum=1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceDocument {
    pub modes: usize,
    pub ordering: String,
    pub normalization: String,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<StateMeta>,
}

/// A covariance matrix read from disk with its optional error matrix and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub cm: CovarianceMatrix,
    pub errors: Option<DMatrix<f64>>,
    pub meta: Option<StateMeta>,
}

impl StateFile {
    pub fn new(cm: CovarianceMatrix) -> Self {
        Self {
            cm,
            errors: None,
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: StateMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_document(&self) -> CovarianceDocument {
        CovarianceDocument {
            modes: self.cm.n_modes(),
            ordering: ORDERING.into(),
            normalization: NORMALIZATION.into(),
            matrix: self.cm.to_rows(),
            errors: self.errors.as_ref().map(|e| {
                (0..e.nrows())
                    .map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect())
                    .collect()
            }),
            meta: self.meta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("covariance document serializes")
    }
}

fn check_square(name: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    if rows.len() != dim {
        return Err(Error::Input(format!(
            "{} has {} rows, expected {} for the declared mode count",
            name,
            rows.len(),
            dim
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::Input(format!(
                "{}[{}] has {} entries, expected {}",
                name,
                i,
                r.len(),
                dim
            )));
        }
        if let Some(j) = r.iter().position(|x| !x.is_finite()) {
            return Err(Error::Input(format!("{}[{}][{}] is not finite", name, i, j)));
        }
    }
    Ok(())
}

impl TryFrom<CovarianceDocument> for StateFile {
    type Error = Error;

    fn try_from(doc: CovarianceDocument) -> Result<Self> {
        if doc.modes == 0 {
            return Err(Error::Input("modes must be at least 1".into()));
        }
        if doc.ordering != ORDERING {
            return Err(Error::Input(format!(
                "ordering must be \"{}\", got \"{}\"",
                ORDERING, doc.ordering
            )));
        }
        if doc.normalization != NORMALIZATION {
            return Err(Error::Input(format!(
                "normalization must be \"{}\", got \"{}\"",
                NORMALIZATION, doc.normalization
            )));
        }
        let dim = 2 * doc.modes;
        check_square("matrix", &doc.matrix, dim)?;
        let cm = CovarianceMatrix::from_rows(&doc.matrix)?;
        if !cm.is_symmetric() {
            let (i, j) = first_asymmetry(&doc.matrix);
            return Err(Error::Input(format!(
                "matrix is not symmetric: matrix[{}][{}] = {} but matrix[{}][{}] = {}",
                i, j, doc.matrix[i][j], j, i, doc.matrix[j][i]
            )));
        }
        let errors = match doc.errors {
            Some(rows) => {
                check_square("errors", &rows, dim)?;
                Some(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
            }
            None => None,
        };
        if let Some(meta) = &doc.meta {
            meta.validate()?;
        }
        Ok(StateFile {
            cm,
            errors,
            meta: doc.meta,
        })
    }
}

fn first_asymmetry(rows: &[Vec<f64>]) -> (usize, usize) {
    let n = rows.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            if (a - b).abs() > crate::gaussian::SYMMETRY_TOL * a.abs().max(1.0) {
                return (i, j);
            }
        }
    }
    (0, 0)
}

/// Parses and validates a covariance JSON document.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let doc: CovarianceDocument = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("malformed covariance JSON at line {}, column {}: {}", e.line(), e.column(), e)))?;
    StateFile::try_from(doc)
}

/// Whitespace- or comma-separated decimal samples, one or more per line.
pub fn parse_text_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| {
                Error::Input(format!("line {}: cannot parse \"{}\" as a number", line_no + 1, tok))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Little-endian IEEE-754 binary64 stream.
pub fn parse_f64le_samples(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Input(format!(
            "binary sample stream length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{pump_twin_triplet, TripletParams};

    #[test]
    fn document_round_trip_is_bitwise() {
        let cm = pump_twin_triplet(&TripletParams::new(0.5, 0.3).with_noise([0.1, 0.0, 0.02])).unwrap();
        let file = StateFile::new(cm.clone()).with_meta(StateMeta {
            sigma_pump: Some(1.24),
            label: "synthetic".into(),
            ..Default::default()
        });
        let back = parse_state(&file.to_json()).unwrap();
        assert_eq!(back.cm, cm);
        assert_eq!(back.meta.unwrap().sigma_pump, Some(1.24));
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0.5], [0, 1]]}"#,
            r#"{"modes": 1, "ordering": "qp", "normalization": "vacuum=1", "matrix": [[1, 0], [0, 1]]}"#,
            r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1/2", "matrix": [[1, 0], [0, 1]]}"#,
            r#"{"modes": 2, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0], [0, 1]]}"#,
            r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0], [0]]}"#,
            r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0], [0, 1]], "meta": {"sigma_pump": 0}}"#,
            r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0], [0, NaN]]}"#,
            r#"{"modes": 1, "#,
        ];
        for text in bad {
            assert!(matches!(parse_state(text), Err(Error::Input(_))), "{}", text);
        }
    }

    #[test]
    fn asymmetry_error_names_entry() {
        let text = r#"{"modes": 1, "ordering": "pq-interleaved", "normalization": "vacuum=1", "matrix": [[1, 0.5], [0, 1]]}"#;
        let msg = parse_state(text).unwrap_err().to_string();
        assert!(msg.contains("matrix[0][1]"), "{}", msg);
    }

    #[test]
    fn sample_readers() {
        assert_eq!(parse_text_samples("1.5 2\n-3,4e-1\n\n").unwrap(), vec![1.5, 2.0, -3.0, 0.4]);
        assert!(parse_text_samples("1 x").is_err());
        let bytes: Vec<u8> = [1.0f64, -2.5].iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(parse_f64le_samples(&bytes).unwrap(), vec![1.0, -2.5]);
        assert!(parse_f64le_samples(&bytes[..5]).is_err());
    }
}
