//! Pre-trained word vectors in the plain text format: one token followed by
//! `dim` floats per line, no header.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::corpus::Vocabulary;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("embedding file contains no vectors")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Builds a table directly; every vector must have length `dim`.
    pub fn new(dim: usize, entries: HashMap<String, Vec<f64>>) -> Self {
        assert!(dim >= 1);
        assert!(entries.values().all(|v| v.len() == dim), "inconsistent vector length");
        Self { dim, entries }
    }

    /// Parses the text format. The dimensionality comes from the first
    /// non-blank line and every later line must match it, including lines
    /// dropped by `restrict_to`.
    pub fn read<R: BufRead>(reader: R, restrict_to: Option<&Vocabulary>) -> Result<Self, EmbeddingError> {
        let mut dim = None;
        let mut entries = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line =
                line.map_err(|e| EmbeddingError::Format { line: lineno, message: e.to_string() })?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| EmbeddingError::Format {
                        line: lineno,
                        message: format!("non-numeric field {f:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let expected = *dim.get_or_insert(values.len());
            if values.is_empty() {
                return Err(EmbeddingError::Format { line: lineno, message: "no vector values".into() });
            }
            if values.len() != expected {
                return Err(EmbeddingError::Format {
                    line: lineno,
                    message: format!("expected {expected} values, found {}", values.len()),
                });
            }
            if restrict_to.is_none_or(|v| v.contains(token)) {
                entries.insert(token.to_owned(), values);
            }
        }
        let dim = dim.ok_or(EmbeddingError::Empty)?;
        Ok(Self { dim, entries })
    }

    pub fn load(path: &Path, restrict_to: Option<&Vocabulary>) -> Result<Self, EmbeddingError> {
        let file = File::open(path)
            .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
        Self::read(BufReader::new(file), restrict_to)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact-match lookup; tokens are expected to be preprocessed already.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "a 1 0\nb 0 1\n";

    #[test]
    fn parses_two_rows() {
        let t = EmbeddingTable::read(TWO.as_bytes(), None).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lookup("a"), Some(&[1.0, 0.0][..]));
        assert_eq!(t.lookup("zzz"), None);
    }

    #[test]
    fn restriction_filters_membership_only() {
        let vocab = Vocabulary::from_tokens(vec!["a".into()], 1);
        let t = EmbeddingTable::read(TWO.as_bytes(), Some(&vocab)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup("a"), Some(&[1.0, 0.0][..]));
        assert_eq!(t.lookup("b"), None);
    }

    #[test]
    fn wrong_arity_reports_line() {
        let err = EmbeddingTable::read("a 1 0\nb 0 1 2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_numeric_field_is_rejected() {
        let err = EmbeddingTable::read("a 1 x\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 1, .. }));
    }

    #[test]
    fn restricted_rows_are_still_validated() {
        let vocab = Vocabulary::from_tokens(vec!["a".into()], 1);
        let err = EmbeddingTable::read("a 1 0\nb 0\n".as_bytes(), Some(&vocab)).unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 2, .. }));
    }

    #[test]
    fn parsed_values_equal_decimal_literals() {
        let t = EmbeddingTable::read("w 0.1 -2.5e-3 123.456\n".as_bytes(), None).unwrap();
        assert_eq!(t.lookup("w").unwrap(), &[0.1, -2.5e-3, 123.456]);
    }
}
