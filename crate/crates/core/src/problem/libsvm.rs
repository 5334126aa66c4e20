//! Sparse libsvm text format: `label idx:val idx:val ...` with 1-based,
//! strictly increasing indices. Labels `+1`/`1` map to 1, `-1`/`0` to 0.

use std::fs;
use std::path::Path;

use ndarray::Array1;

use super::dataset::{Dataset, Features, SparseRow};
use crate::error::{Error, Result};

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_libsvm(&text)
}

/// Parses libsvm text. Blank lines are skipped; every other line is one row.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("non-numeric label {label_tok:?}")))?;
        let label = if label == 1.0 {
            1.0
        } else if label == -1.0 || label == 0.0 {
            0.0
        } else {
            return Err(err(format!("label {label_tok:?} is not binary")));
        };

        let mut row = SparseRow::new();
        let mut last: usize = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:val, found {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("non-numeric index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("non-numeric value in {tok:?}")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based; found 0".into()));
            }
            if idx <= last {
                return Err(err(format!(
                    "index {idx} does not increase (previous {last})"
                )));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        dim = dim.max(last);
        rows.push(row);
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Dataset::new(Features::Sparse { dim, rows }, Array1::from(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_line_row() {
        let ds = parse_libsvm("1 1:0.5 3:2.0\n").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.features.to_dense().row(0), array![0.5, 0.0, 2.0]);
        assert_eq!(ds.labels[0], 1.0);
    }

    #[test]
    fn signed_labels() {
        let ds = parse_libsvm("+1 1:1\n-1 2:1\n0 1:3\n").unwrap();
        assert_eq!(ds.labels, array![1.0, 0.0, 0.0]);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("1 1:0.5\n1 0:1.0\n", 2),
            ("1 2:0.5 2:1.0\n", 1),
            ("1 3:0.5 1:1.0\n", 1),
            ("1 1:x\n", 1),
            ("abc 1:1\n", 1),
            ("1 1:1\n\n1 11\n", 3),
            ("3 1:1\n", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn unreadable_file() {
        assert!(matches!(
            load_libsvm("/definitely/not/here.svm"),
            Err(Error::Io(_))
        ));
    }
}
