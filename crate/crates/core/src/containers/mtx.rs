//! Matrix Market coordinate files.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::runtime::Runtime;

use super::sparse::DistributedSparseMatrix;
use super::tiling::Tiling;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MtxField {
    Real,
    Integer,
    Pattern,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parsed coordinate data with 0-based indices. Symmetric storage is already
/// expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMarket {
    pub field: MtxField,
    pub symmetry: MtxSymmetry,
    pub shape: (usize, usize),
    pub entries: Vec<(usize, usize, f64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: usize, text: &str) -> Result<(MtxField, MtxSymmetry)> {
    let words: Vec<String> = text.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(parse_err(
            line,
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if words[1] != "matrix" || words[2] != "coordinate" {
        return Err(parse_err(
            line,
            format!("unsupported format `{} {}`", words[1], words[2]),
        ));
    }
    let field = match words[3].as_str() {
        "real" | "double" => MtxField::Real,
        "integer" => MtxField::Integer,
        "pattern" => MtxField::Pattern,
        other => return Err(parse_err(line, format!("unsupported field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        "skew-symmetric" => MtxSymmetry::SkewSymmetric,
        other => return Err(parse_err(line, format!("unsupported symmetry `{other}`"))),
    };
    Ok((field, symmetry))
}

fn number<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{token}`")))
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (field, symmetry) = parse_header(first_no, &first?)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut stored = 0usize;
    let mut last_line = first_no;
    for (no, text) in lines {
        let text = text?;
        last_line = no;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let Some((m, k, nnz)) = size else {
            let dims = (
                number(no, tokens.next(), "row count")?,
                number(no, tokens.next(), "column count")?,
                number(no, tokens.next(), "entry count")?,
            );
            if tokens.next().is_some() {
                return Err(parse_err(no, "trailing tokens after size line"));
            }
            if symmetry != MtxSymmetry::General && dims.0 != dims.1 {
                return Err(parse_err(no, "symmetric matrix must be square"));
            }
            size = Some(dims);
            entries.reserve(dims.2);
            continue;
        };
        if stored == nnz {
            return Err(parse_err(no, format!("more than {nnz} entries")));
        }
        let row: usize = number(no, tokens.next(), "row index")?;
        let col: usize = number(no, tokens.next(), "column index")?;
        if row == 0 || col == 0 || row > m || col > k {
            return Err(parse_err(no, format!("entry ({row}, {col}) outside {m}x{k}")));
        }
        let value = match field {
            MtxField::Pattern => 1.0,
            MtxField::Integer => number::<i64>(no, tokens.next(), "value")? as f64,
            MtxField::Real => number::<f64>(no, tokens.next(), "value")?,
        };
        if tokens.next().is_some() {
            return Err(parse_err(no, "trailing tokens after entry"));
        }
        let (r, c) = (row - 1, col - 1);
        entries.push((r, c, value));
        match symmetry {
            MtxSymmetry::Symmetric if r != c => entries.push((c, r, value)),
            MtxSymmetry::SkewSymmetric if r != c => entries.push((c, r, -value)),
            _ => {}
        }
        stored += 1;
    }
    let (m, k, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if stored != nnz {
        return Err(parse_err(last_line, format!("expected {nnz} entries, found {stored}")));
    }
    Ok(MatrixMarket {
        field,
        symmetry,
        shape: (m, k),
        entries,
    })
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixMarket> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

pub fn load_matrix_market(
    runtime: &Runtime,
    path: impl AsRef<Path>,
    tiling: &Tiling,
) -> Result<DistributedSparseMatrix<f64>> {
    let mm = read_matrix_market(path)?;
    DistributedSparseMatrix::from_tuples(runtime, mm.shape, mm.entries, tiling)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MatrixMarket> {
        parse_matrix_market(text.as_bytes())
    }

    #[test]
    fn symmetric_entries_are_mirrored() {
        let mm = parse("%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 2\n2 1 4.5\n3 3 1\n").unwrap();
        assert_eq!(mm.entries, vec![(1, 0, 4.5), (0, 1, 4.5), (2, 2, 1.0)]);
    }

    #[test]
    fn pattern_and_integer_fields() {
        let p = parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n").unwrap();
        assert_eq!(p.entries, vec![(0, 1, 1.0)]);
        let i = parse("%%MatrixMarket matrix coordinate integer general\n2 2 1\n2 2 -7\n").unwrap();
        assert_eq!(i.entries, vec![(1, 1, -7.0)]);
    }

    #[test]
    fn empty_matrix() {
        let mm = parse("%%MatrixMarket matrix coordinate real general\n4 5 0\n").unwrap();
        assert_eq!(mm.shape, (4, 5));
        assert!(mm.entries.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("%%MatrixMarket matrix array real general\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 x\n", 3),
            (
                "%%MatrixMarket matrix coordinate real general\n% only\n2 2 2\n1 1 1\n",
                4,
            ),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
