//! Matrix Market reader and writer (`coordinate` and `array`, real, general or
//! symmetric).
//!
//! Numbers are written in shortest round-trip form, so a write/read cycle
//! reproduces every `f64` exactly. Banded matrices are written as coordinate
//! files with a `%gave-storage banded <lower> <upper>` comment that the reader
//! uses to restore the storage kind.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::matrix::{Matrix, Storage};
use crate::error::{Error, Result};

const STORAGE_TAG: &str = "%gave-storage";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

struct Header {
    layout: Layout,
    symmetric: bool,
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<Header> {
    let lower = line.to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(path, 1, 1, "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`"));
    }
    let layout = match words[2] {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(path, 1, 22, format!("unsupported layout `{other}`"))),
    };
    if !matches!(words[3], "real" | "double" | "integer") {
        return Err(parse_err(path, 1, 1, format!("unsupported field `{}`", words[3])));
    }
    let symmetric = match words[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(path, 1, 1, format!("unsupported symmetry `{other}`"))),
    };
    Ok(Header { layout, symmetric })
}

/// Tokens of a data line, with 1-based columns for error reporting.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: (usize, &str)) -> Result<T> {
    tok.1
        .parse::<T>()
        .map_err(|_| parse_err(path, line, tok.0, format!("cannot parse `{}`", tok.1)))
}

/// Parses Matrix Market text. `path` only labels errors.
pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| parse_err(path, 1, 1, "empty file"))?;
    let header = parse_header(path, first)?;
    let mut storage_hint = None;
    let mut data_lines = Vec::new();
    for (no, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(STORAGE_TAG) {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() == 3 && parts[0] == "banded" {
                if let (Ok(l), Ok(u)) = (parts[1].parse::<usize>(), parts[2].parse::<usize>()) {
                    storage_hint = Some((l, u));
                }
            }
            continue;
        }
        if trimmed.starts_with('%') {
            continue;
        }
        data_lines.push((no, line));
    }
    let mut it = data_lines.into_iter();
    let (size_no, size_line) = it.next().ok_or_else(|| parse_err(path, 2, 1, "missing size line"))?;
    let size = tokens(size_line);
    let rows: usize;
    let cols: usize;
    let mut m = match header.layout {
        Layout::Coordinate => {
            if size.len() != 3 {
                return Err(parse_err(path, size_no, 1, "coordinate size line needs `rows cols entries`"));
            }
            rows = parse_num(path, size_no, size[0])?;
            cols = parse_num(path, size_no, size[1])?;
            let nnz: usize = parse_num(path, size_no, size[2])?;
            let mut m = match storage_hint {
                Some((l, u)) if rows == cols => Matrix::banded_zeros(rows, l, u),
                _ => Matrix::zeros(rows, cols),
            };
            let mut count = 0;
            for (no, line) in it {
                let t = tokens(line);
                if t.len() != 3 {
                    return Err(parse_err(path, no, 1, "entry line needs `row col value`"));
                }
                let i: usize = parse_num(path, no, t[0])?;
                let j: usize = parse_num(path, no, t[1])?;
                let v: f64 = parse_num(path, no, t[2])?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(path, no, t[0].0, format!("index ({i},{j}) out of range")));
                }
                if !v.is_finite() {
                    return Err(parse_err(path, no, t[2].0, "non-finite value"));
                }
                let (l, u) = m.storage_bandwidth();
                if j + l < i || j > i + u {
                    return Err(parse_err(path, no, t[0].0, format!("entry ({i},{j}) outside declared band")));
                }
                m.set(i - 1, j - 1, v);
                if header.symmetric && i != j {
                    m.set(j - 1, i - 1, v);
                }
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(path, size_no, size[2].0, format!("declared {nnz} entries, found {count}")));
            }
            m
        }
        Layout::Array => {
            if size.len() != 2 {
                return Err(parse_err(path, size_no, 1, "array size line needs `rows cols`"));
            }
            rows = parse_num(path, size_no, size[0])?;
            cols = parse_num(path, size_no, size[1])?;
            let mut values = Vec::with_capacity(rows * cols);
            for (no, line) in it {
                for tok in tokens(line) {
                    let v: f64 = parse_num(path, no, tok)?;
                    if !v.is_finite() {
                        return Err(parse_err(path, no, tok.0, "non-finite value"));
                    }
                    values.push((no, v));
                }
            }
            let expected = if header.symmetric { rows * (rows + 1) / 2 } else { rows * cols };
            if values.len() != expected {
                return Err(parse_err(path, size_no, 1, format!("expected {expected} values, found {}", values.len())));
            }
            let mut m = Matrix::zeros(rows, cols);
            let mut k = 0;
            for j in 0..cols {
                let start = if header.symmetric { j } else { 0 };
                for i in start..rows {
                    let v = values[k].1;
                    m.set(i, j, v);
                    if header.symmetric {
                        m.set(j, i, v);
                    }
                    k += 1;
                }
            }
            m
        }
    };
    if let (Some((l, u)), Storage::Dense) = (storage_hint, m.storage()) {
        if rows == cols {
            m = m.to_banded(l, u)?;
        }
    }
    Ok(m)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

/// Reads a vector stored as an `n × 1` matrix in either layout.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(parse_err(path, 2, 1, format!("expected a column vector, found {} columns", m.cols())));
    }
    Ok((0..m.rows()).map(|i| m.get(i, 0)).collect())
}

/// Coordinate-format text listing every stored entry (zeros inside a band included).
pub fn format_matrix(m: &Matrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    if let Storage::Banded { lower, upper } = m.storage() {
        let _ = writeln!(s, "{STORAGE_TAG} banded {lower} {upper}");
    }
    let entries: Vec<(usize, usize, f64)> = m.stored_entries().filter(|e| e.2 != 0.0).collect();
    let _ = writeln!(s, "{} {} {}", m.rows(), m.cols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    s
}

pub fn write_matrix(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_vector(v)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("test.mtx")
    }

    #[test]
    fn coordinate_and_array_parse() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 3\n1 1 1.5\n2 1 -2\n2 2 4e-3\n";
        let m = parse_matrix(text, p()).unwrap();
        assert_eq!(m.to_dense(), Matrix::from_rows(&[[1.5, 0.0], [-2.0, 4e-3]]));
        let arr = "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n";
        let m = parse_matrix(arr, p()).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    }

    #[test]
    fn symmetric_coordinate_mirrors() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 -1\n";
        let m = parse_matrix(text, p()).unwrap();
        assert_eq!(m.get(0, 1), -1.0);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n";
        match parse_matrix(text, p()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 5)),
            other => panic!("{other:?}"),
        }
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(matches!(parse_matrix(short, p()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("hello\n", p()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn banded_storage_survives_round_trip() {
        let a = Matrix::from_rows(&[[4.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 4.0]])
            .compact()
            .unwrap();
        let back = parse_matrix(&format_matrix(&a), p()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.storage(), Storage::Banded { lower: 1, upper: 1 });
    }

    proptest! {
        #[test]
        fn values_round_trip_exactly(v in proptest::collection::vec(-1e300f64..1e300, 1..30)) {
            let text = format_vector(&v);
            let m = parse_matrix(&text, p()).unwrap();
            let back: Vec<f64> = (0..m.rows()).map(|i| m.get(i, 0)).collect();
            prop_assert_eq!(back, v);
        }
    }
}
