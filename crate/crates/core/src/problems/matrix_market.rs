use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;

use super::{LinearOperator, ProblemError, QuadraticProblem, SparseSymmetric};

fn parse_err(line: usize, msg: impl Into<String>) -> ProblemError {
    ProblemError::Parse { line, msg: msg.into() }
}

/// Reads a `coordinate real symmetric` Matrix Market stream. Either triangle
/// may be stored, but each off-diagonal pair only once.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseSymmetric, ProblemError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("`{}` format is not supported; use coordinate", tokens[2])));
    }
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_err(1, format!("`{}` field is not supported; use real", tokens[3])));
    }
    if tokens[4] != "symmetric" {
        return Err(ProblemError::NotSymmetric);
    }

    let mut data = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((no, other)),
    });

    let (size_no, size_line) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size: Vec<usize> = size_line?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(size_no, format!("bad size token `{t}`"))))
        .collect::<Result<_, _>>()?;
    if size.len() != 3 {
        return Err(parse_err(size_no, "size line needs `rows cols nnz`"));
    }
    let (n, cols, nnz) = (size[0], size[1], size[2]);
    if n != cols || n == 0 {
        return Err(parse_err(size_no, format!("matrix must be square and nonempty, got {n}x{cols}")));
    }

    let mut entries = Vec::with_capacity(nnz);
    let mut seen = HashSet::with_capacity(nnz);
    for (no, line) in data {
        let line = line?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(parse_err(no, "entry needs `row col value`"));
        }
        let idx = |s: &str| -> Result<usize, ProblemError> {
            match s.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                _ => Err(parse_err(no, format!("index `{s}` outside 1..={n}"))),
            }
        };
        let (i, j) = (idx(t[0])?, idx(t[1])?);
        let v: f64 = t[2].parse().map_err(|_| parse_err(no, format!("bad value `{}`", t[2])))?;
        if !v.is_finite() {
            return Err(parse_err(no, "non-finite value"));
        }
        let key = (i.max(j), i.min(j));
        if !seen.insert(key) {
            return Err(parse_err(no, format!("duplicate entry for ({}, {})", key.0 + 1, key.1 + 1)));
        }
        entries.push((key.0, key.1, v));
    }
    if entries.len() != nnz {
        return Err(parse_err(size_no, format!("header declares {nnz} entries, found {}", entries.len())));
    }
    Ok(SparseSymmetric::from_triangle(n, &entries))
}

/// Loads a quadratic whose solution is `e`: `b = A·e`, `x₀ = 10·e`.
pub fn load_matrix_market(path: &Path) -> Result<QuadraticProblem, ProblemError> {
    let op = read_matrix_market(BufReader::new(File::open(path)?))?;
    let n = op.dim();
    let b = op.apply(&DVector::from_element(n, 1.0));
    let name = path.file_stem().map_or_else(|| "matrix".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(QuadraticProblem {
        hessian: Arc::new(op),
        b,
        x0: DVector::from_element(n, 10.0),
        name,
        spectrum_bounds: None,
    })
}

/// Writes the lower triangle of `op` with round-trip exact values.
pub fn write_matrix_market<W: Write>(writer: W, op: &dyn LinearOperator) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    let mut entries = op.lower_triplets();
    entries.sort_by_key(|&(i, j, _)| (j, i));
    let n = op.dim();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    w.flush()
}
