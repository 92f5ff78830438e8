//! Matrix Market I/O: `coordinate real general|symmetric` for matrices and
//! `array real general` for dense vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    /// Only the lower triangle is written; the reader mirrors it.
    Symmetric,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("matrix market line {line}: {msg}"))
}

/// Reads the header and returns the banner tokens lowercased.
fn banner(line: &str) -> Result<Vec<String>> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
    if toks.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "missing %%MatrixMarket banner"));
    }
    if toks.len() != 5 || toks[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    Ok(toks)
}

/// Iterator over the data lines (skips comments and blank lines), with line numbers.
fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('%')
            }
            Err(_) => true,
        })
}

pub fn read_matrix_market_from<R: Read>(reader: R) -> Result<CsrMatrix> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let toks = banner(&first)?;
    if toks[2] != "coordinate" {
        return Err(parse_err(1, "only the coordinate format is supported for matrices"));
    }
    if toks[3] != "real" && toks[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field `{}`", toks[3])));
    }
    let symmetric = match toks[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return Err(parse_err(1, format!("unsupported symmetry `{s}`"))),
    };

    let mut lines = data_lines(reader);
    let (ln, size) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let size = size.map_err(|e| Error::Parse(e.to_string()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, "bad size line")))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(parse_err(ln, "size line needs `rows cols nnz`"));
    }
    let (m, n, nnz) = (dims[0], dims[1], dims[2]);

    let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0;
    for (ln, line) in lines {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let mut it = line.split_whitespace();
        let i: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "bad row index"))?;
        let j: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "bad column index"))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "bad value"))?;
        if i == 0 || j == 0 || i > m || j > n {
            return Err(parse_err(ln, format!("index ({i}, {j}) outside {m}x{n}")));
        }
        trip.push((i - 1, j - 1, v));
        if symmetric && i != j {
            trip.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse(format!(
            "matrix market: header announces {nnz} entries, found {seen}"
        )));
    }
    CsrMatrix::from_triplets(m, n, &trip)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_market_from(f)
}

pub fn write_matrix_market_to<W: Write>(
    a: &CsrMatrix,
    sym: MmSymmetry,
    mut w: W,
) -> std::io::Result<()> {
    let kind = match sym {
        MmSymmetry::General => "general",
        MmSymmetry::Symmetric => "symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let keep = |i: usize, j: usize| sym == MmSymmetry::General || j <= i;
    let count = a.triplets().filter(|&(i, j, _)| keep(i, j)).count();
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), count)?;
    for (i, j, v) in a.triplets().filter(|&(i, j, _)| keep(i, j)) {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()
}

pub fn write_matrix_market(a: &CsrMatrix, sym: MmSymmetry, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix_market_to(a, sym, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn read_vector_from<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let toks = banner(&first)?;
    if toks[2] != "array" {
        return Err(parse_err(1, "vectors use the array format"));
    }
    let mut lines = data_lines(reader);
    let (ln, size) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let size = size.map_err(|e| Error::Parse(e.to_string()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, "bad size line")))
        .collect::<Result<_>>()?;
    if dims.len() != 2 || dims[1] != 1 {
        return Err(parse_err(ln, "vector size line must be `len 1`"));
    }
    let mut out = Vec::with_capacity(dims[0]);
    for (ln, line) in lines {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| parse_err(ln, "bad value"))?;
        out.push(v);
    }
    if out.len() != dims[0] {
        return Err(Error::Parse(format!(
            "matrix market: header announces {} values, found {}",
            dims[0],
            out.len()
        )));
    }
    Ok(out)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_vector_from(f)
}

pub fn write_vector_to<W: Write>(v: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    w.flush()
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_vector_to(v, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}
