//! Matrix Market (`coordinate` / `array`, `general` / `symmetric`) reading and
//! writing for real matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, LinearOperator, Operator, TridiagonalOperator};
use crate::scalar::Scalar;
use crate::system::StateSpaceModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

/// Parsed matrix as a list of (0-based) entries, symmetric halves expanded.
#[derive(Clone, Debug)]
pub struct MmMatrix {
    pub rows: usize,
    pub cols: usize,
    pub format: MmFormat,
    pub entries: Vec<(usize, usize, f64)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl MmMatrix {
    pub fn to_dense<T: Scalar>(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = T::lit(v);
        }
        m
    }

    fn is_tridiagonal(&self) -> bool {
        self.rows == self.cols && self.entries.iter().all(|&(i, j, _)| i.abs_diff(j) <= 1)
    }

    /// Coordinate files with a tridiagonal pattern become a tridiagonal
    /// operator; everything else is dense.
    pub fn to_operator<T: Scalar>(&self) -> Result<Operator<T>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        if self.format == MmFormat::Coordinate && n >= 3 && self.is_tridiagonal() {
            let (mut lo, mut d, mut up) = (vec![T::zero(); n - 1], vec![T::zero(); n], vec![T::zero(); n - 1]);
            for &(i, j, v) in &self.entries {
                let v = T::lit(v);
                match j as isize - i as isize {
                    0 => d[i] += v,
                    -1 => lo[j] += v,
                    _ => up[i] += v,
                }
            }
            return Ok(Operator::Tridiagonal(TridiagonalOperator::new(lo, d, up)?));
        }
        Ok(Operator::Dense(DenseOperator::new(self.to_dense())))
    }
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    })
}

fn parse(text: &str) -> Result<MmMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(perr(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>' header"));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        f => return Err(perr(1, format!("unsupported format '{f}'"))),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(perr(1, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return Err(perr(1, format!("unsupported symmetry '{s}'"))),
    };
    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = data.next().ok_or_else(|| perr(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(size_line, format!("bad size entry '{t}'"))))
        .collect::<Result<_>>()?;
    let expected_dims = if format == MmFormat::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(perr(size_line, format!("expected {expected_dims} size entries")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(perr(size_line, "zero dimension"));
    }
    if symmetric && rows != cols {
        return Err(perr(size_line, "symmetric matrix must be square"));
    }
    let value = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| perr(line, format!("bad value '{t}'")))?;
        if !v.is_finite() {
            return Err(perr(line, "non-finite value"));
        }
        Ok(v)
    };
    let mut entries = Vec::new();
    let mut push = |i: usize, j: usize, v: f64| {
        entries.push((i, j, v));
        if symmetric && i != j {
            entries.push((j, i, v));
        }
    };
    match format {
        MmFormat::Coordinate => {
            let nnz = dims[2];
            let mut count = 0;
            for (ln, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(perr(ln, "expected 'row col value'"));
                }
                let i: usize = t[0].parse().map_err(|_| perr(ln, format!("bad row index '{}'", t[0])))?;
                let j: usize = t[1].parse().map_err(|_| perr(ln, format!("bad column index '{}'", t[1])))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(perr(ln, format!("index ({i}, {j}) out of range")));
                }
                if symmetric && j > i {
                    return Err(perr(ln, "symmetric file must list the lower triangle only"));
                }
                push(i - 1, j - 1, value(ln, t[2])?);
                count += 1;
            }
            if count != nnz {
                return Err(perr(size_line, format!("header announces {nnz} entries, found {count}")));
            }
        }
        MmFormat::Array => {
            let positions: Vec<(usize, usize)> =
                (0..cols).flat_map(|j| (if symmetric { j } else { 0 }..rows).map(move |i| (i, j))).collect();
            let mut k = 0;
            for (ln, l) in data {
                for t in l.split_whitespace() {
                    let &(i, j) = positions.get(k).ok_or_else(|| perr(ln, "more values than the matrix holds"))?;
                    push(i, j, value(ln, t)?);
                    k += 1;
                }
            }
            if k != positions.len() {
                return Err(perr(size_line, format!("expected {} values, found {k}", positions.len())));
            }
        }
    }
    Ok(MmMatrix { rows, cols, format, entries })
}

/// Writes a dense matrix in `array general` format with round-trip exact values.
pub fn write_matrix_market<T: Scalar>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let _ = writeln!(out, "{:e}", m[(i, j)]);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_tridiagonal<T: Scalar>(path: &Path, t: &TridiagonalOperator<T>) -> Result<()> {
    let n = t.diag().len();
    let mut entries = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            entries.push((i, i - 1, t.lower()[i - 1]));
        }
        entries.push((i, i, t.diag()[i]));
        if i + 1 < n {
            entries.push((i, i + 1, t.upper()[i]));
        }
    }
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{n} {n} {}", entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes `A`, `B`, `C` to `<prefix>_A.mtx`, `<prefix>_B.mtx`, `<prefix>_C.mtx`.
pub fn write_model<T: Scalar>(dir: &Path, prefix: &str, model: &StateSpaceModel<T>) -> Result<[std::path::PathBuf; 3]> {
    let paths =
        [dir.join(format!("{prefix}_A.mtx")), dir.join(format!("{prefix}_B.mtx")), dir.join(format!("{prefix}_C.mtx"))];
    match model.a() {
        Operator::Tridiagonal(t) => write_tridiagonal(&paths[0], t)?,
        a => write_matrix_market(&paths[0], &a.to_dense())?,
    }
    write_matrix_market(&paths[1], model.b())?;
    write_matrix_market(&paths[2], model.c())?;
    Ok(paths)
}

/// Loads a model from three Matrix Market files.
pub fn load_matrix_market<T: Scalar>(a: &Path, b: &Path, c: &Path) -> Result<StateSpaceModel<T>> {
    let a = read_matrix_market(a)?.to_operator()?;
    let b = read_matrix_market(b)?.to_dense();
    let c = read_matrix_market(c)?.to_dense();
    StateSpaceModel::new(a, b, c)
}
