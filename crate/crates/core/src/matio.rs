//! Plain-text storage for complex matrices.
//!
//! A header line `complex128 <rows> <cols>` is followed by one line per row
//! holding `re im` pairs separated by whitespace.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

const TAG: &str = "complex128";

pub fn matrix_to_text(m: &CMat) -> String {
    let mut out = format!("{TAG} {} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let mut line = String::new();
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if c > 0 {
                line.push(' ');
            }
            // `{:e}` prints the shortest representation that round-trips.
            let _ = write!(line, "{:e} {:e}", v.re, v.im);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<CMat> {
    let bad = |message: String| Error::Parse {
        path: "<text>".into(),
        message,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != TAG {
        return Err(bad(format!("expected `{TAG} <rows> <cols>`, got `{header}`")));
    }
    let rows: usize = fields[1]
        .parse()
        .map_err(|_| bad(format!("bad row count `{}`", fields[1])))?;
    let cols: usize = fields[2]
        .parse()
        .map_err(|_| bad(format!("bad column count `{}`", fields[2])))?;
    let mut m = CMat::zeros(rows, cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("missing row {r}")))?;
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}` in row {r}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != 2 * cols {
            return Err(bad(format!(
                "row {r} has {} numbers, expected {}",
                vals.len(),
                2 * cols
            )));
        }
        for c in 0..cols {
            m[(r, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(bad("trailing rows after matrix".into()));
    }
    Ok(m)
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    std::fs::write(path, matrix_to_text(m)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_text(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}
