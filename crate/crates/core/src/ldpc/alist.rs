//! MacKay alist format.
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! col degrees (N values)
//! row degrees (M values)
//! N lines of 1-based check indices, one line per column
//! M lines of 1-based bit indices, one line per row
//! ```
//!
//! Zero padding on the index lines is accepted on read and never written.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::matrix::ParityCheckMatrix;
use crate::error::{Error, Result};

pub fn load_alist(path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    parse_alist(&fs::read_to_string(path)?)
}

pub fn save_alist(h: &ParityCheckMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_alist(h, &mut f)?;
    Ok(())
}

pub fn write_alist<W: Write>(h: &ParityCheckMatrix, w: &mut W) -> Result<()> {
    let col_w = h.col_weights();
    let row_w = h.row_weights();
    writeln!(w, "{} {}", h.num_bits(), h.num_checks())?;
    writeln!(
        w,
        "{} {}",
        col_w.iter().max().copied().unwrap_or(0),
        row_w.iter().max().copied().unwrap_or(0)
    )?;
    writeln!(w, "{}", join(col_w.iter().copied()))?;
    writeln!(w, "{}", join(row_w.iter().copied()))?;
    for n in 0..h.num_bits() {
        writeln!(w, "{}", join(h.bit(n).iter().map(|&m| m + 1)))?;
    }
    for m in 0..h.num_checks() {
        writeln!(w, "{}", join(h.check(m).iter().map(|&n| n + 1)))?;
    }
    Ok(())
}

fn join(it: impl Iterator<Item = usize>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Alist {
                        line: i + 1,
                        msg: format!("bad integer {tok:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::Alist {
            line: 0,
            msg: format!("unexpected end of file reading {what}"),
        })
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Alist {
        line,
        msg: msg.into(),
    }
}

pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, dims) = lines.next_numbers("header")?;
    let [n, m] = dims[..] else {
        return Err(err(ln, "header must be `N M`"));
    };
    let (ln, maxes) = lines.next_numbers("max degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(ln, "expected two maximum degrees"));
    };
    let (ln, col_deg) = lines.next_numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(err(ln, format!("{} column degrees for N={n}", col_deg.len())));
    }
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(err(ln, "column degree exceeds declared maximum"));
    }
    let (ln, row_deg) = lines.next_numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(err(ln, format!("{} row degrees for M={m}", row_deg.len())));
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(err(ln, "row degree exceeds declared maximum"));
    }

    let mut from_cols = Vec::new();
    for (j, &deg) in col_deg.iter().enumerate() {
        let (ln, idx) = lines.next_numbers("column index list")?;
        let idx: Vec<usize> = idx.into_iter().filter(|&v| v != 0).collect();
        if idx.len() != deg {
            return Err(err(ln, format!("column {} lists {} checks, declared {deg}", j + 1, idx.len())));
        }
        for i in idx {
            if i > m {
                return Err(err(ln, format!("check index {i} out of range 1..={m}")));
            }
            from_cols.push((i - 1, j));
        }
    }
    let mut from_rows = Vec::new();
    for (i, &deg) in row_deg.iter().enumerate() {
        let (ln, idx) = lines.next_numbers("row index list")?;
        let idx: Vec<usize> = idx.into_iter().filter(|&v| v != 0).collect();
        if idx.len() != deg {
            return Err(err(ln, format!("row {} lists {} bits, declared {deg}", i + 1, idx.len())));
        }
        for j in idx {
            if j > n {
                return Err(err(ln, format!("bit index {j} out of range 1..={n}")));
            }
            from_rows.push((i, j - 1));
        }
    }
    from_cols.sort_unstable();
    from_rows.sort_unstable();
    if from_cols != from_rows {
        return Err(err(0, "column and row index lists disagree"));
    }
    ParityCheckMatrix::from_entries(m, n, &from_rows)
}
