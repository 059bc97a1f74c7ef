use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gf2::BitRow;

/// Sparse binary M×N parity-check matrix with row and column adjacency.
///
/// Row `m` lists the bits checked by check node `m`; column `n` lists the
/// checks bit `n` participates in. Both lists are kept sorted.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ParityCheckMatrix {
    rows: usize,
    cols: usize,
    check_bits: Vec<Vec<usize>>,
    bit_checks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    checks: Vec<Vec<usize>>,
}

impl TryFrom<RawMatrix> for ParityCheckMatrix {
    type Error = Error;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.checks.len() != raw.rows {
            return Err(Error::DimensionMismatch {
                expected: raw.rows,
                got: raw.checks.len(),
            });
        }
        ParityCheckMatrix::from_checks(raw.cols, raw.checks)
    }
}

impl From<ParityCheckMatrix> for RawMatrix {
    fn from(h: ParityCheckMatrix) -> Self {
        RawMatrix {
            rows: h.rows,
            cols: h.cols,
            checks: h.check_bits,
        }
    }
}

/// Length of the shortest Tanner-graph cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

impl ParityCheckMatrix {
    /// Build from a list of `(row, col)` positions. Duplicates are rejected.
    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let mut check_bits = vec![Vec::new(); rows];
        for &(i, j) in entries {
            if i >= rows || j >= cols {
                return Err(invalid(format!(
                    "entry ({i}, {j}) outside {rows}x{cols} matrix"
                )));
            }
            check_bits[i].push(j);
        }
        Self::build(rows, cols, check_bits)
    }

    /// Build from per-check bit lists.
    pub fn from_checks(cols: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let rows = checks.len();
        for (i, bits) in checks.iter().enumerate() {
            if let Some(&j) = bits.iter().find(|&&j| j >= cols) {
                return Err(invalid(format!("check {i} references bit {j} >= {cols}")));
            }
        }
        Self::build(rows, cols, checks)
    }

    /// Build from a dense 0/1 row-major matrix.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut checks = Vec::with_capacity(rows);
        for (i, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(invalid(format!("row {i} has length {} != {cols}", row.len())));
            }
            checks.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, _)| j)
                    .collect(),
            );
        }
        Self::build(rows, cols, checks)
    }

    fn build(rows: usize, cols: usize, mut check_bits: Vec<Vec<usize>>) -> Result<Self> {
        let mut bit_checks = vec![Vec::new(); cols];
        for (i, bits) in check_bits.iter_mut().enumerate() {
            bits.sort_unstable();
            if let Some(w) = bits.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate entry ({i}, {})", w[0])));
            }
            for &j in bits.iter() {
                bit_checks[j].push(i);
            }
        }
        Ok(ParityCheckMatrix {
            rows,
            cols,
            check_bits,
            bit_checks,
        })
    }

    /// Number of check nodes (rows).
    pub fn num_checks(&self) -> usize {
        self.rows
    }

    /// Number of bit nodes (columns).
    pub fn num_bits(&self) -> usize {
        self.cols
    }

    /// Bits participating in check `m`, i.e. N(c_m).
    pub fn check(&self, m: usize) -> &[usize] {
        &self.check_bits[m]
    }

    /// Checks that bit `n` participates in, i.e. M(b_n).
    pub fn bit(&self, n: usize) -> &[usize] {
        &self.bit_checks[n]
    }

    pub fn checks(&self) -> impl Iterator<Item = &[usize]> {
        self.check_bits.iter().map(Vec::as_slice)
    }

    pub fn num_edges(&self) -> usize {
        self.check_bits.iter().map(Vec::len).sum()
    }

    pub fn get(&self, m: usize, n: usize) -> bool {
        self.check_bits[m].binary_search(&n).is_ok()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.check_bits
            .iter()
            .enumerate()
            .flat_map(|(i, bits)| bits.iter().map(move |&j| (i, j)))
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.check_bits.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.bit_checks.iter().map(Vec::len).collect()
    }

    /// True when every column has `bit_degree` ones and every row `check_degree`.
    pub fn is_regular(&self, bit_degree: usize, check_degree: usize) -> bool {
        self.bit_checks.iter().all(|c| c.len() == bit_degree)
            && self.check_bits.iter().all(|r| r.len() == check_degree)
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.check_bits
            .iter()
            .map(|bits| {
                let mut row = vec![0u8; self.cols];
                for &j in bits {
                    row[j] = 1;
                }
                row
            })
            .collect()
    }

    pub(crate) fn bit_rows(&self) -> Vec<BitRow> {
        self.check_bits
            .iter()
            .map(|bits| {
                let mut row = BitRow::zeros(self.cols);
                for &j in bits {
                    row.set(j, true);
                }
                row
            })
            .collect()
    }

    /// GF(2) syndrome `x Hᵀ`; all-zero iff `x` is a codeword.
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        self.expect_len(x.len())?;
        Ok(self
            .check_bits
            .iter()
            .map(|bits| bits.iter().fold(0u8, |acc, &j| acc ^ (x[j] & 1)))
            .collect())
    }

    pub fn is_codeword(&self, x: &[u8]) -> Result<bool> {
        Ok(self.syndrome(x)?.iter().all(|&s| s == 0))
    }

    /// Number of unsatisfied checks.
    pub fn violated_checks(&self, x: &[u8]) -> Result<usize> {
        Ok(self.syndrome(x)?.iter().filter(|&&s| s == 1).count())
    }

    pub(crate) fn expect_len(&self, got: usize) -> Result<()> {
        if got != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got,
            });
        }
        Ok(())
    }

    /// Check that H has full row rank over GF(2).
    ///
    /// Returns the rows found linearly dependent on earlier rows otherwise.
    pub fn check_full_rank(&self) -> Result<()> {
        let form = super::to_systematic(self);
        if form.dependent_rows.is_empty() {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                dependent_rows: form.dependent_rows,
            })
        }
    }

    /// Checks sharing at least one bit with check `m`.
    pub fn check_neighbors(&self, m: usize) -> BTreeSet<usize> {
        self.check_bits[m]
            .iter()
            .flat_map(|&j| self.bit_checks[j].iter().copied())
            .filter(|&c| c != m)
            .collect()
    }

    /// Shortest cycle length of the Tanner graph.
    ///
    /// Runs a BFS from every check node; any cycle passes through a check node,
    /// and a BFS rooted on a cycle vertex closes that cycle at its exact length.
    pub fn girth(&self) -> Girth {
        let n_nodes = self.rows + self.cols;
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; n_nodes];
        let mut parent = vec![usize::MAX; n_nodes];
        let mut touched = Vec::new();
        let mut queue = VecDeque::new();
        // node ids: checks 0..rows, bits rows..rows+cols
        for root in 0..self.rows {
            for &t in &touched {
                dist[t] = usize::MAX;
                parent[t] = usize::MAX;
            }
            touched.clear();
            queue.clear();
            dist[root] = 0;
            touched.push(root);
            queue.push_back(root);
            'bfs: while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                let neighbors: &[usize] = if u < self.rows {
                    &self.check_bits[u]
                } else {
                    &self.bit_checks[u - self.rows]
                };
                for &w in neighbors {
                    let v = if u < self.rows { w + self.rows } else { w };
                    if v == parent[u] {
                        continue;
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        touched.push(v);
                        queue.push_back(v);
                    } else {
                        let len = dist[u] + dist[v] + 1;
                        if len < best {
                            best = len;
                        }
                        if len <= 4 {
                            break 'bfs;
                        }
                    }
                }
            }
            if best == 4 {
                break;
            }
        }
        if best == usize::MAX {
            Girth::Infinite
        } else {
            Girth::Finite(best)
        }
    }
}

impl fmt::Debug for ParityCheckMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ParityCheckMatrix {}x{}", self.rows, self.cols)?;
        if self.rows * self.cols <= 4096 {
            for row in self.to_dense() {
                let s: String = row.iter().map(|&b| if b == 1 { '1' } else { '.' }).collect();
                writeln!(f, "  {s}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(rows: &[&[u8]]) -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn adjacency_lists_agree() {
        let m = h(&[&[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(m.check(0), &[0, 1]);
        assert_eq!(m.bit(1), &[0, 1]);
        assert_eq!(m.num_edges(), 4);
        for (i, j) in m.entries() {
            assert!(m.bit(j).contains(&i));
        }
    }

    #[test]
    fn duplicate_and_out_of_range_entries_rejected() {
        assert!(ParityCheckMatrix::from_entries(2, 2, &[(0, 0), (0, 0)]).is_err());
        assert!(ParityCheckMatrix::from_entries(2, 2, &[(2, 0)]).is_err());
        assert!(ParityCheckMatrix::from_entries(2, 2, &[(0, 5)]).is_err());
    }

    #[test]
    fn girth_of_tiny_matrices() {
        assert_eq!(h(&[&[1, 1], &[1, 1]]).girth(), Girth::Finite(4));
        assert_eq!(h(&[&[1, 1, 0], &[0, 1, 1]]).girth(), Girth::Infinite);
        // 6-cycle: c0-b0-c1-b1-c2-b2-c0
        assert_eq!(h(&[&[1, 0, 1], &[1, 1, 0], &[0, 1, 1]]).girth(), Girth::Finite(6));
    }

    #[test]
    fn syndrome_examples() {
        let m = h(&[&[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(m.syndrome(&[0, 0, 0]).unwrap(), vec![0, 0]);
        assert_eq!(m.syndrome(&[1, 1, 0]).unwrap(), vec![0, 1]);
        assert!(m.syndrome(&[1, 1]).is_err());
        assert_eq!(m.violated_checks(&[0, 1, 0]).unwrap(), 2);
    }

    #[test]
    fn json_round_trip_validates() {
        let m = h(&[&[1, 1, 0], &[0, 1, 1]]);
        let s = serde_json::to_string(&m).unwrap();
        let back: ParityCheckMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"rows":1,"cols":2,"checks":[[0,3]]}"#;
        assert!(serde_json::from_str::<ParityCheckMatrix>(bad).is_err());
    }
}
