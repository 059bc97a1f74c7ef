use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::gf2::BitRow;
use crate::rng;

/// Gauss-Jordan reduction of H to `[P | I]` under a column permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystematicForm {
    /// `(N−K) × K` block; row `i` pairs with identity column `K + i`.
    pub p: Vec<BitRow>,
    /// `permutation[new] = old`: column `new` of `[P | I]` is column `old` of H.
    pub permutation: Vec<usize>,
    /// GF(2) rank of H, i.e. N − K.
    pub rank: usize,
    /// Rows of H that reduced to zero (linear combinations of other rows).
    pub dependent_rows: Vec<usize>,
}

impl SystematicForm {
    pub fn k(&self) -> usize {
        self.permutation.len() - self.rank
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    /// `[P | I]` as dense rows in permuted column order.
    pub fn augmented(&self) -> Vec<BitRow> {
        let k = self.k();
        self.p
            .iter()
            .enumerate()
            .map(|(i, prow)| {
                let mut row = BitRow::zeros(self.n());
                for j in prow.ones() {
                    row.set(j, true);
                }
                row.set(k + i, true);
                row
            })
            .collect()
    }
}

/// Reduce H to systematic form.
///
/// Columns are scanned right to left so that a matrix already shaped
/// `[P | I]` keeps the identity permutation. Rows that vanish are recorded in
/// `dependent_rows`; a column-weight-2 code always has at least one, since all
/// of its rows sum to zero.
pub fn to_systematic(h: &ParityCheckMatrix) -> SystematicForm {
    let n = h.num_bits();
    let mut rows = h.bit_rows();
    let m = rows.len();
    // pivot_of_row[r] = column pivoted on row r
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; m];
    let mut pivot_cols = Vec::new();
    for col in (0..n).rev() {
        let Some(r) = (0..m).find(|&r| !used[r] && rows[r].get(col)) else {
            continue;
        };
        used[r] = true;
        pivot_of_row[r] = Some(col);
        pivot_cols.push(col);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        if pivot_cols.len() == m {
            break;
        }
    }
    let rank = pivot_cols.len();
    let dependent_rows: Vec<usize> = (0..m).filter(|&r| pivot_of_row[r].is_none()).collect();

    pivot_cols.sort_unstable();
    let mut is_pivot = vec![false; n];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut permutation: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let k = permutation.len();
    permutation.extend(pivot_cols.iter().copied());

    let mut p = Vec::with_capacity(rank);
    for &col in &pivot_cols {
        let r = (0..m).find(|&r| pivot_of_row[r] == Some(col)).expect("pivot row");
        let mut prow = BitRow::zeros(k);
        for (new, &old) in permutation[..k].iter().enumerate() {
            if rows[r].get(old) {
                prow.set(new, true);
            }
        }
        p.push(prow);
    }
    SystematicForm {
        p,
        permutation,
        rank,
        dependent_rows,
    }
}

/// Systematic generator of the code of H.
///
/// `rows` are stored in H's original column order, so `u · G` is directly a
/// codeword of H. In permuted order (`permutation`) each row reads
/// `[I_K | Pᵀ]`; message bit `i` sits at column `permutation[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub k: usize,
    pub n: usize,
    pub rows: Vec<Vec<u8>>,
    pub permutation: Vec<usize>,
}

impl GeneratorMatrix {
    /// Codeword positions carrying the message bits.
    pub fn info_positions(&self) -> &[usize] {
        &self.permutation[..self.k]
    }

    /// Read the message back out of a codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions().iter().map(|&j| codeword[j]).collect()
    }

    /// Row `i` in permuted column order, i.e. `[e_i | Pᵀ_i]`.
    pub fn permuted_row(&self, i: usize) -> Vec<u8> {
        self.permutation.iter().map(|&old| self.rows[i][old]).collect()
    }
}

/// Assemble `G = [I_K | Pᵀ]` and map it back to H's column order.
pub fn generator(h: &ParityCheckMatrix) -> Result<GeneratorMatrix> {
    let form = to_systematic(h);
    let (n, k) = (form.n(), form.k());
    if k == 0 {
        return Err(Error::InvalidArgument(
            "code has dimension 0 (full column rank H)".into(),
        ));
    }
    let mut rows = vec![vec![0u8; n]; k];
    for (i, row) in rows.iter_mut().enumerate() {
        row[form.permutation[i]] = 1;
        for (r, prow) in form.p.iter().enumerate() {
            if prow.get(i) {
                row[form.permutation[k + r]] = 1;
            }
        }
    }
    Ok(GeneratorMatrix {
        k,
        n,
        rows,
        permutation: form.permutation,
    })
}

/// `c = u·G` over GF(2).
pub fn encode(u: &[u8], g: &GeneratorMatrix) -> Result<Vec<u8>> {
    if u.len() != g.k {
        return Err(Error::DimensionMismatch {
            expected: g.k,
            got: u.len(),
        });
    }
    let mut c = vec![0u8; g.n];
    for (row, &bit) in g.rows.iter().zip(u) {
        if bit & 1 == 1 {
            for (ci, &ri) in c.iter_mut().zip(row) {
                *ci ^= ri;
            }
        }
    }
    Ok(c)
}

/// `k` uniform message bits drawn from `seed`.
pub fn random_message(k: usize, seed: u64) -> Vec<u8> {
    let mut g = rng::stream(seed, 0);
    (0..k).map(|_| u8::from(g.random::<bool>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(rows: &[&[u8]]) -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn already_systematic_is_untouched() {
        let m = h(&[&[1, 0, 1, 1, 0, 0], &[0, 1, 1, 0, 1, 0], &[1, 1, 0, 0, 0, 1]]);
        let f = to_systematic(&m);
        assert_eq!(f.permutation, (0..6).collect::<Vec<_>>());
        let p: Vec<Vec<u8>> = f.p.iter().map(BitRow::to_bits).collect();
        assert_eq!(p, vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]);
        assert!(f.dependent_rows.is_empty());
    }

    #[test]
    fn hand_eliminated_example() {
        let f = to_systematic(&h(&[&[1, 1, 0], &[0, 1, 1]]));
        assert_eq!(f.k(), 1);
        assert_eq!(f.permutation, vec![0, 1, 2]);
        let p: Vec<Vec<u8>> = f.p.iter().map(BitRow::to_bits).collect();
        assert_eq!(p, vec![vec![1], vec![1]]);
        let g = generator(&h(&[&[1, 1, 0], &[0, 1, 1]])).unwrap();
        assert_eq!(g.rows, vec![vec![1, 1, 1]]);
    }

    #[test]
    fn dependent_rows_recorded() {
        let m = h(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let f = to_systematic(&m);
        assert_eq!(f.rank, 2);
        assert_eq!(f.dependent_rows.len(), 1);
        match m.check_full_rank() {
            Err(Error::RankDeficient { dependent_rows }) => assert_eq!(dependent_rows.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_message_gives_generator_row() {
        let m = h(&[&[1, 1, 0, 1, 0, 0], &[0, 1, 1, 0, 1, 0], &[1, 0, 0, 0, 1, 1]]);
        let g = generator(&m).unwrap();
        for i in 0..g.k {
            let mut u = vec![0; g.k];
            u[i] = 1;
            assert_eq!(encode(&u, &g).unwrap(), g.rows[i]);
            let pr = g.permuted_row(i);
            for j in 0..g.k {
                assert_eq!(pr[j], (i == j) as u8);
            }
        }
        assert_eq!(encode(&vec![0; g.k], &g).unwrap(), vec![0; 6]);
        assert!(encode(&[1], &g).is_err());
    }
}
