//! Min-sum belief propagation with a flooding schedule.
//!
//! LLRs follow `log(P(bit = 0) / P(bit = 1))`; with BPSK mapping 0 → −1 and
//! 1 → +1 this is `−2y/σ²`. A bit is decided 0 when its total LLR is ≥ 0.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ldpc::ParityCheckMatrix;

/// Message tables indexed by Tanner edge.
///
/// Edge `e` is the `e`-th entry of H in row-major order; `check_edges[m]` and
/// `bit_edges[n]` list the edges incident to each node.
#[derive(Clone, Debug)]
pub struct LlrState {
    pub prior: Vec<f64>,
    pub bit_to_check: Vec<f64>,
    pub check_to_bit: Vec<f64>,
    pub iteration: usize,
    edge_bit: Vec<usize>,
    check_edges: Vec<Vec<usize>>,
    bit_edges: Vec<Vec<usize>>,
}

impl LlrState {
    /// Initialise every bit-to-check message with the bit's prior.
    pub fn new(h: &ParityCheckMatrix, prior: Vec<f64>) -> Result<Self> {
        h.expect_len(prior.len())?;
        if let Some(i) = prior.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("prior LLR {i} is not finite")));
        }
        let mut edge_bit = Vec::with_capacity(h.num_edges());
        let mut check_edges = vec![Vec::new(); h.num_checks()];
        let mut bit_edges = vec![Vec::new(); h.num_bits()];
        for (m, n) in h.entries() {
            let e = edge_bit.len();
            edge_bit.push(n);
            check_edges[m].push(e);
            bit_edges[n].push(e);
        }
        let bit_to_check = edge_bit.iter().map(|&n| prior[n]).collect();
        let check_to_bit = vec![0.0; edge_bit.len()];
        Ok(LlrState {
            prior,
            bit_to_check,
            check_to_bit,
            iteration: 0,
            edge_bit,
            check_edges,
            bit_edges,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edge_bit.len()
    }

    pub fn check_edges(&self, m: usize) -> &[usize] {
        &self.check_edges[m]
    }

    pub fn bit_edges(&self, n: usize) -> &[usize] {
        &self.bit_edges[n]
    }

    /// Check-node update: sign product times minimum magnitude, excluding
    /// the destination edge.
    pub fn check_update(&mut self) {
        for edges in &self.check_edges {
            // two smallest magnitudes give every leave-one-out minimum
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut min_edge = usize::MAX;
            let mut negatives = 0usize;
            let mut zeros = 0usize;
            for &e in edges {
                let v = self.bit_to_check[e];
                let a = v.abs();
                if v < 0.0 {
                    negatives += 1;
                }
                if v == 0.0 {
                    zeros += 1;
                }
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    min_edge = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for &e in edges {
                let v = self.bit_to_check[e];
                let others_zero = zeros - usize::from(v == 0.0) > 0;
                if edges.len() == 1 || others_zero {
                    self.check_to_bit[e] = 0.0;
                    continue;
                }
                let mag = if e == min_edge { min2 } else { min1 };
                let neg_others = negatives - usize::from(v < 0.0);
                self.check_to_bit[e] = if neg_others % 2 == 1 { -mag } else { mag };
            }
        }
    }

    /// Bit-node update: prior plus all incoming check messages but one.
    pub fn bit_update(&mut self) {
        for (n, edges) in self.bit_edges.iter().enumerate() {
            let total: f64 = self.prior[n] + edges.iter().map(|&e| self.check_to_bit[e]).sum::<f64>();
            for &e in edges {
                self.bit_to_check[e] = total - self.check_to_bit[e];
            }
        }
        self.iteration += 1;
    }

    /// Total LLR per bit.
    pub fn beliefs(&self) -> Vec<f64> {
        self.bit_edges
            .iter()
            .enumerate()
            .map(|(n, edges)| self.prior[n] + edges.iter().map(|&e| self.check_to_bit[e]).sum::<f64>())
            .collect()
    }

    /// Hard decision: 0 iff the total LLR is ≥ 0.
    pub fn decide(&self) -> Vec<u8> {
        self.beliefs().into_iter().map(|z| u8::from(z < 0.0)).collect()
    }
}

/// A-priori LLRs `−2y/σ²` for BPSK (0 → −1) over AWGN.
pub fn init_llr(y: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid(format!("noise variance must be positive, got {sigma2}")));
    }
    Ok(y.iter().map(|&v| -2.0 * v / sigma2).collect())
}

/// Per-symbol variant of [`init_llr`].
pub fn init_llr_per_symbol(y: &[f64], sigma2: &[f64]) -> Result<Vec<f64>> {
    if y.len() != sigma2.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: sigma2.len(),
        });
    }
    y.iter()
        .zip(sigma2)
        .map(|(&v, &s2)| init_llr(&[v], s2).map(|l| l[0]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpOutcome {
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub converged: bool,
}

/// Decode from prior LLRs, stopping as soon as the decision is a codeword.
pub fn decode_llr(h: &ParityCheckMatrix, prior: Vec<f64>, max_iters: usize) -> Result<BpOutcome> {
    if max_iters == 0 {
        return Err(invalid("max_iters must be at least 1"));
    }
    let mut state = LlrState::new(h, prior)?;
    let mut bits = Vec::new();
    for _ in 0..max_iters {
        state.check_update();
        state.bit_update();
        bits = state.decide();
        if h.is_codeword(&bits)? {
            return Ok(BpOutcome {
                bits,
                iterations: state.iteration,
                converged: true,
            });
        }
    }
    Ok(BpOutcome {
        bits,
        iterations: state.iteration,
        converged: false,
    })
}

/// Decode received BPSK samples `y` with noise variance `sigma2`.
pub fn decode(h: &ParityCheckMatrix, y: &[f64], sigma2: f64, max_iters: usize) -> Result<BpOutcome> {
    h.expect_len(y.len())?;
    decode_llr(h, init_llr(y, sigma2)?, max_iters)
}
