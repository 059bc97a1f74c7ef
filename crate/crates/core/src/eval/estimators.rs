use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::anneal::SampleSet;
use crate::error::{invalid, Error, Result};
use crate::qubo::Convention;
use crate::rng;

/// One distinct solution of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub energy: f64,
    /// Errors over the message bits.
    pub bit_errors: usize,
    /// Errors over the whole codeword.
    pub word_errors: usize,
    pub occurrences: usize,
}

/// Distinct solutions of one decoding instance in increasing energy, with
/// the empirical CDF over reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDistribution {
    pub id: usize,
    pub transmitted: Vec<u8>,
    pub ranks: Vec<RankEntry>,
    pub cdf: Vec<f64>,
}

impl InstanceDistribution {
    /// Build from ranks already in order; computes the CDF.
    pub fn from_ranks(id: usize, transmitted: Vec<u8>, ranks: Vec<RankEntry>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(invalid("distribution needs at least one rank"));
        }
        if ranks.windows(2).any(|w| w[1].energy < w[0].energy) {
            return Err(invalid("ranks must be in non-decreasing energy order"));
        }
        let total: usize = ranks.iter().map(|r| r.occurrences).sum();
        if total == 0 || ranks.iter().any(|r| r.occurrences == 0) {
            return Err(invalid("every rank needs a positive occurrence count"));
        }
        let mut acc = 0usize;
        let mut cdf: Vec<f64> = ranks
            .iter()
            .map(|r| {
                acc += r.occurrences;
                acc as f64 / total as f64
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(InstanceDistribution {
            id,
            transmitted,
            ranks,
            cdf,
        })
    }

    pub fn num_ranks(&self) -> usize {
        self.ranks.len()
    }
}

/// Rank the distinct solutions of `set` against the transmitted codeword.
///
/// The first `transmitted.len()` variables are the code bits; message-bit
/// errors are counted at `info_positions`.
pub fn rank_solutions(set: &SampleSet, transmitted: &[u8], info_positions: &[usize], id: usize) -> Result<InstanceDistribution> {
    let n = transmitted.len();
    if set.num_vars < n {
        return Err(invalid("sample set has fewer variables than the codeword"));
    }
    if let Some(&p) = info_positions.iter().find(|&&p| p >= n) {
        return Err(invalid(format!("info position {p} outside the codeword")));
    }
    let mut records: Vec<_> = set.records.iter().collect();
    records.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
    let ranks = records
        .into_iter()
        .map(|r| {
            let bits: Vec<u8> = r.assignment[..n]
                .iter()
                .map(|&v| match set.convention {
                    Convention::Qubo => v as u8,
                    Convention::Ising => u8::from(v > 0),
                })
                .collect();
            RankEntry {
                energy: r.energy,
                bit_errors: info_positions.iter().filter(|&&p| bits[p] != transmitted[p]).count(),
                word_errors: bits.iter().zip(transmitted).filter(|(a, b)| a != b).count(),
                occurrences: r.occurrences,
            }
        })
        .collect();
    InstanceDistribution::from_ranks(id, transmitted.to_vec(), ranks)
}

/// Probability that the best of `n_a` reads is rank `i` (1-based):
/// `(1 − F(R_{i−1}))^{N_a} − (1 − F(R_i))^{N_a}` with `F(R_0) = 0`.
pub fn pr_rmin(i: usize, n_a: usize, cdf: &[f64]) -> Result<f64> {
    if i == 0 || i > cdf.len() {
        return Err(invalid(format!("rank {i} outside 1..={}", cdf.len())));
    }
    if n_a == 0 {
        return Err(invalid("N_a must be at least 1"));
    }
    let prev = if i == 1 { 0.0 } else { cdf[i - 2] };
    let e = i32::try_from(n_a).map_err(|_| invalid("N_a too large"))?;
    Ok(((1.0 - prev).powi(e) - (1.0 - cdf[i - 1]).powi(e)).max(0.0))
}

/// All rank probabilities at once.
pub fn rank_probabilities(cdf: &[f64], n_a: usize) -> Result<Vec<f64>> {
    (1..=cdf.len()).map(|i| pr_rmin(i, n_a, cdf)).collect()
}

/// `Σ_i Pr(R_min = R_i) · N_B(R_i)`.
pub fn expected_bit_errors(dist: &InstanceDistribution, n_a: usize) -> Result<f64> {
    let pr = rank_probabilities(&dist.cdf, n_a)?;
    Ok(pr.iter().zip(&dist.ranks).map(|(p, r)| p * r.bit_errors as f64).sum())
}

/// Expected bit errors per message bit.
pub fn ber(dist: &InstanceDistribution, n_a: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("K must be positive"));
    }
    Ok(expected_bit_errors(dist, n_a)? / k as f64)
}

/// Probability the best of `n_a` reads decodes the block without message
/// errors.
pub fn zero_error_mass(dist: &InstanceDistribution, n_a: usize) -> Result<f64> {
    let pr = rank_probabilities(&dist.cdf, n_a)?;
    Ok(pr
        .iter()
        .zip(&dist.ranks)
        .filter(|(_, r)| r.bit_errors == 0)
        .map(|(p, _)| p)
        .sum::<f64>()
        .min(1.0))
}

/// Product of the blocks' zero-error masses.
pub fn frame_error_free_prob(blocks: &[&InstanceDistribution], n_a: usize) -> Result<f64> {
    blocks.iter().try_fold(1.0, |acc, d| Ok(acc * zero_error_mass(d, n_a)?))
}

/// Frame error rate over frames of `n_f / n_b` distinct instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerEstimate {
    pub fer: f64,
    /// Frames averaged over.
    pub frames: u64,
    /// All `C(N_ins, N_F/N_B)` frames were covered.
    pub exhaustive: bool,
}

/// Default cap on enumerated frames.
pub const DEFAULT_FRAME_CAP: u64 = 100_000;

fn binomial(n: u64, r: u64) -> Option<u64> {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    u64::try_from(acc).ok()
}

/// Mean of `1 − Π_k q_k` over frames.
///
/// When the number of frames is within `cap` the mean is exact (computed by
/// a subset-average recursion, equal to explicit enumeration); otherwise
/// `cap` frames are drawn with `seed`.
pub fn fer(instances: &[InstanceDistribution], n_f: usize, n_b: usize, n_a: usize, cap: u64, seed: u64) -> Result<FerEstimate> {
    if n_b == 0 || n_f == 0 || n_f % n_b != 0 {
        return Err(Error::Config(format!("frame size {n_f} is not a multiple of block length {n_b}")));
    }
    let r = n_f / n_b;
    let n = instances.len();
    if r > n {
        return Err(Error::Config(format!("{n} instances cannot fill frames of {r} blocks")));
    }
    if cap == 0 {
        return Err(invalid("frame cap must be positive"));
    }
    let q: Vec<f64> = instances.iter().map(|d| zero_error_mass(d, n_a)).collect::<Result<_>>()?;
    match binomial(n as u64, r as u64) {
        Some(total) if total <= cap => {
            // avg[j] = mean over j-subsets of the first k instances of Π q
            let mut avg = vec![0.0f64; r + 1];
            avg[0] = 1.0;
            for (k, &qk) in q.iter().enumerate() {
                let k1 = (k + 1) as f64;
                for j in (1..=r.min(k + 1)).rev() {
                    let jf = j as f64;
                    let keep = if j <= k { (k1 - jf) / k1 * avg[j] } else { 0.0 };
                    avg[j] = keep + jf / k1 * qk * avg[j - 1];
                }
            }
            Ok(FerEstimate {
                fer: (1.0 - avg[r]).clamp(0.0, 1.0),
                frames: total,
                exhaustive: true,
            })
        }
        _ => {
            let mut g = rng::stream(seed, 0);
            let mut sum = 0.0;
            for _ in 0..cap {
                let pick = index::sample(&mut g, n, r);
                let p: f64 = pick.iter().map(|i| q[i]).product();
                sum += 1.0 - p;
            }
            Ok(FerEstimate {
                fer: (sum / cap as f64).clamp(0.0, 1.0),
                frames: cap,
                exhaustive: false,
            })
        }
    }
}

/// `(1 − FER) · N_K / T_c`, bits per second for `T_c` in seconds.
pub fn throughput(n_k: f64, t_c_s: f64, fer: f64) -> Result<f64> {
    if !(t_c_s > 0.0) || !(0.0..=1.0).contains(&fer) || n_k < 0.0 {
        return Err(invalid("throughput needs T_c > 0, FER in [0, 1] and N_K >= 0"));
    }
    Ok((1.0 - fer) * n_k / t_c_s)
}

/// `(1 − FER) · N_K · f_clk / (N_it · N_clk/it)`.
pub fn fpga_throughput(n_k: f64, f_clk_hz: f64, n_it: usize, n_clk_per_it: f64, fer: f64) -> Result<f64> {
    if n_it == 0 || !(n_clk_per_it > 0.0) || !(f_clk_hz > 0.0) {
        return Err(invalid("FPGA throughput needs positive clock, iterations and cycles"));
    }
    throughput(n_k, n_it as f64 * n_clk_per_it / f_clk_hz, fer)
}
