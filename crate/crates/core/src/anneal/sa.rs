use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SampleSet;
use crate::chimera::{unembed, ChimeraEmbedding, HardwareProblem};
use crate::error::{invalid, Result};
use crate::qubo::{spin_to_bit, Convention, QuadraticBinaryProblem};
use crate::rng;

/// Annealing schedule and read count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    /// Independent reads `N_a`.
    pub num_reads: usize,
    /// Full sweeps over all variables per read.
    pub sweeps: usize,
    /// Inverse temperatures `(start, end)` for geometric cooling; derived
    /// from the problem when absent.
    #[serde(default)]
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
    /// Anneal-time label `T_a` in microseconds; bookkeeping only.
    #[serde(default = "default_anneal_time")]
    pub anneal_time_us: f64,
}

fn default_anneal_time() -> f64 {
    1.0
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            num_reads: 100,
            sweeps: 1000,
            beta_range: None,
            seed: 0,
            anneal_time_us: 1.0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(invalid("num_reads must be at least 1"));
        }
        if self.sweeps == 0 {
            return Err(invalid("sweeps must be at least 1"));
        }
        if let Some((b0, b1)) = self.beta_range {
            if !(b0 > 0.0 && b1.is_finite() && b1 >= b0) {
                return Err(invalid(format!(
                    "beta range ({b0}, {b1}) must be positive and non-decreasing (temperatures decreasing)"
                )));
            }
        }
        if !(self.anneal_time_us > 0.0 && self.anneal_time_us.is_finite()) {
            return Err(invalid("anneal time must be positive"));
        }
        Ok(())
    }

    /// `T_c = N_a · T_a` in microseconds.
    pub fn total_time_us(&self) -> f64 {
        self.num_reads as f64 * self.anneal_time_us
    }
}

/// Hot end accepts the largest single-flip uphill move with probability 1/2,
/// cold end a typical smallest move with probability 10⁻⁴.
///
/// The typical smallest move is twice the lesser of the smallest coupler and
/// the median bias. The very smallest bias is ignored: posteriors near 1/2
/// give near-zero biases that would leave most sweeps frozen.
pub fn default_beta_range(ising: &QuadraticBinaryProblem) -> (f64, f64) {
    let mut field = ising.linear().iter().map(|h| h.abs()).collect::<Vec<_>>();
    let mut min_coupler = f64::INFINITY;
    for (&(i, j), &c) in ising.quadratic() {
        field[i] += c.abs();
        field[j] += c.abs();
        if c != 0.0 {
            min_coupler = min_coupler.min(c.abs());
        }
    }
    let mut biases: Vec<f64> = ising.linear().iter().map(|h| h.abs()).filter(|&h| h > 0.0).collect();
    biases.sort_by(f64::total_cmp);
    let median_bias = biases.get(biases.len() / 2).copied().unwrap_or(f64::INFINITY);
    let max_delta = 2.0 * field.iter().copied().fold(0.0, f64::max);
    let min_delta = 2.0 * min_coupler.min(median_bias);
    if max_delta == 0.0 || !min_delta.is_finite() {
        return (1.0, 1.0);
    }
    let hot = 2f64.ln() / max_delta;
    let cold = 1e4f64.ln() / min_delta;
    (hot, cold.max(hot))
}

/// Compressed Ising problem for fast sweeps.
struct Sweeper {
    h: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<(usize, f64)>,
}

impl Sweeper {
    fn new(ising: &QuadraticBinaryProblem) -> Self {
        let adj = ising.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let mut nbr = Vec::new();
        start.push(0);
        for list in adj {
            nbr.extend(list);
            start.push(nbr.len());
        }
        Sweeper {
            h: ising.linear().to_vec(),
            start,
            nbr,
        }
    }

    fn run<R: Rng>(&self, betas: &[f64], rng: &mut R) -> Vec<i8> {
        let n = self.h.len();
        let mut s: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut field = self.h.clone();
        for i in 0..n {
            for &(j, c) in &self.nbr[self.start[i]..self.start[i + 1]] {
                field[i] += c * f64::from(s[j]);
            }
        }
        for &beta in betas {
            for i in 0..n {
                // flipping s_i changes the energy by −2 s_i f_i
                let delta = -2.0 * f64::from(s[i]) * field[i];
                if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                    s[i] = -s[i];
                    let d = 2.0 * f64::from(s[i]);
                    for &(j, c) in &self.nbr[self.start[i]..self.start[i + 1]] {
                        field[j] += c * d;
                    }
                }
            }
        }
        // zero-temperature quench to the nearest local minimum
        let mut moved = true;
        while moved {
            moved = false;
            for i in 0..n {
                if f64::from(s[i]) * field[i] > 0.0 {
                    s[i] = -s[i];
                    let d = 2.0 * f64::from(s[i]);
                    for &(j, c) in &self.nbr[self.start[i]..self.start[i + 1]] {
                        field[j] += c * d;
                    }
                    moved = true;
                }
            }
        }
        s
    }
}

fn schedule(config: &AnnealConfig, ising: &QuadraticBinaryProblem) -> Vec<f64> {
    let (b0, b1) = config.beta_range.unwrap_or_else(|| default_beta_range(ising));
    let m = config.sweeps;
    if m == 1 {
        return vec![b1];
    }
    let ratio = (b1 / b0).powf(1.0 / (m - 1) as f64);
    (0..m).map(|k| b0 * ratio.powi(k as i32)).collect()
}

/// Raw spin reads, one per read index, in read order.
fn anneal_spins(ising: &QuadraticBinaryProblem, config: &AnnealConfig) -> Vec<Vec<i8>> {
    let sweeper = Sweeper::new(ising);
    let betas = schedule(config, ising);
    (0..config.num_reads)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(config.seed, r as u64);
            sweeper.run(&betas, &mut g)
        })
        .collect()
}

/// `N_a` independent Metropolis anneals; energies are recomputed from
/// `problem` for every read.
pub fn simulated_anneal(problem: &QuadraticBinaryProblem, config: &AnnealConfig) -> Result<SampleSet> {
    config.validate()?;
    if problem.num_vars() == 0 {
        return Err(invalid("cannot anneal an empty problem"));
    }
    let ising = problem.to_ising();
    let reads = anneal_spins(&ising, config);
    let reads = match problem.convention() {
        Convention::Ising => reads,
        Convention::Qubo => reads
            .into_iter()
            .map(|r| r.into_iter().map(spin_to_bit).collect())
            .collect(),
    };
    SampleSet::from_reads(problem, reads)
}

/// Logical samples recovered from physical anneals.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedSamples {
    pub logical: SampleSet,
    /// Broken chains over all chains of all reads.
    pub broken_fraction: f64,
}

/// Anneal the hardware problem, majority-vote every read back to the
/// logical problem and aggregate.
pub fn sample_embedded(
    hardware: &HardwareProblem,
    embedding: &ChimeraEmbedding,
    logical: &QuadraticBinaryProblem,
    config: &AnnealConfig,
) -> Result<EmbeddedSamples> {
    config.validate()?;
    if logical.num_vars() != embedding.num_vars() {
        return Err(invalid("logical problem does not match the embedding"));
    }
    // anneal only the qubits that carry a chain
    let used: Vec<usize> = {
        let mut u: Vec<usize> = embedding.chains.iter().flatten().copied().collect();
        u.sort_unstable();
        u
    };
    let mut index = vec![usize::MAX; hardware.problem.num_vars()];
    for (k, &q) in used.iter().enumerate() {
        index[q] = k;
    }
    let mut compact = QuadraticBinaryProblem::new(used.len(), Convention::Ising);
    for (k, &q) in used.iter().enumerate() {
        compact.add_linear(k, hardware.problem.bias(q))?;
    }
    for (&(p, q), &j) in hardware.problem.quadratic() {
        if index[p] == usize::MAX || index[q] == usize::MAX {
            return Err(invalid(format!("coupler ({p}, {q}) touches a qubit outside every chain")));
        }
        compact.add_quadratic(index[p], index[q], j)?;
    }
    let reads = anneal_spins(&compact, config);
    let mut broken = 0usize;
    let mut logical_reads = Vec::with_capacity(reads.len());
    let mut physical = vec![-1i8; hardware.problem.num_vars()];
    for r in reads {
        for (k, &q) in used.iter().enumerate() {
            physical[q] = r[k];
        }
        let u = unembed(&physical, embedding)?;
        broken += u.broken;
        logical_reads.push(match logical.convention() {
            Convention::Ising => u.spins,
            Convention::Qubo => u.spins.into_iter().map(spin_to_bit).collect(),
        });
    }
    let total_chains = (config.num_reads * embedding.num_vars()).max(1);
    Ok(EmbeddedSamples {
        logical: SampleSet::from_reads(logical, logical_reads)?,
        broken_fraction: broken as f64 / total_chains as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bias() {
        let mut p = QuadraticBinaryProblem::new(1, Convention::Qubo);
        p.add_linear(0, 1.0).unwrap();
        let s = simulated_anneal(&p, &AnnealConfig { num_reads: 20, sweeps: 50, ..Default::default() }).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].assignment, vec![0]);
        assert_eq!(s.records[0].energy, 0.0);
        assert_eq!(s.num_reads(), 20);
    }

    #[test]
    fn ferromagnetic_pair() {
        let mut p = QuadraticBinaryProblem::new(2, Convention::Ising);
        p.add_quadratic(0, 1, -1.0).unwrap();
        let s = simulated_anneal(&p, &AnnealConfig { num_reads: 50, sweeps: 100, ..Default::default() }).unwrap();
        for r in &s.records {
            assert!(r.assignment == vec![-1, -1] || r.assignment == vec![1, 1]);
            assert_eq!(r.energy, -1.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = AnnealConfig::default();
        c.num_reads = 0;
        assert!(c.validate().is_err());
        let mut c = AnnealConfig::default();
        c.beta_range = Some((2.0, 1.0));
        assert!(c.validate().is_err());
        c.beta_range = Some((0.0, 1.0));
        assert!(c.validate().is_err());
        assert_eq!(AnnealConfig { num_reads: 20, ..Default::default() }.total_time_us(), 20.0);
    }
}
