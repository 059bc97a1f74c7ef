use serde::{Deserialize, Serialize};

use crate::anneal::{exhaustive_solve, sample_embedded, simulated_anneal, AnnealConfig, SampleRecord, SampleSet};
use crate::chimera::{embed_with_placement, place_checks, ChimeraGraph, Placement};
use crate::error::{invalid, Error, Result};
use crate::ldpc::{GeneratorMatrix, ParityCheckMatrix};
use crate::qubo::{assemble_objective, build_distance, build_satisfier, AncillaPlan, ObjectiveWeights, QuadraticBinaryProblem};

/// How the decoding problem is minimised.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Backend {
    /// Full enumeration; every ground state is returned once.
    Exhaustive,
    /// Simulated annealing on the logical problem.
    #[default]
    Sa,
    /// Simulated annealing on a Chimera embedding with `grid × grid` cells.
    Embedded { grid: usize },
}

/// Result of one QBP decode.
#[derive(Clone, Debug, PartialEq)]
pub struct QbpOutcome {
    /// Bits of the lowest-energy sample.
    pub bits: Vec<u8>,
    pub energy: f64,
    pub samples: SampleSet,
    /// Only for the embedded backend.
    pub broken_fraction: Option<f64>,
}

/// Decoder for one code: the satisfier and, for the embedded backend, the
/// placement are built once and reused for every received word.
#[derive(Clone, Debug)]
pub struct QbpDecoder {
    h: ParityCheckMatrix,
    satisfier: QuadraticBinaryProblem,
    plan: AncillaPlan,
    backend: Backend,
    jferro: f64,
    hardware: Option<(ChimeraGraph, Placement)>,
}

impl QbpDecoder {
    pub fn new(h: ParityCheckMatrix, backend: Backend, jferro: f64) -> Result<Self> {
        let (satisfier, plan) = build_satisfier(&h)?;
        let hardware = match &backend {
            Backend::Embedded { grid } => {
                let graph = ChimeraGraph::new(*grid)?;
                let placement = place_checks(&h, &graph)?;
                Some((graph, placement))
            }
            _ => None,
        };
        if !(jferro > 0.0 && jferro.is_finite()) {
            return Err(invalid(format!("|J_F| must be positive, got {jferro}")));
        }
        Ok(QbpDecoder {
            h,
            satisfier,
            plan,
            backend,
            jferro,
            hardware,
        })
    }

    pub fn code(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn plan(&self) -> &AncillaPlan {
        &self.plan
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// `W1·satisfier + W2·distance` for one word of posteriors.
    pub fn objective(&self, posteriors: &[f64], weights: ObjectiveWeights) -> Result<QuadraticBinaryProblem> {
        self.h.expect_len(posteriors.len())?;
        assemble_objective(&self.satisfier, &build_distance(posteriors)?, &self.plan, weights)
    }

    pub fn decode(&self, posteriors: &[f64], weights: ObjectiveWeights, anneal: &AnnealConfig) -> Result<QbpOutcome> {
        let problem = self.objective(posteriors, weights)?;
        let (samples, broken_fraction) = match &self.backend {
            Backend::Exhaustive => {
                let ground = exhaustive_solve(&problem)?;
                let records = ground
                    .assignments
                    .into_iter()
                    .map(|assignment| SampleRecord {
                        assignment,
                        energy: ground.energy,
                        occurrences: 1,
                    })
                    .collect();
                let set = SampleSet {
                    convention: problem.convention(),
                    num_vars: problem.num_vars(),
                    records,
                };
                (set, None)
            }
            Backend::Sa => (simulated_anneal(&problem, anneal)?, None),
            Backend::Embedded { .. } => {
                let (graph, placement) = self.hardware.as_ref().expect("placement built for embedded backend");
                let (emb, hw) = embed_with_placement(&problem, &self.h, graph, placement, self.jferro)?;
                let s = sample_embedded(&hw, &emb, &problem, anneal)?;
                (s.logical, Some(s.broken_fraction))
            }
        };
        let best = samples.lowest().ok_or_else(|| Error::SampleSet("no samples".into()))?;
        Ok(QbpOutcome {
            bits: best.assignment[..self.plan.num_bits].iter().map(|&v| v as u8).collect(),
            energy: best.energy,
            broken_fraction,
            samples,
        })
    }
}

/// Largest `W2` (exclusive) for which every non-codeword costs more than any
/// codeword can save in distance: `W1 / (N · max_i |2p_i − 1|)`.
pub fn safe_w2_bound(w1: f64, posteriors: &[f64]) -> f64 {
    let spread = posteriors.iter().map(|p| (2.0 * p - 1.0).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return f64::INFINITY;
    }
    w1 / (posteriors.len() as f64 * spread)
}

/// Best codeword under a linear cost `Σ_i c_i · cost_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlDecision {
    pub codeword: Vec<u8>,
    pub cost: f64,
    /// Cost gap to the runner-up codeword; infinite for a one-word code.
    pub margin: f64,
}

pub const MAX_ML_DIMENSION: usize = 24;

/// Brute force over all `2^K` codewords in Gray-code order.
///
/// With `cost_i = 1 − 2p_i` this minimises the distance term; with
/// `cost_i = LLR_i` it is the maximum-likelihood decision.
pub fn ml_decode(g: &GeneratorMatrix, cost: &[f64]) -> Result<MlDecision> {
    if cost.len() != g.n {
        return Err(Error::DimensionMismatch {
            expected: g.n,
            got: cost.len(),
        });
    }
    if g.k > MAX_ML_DIMENSION {
        return Err(invalid(format!("dimension {} exceeds the ML limit of {MAX_ML_DIMENSION}", g.k)));
    }
    let mut word = vec![0u8; g.n];
    let mut current = 0.0;
    let mut best = (0.0, 0u64);
    let mut second = f64::INFINITY;
    let mut gray = 0u64;
    for step in 1u64..(1u64 << g.k) {
        let flip = step.trailing_zeros() as usize;
        gray ^= 1 << flip;
        for (j, &r) in g.rows[flip].iter().enumerate() {
            if r == 1 {
                current += if word[j] == 1 { -cost[j] } else { cost[j] };
                word[j] ^= 1;
            }
        }
        if current < best.0 {
            second = best.0;
            best = (current, gray);
        } else if current < second {
            second = current;
        }
    }
    let mut codeword = vec![0u8; g.n];
    for (i, row) in g.rows.iter().enumerate() {
        if best.1 >> i & 1 == 1 {
            for (c, &r) in codeword.iter_mut().zip(row) {
                *c ^= r;
            }
        }
    }
    // exact cost of the winner, free of accumulated rounding
    let exact = codeword.iter().zip(cost).map(|(&c, &w)| f64::from(c) * w).sum();
    Ok(MlDecision {
        codeword,
        cost: exact,
        margin: second - best.0,
    })
}

/// `1 − 2p_i`, the linear coefficients of the distance term.
pub fn distance_costs(posteriors: &[f64]) -> Vec<f64> {
    posteriors.iter().map(|p| 1.0 - 2.0 * p).collect()
}
