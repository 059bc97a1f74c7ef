use serde::{Deserialize, Serialize};

use super::{build_satisfier, AncillaPlan, Convention, QuadraticBinaryProblem};
use crate::error::{invalid, Result};
use crate::ldpc::ParityCheckMatrix;

/// `Σ_i (q_i − p_i)²` with `p_i = Pr(q_i = 1 | y_i)`: linear `1 − 2p_i` and
/// constant `p_i²` per bit, no couplers.
pub fn build_distance(p: &[f64]) -> Result<QuadraticBinaryProblem> {
    let mut problem = QuadraticBinaryProblem::new(p.len(), Convention::Qubo);
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(invalid(format!("probability p[{i}] = {pi} outside [0, 1]")));
        }
        problem.add_linear(i, 1.0 - 2.0 * pi)?;
        problem.add_offset(pi * pi)?;
    }
    Ok(problem)
}

/// Satisfier and distance weights; both must be strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub w1: f64,
    pub w2: f64,
}

impl ObjectiveWeights {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        let w = ObjectiveWeights { w1, w2 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w1 > 0.0 && self.w1.is_finite()) || !(self.w2 > 0.0 && self.w2.is_finite()) {
            return Err(invalid(format!(
                "weights must be positive and finite, got W1={} W2={}",
                self.w1, self.w2
            )));
        }
        Ok(())
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { w1: 1.0, w2: 1.0 }
    }
}

/// `W1·satisfier + W2·distance`, coefficient-wise.
///
/// `distance` must cover exactly the bit variables of `plan`; anything wider
/// would alias ancilla ids.
pub fn assemble_objective(
    satisfier: &QuadraticBinaryProblem,
    distance: &QuadraticBinaryProblem,
    plan: &AncillaPlan,
    weights: ObjectiveWeights,
) -> Result<QuadraticBinaryProblem> {
    weights.validate()?;
    assemble_unchecked(satisfier, distance, plan, weights.w1, weights.w2)
}

/// Like [`assemble_objective`] but accepts a zero weight, for diagnostics
/// that isolate one of the two terms.
pub(crate) fn assemble_unchecked(
    satisfier: &QuadraticBinaryProblem,
    distance: &QuadraticBinaryProblem,
    plan: &AncillaPlan,
    w1: f64,
    w2: f64,
) -> Result<QuadraticBinaryProblem> {
    if satisfier.num_vars() != plan.num_vars() {
        return Err(invalid("satisfier does not match its ancilla plan"));
    }
    if distance.num_vars() != plan.num_bits {
        return Err(invalid(format!(
            "distance spans {} variables but the code has {} bits; ids would collide with ancillas",
            distance.num_vars(),
            plan.num_bits
        )));
    }
    if !distance.quadratic().is_empty() {
        return Err(invalid("distance term must not carry couplers"));
    }
    satisfier.scaled(w1).plus(&distance.scaled(w2))
}

/// A fully assembled decoding problem for one received word.
#[derive(Clone, Debug)]
pub struct DecodingObjective {
    pub problem: QuadraticBinaryProblem,
    pub plan: AncillaPlan,
    pub weights: ObjectiveWeights,
}

impl DecodingObjective {
    pub fn build(h: &ParityCheckMatrix, posteriors: &[f64], weights: ObjectiveWeights) -> Result<Self> {
        h.expect_len(posteriors.len())?;
        let (sat, plan) = build_satisfier(h)?;
        let dist = build_distance(posteriors)?;
        let problem = assemble_objective(&sat, &dist, &plan, weights)?;
        Ok(DecodingObjective {
            problem,
            plan,
            weights,
        })
    }

    /// Energy of a bit word with its ancillas set optimally.
    pub fn ancilla_min_energy(&self, h: &ParityCheckMatrix, bits: &[u8]) -> Result<f64> {
        let full = self.plan.complete(h, bits)?;
        self.problem.energy(&full)
    }

    /// The bit part of a full assignment.
    pub fn bits_of(&self, values: &[i8]) -> Vec<u8> {
        values[..self.plan.num_bits].iter().map(|&v| v as u8).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(p: f64, q: i8) -> f64 {
        build_distance(&[p]).unwrap().energy(&[q]).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(delta(0.5, 0), 0.25);
        assert_eq!(delta(0.5, 1), 0.25);
        assert_eq!(delta(1.0, 1), 0.0);
        assert_eq!(delta(1.0, 0), 1.0);
        let d = build_distance(&[0.8808]).unwrap();
        assert!((d.linear()[0] - (-0.7616)).abs() < 1e-12);
        assert!((d.offset() - 0.775_808_64).abs() < 1e-12);
        assert!(d.quadratic().is_empty());
        assert!(build_distance(&[1.2]).is_err());
        assert!(build_distance(&[-0.1]).is_err());
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(ObjectiveWeights::new(0.0, 1.0).is_err());
        assert!(ObjectiveWeights::new(1.0, -1.0).is_err());
        assert!(ObjectiveWeights::new(1.0, 0.5).is_ok());
    }

    #[test]
    fn id_collision_rejected() {
        let h = ParityCheckMatrix::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
        let (sat, plan) = build_satisfier(&h).unwrap();
        let dist = build_distance(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(assemble_objective(&sat, &dist, &plan, ObjectiveWeights::default()).is_err());
    }

    #[test]
    fn w2_zero_gives_satisfier_alone() {
        let h = ParityCheckMatrix::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
        let (sat, plan) = build_satisfier(&h).unwrap();
        let dist = build_distance(&[0.1, 0.9, 0.3]).unwrap();
        let p = assemble_unchecked(&sat, &dist, &plan, 1.0, 0.0).unwrap();
        assert_eq!(p.linear(), sat.linear());
        assert_eq!(p.quadratic(), sat.quadratic());
        assert_eq!(p.offset(), 0.0);
    }
}
