//! Quadratic binary problems and the LDPC decoding objective.

mod bands;
mod distance;
mod ice;
mod io;
mod satisfier;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use bands::{energy_bands, energy_bands_with, BandReport, ClassBand};
pub use distance::{assemble_objective, build_distance, DecodingObjective, ObjectiveWeights};
pub use ice::{ice_perturb, DEFAULT_ICE_SCALE};
pub use io::{load_problem, save_problem, ProblemFile, Topology};
pub use satisfier::{ancilla_count, build_satisfier, AncillaPlan, CheckAncillas};

/// Variable domain: `{0, 1}` for QUBO, `{−1, +1}` for Ising.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Qubo,
    Ising,
}

impl Convention {
    pub fn is_legal(self, v: i8) -> bool {
        match self {
            Convention::Qubo => v == 0 || v == 1,
            Convention::Ising => v == -1 || v == 1,
        }
    }
}

/// `E(q) = Σ h_i q_i + Σ_{i<j} J_ij q_i q_j + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBinaryProblem {
    convention: Convention,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuadraticBinaryProblem {
    pub fn new(num_vars: usize, convention: Convention) -> Self {
        QuadraticBinaryProblem {
            convention,
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.linear[i]
    }

    pub fn coupler(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_linear(&mut self, i: usize, h: f64) -> Result<()> {
        if i >= self.linear.len() {
            return Err(invalid(format!("variable {i} out of range")));
        }
        check_finite(h)?;
        self.linear[i] += h;
        Ok(())
    }

    /// Accumulate onto the unordered pair `{i, j}`. Self-pairs are rejected.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            return Err(invalid(format!("self-coupler on variable {i}")));
        }
        let n = self.linear.len();
        if i >= n || j >= n {
            return Err(invalid(format!("coupler ({i}, {j}) out of range")));
        }
        check_finite(value)?;
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) -> Result<()> {
        check_finite(value)?;
        self.offset += value;
        Ok(())
    }

    /// Extend the variable range to `num_vars` (no-op if already larger).
    pub fn grow(&mut self, num_vars: usize) {
        if num_vars > self.linear.len() {
            self.linear.resize(num_vars, 0.0);
        }
    }

    /// Largest absolute coupler value.
    pub fn max_abs_coupler(&self) -> f64 {
        self.quadratic.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_bias(&self) -> f64 {
        self.linear.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Check every value against the convention without evaluating.
    pub fn validate_assignment(&self, values: &[i8]) -> Result<()> {
        if values.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                got: values.len(),
            });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| !self.convention.is_legal(v)) {
            return Err(invalid(format!(
                "value {v} of variable {i} illegal for {:?}",
                self.convention
            )));
        }
        Ok(())
    }

    pub fn energy(&self, values: &[i8]) -> Result<f64> {
        self.validate_assignment(values)?;
        Ok(self.energy_unchecked(values))
    }

    pub(crate) fn energy_unchecked(&self, values: &[i8]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .zip(values)
            .map(|(h, &v)| h * f64::from(v))
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|(&(i, j), &c)| c * f64::from(values[i]) * f64::from(values[j]))
            .sum();
        lin + quad + self.offset
    }

    /// Multiply every coefficient, offset included.
    pub fn scaled(&self, factor: f64) -> Self {
        QuadraticBinaryProblem {
            convention: self.convention,
            linear: self.linear.iter().map(|h| h * factor).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            offset: self.offset * factor,
        }
    }

    /// Coefficient-wise sum; the result spans the larger variable range.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.convention != other.convention {
            return Err(invalid("cannot add problems of different conventions"));
        }
        let mut out = self.clone();
        out.grow(other.num_vars());
        for (i, &h) in other.linear.iter().enumerate() {
            out.linear[i] += h;
        }
        for (&(i, j), &v) in &other.quadratic {
            *out.quadratic.entry((i, j)).or_insert(0.0) += v;
        }
        out.offset += other.offset;
        Ok(out)
    }

    /// Substitute `q = (s + 1) / 2`.
    pub fn to_ising(&self) -> Self {
        if self.convention == Convention::Ising {
            return self.clone();
        }
        let mut out = QuadraticBinaryProblem::new(self.num_vars(), Convention::Ising);
        let mut offset = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            out.linear[i] += h / 2.0;
            offset += h / 2.0;
        }
        for (&(i, j), &c) in &self.quadratic {
            out.quadratic.insert((i, j), c / 4.0);
            out.linear[i] += c / 4.0;
            out.linear[j] += c / 4.0;
            offset += c / 4.0;
        }
        out.offset = offset;
        out
    }

    /// Substitute `s = 2q − 1`.
    pub fn to_qubo(&self) -> Self {
        if self.convention == Convention::Qubo {
            return self.clone();
        }
        let mut out = QuadraticBinaryProblem::new(self.num_vars(), Convention::Qubo);
        let mut offset = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            out.linear[i] += 2.0 * h;
            offset -= h;
        }
        for (&(i, j), &c) in &self.quadratic {
            out.quadratic.insert((i, j), 4.0 * c);
            out.linear[i] -= 2.0 * c;
            out.linear[j] -= 2.0 * c;
            offset += c;
        }
        out.offset = offset;
        out
    }

    /// Neighbour lists `(j, J_ij)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (&(i, j), &c) in &self.quadratic {
            adj[i].push((j, c));
            adj[j].push((i, c));
        }
        adj
    }
}

/// Map a QUBO value to its Ising counterpart and back.
pub fn bit_to_spin(b: i8) -> i8 {
    2 * b - 1
}

pub fn spin_to_bit(s: i8) -> i8 {
    (s + 1) / 2
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("coefficient {v} is not finite")))
    }
}
