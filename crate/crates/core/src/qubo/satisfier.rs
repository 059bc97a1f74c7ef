use serde::{Deserialize, Serialize};

use super::{Convention, QuadraticBinaryProblem};
use crate::error::{invalid, Result};
use crate::ldpc::ParityCheckMatrix;

/// Minimal number of binary ancillas encoding the half-sum of a degree-`d`
/// check: the least `t` with `2^(t+1) − 2 ≥ d − (d mod 2)`.
pub fn ancilla_count(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(invalid(format!("check degree {d} < 2")));
    }
    let even = d - d % 2;
    let mut t = 0usize;
    while (1usize << (t + 1)) - 2 < even {
        t += 1;
    }
    Ok(t)
}

/// Ancilla block of one check: variables `first .. first + count` (ancilla
/// numbering, offset by the bit count in the problem) with weights `2^s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckAncillas {
    pub check: usize,
    pub first: usize,
    pub count: usize,
}

/// Where each check's ancillas live in the variable space.
///
/// Bits occupy variables `0..num_bits`; ancillas follow, check by check, and
/// are never shared between checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaPlan {
    pub num_bits: usize,
    pub checks: Vec<CheckAncillas>,
}

impl AncillaPlan {
    /// The plan [`build_satisfier`] produces for `h`, without the problem.
    pub fn for_code(h: &ParityCheckMatrix) -> Result<Self> {
        let mut checks = Vec::with_capacity(h.num_checks());
        let mut next = 0;
        for m in 0..h.num_checks() {
            let count = ancilla_count(h.check(m).len())?;
            checks.push(CheckAncillas { check: m, first: next, count });
            next += count;
        }
        Ok(AncillaPlan {
            num_bits: h.num_bits(),
            checks,
        })
    }

    pub fn num_ancillas(&self) -> usize {
        self.checks.iter().map(|c| c.count).sum()
    }

    pub fn num_vars(&self) -> usize {
        self.num_bits + self.num_ancillas()
    }

    /// Problem variable ids of check `m`'s ancillas, least significant first.
    pub fn ancilla_vars(&self, m: usize) -> std::ops::Range<usize> {
        let c = &self.checks[m];
        self.num_bits + c.first..self.num_bits + c.first + c.count
    }

    /// Which check owns variable `v`, if it is an ancilla.
    pub fn owner(&self, v: usize) -> Option<usize> {
        if v < self.num_bits {
            return None;
        }
        let a = v - self.num_bits;
        self.checks
            .iter()
            .find(|c| a >= c.first && a < c.first + c.count)
            .map(|c| c.check)
    }

    /// Extend bit values with the ancilla setting that minimises each check's
    /// satisfier term, i.e. the binary encoding of `floor(sum / 2)`.
    pub fn complete(&self, h: &ParityCheckMatrix, bits: &[u8]) -> Result<Vec<i8>> {
        h.expect_len(bits.len())?;
        let mut values: Vec<i8> = bits.iter().map(|&b| (b & 1) as i8).collect();
        values.resize(self.num_vars(), 0);
        for c in &self.checks {
            let sum: usize = h.check(c.check).iter().map(|&j| (bits[j] & 1) as usize).sum();
            let half = sum / 2;
            for s in 0..c.count {
                values[self.num_bits + c.first + s] = ((half >> s) & 1) as i8;
            }
        }
        Ok(values)
    }

    /// Disjointness and sizing checks.
    pub fn validate(&self, h: &ParityCheckMatrix) -> Result<()> {
        let mut next = 0;
        for (m, c) in self.checks.iter().enumerate() {
            if c.check != m || c.first != next {
                return Err(invalid(format!("ancilla block {m} is out of order")));
            }
            let d = h.check(m).len();
            if c.count != ancilla_count(d)? {
                return Err(invalid(format!("check {m} has {} ancillas, expected {}", c.count, ancilla_count(d)?)));
            }
            next += c.count;
        }
        Ok(())
    }
}

/// Σ over checks of `(Σ_{j ∈ N(c)} q_j − 2·Σ_s 2^(s−1) e_s)²`, expanded with
/// `q² = q`.
///
/// For a degree-3 check the expansion is `+1` on each bit, `+4` on the
/// ancilla, `+2` on each bit pair and `−4` on each bit-ancilla pair.
pub fn build_satisfier(h: &ParityCheckMatrix) -> Result<(QuadraticBinaryProblem, AncillaPlan)> {
    for m in 0..h.num_checks() {
        let d = h.check(m).len();
        if d < 2 {
            return Err(invalid(format!("check {m} has degenerate degree {d}")));
        }
        // a satisfied check has half-sum at most d/2
        assert!((1usize << ancilla_count(d)?) > d / 2, "ancilla range too small for degree {d}");
    }
    let plan = AncillaPlan::for_code(h)?;
    let mut problem = QuadraticBinaryProblem::new(plan.num_vars(), Convention::Qubo);
    for m in 0..h.num_checks() {
        let mut terms: Vec<(usize, f64)> = h.check(m).iter().map(|&j| (j, 1.0)).collect();
        for (s, v) in plan.ancilla_vars(m).enumerate() {
            terms.push((v, -f64::from(1u32 << (s + 1))));
        }
        for (a, &(i, ci)) in terms.iter().enumerate() {
            problem.add_linear(i, ci * ci)?;
            for &(j, cj) in &terms[a + 1..] {
                problem.add_quadratic(i, j, 2.0 * ci * cj)?;
            }
        }
    }
    Ok((problem, plan))
}
