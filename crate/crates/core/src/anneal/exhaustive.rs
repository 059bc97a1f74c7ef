use crate::error::{invalid, Result};
use crate::qubo::{Convention, QuadraticBinaryProblem};

pub const MAX_EXHAUSTIVE_VARS: usize = 26;

/// Every assignment attaining the global minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub assignments: Vec<Vec<i8>>,
}

/// Full enumeration in Gray-code order with incremental energies; candidates
/// are re-evaluated exactly before the minimum is taken.
pub fn exhaustive_solve(problem: &QuadraticBinaryProblem) -> Result<GroundStates> {
    let n = problem.num_vars();
    if n > MAX_EXHAUSTIVE_VARS {
        return Err(invalid(format!(
            "{n} variables exceed the exhaustive limit of {MAX_EXHAUSTIVE_VARS}"
        )));
    }
    let (low, high): (i8, i8) = match problem.convention() {
        Convention::Qubo => (0, 1),
        Convention::Ising => (-1, 1),
    };
    let adj = problem.adjacency();
    let mut x = vec![low; n];
    let mut field: Vec<f64> = problem.linear().to_vec();
    for (i, nb) in adj.iter().enumerate() {
        for &(j, c) in nb {
            field[i] += c * f64::from(x[j]);
        }
    }
    let mut energy = problem.energy_unchecked(&x);
    let scale = problem.max_abs_bias().max(problem.max_abs_coupler()).max(1.0) * (n.max(1) as f64);
    let slack = 1e-9 * scale;
    let mut best = energy;
    let mut candidates: Vec<Vec<i8>> = vec![x.clone()];
    let total: u64 = 1u64 << n;
    for step in 1..total {
        let i = step.trailing_zeros() as usize;
        let new = if x[i] == low { high } else { low };
        let d = f64::from(new - x[i]);
        energy += d * field[i];
        for &(j, c) in &adj[i] {
            field[j] += c * d;
        }
        x[i] = new;
        if energy < best - slack {
            best = energy;
            candidates.clear();
            candidates.push(x.clone());
        } else if energy <= best + slack {
            best = best.min(energy);
            candidates.push(x.clone());
        }
    }
    let exact: Vec<(f64, Vec<i8>)> = candidates
        .into_iter()
        .map(|a| (problem.energy_unchecked(&a), a))
        .collect();
    let min = exact.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * min.abs().max(1.0);
    let mut assignments: Vec<Vec<i8>> = exact
        .into_iter()
        .filter(|(e, _)| *e <= min + tol)
        .map(|(_, a)| a)
        .collect();
    assignments.sort();
    Ok(GroundStates {
        energy: min,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_problem() {
        let mut p = QuadraticBinaryProblem::new(0, Convention::Qubo);
        p.add_offset(2.5).unwrap();
        let g = exhaustive_solve(&p).unwrap();
        assert_eq!(g.energy, 2.5);
        assert_eq!(g.assignments, vec![Vec::<i8>::new()]);
    }

    #[test]
    fn ferromagnet_has_two_ground_states() {
        let mut p = QuadraticBinaryProblem::new(2, Convention::Ising);
        p.add_quadratic(0, 1, -1.0).unwrap();
        let g = exhaustive_solve(&p).unwrap();
        assert_eq!(g.energy, -1.0);
        assert_eq!(g.assignments, vec![vec![-1, -1], vec![1, 1]]);
    }

    #[test]
    fn too_large() {
        let p = QuadraticBinaryProblem::new(27, Convention::Qubo);
        assert!(exhaustive_solve(&p).is_err());
    }
}
