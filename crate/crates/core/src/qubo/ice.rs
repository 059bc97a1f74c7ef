use rand_distr::{Distribution, Normal};

use super::QuadraticBinaryProblem;
use crate::error::{invalid, Result};
use crate::rng;

/// Typical magnitude of control errors on biases and couplers.
pub const DEFAULT_ICE_SCALE: f64 = 1e-2;

/// Add zero-mean Gaussian noise (standard deviations `delta_h`, `delta_j`)
/// to every bias and every existing coupler. Offsets are untouched.
pub fn ice_perturb(problem: &QuadraticBinaryProblem, delta_h: f64, delta_j: f64, seed: u64) -> Result<QuadraticBinaryProblem> {
    for d in [delta_h, delta_j] {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(invalid(format!("noise scale {d} must be finite and non-negative")));
        }
    }
    let mut out = problem.clone();
    if delta_h > 0.0 {
        let normal = Normal::new(0.0, delta_h).expect("valid scale");
        let mut r = rng::stream(seed, 0);
        for h in out.linear.iter_mut() {
            *h += normal.sample(&mut r);
        }
    }
    if delta_j > 0.0 {
        let normal = Normal::new(0.0, delta_j).expect("valid scale");
        let mut r = rng::stream(seed, 1);
        for j in out.quadratic.values_mut() {
            *j += normal.sample(&mut r);
        }
    }
    Ok(out)
}
