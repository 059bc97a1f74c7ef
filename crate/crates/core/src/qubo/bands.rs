use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DecodingObjective;
use crate::error::{invalid, Result};
use crate::ldpc::{encode, generator, ParityCheckMatrix};
use crate::rng;

/// Energy range of one class of words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassBand {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl ClassBand {
    fn from_energies(e: &[f64]) -> Self {
        ClassBand {
            count: e.len(),
            min: e.iter().copied().fold(f64::INFINITY, f64::min),
            max: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Spread within the class.
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub valid: ClassBand,
    pub invalid: ClassBand,
    /// Lowest invalid energy minus highest valid energy.
    pub gap_iv: f64,
    pub gap_v: f64,
    pub gap_i: f64,
    /// Lowest-energy word among everything evaluated.
    pub minimum: Vec<u8>,
    pub minimum_energy: f64,
    /// No other evaluated word ties with `minimum`.
    pub minimum_unique: bool,
}

/// Sample valid codewords and random non-codewords, ancilla-minimise each and
/// summarise the two energy bands.
pub fn energy_bands(objective: &DecodingObjective, h: &ParityCheckMatrix, sample_size: usize, seed: u64) -> Result<BandReport> {
    energy_bands_with(objective, h, sample_size, seed, &[])
}

/// As [`energy_bands`], additionally evaluating the given words (sorted into
/// their class by syndrome).
pub fn energy_bands_with(
    objective: &DecodingObjective,
    h: &ParityCheckMatrix,
    sample_size: usize,
    seed: u64,
    extra: &[Vec<u8>],
) -> Result<BandReport> {
    if sample_size < 2 {
        return Err(invalid(format!("need at least 2 samples per class, got {sample_size}")));
    }
    let g = generator(h)?;
    let n = h.num_bits();
    let mut r = rng::stream(seed, 0);
    let mut words: Vec<Vec<u8>> = extra.to_vec();
    for _ in 0..sample_size {
        let u: Vec<u8> = (0..g.k).map(|_| r.random_range(0..2u8)).collect();
        words.push(encode(&u, &g)?);
    }
    let mut invalid_found = 0;
    let mut tries = 0;
    while invalid_found < sample_size {
        tries += 1;
        if tries > 1000 * sample_size {
            return Err(invalid("could not sample enough non-codewords"));
        }
        let w: Vec<u8> = (0..n).map(|_| r.random_range(0..2u8)).collect();
        if !h.is_codeword(&w)? {
            words.push(w);
            invalid_found += 1;
        }
    }

    let mut valid = Vec::new();
    let mut bad = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    let mut energies = Vec::with_capacity(words.len());
    for (idx, w) in words.iter().enumerate() {
        let e = objective.ancilla_min_energy(h, w)?;
        energies.push(e);
        if h.is_codeword(w)? {
            valid.push(e);
        } else {
            bad.push(e);
        }
        if best.is_none_or(|(b, _)| e < b) {
            best = Some((e, idx));
        }
    }
    let (min_e, min_idx) = best.expect("at least one word");
    let minimum = words[min_idx].clone();
    let minimum_unique = words
        .iter()
        .zip(&energies)
        .all(|(w, &e)| *w == minimum || e > min_e + 1e-12);
    let valid = ClassBand::from_energies(&valid);
    let bad = ClassBand::from_energies(&bad);
    Ok(BandReport {
        gap_iv: bad.min - valid.max,
        gap_v: valid.width(),
        gap_i: bad.width(),
        valid,
        invalid: bad,
        minimum,
        minimum_energy: min_e,
        minimum_unique,
    })
}
