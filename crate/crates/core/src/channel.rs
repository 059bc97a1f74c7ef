//! BPSK over real AWGN or trace-driven per-subcarrier channels.
//!
//! SNR is per symbol with unit symbol energy: `σ² = 10^(−snr_db/10)`.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelMode {
    Awgn { snr_db: f64 },
    Trace { subcarrier_snr_db: Vec<f64>, interleaver_seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(flatten)]
    pub mode: ChannelMode,
    #[serde(default)]
    pub seed: u64,
}

impl ChannelConfig {
    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        ChannelConfig {
            mode: ChannelMode::Awgn { snr_db },
            seed,
        }
    }

    pub fn trace(subcarrier_snr_db: Vec<f64>, interleaver_seed: u64, seed: u64) -> Self {
        ChannelConfig {
            mode: ChannelMode::Trace {
                subcarrier_snr_db,
                interleaver_seed,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.mode {
            ChannelMode::Awgn { snr_db } if !snr_db.is_finite() => {
                Err(invalid(format!("SNR must be finite, got {snr_db}")))
            }
            ChannelMode::Trace { subcarrier_snr_db, .. } => {
                if subcarrier_snr_db.is_empty() {
                    return Err(invalid("trace has no subcarriers"));
                }
                if let Some(v) = subcarrier_snr_db.iter().find(|v| !v.is_finite()) {
                    return Err(invalid(format!("trace SNR must be finite, got {v}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Noise variance seen by each of `n` symbols.
    pub fn sigma2_profile(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match &self.mode {
            ChannelMode::Awgn { snr_db } => vec![snr_to_sigma2(*snr_db); n],
            ChannelMode::Trace {
                subcarrier_snr_db,
                interleaver_seed,
            } => {
                let mut positions: Vec<usize> = (0..n).collect();
                positions.shuffle(&mut rng::stream(*interleaver_seed, 0));
                let mut profile = vec![0.0; n];
                // the j-th interleaved position rides subcarrier j mod S
                for (j, &pos) in positions.iter().enumerate() {
                    profile[pos] = snr_to_sigma2(subcarrier_snr_db[j % subcarrier_snr_db.len()]);
                }
                profile
            }
        })
    }
}

/// Received samples with the per-symbol noise variance they were drawn with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceivedVector {
    pub y: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl ReceivedVector {
    pub fn new(y: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        if y.len() != sigma2.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: sigma2.len(),
            });
        }
        if let Some(s) = sigma2.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
            return Err(invalid(format!("sigma2 must be positive, got {s}")));
        }
        Ok(ReceivedVector { y, sigma2 })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `Pr(bit = 1 | y)` per symbol.
    pub fn posteriors(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(&self.sigma2)
            .map(|(&y, &s2)| posterior_prob(y, s2))
            .collect()
    }

    pub fn llrs(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(&self.sigma2)
            .map(|(&y, &s2)| -2.0 * y / s2)
            .collect()
    }

    /// CSV with header `y,sigma2`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["y", "sigma2"])?;
        for (y, s) in self.y.iter().zip(&self.sigma2) {
            w.write_record([y.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut y = Vec::new();
        let mut sigma2 = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or(Error::Parse {
                        line: i + 2,
                        msg: format!("expected numeric column {k}"),
                    })
            };
            y.push(field(0)?);
            sigma2.push(field(1)?);
        }
        ReceivedVector::new(y, sigma2)
    }
}

/// BPSK: 0 → −1, 1 → +1.
pub fn modulate_bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

pub fn snr_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Add Gaussian noise to BPSK symbols; deterministic in `config.seed`.
pub fn transmit(symbols: &[f64], config: &ChannelConfig) -> Result<ReceivedVector> {
    transmit_with(symbols, config, &mut rng::stream(config.seed, 0))
}

/// [`transmit`] drawing noise from a caller-supplied generator.
pub fn transmit_with<R: Rng>(symbols: &[f64], config: &ChannelConfig, rng: &mut R) -> Result<ReceivedVector> {
    if let Some(s) = symbols.iter().find(|&&s| s != 1.0 && s != -1.0) {
        return Err(invalid(format!("symbol {s} is not BPSK")));
    }
    let sigma2 = config.sigma2_profile(symbols.len())?;
    let y = symbols
        .iter()
        .zip(&sigma2)
        .map(|(&x, &s2)| {
            let z: f64 = StandardNormal.sample(rng);
            x + s2.sqrt() * z
        })
        .collect();
    ReceivedVector::new(y, sigma2)
}

/// `Pr(q = 1 | y) = 1 / (1 + e^(−2y/σ²))`.
pub fn posterior_prob(y: f64, sigma2: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * y / sigma2).exp())
}

/// One SNR value in dB per line; blank lines are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("not a number: {t:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("non-finite SNR {t:?}"),
            });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(invalid("trace file holds no SNR values"));
    }
    Ok(out)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_trace(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_mapping() {
        assert_eq!(modulate_bpsk(&[0, 1, 0]), vec![-1.0, 1.0, -1.0]);
        assert_eq!(modulate_bpsk(&[0; 4]), vec![-1.0; 4]);
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_sigma2(0.0), 1.0);
        assert!((snr_to_sigma2(10.0) - 0.1).abs() < 1e-15);
        let vals: Vec<f64> = (-5..15).map(|d| snr_to_sigma2(d as f64)).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn posterior_examples() {
        assert_eq!(posterior_prob(0.0, 1.0), 0.5);
        assert!((posterior_prob(1.0, 1.0) - 0.880_797_077_977_882_3).abs() < 1e-12);
        for y in [-2.0, -0.3, 0.7, 3.1] {
            assert!((posterior_prob(y, 0.8) + posterior_prob(-y, 0.8) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_limit() {
        let x = modulate_bpsk(&[0, 1, 1, 0]);
        let r = transmit(&x, &ChannelConfig::awgn(300.0, 1)).unwrap();
        for (a, b) in r.y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_subcarrier_trace_is_awgn() {
        let x = modulate_bpsk(&[0, 1, 1, 0, 1, 0, 0, 1]);
        let a = transmit(&x, &ChannelConfig::awgn(4.0, 9)).unwrap();
        let t = transmit(&x, &ChannelConfig::trace(vec![4.0], 3, 9)).unwrap();
        assert_eq!(a, t);
    }

    #[test]
    fn trace_profile_matches_subcarriers() {
        let cfg = ChannelConfig::trace(vec![0.0, 10.0, 20.0], 5, 1);
        let p = cfg.sigma2_profile(30).unwrap();
        for target in [1.0, snr_to_sigma2(10.0), snr_to_sigma2(20.0)] {
            assert_eq!(p.iter().filter(|&&s| s == target).count(), 10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(transmit(&[0.5], &ChannelConfig::awgn(1.0, 0)).is_err());
        assert!(transmit(&[1.0], &ChannelConfig::trace(vec![], 0, 0)).is_err());
        assert!(ReceivedVector::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn trace_parsing() {
        assert_eq!(parse_trace("10\n20\n").unwrap(), vec![10.0, 20.0]);
        assert!(parse_trace("").is_err());
        match parse_trace("10\nabc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
