use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Best W2 per SNR, persisted as `{"<snr_db>": w2}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct W2Table {
    pub entries: BTreeMap<String, f64>,
}

impl W2Table {
    pub fn key(snr_db: f64) -> String {
        format!("{snr_db}")
    }

    pub fn insert(&mut self, snr_db: f64, w2: f64) {
        self.entries.insert(Self::key(snr_db), w2);
    }

    /// W2 for the table SNR nearest to `snr_db`.
    pub fn lookup(&self, snr_db: f64) -> Result<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (k, &w2) in &self.entries {
            let s: f64 = k
                .parse()
                .map_err(|_| Error::Config(format!("W2 table key {k:?} is not a number")))?;
            let d = (s - snr_db).abs();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, w2));
            }
        }
        best.map(|(_, w)| w).ok_or_else(|| Error::Config("W2 table is empty".into()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let table: W2Table = serde_json::from_str(&fs::read_to_string(path)?)?;
        for (k, &w) in &table.entries {
            if k.parse::<f64>().is_err() || !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("bad W2 table entry {k:?}: {w}")));
            }
        }
        Ok(table)
    }
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub value: f64,
    pub mean_ber: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2Calibration {
    pub table: W2Table,
    pub sweep: Vec<SweepPoint>,
    /// Whether the chosen W2 never decreases as SNR grows.
    pub non_decreasing: bool,
}

fn sorted_grid(grid: &[f64], what: &str) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(invalid(format!("{what} grid is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid(format!("{what} grid value {v} must be positive")));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Lowest value attaining the minimum BER.
fn argmin(points: &[SweepPoint]) -> f64 {
    let mut best = &points[0];
    for p in &points[1..] {
        if p.mean_ber < best.mean_ber {
            best = p;
        }
    }
    best.value
}

/// Evaluate `mean_ber(snr, w2)` over the grid and keep the best W2 per SNR;
/// ties go to the lowest W2.
pub fn calibrate_w2<F>(snrs: &[f64], w2_grid: &[f64], mut mean_ber: F) -> Result<W2Calibration>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let grid = sorted_grid(w2_grid, "W2")?;
    let mut table = W2Table::default();
    let mut sweep = Vec::new();
    let mut chosen = Vec::new();
    for &snr in snrs {
        let points = grid
            .iter()
            .map(|&w2| {
                Ok(SweepPoint {
                    snr_db: snr,
                    value: w2,
                    mean_ber: mean_ber(snr, w2)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let best = argmin(&points);
        table.insert(snr, best);
        chosen.push((snr, best));
        sweep.extend(points);
    }
    chosen.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_decreasing = chosen.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(W2Calibration {
        table,
        sweep,
        non_decreasing,
    })
}

pub const DEFAULT_JFERRO_GRID: [f64; 6] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JferroCalibration {
    pub best: f64,
    pub sweep: Vec<SweepPoint>,
}

/// Pick the |J_F| with the lowest mean BER; ties go to the smallest value.
pub fn calibrate_jferro<F>(grid: &[f64], snr_db: f64, mut mean_ber: F) -> Result<JferroCalibration>
where
    F: FnMut(f64) -> Result<f64>,
{
    let grid = sorted_grid(grid, "|J_F|")?;
    let sweep = grid
        .iter()
        .map(|&jf| {
            Ok(SweepPoint {
                snr_db,
                value: jf,
                mean_ber: mean_ber(jf)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JferroCalibration {
        best: argmin(&sweep),
        sweep,
    })
}
