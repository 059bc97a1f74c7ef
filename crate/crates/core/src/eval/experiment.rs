use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate_jferro, calibrate_w2, JferroCalibration, W2Calibration, W2Table};
use super::estimators::{ber, fer, rank_solutions, throughput, FerEstimate, InstanceDistribution, DEFAULT_FRAME_CAP};
use super::pipeline::{Backend, QbpDecoder};
use crate::anneal::AnnealConfig;
use crate::bp;
use crate::channel::{load_trace, modulate_bpsk, transmit_with, ChannelConfig, ReceivedVector};
use crate::chimera::{ChimeraCode, GridLayout, DEFAULT_JFERRO};
use crate::error::{Error, Result};
use crate::ldpc::{construct_regular_code, encode, generator, load_alist, CodeSpec, GeneratorMatrix, ParityCheckMatrix};
use crate::qubo::ObjectiveWeights;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSource {
    Alist(PathBuf),
    Construct(CodeSpec),
    /// Grid-native code on a `3k × 3` strip.
    ChimeraStrip(usize),
    /// Grid-native 420-bit code on 16 × 16 cells.
    ChimeraFull16,
}

impl CodeSource {
    pub fn load(&self) -> Result<ParityCheckMatrix> {
        match self {
            CodeSource::Alist(path) => {
                if !path.exists() {
                    return Err(Error::Config(format!("alist file {} not found", path.display())));
                }
                load_alist(path)
            }
            CodeSource::Construct(spec) => Ok(construct_regular_code(spec)?.matrix),
            CodeSource::ChimeraStrip(k) => Ok(ChimeraCode::build(&GridLayout::strip(*k)?)?.h),
            CodeSource::ChimeraFull16 => Ok(ChimeraCode::build(&GridLayout::full16())?.h),
        }
    }
}

/// Channel of the sweep. In trace mode every sweep point shifts the trace so
/// that its mean subcarrier SNR equals the point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    #[default]
    Awgn,
    Trace {
        #[serde(default)]
        subcarrier_snr_db: Option<Vec<f64>>,
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        interleaver_seed: u64,
    },
}

impl ChannelSpec {
    fn trace_values(&self) -> Result<Option<Vec<f64>>> {
        match self {
            ChannelSpec::Awgn => Ok(None),
            ChannelSpec::Trace {
                subcarrier_snr_db,
                path,
                ..
            } => match (subcarrier_snr_db, path) {
                (Some(v), None) if !v.is_empty() => Ok(Some(v.clone())),
                (None, Some(p)) => {
                    if !p.exists() {
                        return Err(Error::Config(format!("trace file {} not found", p.display())));
                    }
                    Ok(Some(load_trace(p)?))
                }
                _ => Err(Error::Config("trace channel needs exactly one of subcarrier_snr_db or path".into())),
            },
        }
    }

    fn at(&self, snr_db: f64, trace: Option<&[f64]>) -> ChannelConfig {
        match (self, trace) {
            (ChannelSpec::Trace { interleaver_seed, .. }, Some(t)) => {
                let mean = t.iter().sum::<f64>() / t.len() as f64;
                ChannelConfig::trace(t.iter().map(|v| v + snr_db - mean).collect(), *interleaver_seed, 0)
            }
            _ => ChannelConfig::awgn(snr_db, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum W2Choice {
    Fixed(f64),
    /// Lookup table JSON as written by calibration.
    Table(PathBuf),
    /// Calibrate on `instances` separate words per SNR before the run.
    Calibrate { grid: Vec<f64>, instances: usize },
}

/// Reads drawn per instance; `N_a` values are evaluated from this pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSettings {
    #[serde(default = "default_reads")]
    pub num_reads: usize,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default)]
    pub beta_range: Option<(f64, f64)>,
    #[serde(default = "default_anneal_time")]
    pub anneal_time_us: f64,
}

fn default_reads() -> usize {
    1000
}
fn default_sweeps() -> usize {
    1000
}
fn default_anneal_time() -> f64 {
    1.0
}
fn default_w1() -> f64 {
    1.0
}
fn default_jferro() -> f64 {
    DEFAULT_JFERRO
}
fn default_n_a() -> Vec<usize> {
    vec![1, 5, 10, 20, 50, 100]
}
fn default_frame_cap() -> u64 {
    DEFAULT_FRAME_CAP
}

impl Default for AnnealSettings {
    fn default() -> Self {
        AnnealSettings {
            num_reads: default_reads(),
            sweeps: default_sweeps(),
            beta_range: None,
            anneal_time_us: default_anneal_time(),
        }
    }
}

impl AnnealSettings {
    pub fn with_seed(&self, seed: u64) -> AnnealConfig {
        AnnealConfig {
            num_reads: self.num_reads,
            sweeps: self.sweeps,
            beta_range: self.beta_range,
            seed,
            anneal_time_us: self.anneal_time_us,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSource,
    #[serde(default)]
    pub channel: ChannelSpec,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_w1")]
    pub w1: f64,
    pub w2: W2Choice,
    #[serde(default = "default_jferro")]
    pub jferro: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub anneal: AnnealSettings,
    #[serde(default = "default_n_a")]
    pub n_a: Vec<usize>,
    /// Frame sizes `N_F` in bits; each a multiple of the block length.
    #[serde(default)]
    pub frame_bits: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    /// Min-sum baseline on the same received words.
    #[serde(default)]
    pub bp_iterations: Option<usize>,
    #[serde(default = "default_frame_cap")]
    pub frame_cap: u64,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse a config file; relative paths inside resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let CodeSource::Alist(p) = &mut self.code {
            fix(p);
        }
        if let ChannelSpec::Trace { path: Some(p), .. } = &mut self.channel {
            fix(p);
        }
        if let W2Choice::Table(p) = &mut self.w2 {
            fix(p);
        }
    }

    /// Checks that need no code.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db must be a non-empty list of finite values".into());
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.n_a.is_empty() || self.n_a.contains(&0) {
            return bad("n_a must be a non-empty list of positive read counts".into());
        }
        if !(self.w1 > 0.0 && self.w1.is_finite()) {
            return bad(format!("w1 must be positive, got {}", self.w1));
        }
        match &self.w2 {
            W2Choice::Fixed(w) if !(*w > 0.0 && w.is_finite()) => return bad(format!("w2 must be positive, got {w}")),
            W2Choice::Calibrate { grid, instances } if grid.is_empty() || *instances == 0 => {
                return bad("W2 calibration needs a grid and at least one instance".into())
            }
            _ => {}
        }
        if self.frame_cap == 0 {
            return bad("frame_cap must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if self.bp_iterations == Some(0) {
            return bad("bp_iterations must be positive".into());
        }
        self.anneal.with_seed(0).validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Frame checks against the block length.
    pub fn validate_frames(&self, block_len: usize) -> Result<()> {
        for &nf in &self.frame_bits {
            if nf == 0 || nf % block_len != 0 {
                return Err(Error::Config(format!(
                    "frame size {nf} is not a multiple of block length {block_len}"
                )));
            }
            if nf / block_len > self.instances {
                return Err(Error::Config(format!(
                    "frames of {} blocks need at least that many instances, got {}",
                    nf / block_len,
                    self.instances
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub w2: f64,
    pub n_a: usize,
    pub t_c_us: f64,
    pub mean_ber: f64,
    pub ci95: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerRow {
    pub snr_db: f64,
    pub n_f_bits: usize,
    pub n_a: usize,
    pub estimate: FerEstimate,
    pub throughput_bps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpRow {
    pub snr_db: f64,
    pub iterations: usize,
    pub mean_ber: f64,
    pub ci95: f64,
    pub std_err: f64,
    pub block_error_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub distribution: InstanceDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub broken_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bp_bit_errors: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrInstances {
    pub snr_db: f64,
    pub w2: f64,
    pub instances: Vec<InstanceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub n: usize,
    pub k: usize,
    pub ber: Vec<BerRow>,
    pub fer: Vec<FerRow>,
    pub bp: Vec<BpRow>,
    pub w2_table: W2Table,
    pub calibration: Option<W2Calibration>,
    pub per_snr: Vec<SnrInstances>,
}

/// Config echo, seeds and versions for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Manifest {
            tool: "qbp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        fs::write(dir.as_ref().join("manifest.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

// seed tags
const TAG_WORDS: u64 = 0x100;
const TAG_ANNEAL: u64 = 0x200;
const TAG_CAL_WORDS: u64 = 0x300;
const TAG_CAL_ANNEAL: u64 = 0x400;

struct Bench {
    h: ParityCheckMatrix,
    g: GeneratorMatrix,
    decoder: QbpDecoder,
    trace: Option<Vec<f64>>,
}

impl Bench {
    fn word(&self, channel: &ChannelConfig, seed: u64, i: usize) -> Result<(Vec<u8>, ReceivedVector)> {
        let mut g = rng::stream(seed, i as u64);
        let u: Vec<u8> = (0..self.g.k).map(|_| u8::from(g.random::<bool>())).collect();
        let c = encode(&u, &self.g)?;
        let rv = transmit_with(&modulate_bpsk(&c), channel, &mut g)?;
        Ok((c, rv))
    }

    fn instance(
        &self,
        config: &ExperimentConfig,
        channel: &ChannelConfig,
        w2: f64,
        seeds: (u64, u64),
        i: usize,
    ) -> Result<InstanceRecord> {
        let (c, rv) = self.word(channel, seeds.0, i)?;
        let weights = ObjectiveWeights::new(config.w1, w2)?;
        let anneal = config.anneal.with_seed(rng::derive(seeds.1, i as u64));
        let out = self.decoder.decode(&rv.posteriors(), weights, &anneal)?;
        let distribution = rank_solutions(&out.samples, &c, self.g.info_positions(), i)?;
        let bp_bit_errors = match config.bp_iterations {
            Some(iters) => {
                let d = bp::decode_llr(&self.h, rv.llrs(), iters)?;
                Some(self.g.info_positions().iter().filter(|&&p| d.bits[p] != c[p]).count())
            }
            None => None,
        };
        Ok(InstanceRecord {
            distribution,
            broken_fraction: out.broken_fraction,
            bp_bit_errors,
        })
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn prepare(config: &ExperimentConfig, jferro: f64) -> Result<Bench> {
    config.validate()?;
    let h = config.code.load()?;
    config.validate_frames(h.num_bits())?;
    let trace = config.channel.trace_values()?;
    let g = generator(&h)?;
    let decoder = QbpDecoder::new(h.clone(), config.backend.clone(), jferro)?;
    Ok(Bench { h, g, decoder, trace })
}

fn in_pool<T: Send>(config: &ExperimentConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
        None => f(),
    }
}

/// Run the full sweep and write `ber.csv`, `fer.csv`, `throughput.csv`,
/// `bp.csv` (with a baseline), `w2_table.json`, per-SNR instance JSON and a
/// manifest into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<ExperimentResults> {
    let bench = prepare(config, config.jferro)?;
    let results = in_pool(config, || sweep(config, &bench))?;
    write_outputs(config, &results, out_dir.as_ref())?;
    Ok(results)
}

/// Only the W2 step of [`run_experiment`]; the config must ask for
/// calibration. Writes `w2_table.json`, `w2_sweep.json` and a manifest.
pub fn calibrate_experiment(config: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<W2Calibration> {
    if !matches!(config.w2, W2Choice::Calibrate { .. }) {
        return Err(Error::Config("calibration needs \"w2\": {\"calibrate\": ...}".into()));
    }
    let bench = prepare(config, config.jferro)?;
    let (_, cal) = in_pool(config, || w2_for(config, &bench))?;
    let cal = cal.expect("calibrate choice");
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    cal.table.save(dir.join("w2_table.json"))?;
    fs::write(dir.join("w2_sweep.json"), serde_json::to_string_pretty(&cal)? + "\n")?;
    let mut manifest = Manifest::new("calibrate", Some(config.seed), serde_json::to_value(config)?);
    manifest.outputs = vec!["w2_table.json".into(), "w2_sweep.json".into()];
    manifest.write(dir)?;
    Ok(cal)
}

/// Mean BER at the largest `N_a` on the first SNR point for every |J_F| in
/// `grid`, using the config's W2 choice. Calibration words are separate from
/// the evaluation words.
pub fn calibrate_jferro_experiment(config: &ExperimentConfig, grid: &[f64]) -> Result<JferroCalibration> {
    config.validate()?;
    let snr = config.snr_db[0];
    calibrate_jferro(grid, snr, |jf| {
        let bench = prepare(config, jf)?;
        in_pool(config, || {
            let (table, _) = w2_for(config, &bench)?;
            let w2 = table.lookup(snr)?;
            let k = bench.g.k;
            let pool_max = *config.n_a.iter().max().expect("validated");
            let channel = config.channel.at(snr, bench.trace.as_deref());
            let seeds = (rng::derive(config.seed, TAG_CAL_WORDS), rng::derive(config.seed, TAG_CAL_ANNEAL));
            let bers = (0..config.instances)
                .into_par_iter()
                .map(|i| ber(&bench.instance(config, &channel, w2, seeds, i)?.distribution, pool_max, k))
                .collect::<Result<Vec<f64>>>()?;
            Ok(mean_and_se(&bers).0)
        })
    })
}

fn w2_for(config: &ExperimentConfig, bench: &Bench) -> Result<(W2Table, Option<W2Calibration>)> {
    let k = bench.g.k;
    let pool_max = *config.n_a.iter().max().expect("validated");
    Ok(match &config.w2 {
        W2Choice::Fixed(w) => {
            let mut t = W2Table::default();
            for &s in &config.snr_db {
                t.insert(s, *w);
            }
            (t, None)
        }
        W2Choice::Table(path) => {
            if !path.exists() {
                return Err(Error::Config(format!("W2 table {} not found", path.display())));
            }
            let loaded = W2Table::load(path)?;
            let mut t = W2Table::default();
            for &s in &config.snr_db {
                t.insert(s, loaded.lookup(s)?);
            }
            (t, None)
        }
        W2Choice::Calibrate { grid, instances } => {
            let snr_index = |snr: f64| config.snr_db.iter().position(|&s| s == snr).unwrap_or(0) as u64;
            let cal = calibrate_w2(&config.snr_db, grid, |snr, w2| {
                let si = snr_index(snr);
                let channel = config.channel.at(snr, bench.trace.as_deref());
                let seeds = (
                    rng::derive(config.seed, TAG_CAL_WORDS + si),
                    rng::derive(config.seed, TAG_CAL_ANNEAL + si),
                );
                let bers = (0..*instances)
                    .into_par_iter()
                    .map(|i| {
                        let r = bench.instance(config, &channel, w2, seeds, i)?;
                        ber(&r.distribution, pool_max, k)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(mean_and_se(&bers).0)
            })?;
            (cal.table.clone(), Some(cal))
        }
    })
}

fn sweep(config: &ExperimentConfig, bench: &Bench) -> Result<ExperimentResults> {
    let n = bench.h.num_bits();
    let k = bench.g.k;

    let (w2_table, calibration) = w2_for(config, bench)?;

    let mut results = ExperimentResults {
        n,
        k,
        ber: Vec::new(),
        fer: Vec::new(),
        bp: Vec::new(),
        w2_table: w2_table.clone(),
        calibration,
        per_snr: Vec::new(),
    };
    for (si, &snr) in config.snr_db.iter().enumerate() {
        let w2 = w2_table.lookup(snr)?;
        let channel = config.channel.at(snr, bench.trace.as_deref());
        let seeds = (
            rng::derive(config.seed, TAG_WORDS + si as u64),
            rng::derive(config.seed, TAG_ANNEAL + si as u64),
        );
        let records = (0..config.instances)
            .into_par_iter()
            .map(|i| bench.instance(config, &channel, w2, seeds, i))
            .collect::<Result<Vec<_>>>()?;
        let dists: Vec<InstanceDistribution> = records.iter().map(|r| r.distribution.clone()).collect();
        for &n_a in &config.n_a {
            let bers = dists.iter().map(|d| ber(d, n_a, k)).collect::<Result<Vec<_>>>()?;
            let (mean, se) = mean_and_se(&bers);
            results.ber.push(BerRow {
                snr_db: snr,
                w2,
                n_a,
                t_c_us: n_a as f64 * config.anneal.anneal_time_us,
                mean_ber: mean,
                ci95: 1.96 * se,
                std_err: se,
            });
        }
        for &n_f in &config.frame_bits {
            for &n_a in &config.n_a {
                let seed = rng::derive(config.seed, ((si as u64) << 40) ^ ((n_f as u64) << 20) ^ n_a as u64);
                let estimate = fer(&dists, n_f, n, n_a, config.frame_cap, seed)?;
                // per block: K message bits every N_a·T_a
                let t_c_s = n_a as f64 * config.anneal.anneal_time_us * 1e-6;
                let throughput_bps = throughput(k as f64, t_c_s, estimate.fer)?;
                results.fer.push(FerRow {
                    snr_db: snr,
                    n_f_bits: n_f,
                    n_a,
                    estimate,
                    throughput_bps,
                });
            }
        }
        if let Some(iters) = config.bp_iterations {
            let errs: Vec<f64> = records
                .iter()
                .map(|r| r.bp_bit_errors.expect("baseline requested") as f64 / k as f64)
                .collect();
            let (mean, se) = mean_and_se(&errs);
            results.bp.push(BpRow {
                snr_db: snr,
                iterations: iters,
                mean_ber: mean,
                ci95: 1.96 * se,
                std_err: se,
                block_error_rate: errs.iter().filter(|&&e| e > 0.0).count() as f64 / errs.len() as f64,
            });
        }
        results.per_snr.push(SnrInstances {
            snr_db: snr,
            w2,
            instances: records,
        });
    }
    if let Some(cal) = &results.calibration {
        if !cal.non_decreasing {
            eprintln!("note: calibrated W2 is not non-decreasing in SNR");
        }
    }
    Ok(results)
}

fn write_outputs(config: &ExperimentConfig, r: &ExperimentResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("instances"))?;
    let mut outputs = vec!["ber.csv".to_string(), "fer.csv".into(), "throughput.csv".into()];

    let mut w = csv::Writer::from_path(dir.join("ber.csv"))?;
    w.write_record(["snr_db", "w2", "n_a", "t_c_us", "mean_ber", "ci95"])?;
    for row in &r.ber {
        w.write_record([
            row.snr_db.to_string(),
            row.w2.to_string(),
            row.n_a.to_string(),
            row.t_c_us.to_string(),
            row.mean_ber.to_string(),
            row.ci95.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("fer.csv"))?;
    w.write_record(["snr_db", "n_f_bits", "n_a", "fer"])?;
    let mut t = csv::Writer::from_path(dir.join("throughput.csv"))?;
    t.write_record(["snr_db", "n_f_bits", "n_a", "t_c_us", "fer", "frames", "throughput_bps"])?;
    for row in &r.fer {
        w.write_record([
            row.snr_db.to_string(),
            row.n_f_bits.to_string(),
            row.n_a.to_string(),
            row.estimate.fer.to_string(),
        ])?;
        t.write_record([
            row.snr_db.to_string(),
            row.n_f_bits.to_string(),
            row.n_a.to_string(),
            (row.n_a as f64 * config.anneal.anneal_time_us).to_string(),
            row.estimate.fer.to_string(),
            row.estimate.frames.to_string(),
            row.throughput_bps.to_string(),
        ])?;
    }
    w.flush()?;
    t.flush()?;

    if !r.bp.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("bp.csv"))?;
        w.write_record(["snr_db", "iterations", "mean_ber", "ci95", "block_error_rate"])?;
        for row in &r.bp {
            w.write_record([
                row.snr_db.to_string(),
                row.iterations.to_string(),
                row.mean_ber.to_string(),
                row.ci95.to_string(),
                row.block_error_rate.to_string(),
            ])?;
        }
        w.flush()?;
        outputs.push("bp.csv".into());
    }

    r.w2_table.save(dir.join("w2_table.json"))?;
    outputs.push("w2_table.json".into());
    if let Some(cal) = &r.calibration {
        fs::write(dir.join("w2_sweep.json"), serde_json::to_string_pretty(cal)? + "\n")?;
        outputs.push("w2_sweep.json".into());
    }
    for (si, s) in r.per_snr.iter().enumerate() {
        let name = format!("instances/snr_{si:02}.json");
        fs::write(dir.join(&name), serde_json::to_string(s)? + "\n")?;
        outputs.push(name);
    }

    let mut manifest = Manifest::new("evaluate", Some(config.seed), serde_json::to_value(config)?);
    manifest.outputs = outputs;
    manifest.write(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "code": {"construct": {"n": 12, "bit_degree": 2, "check_degree": 3, "seed": 1}},
                "snr_db": [2.0, 6.0],
                "w2": {"fixed": 0.05},
                "backend": "exhaustive",
                "n_a": [1, 10],
                "frame_bits": [24],
                "instances": 6,
                "seed": 11,
                "bp_iterations": 10
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn smoke_run_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let config = smoke();
        let r = run_experiment(&config, a.path()).unwrap();
        run_experiment(&config, b.path()).unwrap();
        assert_eq!(r.ber.len(), 4);
        assert_eq!(r.fer.len(), 4);
        assert_eq!(r.bp.len(), 2);
        for name in ["ber.csv", "fer.csv", "throughput.csv", "bp.csv", "manifest.json", "instances/snr_01.json"] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn config_errors() {
        let mut c = smoke();
        c.frame_bits = vec![18];
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(run_experiment(&c, dir.path()), Err(Error::Config(_))));
        let mut c = smoke();
        c.frame_bits = vec![12 * 7];
        assert!(matches!(run_experiment(&c, dir.path()), Err(Error::Config(_))));
        let mut c = smoke();
        c.code = CodeSource::Alist("/nonexistent/code.alist".into());
        assert!(matches!(run_experiment(&c, dir.path()), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"code": "chimera_full16", "bogus": 1}"#).is_err());
    }
}
