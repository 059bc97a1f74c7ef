use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qbp_core::anneal::{import_sampleset, simulated_anneal, AnnealConfig};
use qbp_core::bp;
use qbp_core::channel::{load_trace, modulate_bpsk, transmit as send, ChannelConfig, ReceivedVector};
use qbp_core::chimera::{embed_code, verify_embedding, ChimeraCode, ChimeraGraph, GridLayout, DEFAULT_JFERRO};
use qbp_core::eval::{
    calibrate_experiment, calibrate_jferro_experiment, run_experiment, Backend, ExperimentConfig, Manifest,
    QbpDecoder,
};
use qbp_core::ldpc::{construct_regular_code, encode as encode_word, generator, load_alist, random_message, save_alist, CodeSpec};
use qbp_core::qubo::{build_satisfier, load_problem, save_problem, ObjectiveWeights};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::params::{apply_sets, out_dir, resolve};
use crate::CliError;

type Res = Result<(), CliError>;

fn require_file(path: &Path) -> Res {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("input file {} not found", path.display())))
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Res {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn finish(dir: &Path, command: &str, seed: Option<u64>, config: Value, outputs: &[&str]) -> Res {
    let mut m = Manifest::new(command, seed, config);
    m.outputs = outputs.iter().map(|s| s.to_string()).collect();
    m.write(dir)?;
    Ok(())
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn parse_bits(s: &str) -> Result<Vec<u8>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Config(format!("message must be a 0/1 string, got {c:?}"))),
        })
        .collect()
}

// ---- construct

#[derive(Args, Serialize)]
pub struct ConstructArgs {
    /// JSON file with any of the flag keys.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, alias = "out")]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bit_degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    check_degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target_girth: Option<usize>,
    /// Grid-native code instead: `full16` or `strip:K`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    chimera: Option<String>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConstructParams {
    #[serde(default)]
    n: Option<usize>,
    #[serde(default = "two")]
    bit_degree: usize,
    #[serde(default = "three")]
    check_degree: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    target_girth: Option<usize>,
    #[serde(default)]
    chimera: Option<String>,
}

fn two() -> usize {
    2
}
fn three() -> usize {
    3
}

pub fn construct(args: ConstructArgs) -> Res {
    let (p, _): (ConstructParams, _) = resolve(args.config.as_deref(), &args)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let (h, target_met) = match (&p.chimera, p.n) {
        (Some(kind), None) => {
            let layout = match kind.as_str() {
                "full16" => GridLayout::full16(),
                s => match s.strip_prefix("strip:").and_then(|k| k.parse().ok()) {
                    Some(k) => GridLayout::strip(k)?,
                    None => return Err(CliError::Config(format!("unknown chimera layout {s:?}"))),
                },
            };
            (ChimeraCode::build(&layout)?.h, true)
        }
        (None, Some(n)) => {
            let mut spec = CodeSpec::new(n, p.bit_degree, p.check_degree).with_seed(p.seed);
            spec.target_girth = p.target_girth;
            let c = construct_regular_code(&spec)?;
            (c.matrix, c.target_met)
        }
        _ => return Err(CliError::Config("give exactly one of n or chimera".into())),
    };
    save_alist(&h, dir.join("code.alist"))?;
    let k = generator(&h)?.k;
    let summary = json!({
        "n": h.num_bits(),
        "m": h.num_checks(),
        "k": k,
        "girth": h.girth().to_string(),
        "target_met": target_met,
    });
    write_json(&dir, "code.json", &summary)?;
    finish(&dir, "construct", Some(p.seed), serde_json::to_value(&p)?, &["code.alist", "code.json"])
}

// ---- encode

#[derive(Args, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alist: Option<PathBuf>,
    /// Message bits as a 0/1 string; random from `seed` when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EncodeParams {
    alist: PathBuf,
    #[serde(default)]
    message: Option<String>,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Encoded {
    message: String,
    codeword: String,
    info_positions: Vec<usize>,
}

pub fn encode(args: EncodeArgs) -> Res {
    let (p, _): (EncodeParams, _) = resolve(args.config.as_deref(), &args)?;
    require_file(&p.alist)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let g = generator(&load_alist(&p.alist)?)?;
    let u = match &p.message {
        Some(s) => parse_bits(s)?,
        None => random_message(g.k, p.seed),
    };
    if u.len() != g.k {
        return Err(CliError::Config(format!("message has {} bits, code needs {}", u.len(), g.k)));
    }
    let c = encode_word(&u, &g)?;
    let out = Encoded {
        message: bits_string(&u),
        codeword: bits_string(&c),
        info_positions: g.info_positions().to_vec(),
    };
    write_json(&dir, "encoded.json", &out)?;
    finish(&dir, "encode", Some(p.seed), serde_json::to_value(&p)?, &["encoded.json"])
}

// ---- transmit

#[derive(Args, Serialize)]
pub struct TransmitArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    /// `encoded.json` from `qbp encode`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    encoded: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    /// Per-subcarrier SNR file (one dB value per line).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    interleaver_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TransmitParams {
    encoded: PathBuf,
    #[serde(default)]
    snr_db: Option<f64>,
    #[serde(default)]
    trace: Option<PathBuf>,
    #[serde(default)]
    interleaver_seed: u64,
    #[serde(default)]
    seed: u64,
}

fn transmit_cmd(p: &TransmitParams) -> Result<ReceivedVector, CliError> {
    require_file(&p.encoded)?;
    let enc: Encoded = serde_json::from_str(&fs::read_to_string(&p.encoded)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", p.encoded.display())))?;
    let c = parse_bits(&enc.codeword)?;
    let channel = match (&p.snr_db, &p.trace) {
        (Some(snr), None) => ChannelConfig::awgn(*snr, p.seed),
        (None, Some(t)) => {
            require_file(t)?;
            ChannelConfig::trace(load_trace(t)?, p.interleaver_seed, p.seed)
        }
        _ => return Err(CliError::Config("give exactly one of snr_db or trace".into())),
    };
    Ok(send(&modulate_bpsk(&c), &channel)?)
}

pub fn transmit(args: TransmitArgs) -> Res {
    let (p, _): (TransmitParams, _) = resolve(args.config.as_deref(), &args)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    transmit_cmd(&p)?.write_csv(dir.join("received.csv"))?;
    finish(&dir, "transmit", Some(p.seed), serde_json::to_value(&p)?, &["received.csv"])
}

// ---- decode-bp

#[derive(Args, Serialize)]
pub struct DecodeBpArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alist: Option<PathBuf>,
    /// `received.csv` from `qbp transmit`.
    #[arg(long, alias = "y")]
    #[serde(skip_serializing_if = "Option::is_none")]
    received: Option<PathBuf>,
    /// Noise variance for every symbol, replacing the file's column.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    #[arg(long, alias = "max-iters")]
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DecodeBpParams {
    alist: PathBuf,
    received: PathBuf,
    #[serde(default)]
    sigma2: Option<f64>,
    #[serde(default = "ten")]
    iterations: usize,
}

fn ten() -> usize {
    10
}

pub fn decode_bp(args: DecodeBpArgs) -> Res {
    let (p, _): (DecodeBpParams, _) = resolve(args.config.as_deref(), &args)?;
    require_file(&p.alist)?;
    require_file(&p.received)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let h = load_alist(&p.alist)?;
    let rv = ReceivedVector::read_csv(&p.received)?;
    let llr = match p.sigma2 {
        Some(s2) => bp::init_llr(&rv.y, s2)?,
        None => rv.llrs(),
    };
    let out = bp::decode_llr(&h, llr, p.iterations)?;
    let g = generator(&h)?;
    let result = json!({
        "bits": bits_string(&out.bits),
        "message": bits_string(&g.extract_message(&out.bits)),
        "iterations": out.iterations,
        "converged": out.converged,
    });
    write_json(&dir, "bp.json", &result)?;
    finish(&dir, "decode-bp", None, serde_json::to_value(&p)?, &["bp.json"])
}

// ---- decode-qbp

#[derive(Args, Serialize)]
pub struct DecodeQbpArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alist: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    received: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w2: Option<f64>,
    /// `exhaustive`, `sa` or `embedded` (with `--grid`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    jferro: Option<f64>,
    #[arg(long, alias = "reads")]
    #[serde(skip_serializing_if = "Option::is_none")]
    num_reads: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sweeps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DecodeQbpParams {
    alist: PathBuf,
    received: PathBuf,
    #[serde(default = "one")]
    w1: f64,
    w2: f64,
    #[serde(default = "sa")]
    backend: String,
    #[serde(default)]
    grid: Option<usize>,
    #[serde(default = "jf")]
    jferro: f64,
    #[serde(default = "hundred")]
    num_reads: usize,
    #[serde(default = "thousand")]
    sweeps: usize,
    #[serde(default)]
    seed: u64,
}

fn one() -> f64 {
    1.0
}
fn sa() -> String {
    "sa".into()
}
fn jf() -> f64 {
    DEFAULT_JFERRO
}
fn hundred() -> usize {
    100
}
fn thousand() -> usize {
    1000
}

fn backend_of(name: &str, grid: Option<usize>) -> Result<Backend, CliError> {
    match (name, grid) {
        ("exhaustive", None) => Ok(Backend::Exhaustive),
        ("sa", None) => Ok(Backend::Sa),
        ("embedded", Some(grid)) => Ok(Backend::Embedded { grid }),
        ("embedded", None) => Err(CliError::Config("embedded backend needs grid".into())),
        (b, Some(_)) if b != "embedded" => Err(CliError::Config("grid only applies to the embedded backend".into())),
        (b, _) => Err(CliError::Config(format!("unknown backend {b:?}"))),
    }
}

pub fn decode_qbp(args: DecodeQbpArgs) -> Res {
    let (p, _): (DecodeQbpParams, _) = resolve(args.config.as_deref(), &args)?;
    require_file(&p.alist)?;
    require_file(&p.received)?;
    let backend = backend_of(&p.backend, p.grid)?;
    let weights = ObjectiveWeights::new(p.w1, p.w2)?;
    let anneal = AnnealConfig {
        num_reads: p.num_reads,
        sweeps: p.sweeps,
        seed: p.seed,
        ..AnnealConfig::default()
    };
    anneal.validate()?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let h = load_alist(&p.alist)?;
    let rv = ReceivedVector::read_csv(&p.received)?;
    let decoder = QbpDecoder::new(h.clone(), backend, p.jferro)?;
    let out = decoder.decode(&rv.posteriors(), weights, &anneal)?;
    let g = generator(&h)?;
    let result = json!({
        "bits": bits_string(&out.bits),
        "message": bits_string(&g.extract_message(&out.bits)),
        "energy": out.energy,
        "is_codeword": h.is_codeword(&out.bits)?,
        "distinct_samples": out.samples.records.len(),
        "broken_fraction": out.broken_fraction,
    });
    write_json(&dir, "qbp.json", &result)?;
    out.samples.save(dir.join("samples.json"))?;
    finish(&dir, "decode-qbp", Some(p.seed), serde_json::to_value(&p)?, &["qbp.json", "samples.json"])
}

// ---- embed

#[derive(Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alist: Option<PathBuf>,
    /// Chimera size in cells per side.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    jferro: Option<f64>,
    /// Embed the full objective for this received word instead of the
    /// satisfier alone.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    received: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w2: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EmbedParams {
    alist: PathBuf,
    grid: usize,
    #[serde(default = "jf")]
    jferro: f64,
    #[serde(default)]
    received: Option<PathBuf>,
    #[serde(default = "one")]
    w1: f64,
    #[serde(default)]
    w2: Option<f64>,
}

pub fn embed(args: EmbedArgs) -> Res {
    let (p, _): (EmbedParams, _) = resolve(args.config.as_deref(), &args)?;
    require_file(&p.alist)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let h = load_alist(&p.alist)?;
    let graph = ChimeraGraph::new(p.grid)?;
    let problem = match &p.received {
        Some(r) => {
            require_file(r)?;
            let w2 = p.w2.ok_or_else(|| CliError::Config("w2 is required with received".into()))?;
            let rv = ReceivedVector::read_csv(r)?;
            let decoder = QbpDecoder::new(h.clone(), Backend::Sa, p.jferro)?;
            decoder.objective(&rv.posteriors(), ObjectiveWeights::new(p.w1, w2)?)?
        }
        None => build_satisfier(&h)?.0.scaled(p.w1),
    };
    let (emb, hw) = embed_code(&problem, &h, &graph, p.jferro)?;
    let report = verify_embedding(&emb, &problem, &graph);
    emb.save(dir.join("embedding.json"))?;
    save_problem(&hw.to_file(), dir.join("hardware.json"))?;
    let summary = json!({
        "passed": report.passed(),
        "report": report,
        "checks": h.num_checks(),
        "level2_checks": emb.placement.num_level2(),
        "chain_histogram": emb.chain_histogram(),
        "max_abs_coupler": hw.problem.max_abs_coupler(),
        "chain_constant": hw.chain_constant(),
    });
    write_json(&dir, "report.json", &summary)?;
    finish(&dir, "embed", None, serde_json::to_value(&p)?, &["embedding.json", "hardware.json", "report.json"])?;
    if !report.passed() {
        return Err(CliError::Runtime(anyhow::anyhow!("embedding failed verification")));
    }
    Ok(())
}

// ---- sample

#[derive(Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    /// Problem JSON as written by `embed` or the library.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<PathBuf>,
    /// Validate an externally produced sample set instead of annealing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    import: Option<PathBuf>,
    #[arg(long, alias = "reads")]
    #[serde(skip_serializing_if = "Option::is_none")]
    num_reads: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sweeps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SampleParams {
    problem: PathBuf,
    #[serde(default)]
    import: Option<PathBuf>,
    #[serde(default = "hundred")]
    num_reads: usize,
    #[serde(default = "thousand")]
    sweeps: usize,
    #[serde(default)]
    seed: u64,
}

pub fn sample(args: SampleArgs) -> Res {
    let (p, _): (SampleParams, _) = resolve(args.config.as_deref(), &args)?;
    require_file(&p.problem)?;
    let dir = out_dir(args.out_dir.as_ref())?;
    let problem = load_problem(&p.problem)?.to_problem()?;
    let set = match &p.import {
        Some(path) => {
            require_file(path)?;
            import_sampleset(path, &problem)?
        }
        None => {
            let config = AnnealConfig {
                num_reads: p.num_reads,
                sweeps: p.sweeps,
                seed: p.seed,
                ..AnnealConfig::default()
            };
            config.validate()?;
            simulated_anneal(&problem, &config)?
        }
    };
    set.save(dir.join("samples.json"))?;
    finish(&dir, "sample", Some(p.seed), serde_json::to_value(&p)?, &["samples.json"])
}

// ---- calibrate / evaluate

#[derive(Args, Serialize)]
pub struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    #[serde(skip)]
    config: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    /// Override any config key: `--set anneal.sweeps=500`.
    #[arg(long = "set", value_name = "KEY=JSON")]
    #[serde(skip)]
    sets: Vec<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    instances: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    require_file(&args.config)?;
    let (_, mut value): (Value, _) = resolve(Some(&args.config), args)?;
    apply_sets(&mut value, &args.sets)?;
    let mut config: ExperimentConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(base) = args.config.parent() {
        config.resolve_paths(base);
    }
    Ok(config)
}

#[derive(Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Calibrate |J_F| over this comma-separated grid instead of W2.
    #[arg(long, value_delimiter = ',')]
    jferro_grid: Option<Vec<f64>>,
}

pub fn calibrate(args: CalibrateArgs) -> Res {
    let config = experiment_config(&args.common)?;
    let dir = out_dir(args.common.out_dir.as_ref())?;
    match &args.jferro_grid {
        Some(grid) => {
            let cal = calibrate_jferro_experiment(&config, grid)?;
            write_json(&dir, "jferro.json", &cal)?;
            let mut echo = serde_json::to_value(&config)?;
            echo["jferro_grid"] = json!(grid);
            finish(&dir, "calibrate", Some(config.seed), echo, &["jferro.json"])
        }
        None => {
            calibrate_experiment(&config, &dir)?;
            Ok(())
        }
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    common: ExperimentArgs,
}

pub fn evaluate(args: EvaluateArgs) -> Res {
    let config = experiment_config(&args.common)?;
    let dir = out_dir(args.common.out_dir.as_ref())?;
    run_experiment(&config, &dir)?;
    Ok(())
}
