use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::graph::{Cell, ChimeraGraph};
use super::place::{place_checks, realize, Placement, Site};
use super::schema::SchemaType;
use crate::error::{invalid, Error, Result};
use crate::ldpc::ParityCheckMatrix;
use crate::qubo::{AncillaPlan, Convention, ProblemFile, QuadraticBinaryProblem};

pub const LEVEL1_MAX_CHAIN: usize = 4;
pub const LEVEL2_MAX_CHAIN: usize = 9;
/// Default chain coupler magnitude `|J_F|`.
pub const DEFAULT_JFERRO: f64 = 8.0;

/// What a unit cell is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellRole {
    Level1(SchemaType),
    /// Only idle qubits used, by an ensemble.
    Level2Member,
    Unused,
}

/// Logical variables (bits, then ancillas) mapped to chains of qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChimeraEmbedding {
    pub grid: usize,
    pub jferro: f64,
    pub chains: Vec<Vec<usize>>,
    /// Chain runs through a Level-II ensemble.
    pub level2: Vec<bool>,
    /// Cell roles indexed by `y·L + x`.
    pub cells: Vec<CellRole>,
    pub placement: Placement,
    /// Spin chosen for a chain whose vote is tied.
    pub tie_spin: Vec<i8>,
}

impl ChimeraEmbedding {
    pub fn num_vars(&self) -> usize {
        self.chains.len()
    }

    pub fn qubits_used(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn chain_limit(&self, var: usize) -> usize {
        if self.level2[var] {
            LEVEL2_MAX_CHAIN
        } else {
            LEVEL1_MAX_CHAIN
        }
    }

    /// Chain-length histogram `length → count`.
    pub fn chain_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for ch in &self.chains {
            *hist.entry(ch.len()).or_insert(0) += 1;
        }
        hist
    }

    /// Copy each logical spin onto every qubit of its chain; qubits outside
    /// all chains are set to −1.
    pub fn extend(&self, spins: &[i8]) -> Result<Vec<i8>> {
        if spins.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                got: spins.len(),
            });
        }
        let mut out = vec![-1i8; 8 * self.grid * self.grid];
        for (ch, &s) in self.chains.iter().zip(spins) {
            for &q in ch {
                out[q] = s;
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

/// Normalised physical Ising problem.
#[derive(Clone, Debug, PartialEq)]
pub struct HardwareProblem {
    pub problem: QuadraticBinaryProblem,
    pub grid: usize,
    pub jferro: f64,
    /// Number of chain couplers, each contributing −1 when its chain agrees.
    pub chain_edges: usize,
}

impl HardwareProblem {
    /// Physical energy of a chain-uniform state minus logical energy / |J_F|.
    pub fn chain_constant(&self) -> f64 {
        -(self.chain_edges as f64)
    }

    /// Every coupler exists in `graph` and lies in `[−1, 1]`.
    pub fn validate(&self, graph: &ChimeraGraph) -> Result<()> {
        for (&(p, q), &j) in self.problem.quadratic() {
            if !graph.has_coupler(p, q) {
                return Err(Error::Embedding(format!("no physical coupler ({p}, {q})")));
            }
            if j.abs() > 1.0 + 1e-12 {
                return Err(Error::Embedding(format!("coupler ({p}, {q}) = {j} outside [-1, 1]")));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile::from_problem(&self.problem).with_topology(self.grid)
    }
}

/// Place, realise and weight `problem` (bits then one ancilla per check) on
/// `graph`.
pub fn embed_code(
    problem: &QuadraticBinaryProblem,
    h: &ParityCheckMatrix,
    graph: &ChimeraGraph,
    jferro: f64,
) -> Result<(ChimeraEmbedding, HardwareProblem)> {
    let placement = place_checks(h, graph)?;
    embed_with_placement(problem, h, graph, &placement, jferro)
}

pub fn embed_with_placement(
    problem: &QuadraticBinaryProblem,
    h: &ParityCheckMatrix,
    graph: &ChimeraGraph,
    placement: &Placement,
    jferro: f64,
) -> Result<(ChimeraEmbedding, HardwareProblem)> {
    if !(jferro > 0.0 && jferro.is_finite()) {
        return Err(invalid(format!("|J_F| must be positive, got {jferro}")));
    }
    let plan = AncillaPlan::for_code(h)?;
    if problem.num_vars() != plan.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: plan.num_vars(),
            got: problem.num_vars(),
        });
    }
    let layout = realize(h, graph, placement)?;
    let n = h.num_bits();
    let mut chains = layout.bit_chains.clone();
    chains.resize(plan.num_vars(), Vec::new());
    let mut level2: Vec<bool> = (0..n).map(|b| layout.level2_bits.contains(&b)).collect();
    level2.resize(plan.num_vars(), false);
    for m in 0..h.num_checks() {
        for v in plan.ancilla_vars(m) {
            chains[v] = layout.ancilla_chains[m].clone();
            level2[v] = matches!(placement.sites[m], Site::Ensemble(_));
        }
    }

    let l = graph.size();
    let mut cells = vec![CellRole::Unused; l * l];
    for site in &placement.sites {
        if let Site::Ensemble(e) = site {
            for c in e.cells() {
                cells[c.y * l + c.x] = CellRole::Level2Member;
            }
        }
    }
    for (&c, lay) in &layout.cells {
        cells[c.y * l + c.x] = CellRole::Level1(lay.schema);
    }

    let ising = problem.to_ising();
    let tie_spin = ising
        .linear()
        .iter()
        .map(|&b| if b < 0.0 { 1 } else { -1 })
        .collect();
    let embedding = ChimeraEmbedding {
        grid: l,
        jferro,
        chains,
        level2,
        cells,
        placement: placement.clone(),
        tie_spin,
    };
    let hw = weight(&ising, &embedding, graph)?;
    let report = verify_embedding(&embedding, problem, graph);
    if !report.passed() {
        return Err(Error::Embedding(format!("internal check failed: {:?}", report.violations)));
    }
    hw.validate(graph)?;
    Ok((embedding, hw))
}

/// Spread logical Ising coefficients over chains and add chain couplers.
fn weight(ising: &QuadraticBinaryProblem, emb: &ChimeraEmbedding, graph: &ChimeraGraph) -> Result<HardwareProblem> {
    let jf = emb.jferro;
    let mut hw = QuadraticBinaryProblem::new(graph.num_qubits(), Convention::Ising);
    hw.add_offset(ising.offset())?;
    let mut owner = vec![usize::MAX; graph.num_qubits()];
    for (v, ch) in emb.chains.iter().enumerate() {
        if ch.is_empty() {
            return Err(Error::Embedding(format!("variable {v} has an empty chain")));
        }
        let share = ising.bias(v) / ch.len() as f64;
        for &q in ch {
            owner[q] = v;
            hw.add_linear(q, share)?;
        }
    }
    for (&(u, v), &j) in ising.quadratic() {
        let mut physical = Vec::new();
        for &p in &emb.chains[u] {
            for q in graph.qubit_neighbors(p) {
                if owner[q] == v {
                    physical.push((p, q));
                }
            }
        }
        if physical.is_empty() {
            return Err(Error::Embedding(format!("logical coupler ({u}, {v}) has no physical coupler")));
        }
        let share = j / physical.len() as f64;
        for (p, q) in physical {
            hw.add_quadratic(p, q, share)?;
        }
    }
    if let Some((&(p, q), &j)) = hw.quadratic().iter().find(|(_, &j)| j.abs() > jf) {
        return Err(invalid(format!(
            "coupler ({p}, {q}) = {j} exceeds |J_F| = {jf}; raise the chain strength"
        )));
    }
    let mut chain_edges = 0;
    for ch in &emb.chains {
        for (i, &p) in ch.iter().enumerate() {
            for &q in &ch[i + 1..] {
                if graph.has_coupler(p, q) {
                    hw.add_quadratic(p, q, -jf)?;
                    chain_edges += 1;
                }
            }
        }
    }
    Ok(HardwareProblem {
        problem: hw.scaled(1.0 / jf),
        grid: graph.size(),
        jferro: jf,
        chain_edges,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    ChainCount { expected: usize, got: usize },
    EmptyChain { var: usize },
    BadQubit { var: usize, qubit: usize },
    DefectiveQubit { var: usize, qubit: usize },
    SharedQubit { qubit: usize, vars: (usize, usize) },
    Disconnected { var: usize },
    MissingCoupler { u: usize, v: usize },
    ChainTooLong { var: usize, len: usize, limit: usize },
    TooManyQubits { used: usize, available: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub violations: Vec<Violation>,
    pub qubits_used: usize,
    pub max_level1_chain: usize,
    pub max_level2_chain: usize,
}

impl EmbeddingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural audit: chains valid, disjoint, connected, within length
/// bounds, and every logical coupler of `problem` realised.
pub fn verify_embedding(emb: &ChimeraEmbedding, problem: &QuadraticBinaryProblem, graph: &ChimeraGraph) -> EmbeddingReport {
    let mut violations = Vec::new();
    if emb.chains.len() != problem.num_vars() {
        violations.push(Violation::ChainCount {
            expected: problem.num_vars(),
            got: emb.chains.len(),
        });
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    let (mut max1, mut max2) = (0, 0);
    for (v, ch) in emb.chains.iter().enumerate() {
        if ch.is_empty() {
            violations.push(Violation::EmptyChain { var: v });
            continue;
        }
        let level2 = emb.level2.get(v).copied().unwrap_or(false);
        if level2 {
            max2 = max2.max(ch.len());
        } else {
            max1 = max1.max(ch.len());
        }
        let limit = if level2 { LEVEL2_MAX_CHAIN } else { LEVEL1_MAX_CHAIN };
        if ch.len() > limit {
            violations.push(Violation::ChainTooLong {
                var: v,
                len: ch.len(),
                limit,
            });
        }
        for &q in ch {
            if q >= graph.num_qubits() {
                violations.push(Violation::BadQubit { var: v, qubit: q });
                continue;
            }
            if graph.is_defective(q) {
                violations.push(Violation::DefectiveQubit { var: v, qubit: q });
            }
            if let Some(&other) = owner.get(&q) {
                if other != v {
                    violations.push(Violation::SharedQubit { qubit: q, vars: (other, v) });
                }
            } else {
                owner.insert(q, v);
            }
        }
        if !connected(ch, graph) {
            violations.push(Violation::Disconnected { var: v });
        }
    }
    for &(u, v) in problem.quadratic().keys() {
        if u >= emb.chains.len() || v >= emb.chains.len() {
            continue;
        }
        let cv: BTreeSet<usize> = emb.chains[v].iter().copied().collect();
        let ok = emb.chains[u]
            .iter()
            .any(|&p| graph.qubit_neighbors(p).iter().any(|q| cv.contains(q)));
        if !ok {
            violations.push(Violation::MissingCoupler { u, v });
        }
    }
    let used = owner.len();
    if used > graph.num_qubits() {
        violations.push(Violation::TooManyQubits {
            used,
            available: graph.num_qubits(),
        });
    }
    EmbeddingReport {
        violations,
        qubits_used: used,
        max_level1_chain: max1,
        max_level2_chain: max2,
    }
}

fn connected(chain: &[usize], graph: &ChimeraGraph) -> bool {
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::from([chain[0]]);
    let mut stack = vec![chain[0]];
    while let Some(p) = stack.pop() {
        for q in graph.qubit_neighbors(p) {
            if members.contains(&q) && seen.insert(q) {
                stack.push(q);
            }
        }
    }
    seen.len() == members.len()
}

/// Logical spins read back from a physical sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unembedded {
    pub spins: Vec<i8>,
    pub broken: usize,
}

impl Unembedded {
    pub fn broken_fraction(&self) -> f64 {
        if self.spins.is_empty() {
            0.0
        } else {
            self.broken as f64 / self.spins.len() as f64
        }
    }
}

/// Majority vote per chain; ties go to the spin favoured by the variable's
/// own bias (−1 when the bias is zero).
pub fn unembed(sample: &[i8], emb: &ChimeraEmbedding) -> Result<Unembedded> {
    let mut spins = Vec::with_capacity(emb.chains.len());
    let mut broken = 0;
    for (v, ch) in emb.chains.iter().enumerate() {
        if ch.is_empty() {
            return Err(Error::Embedding(format!("variable {v} has an empty chain")));
        }
        let mut sum = 0i64;
        for &q in ch {
            let s = *sample
                .get(q)
                .ok_or_else(|| invalid(format!("sample does not cover qubit {q}")))?;
            if s != 1 && s != -1 {
                return Err(invalid(format!("qubit {q} has non-spin value {s}")));
            }
            sum += i64::from(s);
        }
        if sum.unsigned_abs() as usize != ch.len() {
            broken += 1;
        }
        spins.push(match sum.signum() {
            1 => 1,
            -1 => -1,
            _ => emb.tie_spin[v],
        });
    }
    Ok(Unembedded { spins, broken })
}

/// Level-I cells of an embedding, for reporting.
pub fn level1_cells(emb: &ChimeraEmbedding) -> Vec<Cell> {
    emb.placement
        .sites
        .iter()
        .filter_map(|s| match s {
            Site::Cell(c) => Some(*c),
            Site::Ensemble(_) => None,
        })
        .collect()
}
