use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::{Cell, ChimeraGraph};
use super::layout::GridLayout;
use super::schema::{level2_embed, Ensemble, Level1Cell, SchemaType};
use crate::error::{Error, Result};
use crate::ldpc::ParityCheckMatrix;

/// Where one check lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    Cell(Cell),
    Ensemble(Ensemble),
}

/// Check-to-site assignment plus the schema shared by every Level-I cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub schema: SchemaType,
    pub sites: Vec<Site>,
}

impl Placement {
    pub fn num_level1(&self) -> usize {
        self.sites.iter().filter(|s| matches!(s, Site::Cell(_))).count()
    }

    pub fn num_level2(&self) -> usize {
        self.sites.len() - self.num_level1()
    }
}

/// Physical realisation of a placement, before any coefficients are attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    pub placement: Placement,
    pub bit_chains: Vec<Vec<usize>>,
    /// Chain of each check's ancilla.
    pub ancilla_chains: Vec<Vec<usize>>,
    /// Local layout of every Level-I cell.
    pub cells: BTreeMap<Cell, Level1Cell>,
    /// Bits touching a Level-II check.
    pub level2_bits: BTreeSet<usize>,
}

const ROLE_A: usize = 0;
const ROLE_B: usize = 1;
const ROLE_C: usize = 2;
const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// What a Level-I check needs from the role carrying one of its bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Need {
    Free,
    Vertical,
    Horizontal,
    Attach { left: bool, right: bool },
}

fn fits(need: Need, role: usize) -> bool {
    match need {
        Need::Free => true,
        Need::Vertical => role != ROLE_C,
        Need::Horizontal => role != ROLE_A,
        Need::Attach { left, right } => role == ROLE_B || (role == ROLE_C && left) || (role == ROLE_A && right),
    }
}

/// Roles for the three bits, in bit order.
fn assign_roles(needs: &[Need; 3]) -> Option<[usize; 3]> {
    PERMS
        .iter()
        .find(|perm| (0..3).all(|i| fits(needs[i], perm[i])))
        .copied()
}

fn check_shapes(h: &ParityCheckMatrix) -> Result<()> {
    for m in 0..h.num_checks() {
        if h.check(m).len() != 3 {
            return Err(Error::Embedding(format!(
                "check {m} has degree {}; only degree-3 checks are supported",
                h.check(m).len()
            )));
        }
    }
    for n in 0..h.num_bits() {
        let d = h.bit(n).len();
        if d == 0 || d > 2 {
            return Err(Error::Embedding(format!("bit {n} has degree {d}; expected 1 or 2")));
        }
    }
    Ok(())
}

fn other_check(h: &ParityCheckMatrix, bit: usize, m: usize) -> Option<usize> {
    h.bit(bit).iter().copied().find(|&c| c != m)
}

fn link_kind(a: Cell, b: Cell) -> Option<Need> {
    if a.x == b.x && a.y.abs_diff(b.y) == 1 {
        Some(Need::Vertical)
    } else if a.y == b.y && a.x.abs_diff(b.x) == 1 {
        Some(Need::Horizontal)
    } else {
        None
    }
}

/// Union of the partitions the a/b/c chains of `ens` hold in `cell`.
fn any_parts(ens: &Ensemble, cell: Cell) -> (bool, bool) {
    (0..3).fold((false, false), |acc, v| {
        let p = ens.chain_parts_in(v, cell);
        (acc.0 || p.0, acc.1 || p.1)
    })
}

/// Turn a placement into concrete qubit chains.
pub fn realize(h: &ParityCheckMatrix, graph: &ChimeraGraph, placement: &Placement) -> Result<CodeLayout> {
    check_shapes(h)?;
    let m_total = h.num_checks();
    if placement.sites.len() != m_total {
        return Err(Error::DimensionMismatch {
            expected: m_total,
            got: placement.sites.len(),
        });
    }
    let schema = placement.schema;
    let fail = |m: usize, why: String| Error::Embedding(format!("check {m}: {why}"));

    let mut cell_owner: BTreeMap<Cell, usize> = BTreeMap::new();
    let mut ensembles: Vec<(usize, Ensemble)> = Vec::new();
    for (m, site) in placement.sites.iter().enumerate() {
        match *site {
            Site::Cell(c) => {
                if !graph.contains(c) || !graph.cell_is_clean(c) {
                    return Err(fail(m, format!("cell {c:?} unusable")));
                }
                if cell_owner.insert(c, m).is_some() {
                    return Err(fail(m, format!("cell {c:?} already taken")));
                }
            }
            Site::Ensemble(e) => {
                if !e.cells().all(|c| graph.contains(c) && graph.cell_is_clean(c)) {
                    return Err(fail(m, "ensemble unusable".into()));
                }
                if let Some((other, _)) = ensembles.iter().find(|(_, o)| o.overlaps(&e)) {
                    return Err(fail(m, format!("ensemble overlaps that of check {other}")));
                }
                ensembles.push((m, e));
            }
        }
    }

    // needs[m][i] for the i-th bit of Level-I check m
    let mut needs: Vec<[Need; 3]> = vec![[Need::Free; 3]; m_total];
    for m in 0..m_total {
        let Site::Cell(c) = placement.sites[m] else { continue };
        for (i, &bit) in h.check(m).iter().enumerate() {
            let Some(q) = other_check(h, bit, m) else { continue };
            match placement.sites[q] {
                Site::Cell(d) => {
                    needs[m][i] = link_kind(c, d).ok_or_else(|| fail(m, format!("shares bit {bit} with non-adjacent check {q}")))?;
                }
                Site::Ensemble(e) => {
                    let (left, right) = any_parts(&e, c);
                    if !(left || right) {
                        return Err(fail(m, format!("cell {c:?} does not touch the ensemble of check {q}")));
                    }
                    // refined once the ensemble's chain order is fixed
                    needs[m][i] = Need::Attach { left, right };
                }
            }
        }
    }

    // chain index (0..3) per bit slot of each Level-II check
    let mut chain_of: BTreeMap<usize, [usize; 3]> = BTreeMap::new();
    for &(m, e) in &ensembles {
        let bits = h.check(m);
        let mut chosen = None;
        'perm: for perm in PERMS {
            let mut trial = needs.clone();
            for (i, &bit) in bits.iter().enumerate() {
                let Some(q) = other_check(h, bit, m) else { continue };
                let Site::Cell(c) = placement.sites[q] else {
                    return Err(fail(m, format!("bit {bit} joins two Level-II checks")));
                };
                let (left, right) = e.chain_parts_in(perm[i], c);
                if !(left || right) {
                    continue 'perm;
                }
                let slot = h.check(q).iter().position(|&b| b == bit).expect("bit in check");
                trial[q][slot] = Need::Attach { left, right };
                if assign_roles(&trial[q]).is_none() {
                    continue 'perm;
                }
            }
            needs = trial;
            chosen = Some(perm);
            break;
        }
        chain_of.insert(m, chosen.ok_or_else(|| fail(m, "no chain order fits the attached cells".into()))?);
    }

    let mut roles: Vec<[usize; 3]> = vec![[0; 3]; m_total];
    for m in 0..m_total {
        if let Site::Cell(c) = placement.sites[m] {
            roles[m] = assign_roles(&needs[m]).ok_or_else(|| fail(m, format!("no role assignment fits cell {c:?}")))?;
        }
    }

    // two-colour same-orientation links so neighbouring links use distinct slots
    let mut links: Vec<(usize, usize, bool)> = Vec::new(); // (check lo, check hi, vertical)
    let mut link_of_bit: BTreeMap<usize, usize> = BTreeMap::new();
    for bit in 0..h.num_bits() {
        let cs = h.bit(bit);
        if cs.len() == 2 {
            if let (Site::Cell(a), Site::Cell(b)) = (placement.sites[cs[0]], placement.sites[cs[1]]) {
                let vertical = link_kind(a, b) == Some(Need::Vertical);
                link_of_bit.insert(bit, links.len());
                links.push((cs[0], cs[1], vertical));
            }
        }
    }
    let mut at_check: Vec<Vec<usize>> = vec![Vec::new(); m_total];
    for (l, &(a, b, _)) in links.iter().enumerate() {
        at_check[a].push(l);
        at_check[b].push(l);
    }
    let mut colour: Vec<Option<u8>> = vec![None; links.len()];
    for start in 0..links.len() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(l) = queue.pop_front() {
            let (a, b, vert) = links[l];
            let cl = colour[l].expect("coloured");
            for &end in &[a, b] {
                for &o in &at_check[end] {
                    if o == l || links[o].2 != vert {
                        continue;
                    }
                    match colour[o] {
                        None => {
                            colour[o] = Some(1 - cl);
                            queue.push_back(o);
                        }
                        Some(co) if co == cl => {
                            return Err(fail(end, "link slots cannot be coloured".into()));
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    let mut cells = BTreeMap::new();
    let mut bit_chains: Vec<Vec<usize>> = vec![Vec::new(); h.num_bits()];
    let mut ancilla_chains: Vec<Vec<usize>> = vec![Vec::new(); m_total];
    let mut level2_bits = BTreeSet::new();
    for m in 0..m_total {
        let Site::Cell(cell) = placement.sites[m] else { continue };
        let bits = h.check(m);
        let mut a = None;
        let mut b_left = None;
        let mut b_right = None;
        let mut c = None;
        for (i, &bit) in bits.iter().enumerate() {
            let Some(&l) = link_of_bit.get(&bit) else { continue };
            let col = colour[l].expect("coloured") as usize;
            match (needs[m][i], roles[m][i]) {
                (Need::Vertical, ROLE_A) => a = Some(3 * col),
                (Need::Vertical, ROLE_B) => b_left = Some(3 * col),
                (Need::Horizontal, ROLE_B) => b_right = Some(4 + 3 * col),
                (Need::Horizontal, ROLE_C) => c = Some(4 + 3 * col),
                _ => unreachable!("roles respect needs"),
            }
        }
        let a = a.unwrap_or_else(|| if b_left == Some(0) { 3 } else { 0 });
        let b_left = b_left.unwrap_or(3 - a);
        let c = c.unwrap_or_else(|| if b_right == Some(4) { 7 } else { 4 });
        let b_right = b_right.unwrap_or(11 - c);
        let layout = Level1Cell {
            schema,
            a,
            b: [b_right, b_left],
            c,
            e: [schema.spare_left(), schema.spare_right()],
        };
        layout.validate().map_err(|_| fail(m, "slot clash".into()))?;
        let q = |k: usize| graph.qubit(cell, k);
        for (i, &bit) in bits.iter().enumerate() {
            match roles[m][i] {
                ROLE_A => bit_chains[bit].push(q(a)),
                ROLE_B => bit_chains[bit].extend([q(b_right), q(b_left)]),
                _ => bit_chains[bit].push(q(c)),
            }
        }
        ancilla_chains[m] = vec![q(layout.e[0]), q(layout.e[1])];
        cells.insert(cell, layout);
    }

    let mut used: BTreeSet<usize> = bit_chains.iter().chain(&ancilla_chains).flatten().copied().collect();
    for &(m, e) in &ensembles {
        let emb = level2_embed(graph, e, schema, |q| used.contains(&q))?;
        let perm = chain_of[&m];
        for (i, &bit) in h.check(m).iter().enumerate() {
            bit_chains[bit].extend(&emb.chains[perm[i]]);
            level2_bits.insert(bit);
        }
        ancilla_chains[m] = emb.chains[3].clone();
        used.extend(emb.chains.iter().flatten());
    }
    for ch in bit_chains.iter_mut().chain(ancilla_chains.iter_mut()) {
        ch.sort_unstable();
    }
    Ok(CodeLayout {
        placement: placement.clone(),
        bit_chains,
        ancilla_chains,
        cells,
        level2_bits,
    })
}

/// Search budget for [`place_checks`].
pub const PLACEMENT_BUDGET: usize = 200_000;

/// Assign every check a cell or a 3×3 ensemble so that checks sharing a bit
/// can be joined by short chains.
///
/// Known grid layouts whose check order matches are tried first, then a
/// bounded depth-first search.
pub fn place_checks(h: &ParityCheckMatrix, graph: &ChimeraGraph) -> Result<Placement> {
    place_checks_with(h, graph, SchemaType::default(), PLACEMENT_BUDGET)
}

pub fn place_checks_with(h: &ParityCheckMatrix, graph: &ChimeraGraph, schema: SchemaType, budget: usize) -> Result<Placement> {
    check_shapes(h)?;
    let l = graph.size();
    let slots = l * l + (l / 3) * (l / 3);
    if h.num_checks() > slots {
        return Err(Error::Capacity {
            needed: h.num_checks(),
            available: slots,
        });
    }
    for layout in GridLayout::known_for(l) {
        if layout.num_checks() == h.num_checks() && layout.num_bits() == h.num_bits() {
            let mut p = layout.canonical_placement();
            p.schema = schema;
            if realize(h, graph, &p).is_ok() {
                return Ok(p);
            }
        }
    }
    Search::new(h, graph, schema, budget).run()
}

struct Search<'a> {
    h: &'a ParityCheckMatrix,
    graph: &'a ChimeraGraph,
    schema: SchemaType,
    budget: usize,
    nodes: usize,
    order: Vec<usize>,
    sites: Vec<Option<Site>>,
    cell_used: BTreeSet<Cell>,
    ensembles: Vec<Ensemble>,
    best_depth: usize,
    best_unplaced: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(h: &'a ParityCheckMatrix, graph: &'a ChimeraGraph, schema: SchemaType, budget: usize) -> Self {
        let m = h.num_checks();
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for root in 0..m {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(c) = queue.pop_front() {
                order.push(c);
                for d in h.check_neighbors(c) {
                    if !seen[d] {
                        seen[d] = true;
                        queue.push_back(d);
                    }
                }
            }
        }
        Search {
            h,
            graph,
            schema,
            budget,
            nodes: 0,
            order,
            sites: vec![None; m],
            cell_used: BTreeSet::new(),
            ensembles: Vec::new(),
            best_depth: 0,
            best_unplaced: (0..m).collect(),
        }
    }

    fn run(mut self) -> Result<Placement> {
        if self.dfs(0)? {
            return Ok(Placement {
                schema: self.schema,
                sites: self.sites.into_iter().map(|s| s.expect("placed")).collect(),
            });
        }
        Err(Error::Placement {
            unplaced: self.best_unplaced,
        })
    }

    fn placed_neighbors(&self, m: usize) -> Vec<(usize, Site)> {
        self.h
            .check(m)
            .iter()
            .filter_map(|&bit| other_check(self.h, bit, m))
            .filter_map(|q| self.sites[q].map(|s| (q, s)))
            .collect()
    }

    fn candidates(&self, m: usize) -> Vec<Site> {
        let l = self.graph.size();
        let nbrs = self.placed_neighbors(m);
        let mut cells: Option<BTreeSet<Cell>> = None;
        for &(_, s) in &nbrs {
            let here: BTreeSet<Cell> = match s {
                Site::Cell(c) => self.graph.neighbors(c).into_iter().collect(),
                Site::Ensemble(e) => e.cells().filter(|&c| any_parts(&e, c) != (false, false)).collect(),
            };
            cells = Some(match cells {
                None => here,
                Some(prev) => prev.intersection(&here).copied().collect(),
            });
        }
        let mut out: Vec<Site> = match cells {
            Some(set) => {
                let mut v: Vec<Cell> = set.into_iter().collect();
                v.sort_by_key(|c| (c.y, c.x));
                v.into_iter().map(Site::Cell).collect()
            }
            None => (0..l * l).map(|i| Site::Cell(Cell::new(i % l, i / l))).collect(),
        };
        out.retain(|s| match s {
            Site::Cell(c) => !self.cell_used.contains(c) && self.graph.cell_is_clean(*c),
            _ => true,
        });
        if nbrs.iter().all(|(_, s)| matches!(s, Site::Cell(_))) {
            for oy in (0..l.saturating_sub(2)).step_by(3) {
                for ox in (0..l.saturating_sub(2)).step_by(3) {
                    let e = Ensemble::new(Cell::new(ox, oy));
                    if self.ensembles.iter().any(|o| o.overlaps(&e)) || !e.cells().all(|c| self.graph.cell_is_clean(c)) {
                        continue;
                    }
                    let reach = nbrs.iter().all(|&(_, s)| match s {
                        Site::Cell(c) => any_parts(&e, c) != (false, false),
                        Site::Ensemble(_) => false,
                    });
                    if reach {
                        out.push(Site::Ensemble(e));
                    }
                }
            }
        }
        out
    }

    /// Optimistic role check for a Level-I check given what is placed so far.
    fn roles_possible(&self, m: usize) -> bool {
        let Some(Site::Cell(c)) = self.sites[m] else { return true };
        let mut needs = [Need::Free; 3];
        for (i, &bit) in self.h.check(m).iter().enumerate() {
            let Some(q) = other_check(self.h, bit, m) else { continue };
            needs[i] = match self.sites[q] {
                None => Need::Free,
                Some(Site::Cell(d)) => match link_kind(c, d) {
                    Some(k) => k,
                    None => return false,
                },
                Some(Site::Ensemble(e)) => {
                    let (left, right) = any_parts(&e, c);
                    Need::Attach { left, right }
                }
            };
        }
        assign_roles(&needs).is_some()
    }

    fn dfs(&mut self, depth: usize) -> Result<bool> {
        if depth == self.order.len() {
            let p = Placement {
                schema: self.schema,
                sites: self.sites.iter().map(|s| s.expect("placed")).collect(),
            };
            return Ok(realize(self.h, self.graph, &p).is_ok());
        }
        if depth > self.best_depth {
            self.best_depth = depth;
            self.best_unplaced = self.order[depth..].to_vec();
            self.best_unplaced.sort_unstable();
        }
        let m = self.order[depth];
        for site in self.candidates(m) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Ok(false);
            }
            self.sites[m] = Some(site);
            match site {
                Site::Cell(c) => {
                    self.cell_used.insert(c);
                }
                Site::Ensemble(e) => self.ensembles.push(e),
            }
            let ok = self.roles_possible(m)
                && self
                    .placed_neighbors(m)
                    .iter()
                    .all(|&(q, _)| self.roles_possible(q));
            if ok && self.dfs(depth + 1)? {
                return Ok(true);
            }
            match site {
                Site::Cell(c) => {
                    self.cell_used.remove(&c);
                }
                Site::Ensemble(_) => {
                    self.ensembles.pop();
                }
            }
            self.sites[m] = None;
        }
        Ok(false)
    }
}
