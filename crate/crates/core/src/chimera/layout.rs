use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::flow::FlowGraph;
use super::graph::{neighbors, Cell, ChimeraGraph};
use super::place::{realize, CodeLayout, Placement, Site};
use super::schema::{Ensemble, SchemaType};
use crate::error::{Error, Result};
use crate::ldpc::ParityCheckMatrix;
use crate::rng;

/// A rectangle of Level-I cells (anchored at the origin) with Level-II
/// ensembles laid over it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub ensembles: Vec<Ensemble>,
}

/// Blocks in the right or top half are mirrored so that a grid corner is
/// always the local `(0, 0)` corner of its block.
fn block(width: usize, height: usize, ox: usize, oy: usize) -> Ensemble {
    Ensemble {
        origin: Cell::new(ox, oy),
        mirror_x: 2 * ox + 3 > width,
        mirror_y: 2 * oy + 3 > height,
    }
}

impl GridLayout {
    pub fn new(width: usize, height: usize, origins: &[(usize, usize)]) -> Result<Self> {
        let ensembles: Vec<Ensemble> = origins.iter().map(|&(x, y)| block(width, height, x, y)).collect();
        for (i, e) in ensembles.iter().enumerate() {
            if e.origin.x + 3 > width || e.origin.y + 3 > height {
                return Err(Error::Embedding(format!("ensemble {i} leaves the {width}x{height} region")));
            }
            if ensembles[..i].iter().any(|o| o.overlaps(e)) {
                return Err(Error::Embedding(format!("ensemble {i} overlaps another")));
            }
        }
        Ok(GridLayout {
            width,
            height,
            ensembles,
        })
    }

    /// 16×16 cells plus 24 ensembles: 256 + 24 checks over 420 bits.
    pub fn full16() -> Self {
        let axis = [0, 3, 6, 10, 13];
        let mut origins = Vec::new();
        for (by, &oy) in axis.iter().enumerate() {
            for (bx, &ox) in axis.iter().enumerate() {
                if (bx, by) != (2, 2) {
                    origins.push((ox, oy));
                }
            }
        }
        Self::new(16, 16, &origins).expect("static layout")
    }

    /// `3k × 3` strip with `k` ensembles: `10k` checks over `15k` bits.
    pub fn strip(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument("a strip needs at least 2 ensembles".into()));
        }
        let origins: Vec<(usize, usize)> = (0..k).map(|i| (3 * i, 0)).collect();
        Self::new(3 * k, 3, &origins)
    }

    /// Layouts that fit a graph of side `size`, largest first.
    pub fn known_for(size: usize) -> Vec<GridLayout> {
        let mut out = Vec::new();
        if size >= 16 {
            out.push(Self::full16());
        }
        for k in (2..=size / 3).rev() {
            out.push(Self::strip(k).expect("k >= 2"));
        }
        out
    }

    pub fn num_level1(&self) -> usize {
        self.width * self.height
    }

    pub fn num_checks(&self) -> usize {
        self.num_level1() + self.ensembles.len()
    }

    pub fn num_bits(&self) -> usize {
        3 * self.num_checks() / 2
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    /// Cells row by row, then ensembles in order.
    pub fn canonical_placement(&self) -> Placement {
        let mut sites: Vec<Site> = self.cells().map(Site::Cell).collect();
        sites.extend(self.ensembles.iter().map(|&e| Site::Ensemble(e)));
        Placement {
            schema: SchemaType::default(),
            sites,
        }
    }

    fn corners(&self) -> [Cell; 4] {
        let (w, h) = (self.width - 1, self.height - 1);
        [Cell::new(0, 0), Cell::new(w, 0), Cell::new(0, h), Cell::new(w, h)]
    }
}

/// A (2,3)-regular code whose Tanner graph is cut to fit a [`GridLayout`].
#[derive(Clone, Debug)]
pub struct ChimeraCode {
    pub h: ParityCheckMatrix,
    pub layout: GridLayout,
    pub placement: Placement,
}

/// Attachment options of one ensemble: the a, b, c chains each meet one
/// Level-I check.
#[derive(Clone, Copy, Debug)]
struct Attach {
    cell: Cell,
    left: bool,
    right: bool,
}

const ATTEMPTS: usize = 20_000;
const SEARCH_SEED: u64 = 0x5eed;

impl ChimeraCode {
    /// Build the code for `layout`. Every cell joins its neighbours through
    /// three shared bits, except that one bit per attachment cell is handed
    /// to an ensemble check instead; the link pattern is a degree-constrained
    /// subgraph of the grid found by max-flow.
    pub fn build(layout: &GridLayout) -> Result<Self> {
        let options: Vec<Vec<[Attach; 3]>> = layout
            .ensembles
            .iter()
            .map(|e| attachment_options(layout, e))
            .collect::<Result<_>>()?;
        let black = layout.cells().filter(|c| c.is_black()).count() as i64;
        let white = layout.num_level1() as i64 - black;
        let target = 3 * (black - white);

        let (chosen, links) = search(layout, &options, target)
            .ok_or_else(|| Error::Embedding("no attachment choice admits a link pattern".into()))?;
        Self::assemble(layout, &chosen, &links)
    }

    fn assemble(layout: &GridLayout, attach: &[[Attach; 3]], links: &[(Cell, Cell)]) -> Result<Self> {
        let cell_ids: BTreeMap<Cell, usize> = layout.cells().enumerate().map(|(i, c)| (c, i)).collect();
        let n_cells = cell_ids.len();
        // per check, its incident items; bits are numbered by first sight
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Item {
            Link(usize),
            Attach(usize, usize),
        }
        let mut items: Vec<Vec<Item>> = vec![Vec::new(); layout.num_checks()];
        for (l, (a, b)) in links.iter().enumerate() {
            items[cell_ids[a]].push(Item::Link(l));
            items[cell_ids[b]].push(Item::Link(l));
        }
        for (e, triple) in attach.iter().enumerate() {
            for (v, at) in triple.iter().enumerate() {
                items[cell_ids[&at.cell]].push(Item::Attach(e, v));
                items[n_cells + e].push(Item::Attach(e, v));
            }
        }
        let mut ids: BTreeMap<Item, usize> = BTreeMap::new();
        let mut checks = Vec::with_capacity(items.len());
        for list in &items {
            let mut row = Vec::with_capacity(3);
            for it in list {
                let next = ids.len();
                row.push(*ids.entry(*it).or_insert(next));
            }
            checks.push(row);
        }
        let h = ParityCheckMatrix::from_checks(ids.len(), checks)?;
        Ok(ChimeraCode {
            h,
            layout: layout.clone(),
            placement: layout.canonical_placement(),
        })
    }

    /// Chains on a graph large enough to hold the layout.
    pub fn realize(&self, graph: &ChimeraGraph) -> Result<CodeLayout> {
        realize(&self.h, graph, &self.placement)
    }
}

fn attachment_options(layout: &GridLayout, e: &Ensemble) -> Result<Vec<[Attach; 3]>> {
    let per_chain: Vec<Vec<Attach>> = (0..3)
        .map(|v| {
            let mut cells: Vec<Cell> = e.chain_sites(v).into_iter().map(|(c, _)| c).collect();
            cells.sort();
            cells.dedup();
            cells
                .into_iter()
                .map(|cell| {
                    let (left, right) = e.chain_parts_in(v, cell);
                    Attach { cell, left, right }
                })
                .collect()
        })
        .collect();
    let inside: Vec<Cell> = layout.corners().into_iter().filter(|&c| e.contains(c)).collect();
    let mut out = Vec::new();
    for &a in &per_chain[0] {
        for &b in &per_chain[1] {
            for &c in &per_chain[2] {
                let cells = [a.cell, b.cell, c.cell];
                if a.cell == b.cell || a.cell == c.cell || b.cell == c.cell {
                    continue;
                }
                if inside.iter().all(|k| cells.contains(k)) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Embedding(format!("ensemble at {:?} cannot cover its grid corners", e.origin)));
    }
    Ok(out)
}

fn colour(triple: &[Attach; 3]) -> i64 {
    triple.iter().map(|a| if a.cell.is_black() { 1 } else { -1 }).sum()
}

/// Random attachment choices with the exact colour balance; the first one
/// admitting a link pattern wins. Seeded, so the result is fixed.
fn search(layout: &GridLayout, options: &[Vec<[Attach; 3]>], target: i64) -> Option<(Vec<[Attach; 3]>, Vec<(Cell, Cell)>)> {
    let mut r = rng::stream(SEARCH_SEED, 0);
    let (lo, hi): (Vec<i64>, Vec<i64>) = options
        .iter()
        .map(|o| {
            let cols = o.iter().map(colour);
            (cols.clone().min().unwrap_or(0), cols.max().unwrap_or(0))
        })
        .unzip();
    // reachable balance range of the blocks after position i
    let mut tail_lo = vec![0i64; options.len() + 1];
    let mut tail_hi = vec![0i64; options.len() + 1];
    for i in (0..options.len()).rev() {
        tail_lo[i] = tail_lo[i + 1] + lo[i];
        tail_hi[i] = tail_hi[i + 1] + hi[i];
    }
    for _ in 0..ATTEMPTS {
        let mut chosen = Vec::with_capacity(options.len());
        let mut balance = 0;
        for (i, opts) in options.iter().enumerate() {
            let ok: Vec<&[Attach; 3]> = opts
                .iter()
                .filter(|t| {
                    let b = balance + colour(t);
                    (tail_lo[i + 1]..=tail_hi[i + 1]).contains(&(target - b))
                })
                .collect();
            let &t = ok.choose(&mut r)?;
            balance += colour(t);
            chosen.push(*t);
        }
        if let Some(links) = link_pattern(layout, &chosen) {
            return Some((chosen, links));
        }
    }
    None
}

/// Links such that each cell has three, minus one per attachment, with
/// vertical/horizontal counts its roles can carry.
fn link_pattern(layout: &GridLayout, attach: &[[Attach; 3]]) -> Option<Vec<(Cell, Cell)>> {
    let cells: Vec<Cell> = layout.cells().collect();
    let n = cells.len();
    let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut at: BTreeMap<Cell, Attach> = BTreeMap::new();
    for triple in attach {
        for a in triple {
            at.insert(a.cell, *a);
        }
    }
    let (s, t) = (3 * n, 3 * n + 1);
    let mut g = FlowGraph::new(3 * n + 2);
    let mut need = 0;
    let mut edges = Vec::new();
    for (i, &c) in cells.iter().enumerate() {
        let (f, vmax, hmax) = match at.get(&c) {
            Some(a) => (2, if a.left { 2 } else { 1 }, if a.right { 2 } else { 1 }),
            None => (3, 2, 2),
        };
        let in_region: Vec<Cell> = neighbors(c, layout.width.max(layout.height))
            .into_iter()
            .filter(|d| d.x < layout.width && d.y < layout.height)
            .collect();
        if in_region.len() < f {
            return None;
        }
        if c.is_black() {
            need += f;
            g.add_edge(s, i, f as i64);
            g.add_edge(i, n + i, vmax);
            g.add_edge(i, 2 * n + i, hmax);
            for d in in_region {
                let j = index[&d];
                let id = if d.x == c.x {
                    g.add_edge(n + i, n + j, 1)
                } else {
                    g.add_edge(2 * n + i, 2 * n + j, 1)
                };
                edges.push((id, c, d));
            }
        } else {
            g.add_edge(n + i, i, vmax);
            g.add_edge(2 * n + i, i, hmax);
            g.add_edge(i, t, f as i64);
        }
    }
    if g.max_flow(s, t) != need as i64 {
        return None;
    }
    Some(
        edges
            .into_iter()
            .filter(|&(id, _, _)| g.flow(id) == 1)
            .map(|(_, c, d)| if (c.y, c.x) < (d.y, d.x) { (c, d) } else { (d, c) })
            .collect(),
    )
}
