use serde::{Deserialize, Serialize};

use super::graph::{Cell, ChimeraGraph, Partition};
use crate::error::{Error, Result};

/// Level-I cell schemas; they differ only in which qubit of each partition
/// stays idle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemaType {
    #[default]
    A,
    B,
    C,
    D,
}

impl SchemaType {
    pub const ALL: [SchemaType; 4] = [SchemaType::A, SchemaType::B, SchemaType::C, SchemaType::D];

    /// Idle `(left, right)` qubit indices.
    pub fn idle(self) -> (usize, usize) {
        match self {
            SchemaType::A => (1, 6),
            SchemaType::B => (1, 5),
            SchemaType::C => (2, 6),
            SchemaType::D => (2, 5),
        }
    }

    pub fn idle_of(self, p: Partition) -> usize {
        match p {
            Partition::Left => self.idle().0,
            Partition::Right => self.idle().1,
        }
    }

    /// The left index other than 0, 3 and the idle one.
    pub(crate) fn spare_left(self) -> usize {
        3 - self.idle().0
    }

    pub(crate) fn spare_right(self) -> usize {
        11 - self.idle().1
    }
}

/// One degree-3 check laid out in a cell, as local qubit indices.
///
/// `a` is a left singleton, `c` a right singleton, `b` and `e` are
/// intra-cell chains with one qubit on each side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level1Cell {
    pub schema: SchemaType,
    pub a: usize,
    pub b: [usize; 2],
    pub c: usize,
    pub e: [usize; 2],
}

impl Level1Cell {
    /// Reference layout: `(a, b, c, e) = (q0, q4, q7, q3)` with chains
    /// `b = {q4, q2}` and `e = {q3, q5}` under Type A.
    pub fn template(schema: SchemaType) -> Self {
        let (il, ir) = schema.idle();
        let b_left = if il == 1 { 2 } else { 1 };
        let e_right = if ir == 6 { 5 } else { 6 };
        Level1Cell {
            schema,
            a: 0,
            b: [4, b_left],
            c: 7,
            e: [3, e_right],
        }
    }

    /// Left qubit of `b`, right qubit of `b`, left and right of `e`.
    pub fn b_left(&self) -> usize {
        self.b[1]
    }

    pub fn b_right(&self) -> usize {
        self.b[0]
    }

    pub fn e_left(&self) -> usize {
        self.e[0]
    }

    pub fn e_right(&self) -> usize {
        self.e[1]
    }

    pub fn used(&self) -> [usize; 6] {
        [self.a, self.b[0], self.b[1], self.c, self.e[0], self.e[1]]
    }

    pub fn idle(&self) -> (usize, usize) {
        self.schema.idle()
    }

    /// Partition and distinctness checks.
    pub fn validate(&self) -> Result<()> {
        let (il, ir) = self.schema.idle();
        let lefts = [self.a, self.b_left(), self.e_left(), il];
        let rights = [self.b_right(), self.c, self.e_right(), ir];
        let mut seen = [false; 8];
        for (k, side) in lefts.iter().map(|&k| (k, Partition::Left)).chain(rights.iter().map(|&k| (k, Partition::Right))) {
            if k >= 8 || Partition::of(k) != side || seen[k] {
                return Err(Error::Embedding(format!("malformed Level-I layout {self:?}")));
            }
            seen[k] = true;
        }
        Ok(())
    }
}

/// Physical qubits of one Level-I check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellEmbedding {
    pub cell: Cell,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub e: Vec<usize>,
    pub idle: [usize; 2],
}

/// Place one degree-3 check into `cell` with the reference layout of
/// `schema`.
pub fn level1_embed(graph: &ChimeraGraph, cell: Cell, schema: SchemaType) -> Result<CellEmbedding> {
    level1_embed_layout(graph, cell, &Level1Cell::template(schema))
}

pub fn level1_embed_layout(graph: &ChimeraGraph, cell: Cell, layout: &Level1Cell) -> Result<CellEmbedding> {
    layout.validate()?;
    if !graph.contains(cell) {
        return Err(Error::Embedding(format!("cell {cell:?} outside the graph")));
    }
    let q = |k: usize| graph.qubit(cell, k);
    if let Some(&k) = layout.used().iter().find(|&&k| graph.is_defective(q(k))) {
        return Err(Error::Embedding(format!("defective qubit {} in cell {cell:?}", q(k))));
    }
    let (il, ir) = layout.idle();
    Ok(CellEmbedding {
        cell,
        a: vec![q(layout.a)],
        b: vec![q(layout.b[0]), q(layout.b[1])],
        c: vec![q(layout.c)],
        e: vec![q(layout.e[0]), q(layout.e[1])],
        idle: [q(il), q(ir)],
    })
}

/// Chain of a Level-II variable in local ensemble coordinates.
type LocalChain = [(Partition, usize, usize); 4];

use Partition::{Left as L, Right as R};

/// Level-II reference layout over the idle qubits of a 3×3 block, local
/// `(partition, x, y)`; order a, b, c, e.
pub(crate) const LEVEL2_CHAINS: [LocalChain; 4] = [
    [(L, 0, 0), (L, 0, 1), (L, 0, 2), (R, 0, 1)],
    [(L, 1, 0), (L, 1, 1), (R, 0, 0), (R, 1, 0)],
    [(L, 1, 2), (R, 0, 2), (R, 1, 2), (R, 2, 2)],
    [(L, 2, 1), (L, 2, 2), (R, 1, 1), (R, 2, 1)],
];

/// A 3×3 block of cells; mirrored blocks flip the local axes so their
/// `(0, 0)` corner can sit on any corner of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ensemble {
    pub origin: Cell,
    pub mirror_x: bool,
    pub mirror_y: bool,
}

impl Ensemble {
    pub fn new(origin: Cell) -> Self {
        Ensemble {
            origin,
            mirror_x: false,
            mirror_y: false,
        }
    }

    pub fn cell(&self, lx: usize, ly: usize) -> Cell {
        let dx = if self.mirror_x { 2 - lx } else { lx };
        let dy = if self.mirror_y { 2 - ly } else { ly };
        Cell::new(self.origin.x + dx, self.origin.y + dy)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..3).flat_map(move |ly| (0..3).map(move |lx| Cell::new(self.origin.x + lx, self.origin.y + ly)))
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (self.origin.x..self.origin.x + 3).contains(&cell.x) && (self.origin.y..self.origin.y + 3).contains(&cell.y)
    }

    pub fn overlaps(&self, other: &Ensemble) -> bool {
        self.origin.x.abs_diff(other.origin.x) < 3 && self.origin.y.abs_diff(other.origin.y) < 3
    }

    /// `(cell, partition)` members of chain `v` (0 = a, 1 = b, 2 = c, 3 = e).
    pub fn chain_sites(&self, v: usize) -> Vec<(Cell, Partition)> {
        LEVEL2_CHAINS[v].iter().map(|&(p, x, y)| (self.cell(x, y), p)).collect()
    }

    /// Partitions chain `v` occupies inside `cell`.
    pub fn chain_parts_in(&self, v: usize, cell: Cell) -> (bool, bool) {
        let mut parts = (false, false);
        for (c, p) in self.chain_sites(v) {
            if c == cell {
                match p {
                    Partition::Left => parts.0 = true,
                    Partition::Right => parts.1 = true,
                }
            }
        }
        parts
    }
}

/// Physical chains of one Level-II check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleEmbedding {
    pub ensemble: Ensemble,
    /// Chains for a, b, c, e.
    pub chains: [Vec<usize>; 4],
}

/// Lay out a Level-II check on the idle qubits of `ensemble`, whose cells all
/// carry `schema`. `occupied` reports qubits already in use.
pub fn level2_embed(
    graph: &ChimeraGraph,
    ensemble: Ensemble,
    schema: SchemaType,
    occupied: impl Fn(usize) -> bool,
) -> Result<EnsembleEmbedding> {
    let mut chains: [Vec<usize>; 4] = Default::default();
    for (v, chain) in chains.iter_mut().enumerate() {
        for (cell, p) in ensemble.chain_sites(v) {
            if !graph.contains(cell) {
                return Err(Error::Embedding(format!("ensemble {ensemble:?} leaves the graph")));
            }
            let q = graph.qubit(cell, schema.idle_of(p));
            if graph.is_defective(q) {
                return Err(Error::Embedding(format!("defective qubit {q} in ensemble {ensemble:?}")));
            }
            if occupied(q) {
                return Err(Error::Embedding(format!("qubit {q} is not idle")));
            }
            chain.push(q);
        }
    }
    Ok(EnsembleEmbedding { ensemble, chains })
}
