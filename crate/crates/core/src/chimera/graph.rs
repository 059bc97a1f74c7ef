use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const QUBITS_PER_CELL: usize = 8;

/// Side of a qubit within its unit cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Partition {
    /// k < 4, coupled vertically between cells.
    Left,
    /// k ≥ 4, coupled horizontally between cells.
    Right,
}

impl Partition {
    pub fn of(k: usize) -> Partition {
        if k < 4 {
            Partition::Left
        } else {
            Partition::Right
        }
    }
}

/// Unit cell `U(x, y)`, origin bottom-left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    /// Checkerboard colour: true on cells with even `x + y`.
    pub fn is_black(self) -> bool {
        (self.x + self.y) % 2 == 0
    }
}

/// `L × L` Chimera graph with an optional set of defective qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    size: usize,
    defects: BTreeSet<usize>,
}

impl ChimeraGraph {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("Chimera grid size must be at least 1"));
        }
        Ok(ChimeraGraph {
            size,
            defects: BTreeSet::new(),
        })
    }

    pub fn with_defects(size: usize, defects: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut g = Self::new(size)?;
        for q in defects {
            if q >= g.num_qubits() {
                return Err(invalid(format!("defective qubit {q} outside the graph")));
            }
            g.defects.insert(q);
        }
        Ok(g)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_qubits(&self) -> usize {
        QUBITS_PER_CELL * self.size * self.size
    }

    pub fn defects(&self) -> &BTreeSet<usize> {
        &self.defects
    }

    pub fn is_defective(&self, q: usize) -> bool {
        self.defects.contains(&q)
    }

    pub fn cell_is_clean(&self, cell: Cell) -> bool {
        (0..QUBITS_PER_CELL).all(|k| !self.is_defective(self.qubit(cell, k)))
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.x < self.size && cell.y < self.size
    }

    /// Physical id `8·(y·L + x) + k`.
    pub fn qubit(&self, cell: Cell, k: usize) -> usize {
        debug_assert!(k < QUBITS_PER_CELL && self.contains(cell));
        QUBITS_PER_CELL * (cell.y * self.size + cell.x) + k
    }

    pub fn locate(&self, q: usize) -> (Cell, usize) {
        let c = q / QUBITS_PER_CELL;
        (Cell::new(c % self.size, c / self.size), q % QUBITS_PER_CELL)
    }

    /// Whether a physical coupler joins `p` and `q`.
    pub fn has_coupler(&self, p: usize, q: usize) -> bool {
        if p == q || p >= self.num_qubits() || q >= self.num_qubits() {
            return false;
        }
        let (cp, kp) = self.locate(p);
        let (cq, kq) = self.locate(q);
        if cp == cq {
            return Partition::of(kp) != Partition::of(kq);
        }
        if kp != kq {
            return false;
        }
        match Partition::of(kp) {
            Partition::Left => cp.x == cq.x && cp.y.abs_diff(cq.y) == 1,
            Partition::Right => cp.y == cq.y && cp.x.abs_diff(cq.x) == 1,
        }
    }

    /// Physical neighbours of `q`, defects included.
    pub fn qubit_neighbors(&self, q: usize) -> Vec<usize> {
        let (cell, k) = self.locate(q);
        let mut out = Vec::with_capacity(6);
        let other = if k < 4 { 4..8 } else { 0..4 };
        for j in other {
            out.push(self.qubit(cell, j));
        }
        let (x, y) = (cell.x, cell.y);
        let steps: [(isize, isize); 2] = if k < 4 { [(0, -1), (0, 1)] } else { [(-1, 0), (1, 0)] };
        for (dx, dy) in steps {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < self.size && (ny as usize) < self.size {
                out.push(self.qubit(Cell::new(nx as usize, ny as usize), k));
            }
        }
        out
    }

    /// Every coupler `(p, q)` with `p < q`.
    pub fn couplers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for q in 0..self.num_qubits() {
            for p in self.qubit_neighbors(q) {
                if q < p {
                    out.push((q, p));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, cell: Cell) -> Vec<Cell> {
        neighbors(cell, self.size)
    }
}

/// Cells at Manhattan distance 1 inside an `L × L` grid.
pub fn neighbors(cell: Cell, size: usize) -> Vec<Cell> {
    let mut out = Vec::with_capacity(4);
    if cell.x > 0 {
        out.push(Cell::new(cell.x - 1, cell.y));
    }
    if cell.x + 1 < size {
        out.push(Cell::new(cell.x + 1, cell.y));
    }
    if cell.y > 0 {
        out.push(Cell::new(cell.x, cell.y - 1));
    }
    if cell.y + 1 < size {
        out.push(Cell::new(cell.x, cell.y + 1));
    }
    out
}

/// Largest block length the scheme supports on `num_qubits` qubits:
/// `floor(5·N_Q / 24)`.
pub fn capacity(num_qubits: u64) -> u64 {
    // (5 N) / 24 without overflow for any u64 input
    num_qubits / 24 * 5 + (num_qubits % 24) * 5 / 24
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupler_counts() {
        let g = ChimeraGraph::new(2).unwrap();
        // 16 intra per cell, 4 per vertical and horizontal cell pair
        assert_eq!(g.couplers().len(), 4 * 16 + 4 * 4);
        let g = ChimeraGraph::new(16).unwrap();
        assert_eq!(g.num_qubits(), 2048);
        assert_eq!(g.couplers().len(), 256 * 16 + 2 * 16 * 15 * 4);
    }

    #[test]
    fn orientation() {
        let g = ChimeraGraph::new(3).unwrap();
        let c = Cell::new(1, 1);
        assert!(g.has_coupler(g.qubit(c, 0), g.qubit(c, 5)));
        assert!(!g.has_coupler(g.qubit(c, 0), g.qubit(c, 1)));
        assert!(g.has_coupler(g.qubit(c, 2), g.qubit(Cell::new(1, 2), 2)));
        assert!(!g.has_coupler(g.qubit(c, 2), g.qubit(Cell::new(2, 1), 2)));
        assert!(g.has_coupler(g.qubit(c, 6), g.qubit(Cell::new(0, 1), 6)));
        assert!(!g.has_coupler(g.qubit(c, 6), g.qubit(Cell::new(1, 0), 6)));
        assert_eq!(g.qubit(Cell::new(2, 1), 3), 8 * (3 + 2) + 3);
        assert_eq!(g.locate(43), (Cell::new(2, 1), 3));
    }

    #[test]
    fn cell_neighbors() {
        assert_eq!(neighbors(Cell::new(0, 0), 16), vec![Cell::new(1, 0), Cell::new(0, 1)]);
        assert_eq!(neighbors(Cell::new(2, 3), 16).len(), 4);
        assert_eq!(neighbors(Cell::new(15, 15), 16).len(), 2);
        assert!(neighbors(Cell::new(0, 0), 1).is_empty());
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(10_000), 2083);
        assert_eq!(capacity(100_000), 20833);
        assert_eq!(capacity(1_000_000), 208_333);
        assert_eq!(capacity(2048), 426);
        assert_eq!(capacity(u64::MAX), (u64::MAX as u128 * 5 / 24) as u64);
    }
}
