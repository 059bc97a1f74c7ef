//! Chimera hardware graph and the two-level check embedding.
//!
//! Level I puts one degree-3 check in a unit cell, leaving one idle qubit per
//! partition. Level II lays a further check over the idle qubits of a 3×3
//! block of cells.

mod embed;
mod flow;
mod graph;
mod layout;
mod place;
mod schema;

pub use embed::{
    embed_code, embed_with_placement, level1_cells, unembed, verify_embedding, CellRole, ChimeraEmbedding,
    EmbeddingReport, HardwareProblem, Unembedded, Violation, DEFAULT_JFERRO, LEVEL1_MAX_CHAIN, LEVEL2_MAX_CHAIN,
};
pub use graph::{capacity, neighbors, Cell, ChimeraGraph, Partition, QUBITS_PER_CELL};
pub use layout::{ChimeraCode, GridLayout};
pub use place::{place_checks, place_checks_with, realize, CodeLayout, Placement, Site, PLACEMENT_BUDGET};
pub use schema::{
    level1_embed, level1_embed_layout, level2_embed, CellEmbedding, Ensemble, EnsembleEmbedding, Level1Cell,
    SchemaType,
};
