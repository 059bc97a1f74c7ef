//! Classical samplers: Metropolis simulated annealing and an exhaustive
//! ground-state oracle.

mod exhaustive;
mod sa;
mod sampleset;

pub use exhaustive::{exhaustive_solve, GroundStates, MAX_EXHAUSTIVE_VARS};
pub use sa::{default_beta_range, sample_embedded, simulated_anneal, AnnealConfig, EmbeddedSamples};
pub use sampleset::{export_for_external_sampler, import_sampleset, SampleRecord, SampleSet};
