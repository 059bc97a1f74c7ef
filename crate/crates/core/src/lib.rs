//! Decoding LDPC codes by reduction to quadratic binary optimization.
//!
//! The crate is organised along the decoding pipeline:
//!
//! * [`ldpc`] parity-check matrices, construction, encoding and alist I/O;
//! * [`bp`] the min-sum belief-propagation baseline;
//! * [`qubo`] the satisfier/distance objective and QUBO/Ising utilities;
//! * [`chimera`] the Chimera hardware graph and the two-level embedding;
//! * [`anneal`] simulated annealing and the exhaustive ground-state oracle;
//! * [`channel`] BPSK over AWGN or trace-driven per-subcarrier channels;
//! * [`eval`] rank-distribution BER/FER estimators, calibration and the
//!   experiment runner.

pub mod anneal;
pub mod bp;
pub mod channel;
pub mod chimera;
pub mod error;
pub mod eval;
pub mod gf2;
pub mod ldpc;
pub mod qubo;
pub(crate) mod rng;

pub use error::{Error, Result};
