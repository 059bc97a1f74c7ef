//! Binary LDPC codes: parity-check matrices, construction, encoding.

mod alist;
mod construct;
mod matrix;
mod systematic;

pub use alist::{load_alist, parse_alist, save_alist, write_alist};
pub use construct::{construct_regular_code, CodeSpec, Construction};
pub use matrix::{Girth, ParityCheckMatrix};
pub use systematic::{encode, generator, random_message, to_systematic, GeneratorMatrix, SystematicForm};
