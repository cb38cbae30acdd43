//! Dense matrix arithmetic and the deterministic random-number stream that
//! every other module draws from.

mod matrix;
mod rng;

pub use matrix::Matrix;
pub use rng::RngStream;
