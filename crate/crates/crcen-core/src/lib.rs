//! Core numerics for class-wise reweighted cross-entropy (CRCEN) training of
//! multilayer perceptrons on imbalanced binary data.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats, CSV
//! ingestion, and the command-line surface live in the companion `crcen-cli`
//! crate. Everything here is deterministic given a seed: the random source is
//! a fixed ChaCha8 stream with derived sub-streams, so experiments reproduce
//! across runs and platforms.
//!
//! Modules map onto the subsystems of the artifact:
//!
//! - [`linalg`] — dense row-major matrices and the seedable random stream
//! - [`nn`] — sigmoid-output MLP, forward traces, exact backpropagation
//! - [`loss`] — the reweighted cross-entropy objective and its helpers
//! - [`trainer`] — full-batch gradient descent with learning-rate backoff
//! - [`metrics`] — confusion-matrix metrics (F1, G-mean) and the expense ratio
//! - [`keyeq`] — empirical verification of the weight/imbalance/probability
//!   relation, plus the two synthetic simulation protocols
//! - [`data`] — dataset container, stratified splitting, standardization,
//!   and k-fold grid search

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod data;
pub mod error;
pub mod keyeq;
pub mod linalg;
pub mod loss;
pub mod math;
pub mod metrics;
pub mod nn;
pub mod trainer;

pub use error::{Error, Result};
pub use linalg::{Matrix, RngStream};
pub use nn::{Activation, ForwardTrace, Gradients, MlpModel};
