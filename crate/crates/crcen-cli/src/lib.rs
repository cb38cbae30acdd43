//! IO, file formats, and orchestration for the `crcen` command-line tool.
//!
//! The numeric core lives in `crcen-core`; this crate adds CSV ingestion,
//! the JSON model format, report manifests, a bounded worker pool for
//! simulation runs, and the five subcommands (`train`, `simulate`, `sweep`,
//! `bench`, `verify`).

pub mod args;
pub mod commands;
pub mod csvio;
pub mod model_io;
pub mod report;
pub mod runner;

/// Sub-stream indices used to derive independent seeds from the user seed.
/// Fixed so reports are reproducible from their manifest alone.
pub mod seeds {
    /// Stratified train/test split.
    pub const SPLIT: u64 = 0;
    /// Model initialization.
    pub const INIT: u64 = 1;
    /// Mini-batch shuffling.
    pub const SHUFFLE: u64 = 2;
    /// Grid-search fold assignment and per-fold init streams.
    pub const GRID: u64 = 3;
    /// Per-repeat splits in `bench` (`REPEAT + i`).
    pub const REPEAT: u64 = 100;
    /// Per-alpha model initialization in `sweep` (`SWEEP_INIT + i`).
    pub const SWEEP_INIT: u64 = 200;
}
