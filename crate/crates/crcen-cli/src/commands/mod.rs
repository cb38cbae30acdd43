//! Subcommand implementations.

mod bench;
mod simulate;
mod sweep;
mod train;
mod verify;

pub use bench::cmd_bench;
pub use simulate::cmd_simulate;
pub use sweep::cmd_sweep;
pub use train::cmd_train;
pub use verify::cmd_verify;

use anyhow::{bail, Result};
use crcen_core::data::Dataset;
use crcen_core::loss::lambda_from_alpha;
use crcen_core::trainer::BatchMode;
use crcen_core::Activation;

use crate::args::{CsvArgs, HeaderArg, WeightArgs};
use crate::csvio::{ColumnSel, CsvOptions, HeaderMode};

/// Maps `--lambda`/`--alpha` to a concrete weight using the given class
/// counts; defaults to alpha = 1 (inverse class frequency).
pub(crate) fn resolve_weight(w: &WeightArgs, n0: usize, n1: usize) -> Result<(f64, Option<f64>)> {
    match (w.lambda, w.alpha) {
        (Some(l), _) => {
            crcen_core::loss::validate_lambda(l)?;
            Ok((l, None))
        }
        (None, Some(a)) => Ok((lambda_from_alpha(a, n0, n1)?, Some(a))),
        (None, None) => Ok((lambda_from_alpha(1.0, n0, n1)?, Some(1.0))),
    }
}

/// `--hidden 0` means "no hidden layer"; zero widths are invalid otherwise.
pub(crate) fn hidden_widths(raw: &[usize]) -> Result<Vec<usize>> {
    if raw == [0] {
        return Ok(Vec::new());
    }
    if raw.iter().any(|&h| h == 0) {
        bail!("hidden widths must be positive (use a single 0 for no hidden layer)");
    }
    Ok(raw.to_vec())
}

pub(crate) fn layer_sizes(input_dim: usize, hidden: &[usize]) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input_dim);
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    sizes
}

pub(crate) fn csv_options(args: &CsvArgs) -> CsvOptions {
    CsvOptions {
        label_col: args.label_col.as_deref().map(ColumnSel::parse),
        map_labels: args.map_labels,
        header: match args.header {
            HeaderArg::Auto => HeaderMode::Auto,
            HeaderArg::Yes => HeaderMode::Yes,
            HeaderArg::No => HeaderMode::No,
        },
    }
}

pub(crate) fn batch_mode(batch: Option<usize>) -> BatchMode {
    match batch {
        Some(size) => BatchMode::MiniBatch(size),
        None => BatchMode::FullBatch,
    }
}

pub(crate) fn parse_activation(name: &str) -> Result<Activation> {
    Ok(Activation::parse(name)?)
}

/// Splits a dataset and applies leak-free standardization when enabled.
pub(crate) fn split_and_standardize(
    data: &Dataset,
    ratio: f64,
    standardize: bool,
    split_seed: u64,
) -> Result<(Dataset, Dataset, Option<crcen_core::data::Standardizer>)> {
    let pair = crcen_core::data::stratified_split(data, ratio, split_seed)?;
    if standardize {
        let (train_t, mut others, tf) = crcen_core::data::standardize(&pair.train, &[&pair.test])?;
        Ok((train_t, others.pop().unwrap(), Some(tf)))
    } else {
        Ok((pair.train, pair.test, None))
    }
}

pub(crate) fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}
