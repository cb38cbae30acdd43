//! `crcen verify`: key-equation checks for a saved model against a CSV.
//!
//! The training-data identity is evaluated on the given data as-is; the
//! generalized form uses `--n0`/`--n1` as the training class counts when the
//! CSV is a holdout set (defaulting to the CSV's own counts).

use anyhow::Result;
use crcen_core::keyeq::{class_prob_stats, key_eq_generalized, key_eq_training, ClassProbabilityStats, KeyEquationReport};
use crcen_core::trainer;
use serde::Serialize;

use crate::args::VerifyArgs;
use crate::commands::{csv_options, print_warnings, resolve_weight};
use crate::report::{write_json, Manifest, Report};
use crate::{csvio, model_io};

#[derive(Debug, Serialize)]
struct ResolvedConfig {
    model: String,
    csv: String,
    lambda: f64,
    alpha: Option<f64>,
    n0_train: usize,
    n1_train: usize,
    standardized: bool,
}

#[derive(Debug, Serialize)]
struct VerifyBody {
    training_identity: KeyEquationReport,
    generalized: KeyEquationReport,
    stats: ClassProbabilityStats,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let (model, standardizer) = model_io::load_model(&args.model)?;
    let loaded = csvio::load_csv(&args.csv.csv, &csv_options(&args.csv))?;
    print_warnings(&loaded.warnings);

    let data = match &standardizer {
        Some(tf) => tf.transform(&loaded.dataset)?,
        None => loaded.dataset.clone(),
    };
    let (lambda, alpha) = resolve_weight(&args.weight, data.n0(), data.n1())?;
    let n0_train = args.n0.unwrap_or(data.n0());
    let n1_train = args.n1.unwrap_or(data.n1());

    let probs = trainer::predict_proba(&model, data.features())?;
    let training_identity = key_eq_training(&probs, data.labels(), lambda)?;
    let generalized = key_eq_generalized(&probs, data.labels(), lambda, n0_train, n1_train)?;
    let stats = class_prob_stats(&probs, data.labels())?;

    println!(
        "training identity: lhs {:.6}  rhs {:.6}  residual {:.3e}",
        training_identity.lhs, training_identity.rhs, training_identity.relative_residual
    );
    println!(
        "generalized:       lhs {:.6}  rhs {:.6}  residual {:.3e}",
        generalized.lhs, generalized.rhs, generalized.relative_residual
    );
    println!(
        "pbar1 {:.6} (var {})  pbar0 {:.6} (var {})",
        stats.mean_minority,
        stats
            .var_minority
            .map_or("-".to_string(), |v| format!("{v:.6}")),
        stats.mean_majority,
        stats
            .var_majority
            .map_or("-".to_string(), |v| format!("{v:.6}")),
    );

    let config = ResolvedConfig {
        model: args.model.display().to_string(),
        csv: args.csv.csv.display().to_string(),
        lambda,
        alpha,
        n0_train,
        n1_train,
        standardized: standardizer.is_some(),
    };
    let manifest = Manifest::new("verify", args.common.seed, &config, &["verify.json"])?;
    write_json(
        &args.common.out,
        "verify.json",
        &Report {
            manifest,
            body: VerifyBody {
                training_identity,
                generalized,
                stats,
            },
        },
    )?;
    println!("report written to {}", args.common.out.display());
    Ok(())
}
