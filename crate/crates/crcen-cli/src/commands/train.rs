//! `crcen train`: fit on a stratified split of a CSV, evaluate on the
//! holdout, and emit model + metric + key-equation reports.

use anyhow::{Context, Result};
use crcen_core::keyeq::{class_prob_stats, key_eq_generalized, key_eq_training, ClassProbabilityStats, KeyEquationReport};
use crcen_core::metrics::{confusion, metric_report, ConfusionMatrix, MetricReport};
use crcen_core::trainer::{self, TrainConfig, TrainReport};
use crcen_core::{MlpModel, RngStream};
use serde::Serialize;

use crate::args::TrainArgs;
use crate::commands::{
    batch_mode, csv_options, hidden_widths, layer_sizes, parse_activation, print_warnings,
    resolve_weight, split_and_standardize,
};
use crate::report::{write_json, Manifest, Report};
use crate::{csvio, model_io, seeds};

#[derive(Debug, Serialize)]
struct ResolvedConfig {
    csv: String,
    label_column: String,
    map_labels: bool,
    split_ratio: f64,
    standardize: bool,
    lambda: f64,
    alpha: Option<f64>,
    beta: f64,
    hidden: Vec<usize>,
    activation: String,
    learning_rate: f64,
    max_epochs: usize,
    convergence_tol: f64,
    decision_threshold: f64,
    mini_batch: Option<usize>,
    workers: usize,
}

#[derive(Debug, Serialize)]
struct SplitInfo {
    train_n0: usize,
    train_n1: usize,
    test_n0: usize,
    test_n1: usize,
    imbalance_ratio: f64,
}

#[derive(Debug, Serialize)]
struct MetricsBody {
    split: SplitInfo,
    training: TrainReport,
    confusion: ConfusionMatrix,
    metrics: MetricReport,
}

#[derive(Debug, Serialize)]
struct KeyEqBody {
    training_identity: KeyEquationReport,
    generalized: KeyEquationReport,
    train_stats: ClassProbabilityStats,
    test_stats: ClassProbabilityStats,
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let loaded = csvio::load_csv(&args.csv.csv, &csv_options(&args.csv))?;
    print_warnings(&loaded.warnings);

    let seed = args.common.seed;
    let (train_ds, test_ds, standardizer) = split_and_standardize(
        &loaded.dataset,
        args.split.ratio,
        !args.split.no_standardize,
        RngStream::derive_seed(seed, seeds::SPLIT),
    )?;

    let (lambda, alpha) = resolve_weight(&args.weight, train_ds.n0(), train_ds.n1())?;
    let hidden = hidden_widths(&args.knobs.hidden)?;
    let activation = parse_activation(&args.knobs.activation)?;

    let mut init_rng = RngStream::new(RngStream::derive_seed(seed, seeds::INIT));
    let mut model = MlpModel::init(&layer_sizes(train_ds.num_features(), &hidden), activation, &mut init_rng)?;

    let cfg = TrainConfig {
        lambda,
        learning_rate: args.knobs.lr,
        max_epochs: args.knobs.epochs,
        beta: args.knobs.beta,
        batch_mode: batch_mode(args.knobs.batch),
        convergence_tol: args.knobs.tol,
        seed: RngStream::derive_seed(seed, seeds::SHUFFLE),
        decision_threshold: args.knobs.threshold,
        refine_output_bias: true,
    };
    let training = trainer::train(&mut model, &train_ds, &cfg).context("training failed")?;

    let train_probs = trainer::predict_proba(&model, train_ds.features())?;
    let test_probs = trainer::predict_proba(&model, test_ds.features())?;
    let preds = trainer::classify(&test_probs, cfg.decision_threshold);
    let cm = confusion(test_ds.labels(), &preds)?;
    let metrics = metric_report(&cm);

    let training_identity = key_eq_training(&train_probs, train_ds.labels(), lambda)?;
    let generalized = key_eq_generalized(
        &test_probs,
        test_ds.labels(),
        lambda,
        train_ds.n0(),
        train_ds.n1(),
    )?;
    let train_stats = class_prob_stats(&train_probs, train_ds.labels())?;
    let test_stats = class_prob_stats(&test_probs, test_ds.labels())?;

    let config = ResolvedConfig {
        csv: args.csv.csv.display().to_string(),
        label_column: loaded.label_name.clone(),
        map_labels: args.csv.map_labels,
        split_ratio: args.split.ratio,
        standardize: !args.split.no_standardize,
        lambda,
        alpha,
        beta: args.knobs.beta,
        hidden: hidden.clone(),
        activation: activation.name().to_string(),
        learning_rate: args.knobs.lr,
        max_epochs: args.knobs.epochs,
        convergence_tol: args.knobs.tol,
        decision_threshold: args.knobs.threshold,
        mini_batch: args.knobs.batch,
        workers: args.common.workers,
    };
    let outputs = ["model.json", "metrics.json", "keyeq.json"];
    let manifest = Manifest::new("train", seed, &config, &outputs)?;

    let wall = training.wall_time_secs;
    let (epochs_run, converged, grad_norm) = (
        training.epochs,
        training.converged,
        training.output_bias_grad_normalized,
    );
    let dir = &args.common.out;
    model_io::save_model(&dir.join("model.json"), &model, standardizer.as_ref())?;
    write_json(
        dir,
        "metrics.json",
        &Report {
            manifest: manifest.clone(),
            body: MetricsBody {
                split: SplitInfo {
                    train_n0: train_ds.n0(),
                    train_n1: train_ds.n1(),
                    test_n0: test_ds.n0(),
                    test_n1: test_ds.n1(),
                    imbalance_ratio: loaded.dataset.imbalance_ratio(),
                },
                training,
                confusion: cm,
                metrics,
            },
        },
    )?;
    write_json(
        dir,
        "keyeq.json",
        &Report {
            manifest,
            body: KeyEqBody {
                training_identity: training_identity.clone(),
                generalized: generalized.clone(),
                train_stats,
                test_stats,
            },
        },
    )?;

    println!(
        "trained {} on {} samples (n0={}, n1={}), lambda={:.6}{}",
        args.csv.csv.display(),
        train_ds.len(),
        train_ds.n0(),
        train_ds.n1(),
        lambda,
        alpha.map_or(String::new(), |a| format!(" (alpha={a})")),
    );
    println!(
        "epochs {epochs_run:>6}  converged {converged}  |grad_b|/N {grad_norm:.3e}  wall {wall:.2}s"
    );
    println!(
        "test: precision {:.4}  recall {:.4}  specificity {:.4}  F1 {:.4}  G-mean {:.4}",
        metrics.precision, metrics.recall, metrics.specificity, metrics.f1, metrics.gmean
    );
    println!(
        "key equation (training data): lhs {:.6}  rhs {:.6}  residual {:.3e}",
        training_identity.lhs, training_identity.rhs, training_identity.relative_residual
    );
    println!(
        "key equation (holdout):       lhs {:.6}  rhs {:.6}  residual {:.3e}",
        generalized.lhs, generalized.rhs, generalized.relative_residual
    );
    println!("reports written to {}", dir.display());
    Ok(())
}
