//! `crcen bench`: grid-search hyperparameters with stratified k-fold CV on
//! the first split's training data, then freeze them and evaluate across
//! repeated stratified splits, reporting mean F1 and G-mean.

use anyhow::{bail, Context, Result};
use crcen_core::data::{kfold_grid_search, GridCandidate, GridSearchConfig, SelectionMetric};
use crcen_core::metrics::{confusion, metric_report, ConfusionMatrix, MetricReport};
use crcen_core::trainer::{self, TrainConfig};
use crcen_core::{MlpModel, RngStream};
use serde::Serialize;

use crate::args::BenchArgs;
use crate::commands::{
    batch_mode, csv_options, hidden_widths, layer_sizes, parse_activation, print_warnings,
    resolve_weight, split_and_standardize,
};
use crate::report::{write_json, Manifest, Report};
use crate::{csvio, seeds};

#[derive(Debug, Serialize)]
struct ResolvedConfig {
    csv: String,
    repeats: usize,
    cv_k: usize,
    grid_hidden: Vec<usize>,
    grid_beta: Vec<f64>,
    selection_metric: String,
    lambda_rule: String,
    split_ratio: f64,
    standardize: bool,
    activation: String,
    learning_rate: f64,
    max_epochs: usize,
    convergence_tol: f64,
    decision_threshold: f64,
    mini_batch: Option<usize>,
    workers: usize,
}

#[derive(Debug, Serialize)]
struct CandidateScore {
    hidden: Vec<usize>,
    beta: f64,
    mean_cv_score: f64,
}

#[derive(Debug, Serialize)]
struct SplitOutcome {
    split_index: usize,
    lambda: f64,
    converged: bool,
    confusion: ConfusionMatrix,
    metrics: MetricReport,
}

#[derive(Debug, Serialize)]
struct BenchBody {
    grid: Vec<CandidateScore>,
    selected_hidden: Vec<usize>,
    selected_beta: f64,
    splits: Vec<SplitOutcome>,
    mean_f1: f64,
    mean_gmean: f64,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let metric = match args.metric.as_str() {
        "gmean" => SelectionMetric::GMean,
        "f1" => SelectionMetric::F1,
        other => bail!("unknown selection metric '{other}' (use gmean or f1)"),
    };

    let loaded = csvio::load_csv(&args.csv.csv, &csv_options(&args.csv))?;
    print_warnings(&loaded.warnings);
    let seed = args.common.seed;
    let activation = parse_activation(&args.knobs.activation)?;

    // Candidate grid: hidden widths x L2 coefficients.
    let mut candidates = Vec::new();
    for &h in &args.grid_hidden {
        let hidden = hidden_widths(&[h])?;
        for &beta in &args.grid_beta {
            if beta < 0.0 {
                bail!("grid beta values must be nonnegative");
            }
            candidates.push(GridCandidate {
                hidden: hidden.clone(),
                beta,
            });
        }
    }

    // Selection on the first split's training data.
    let first_split = crcen_core::data::stratified_split(
        &loaded.dataset,
        args.split.ratio,
        RngStream::derive_seed(seed, seeds::REPEAT),
    )?;
    let (lambda_sel, alpha) =
        resolve_weight(&args.weight, first_split.train.n0(), first_split.train.n1())?;
    let base_cfg = TrainConfig {
        lambda: lambda_sel,
        learning_rate: args.knobs.lr,
        max_epochs: args.knobs.epochs,
        beta: 0.0,
        batch_mode: batch_mode(args.knobs.batch),
        convergence_tol: args.knobs.tol,
        seed: RngStream::derive_seed(seed, seeds::SHUFFLE),
        decision_threshold: args.knobs.threshold,
        refine_output_bias: true,
    };
    let grid_cfg = GridSearchConfig {
        k: args.cv_k,
        metric,
        standardize: !args.split.no_standardize,
        seed: RngStream::derive_seed(seed, seeds::GRID),
        activation,
    };
    let result = kfold_grid_search(&first_split.train, &candidates, &base_cfg, &grid_cfg)
        .context("grid search failed")?;
    let selected = result.selected_candidate().clone();

    println!(
        "selected hidden={:?} beta={} ({} = {:.4})",
        selected.hidden,
        selected.beta,
        metric.name(),
        result.mean_scores[result.selected]
    );

    // Fixed hyperparameters, fresh stratified splits.
    let mut splits = Vec::with_capacity(args.repeats);
    let (mut sum_f1, mut sum_gm) = (0.0, 0.0);
    for r in 0..args.repeats {
        let (train_ds, test_ds, _) = split_and_standardize(
            &loaded.dataset,
            args.split.ratio,
            !args.split.no_standardize,
            RngStream::derive_seed(seed, seeds::REPEAT + r as u64),
        )?;
        let (lambda_r, _) = match args.weight.lambda {
            Some(_) => (lambda_sel, None),
            None => resolve_weight(&args.weight, train_ds.n0(), train_ds.n1())?,
        };
        let mut init_rng =
            RngStream::new(RngStream::derive_seed(seed, seeds::INIT + r as u64));
        let mut model = MlpModel::init(
            &layer_sizes(train_ds.num_features(), &selected.hidden),
            activation,
            &mut init_rng,
        )?;
        let mut cfg = base_cfg.clone();
        cfg.lambda = lambda_r;
        cfg.beta = selected.beta;
        let report = trainer::train(&mut model, &train_ds, &cfg)
            .with_context(|| format!("training failed on split {r}"))?;

        let probs = trainer::predict_proba(&model, test_ds.features())?;
        let preds = trainer::classify(&probs, cfg.decision_threshold);
        let cm = confusion(test_ds.labels(), &preds)?;
        let m = metric_report(&cm);
        sum_f1 += m.f1;
        sum_gm += m.gmean;
        println!(
            "split {r}: F1 {:.4}  G-mean {:.4}  (lambda {:.6}, converged {})",
            m.f1, m.gmean, lambda_r, report.converged
        );
        splits.push(SplitOutcome {
            split_index: r,
            lambda: lambda_r,
            converged: report.converged,
            confusion: cm,
            metrics: m,
        });
    }
    let mean_f1 = sum_f1 / args.repeats as f64;
    let mean_gmean = sum_gm / args.repeats as f64;
    println!("mean over {} splits: F1 {mean_f1:.4}  G-mean {mean_gmean:.4}", args.repeats);

    let config = ResolvedConfig {
        csv: args.csv.csv.display().to_string(),
        repeats: args.repeats,
        cv_k: args.cv_k,
        grid_hidden: args.grid_hidden.clone(),
        grid_beta: args.grid_beta.clone(),
        selection_metric: metric.name().to_string(),
        lambda_rule: match (args.weight.lambda, alpha) {
            (Some(l), _) => format!("lambda={l}"),
            (None, Some(a)) => format!("alpha={a}"),
            _ => unreachable!("resolve_weight always yields one"),
        },
        split_ratio: args.split.ratio,
        standardize: !args.split.no_standardize,
        activation: activation.name().to_string(),
        learning_rate: args.knobs.lr,
        max_epochs: args.knobs.epochs,
        convergence_tol: args.knobs.tol,
        decision_threshold: args.knobs.threshold,
        mini_batch: args.knobs.batch,
        workers: args.common.workers,
    };
    let manifest = Manifest::new("bench", seed, &config, &["bench.json"])?;
    let grid = result
        .candidates
        .iter()
        .zip(&result.mean_scores)
        .map(|(c, &s)| CandidateScore {
            hidden: c.hidden.clone(),
            beta: c.beta,
            mean_cv_score: s,
        })
        .collect();
    write_json(
        &args.common.out,
        "bench.json",
        &Report {
            manifest,
            body: BenchBody {
                grid,
                selected_hidden: selected.hidden,
                selected_beta: selected.beta,
                splits,
                mean_f1,
                mean_gmean,
            },
        },
    )?;
    println!("report written to {}", args.common.out.display());
    Ok(())
}
