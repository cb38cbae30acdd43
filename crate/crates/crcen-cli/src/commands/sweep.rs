//! `crcen sweep`: one model per alpha on a shared split, reporting per-alpha
//! confusion counts and the expense (FP cost per recovered FN) between
//! consecutive alphas. Emits both a JSON report and a plot-friendly
//! columnar file.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use crcen_core::loss::lambda_from_alpha;
use crcen_core::metrics::{confusion, expense, metric_report, ConfusionMatrix, MetricReport};
use crcen_core::trainer::{self, TrainConfig};
use crcen_core::{MlpModel, RngStream};
use serde::Serialize;

use crate::args::SweepArgs;
use crate::commands::{
    batch_mode, csv_options, hidden_widths, layer_sizes, parse_activation, print_warnings,
    split_and_standardize,
};
use crate::report::{write_json, write_text, Manifest, Report};
use crate::{csvio, seeds};

#[derive(Debug, Serialize)]
struct ResolvedConfig {
    csv: String,
    alphas: Vec<f64>,
    split_ratio: f64,
    standardize: bool,
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
struct SweepRow {
    alpha: f64,
    lambda: f64,
    converged: bool,
    #[serde(rename = "fn")]
    fn_: usize,
    fp: usize,
    confusion: ConfusionMatrix,
    metrics: MetricReport,
}

#[derive(Debug, Serialize)]
struct ExpenseRow {
    from_alpha: f64,
    to_alpha: f64,
    /// `null` when the FN counts are equal (expense undefined).
    expense: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepBody {
    train_n0: usize,
    train_n1: usize,
    test_n0: usize,
    test_n1: usize,
    rows: Vec<SweepRow>,
    expenses: Vec<ExpenseRow>,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.alphas.len() < 2 {
        bail!("--alphas needs at least two values (expense compares consecutive alphas)");
    }
    if args.alphas.iter().any(|&a| !(a > 0.0)) {
        bail!("alpha values must be positive");
    }

    let loaded = csvio::load_csv(&args.csv.csv, &csv_options(&args.csv))?;
    print_warnings(&loaded.warnings);

    let seed = args.common.seed;
    let (train_ds, test_ds, _) = split_and_standardize(
        &loaded.dataset,
        args.split.ratio,
        !args.split.no_standardize,
        RngStream::derive_seed(seed, seeds::SPLIT),
    )?;
    let hidden = hidden_widths(&args.knobs.hidden)?;
    let activation = parse_activation(&args.knobs.activation)?;
    let sizes = layer_sizes(train_ds.num_features(), &hidden);

    let mut rows = Vec::with_capacity(args.alphas.len());
    for (i, &alpha) in args.alphas.iter().enumerate() {
        let lambda = lambda_from_alpha(alpha, train_ds.n0(), train_ds.n1())?;
        let mut init_rng =
            RngStream::new(RngStream::derive_seed(seed, seeds::SWEEP_INIT + i as u64));
        let mut model = MlpModel::init(&sizes, activation, &mut init_rng)?;
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
        let report = trainer::train(&mut model, &train_ds, &cfg)
            .with_context(|| format!("training failed at alpha={alpha}"))?;

        let probs = trainer::predict_proba(&model, test_ds.features())?;
        let preds = trainer::classify(&probs, cfg.decision_threshold);
        let cm = confusion(test_ds.labels(), &preds)?;
        rows.push(SweepRow {
            alpha,
            lambda,
            converged: report.converged,
            fn_: cm.fn_,
            fp: cm.fp,
            confusion: cm,
            metrics: metric_report(&cm),
        });
    }

    let mut expenses = Vec::with_capacity(rows.len() - 1);
    for w in rows.windows(2) {
        expenses.push(ExpenseRow {
            from_alpha: w[0].alpha,
            to_alpha: w[1].alpha,
            expense: expense(&w[0].confusion, &w[1].confusion),
        });
    }

    print_table(&rows, &expenses);

    let config = ResolvedConfig {
        csv: args.csv.csv.display().to_string(),
        alphas: args.alphas.clone(),
        split_ratio: args.split.ratio,
        standardize: !args.split.no_standardize,
        beta: args.knobs.beta,
        hidden,
        activation: activation.name().to_string(),
        learning_rate: args.knobs.lr,
        max_epochs: args.knobs.epochs,
        convergence_tol: args.knobs.tol,
        decision_threshold: args.knobs.threshold,
        mini_batch: args.knobs.batch,
        workers: args.common.workers,
    };
    let manifest = Manifest::new("sweep", seed, &config, &["sweep.json", "sweep.dat"])?;

    let dat = columnar(&rows, &expenses);
    write_text(&args.common.out, "sweep.dat", &dat)?;
    write_json(
        &args.common.out,
        "sweep.json",
        &Report {
            manifest,
            body: SweepBody {
                train_n0: train_ds.n0(),
                train_n1: train_ds.n1(),
                test_n0: test_ds.n0(),
                test_n1: test_ds.n1(),
                rows,
                expenses,
            },
        },
    )?;
    println!("reports written to {}", args.common.out.display());
    Ok(())
}

fn print_table(rows: &[SweepRow], expenses: &[ExpenseRow]) {
    println!(
        "{:>6} {:>10} {:>6} {:>6} {:>8} {:>8} {:>9}",
        "alpha", "lambda", "FN", "FP", "F1", "G-mean", "expense"
    );
    for (i, r) in rows.iter().enumerate() {
        let exp = if i == 0 {
            "-".to_string()
        } else {
            match expenses[i - 1].expense {
                Some(e) => format!("{e:.2}"),
                None => "undef".to_string(),
            }
        };
        println!(
            "{:>6} {:>10.6} {:>6} {:>6} {:>8.4} {:>8.4} {:>9}",
            r.alpha, r.lambda, r.fn_, r.fp, r.metrics.f1, r.metrics.gmean, exp
        );
    }
}

/// Plot-friendly columns: alpha FN FP expense F1 G-mean. The expense on a
/// row is the cost of moving from the previous alpha to this one ("na" on
/// the first row, "undef" when FN did not change).
fn columnar(rows: &[SweepRow], expenses: &[ExpenseRow]) -> String {
    let mut out = String::from("# alpha fn fp expense f1 gmean\n");
    for (i, r) in rows.iter().enumerate() {
        let exp = if i == 0 {
            "na".to_string()
        } else {
            match expenses[i - 1].expense {
                Some(e) => format!("{e}"),
                None => "undef".to_string(),
            }
        };
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            r.alpha, r.fn_, r.fp, exp, r.metrics.f1, r.metrics.gmean
        );
    }
    out
}
