//! Acceptance suite.
//!
//! Each test is one acceptance check and prints a PASS line with its
//! measurements (visible with `cargo test --test acceptance -- --nocapture`).
//! Tolerances are pinned here, not configurable.

use std::path::Path;
use std::process::Command;

use crcen_cli::runner::run_protocol;
use crcen_core::data::Dataset;
use crcen_core::keyeq::{key_eq_training, standard_rules, LambdaRule, SimProtocol};
use crcen_core::loss::{crcen_loss, l2_penalty, lambda_from_alpha};
use crcen_core::metrics::{confusion, expense, metric_report, ConfusionMatrix};
use crcen_core::nn::{backward, forward, Activation};
use crcen_core::trainer::{classify, predict_proba, train};
use crcen_core::{Matrix, MlpModel, RngStream};

const SIM_SEED: u64 = 42;

/// Simulation reproduction: mean LHS within `3*sigma_ref/sqrt(100) +
/// 0.05*RHS` of the theoretical RHS, std within a factor of two of the
/// reference, at least 95 of 100 runs converged.
#[test]
fn criterion_1_simulation_reproduction() {
    let rules = standard_rules();
    let cases = [
        (SimProtocol::Sim1, [1.13, 0.09, 0.04]),
        (SimProtocol::sim2(), [0.67, 0.05, 0.03]),
    ];
    for (protocol, ref_stds) in cases {
        let rows = run_protocol(protocol, 100, &rules, SIM_SEED, 0).unwrap();
        for (row, sigma_ref) in rows.iter().zip(ref_stds) {
            let tol = 3.0 * sigma_ref / 10.0 + 0.05 * row.rhs;
            assert!(
                (row.mean_lhs - row.rhs).abs() <= tol,
                "{} {}: mean {} vs rhs {} (tol {tol})",
                protocol.name(),
                row.label,
                row.mean_lhs,
                row.rhs
            );
            assert!(
                row.std_lhs >= sigma_ref / 2.0 && row.std_lhs <= sigma_ref * 2.0,
                "{} {}: std {} outside [{}, {}]",
                protocol.name(),
                row.label,
                row.std_lhs,
                sigma_ref / 2.0,
                sigma_ref * 2.0
            );
            assert!(
                row.runs >= 95,
                "{} {}: only {} successful runs",
                protocol.name(),
                row.label,
                row.runs
            );
            println!(
                "  {} {:<14} mean {:.4} (rhs {}, tol {:.3})  std {:.4} (ref {})  runs {}",
                protocol.name(),
                row.label,
                row.mean_lhs,
                row.rhs,
                tol,
                row.std_lhs,
                sigma_ref,
                row.runs
            );
        }
    }
    println!("acceptance [1/8] simulation reproduction: PASS");
}

/// Training identity at convergence: residual of the weight-ratio relation
/// at most 1e-2 for the three weight settings, with the exact gradient bound
/// respected.
#[test]
fn criterion_2_training_identity_at_convergence() {
    let protocol = SimProtocol::sim2();
    let mut data_rng = RngStream::new(RngStream::derive_seed(7, 0));
    let mut init_rng = RngStream::new(RngStream::derive_seed(7, 1));
    let train_ds = protocol.draw_dataset(1000, 10_000, &mut data_rng).unwrap();

    for rule in standard_rules() {
        let lambda = rule.lambda(train_ds.n0(), train_ds.n1()).unwrap();
        let mut model =
            MlpModel::init(&protocol.layer_sizes(), Activation::Sigmoid, &mut init_rng).unwrap();
        let mut cfg = protocol.train_config(lambda);
        cfg.convergence_tol = 1e-6;
        let report = train(&mut model, &train_ds, &cfg).unwrap();
        assert!(report.converged, "{}: not converged", rule.label());

        let probs = predict_proba(&model, train_ds.features()).unwrap();
        let kr = key_eq_training(&probs, train_ds.labels(), lambda).unwrap();
        // relative_residual is exactly |LHS * lambda/(1-lambda) - 1|.
        assert!(
            kr.relative_residual <= 1e-2,
            "{}: residual {}",
            rule.label(),
            kr.relative_residual
        );

        let sum_majority: f64 = probs
            .iter()
            .zip(train_ds.labels())
            .filter(|(_, &y)| y == 0)
            .map(|(&p, _)| p)
            .sum();
        let bound = report.output_bias_grad.abs() / ((1.0 - lambda) * sum_majority);
        assert!(
            kr.relative_residual <= bound * (1.0 + 1e-9) + 1e-15,
            "{}: residual {} above gradient bound {}",
            rule.label(),
            kr.relative_residual,
            bound
        );
        println!(
            "  {:<14} residual {:.3e} (bound {:.3e}, |grad|/N {:.3e})",
            rule.label(),
            kr.relative_residual,
            bound,
            report.output_bias_grad_normalized
        );
    }
    println!("acceptance [2/8] training identity at convergence: PASS");
}

/// Analytic gradients match central finite differences of the regularized
/// objective within 1e-5 relative error on 50 random small models.
#[test]
fn criterion_3_gradient_matches_finite_differences() {
    let mut rng = RngStream::new(314159);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let p = 1 + rng.next_below(5) as usize;
        let depth = rng.next_below(3);
        let mut sizes = vec![p];
        for _ in 0..depth {
            sizes.push(1 + rng.next_below(8) as usize);
        }
        sizes.push(1);
        let n = 4 + rng.next_below(29) as usize;
        let lambda = 0.05 + 0.90 * rng.next_f64();
        let beta = if case % 2 == 0 { 0.0 } else { 0.1 };

        let mut model = MlpModel::init(&sizes, Activation::Sigmoid, &mut rng).unwrap();
        let x = Matrix::from_vec(n, p, rng.sample_normal(0.0, 1.0, n * p).unwrap()).unwrap();
        let mut labels: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();
        labels[0] = 1;
        labels[1] = 0;

        let trace = forward(&model, &x).unwrap();
        let grads = backward(&model, &trace, &labels, lambda).unwrap();

        let objective = |m: &MlpModel| {
            let t = forward(m, &x).unwrap();
            crcen_loss(t.probs(), &labels, lambda).unwrap().total + l2_penalty(m, beta)
        };

        let h = 1e-6;
        for k in 0..model.num_params() {
            let orig = model.param(k);
            model.set_param(k, orig + h);
            let up = objective(&model);
            model.set_param(k, orig - h);
            let down = objective(&model);
            model.set_param(k, orig);
            let numeric = (up - down) / (2.0 * h);
            let analytic = flat_component(&model, &grads, k) + penalty_component(&model, beta, k);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            assert!(
                rel <= 1e-5,
                "case {case} sizes {sizes:?} beta {beta} param {k}: analytic {analytic}, fd {numeric}, rel {rel}"
            );
        }
    }
    println!("acceptance [3/8] gradient vs finite differences (worst rel {worst:.2e}): PASS");
}

fn flat_component(model: &MlpModel, g: &crcen_core::Gradients, mut index: usize) -> f64 {
    for l in 0..model.num_layers() {
        let nw = model.layer_sizes()[l] * model.layer_sizes()[l + 1];
        if index < nw {
            return g.weights[l].data()[index];
        }
        index -= nw;
        let nb = model.layer_sizes()[l + 1];
        if index < nb {
            return g.biases[l][index];
        }
        index -= nb;
    }
    panic!("index out of range");
}

/// d(beta * ||W||^2)/d param = 2 * beta * w for weights, 0 for biases.
fn penalty_component(model: &MlpModel, beta: f64, mut index: usize) -> f64 {
    for l in 0..model.num_layers() {
        let nw = model.layer_sizes()[l] * model.layer_sizes()[l + 1];
        if index < nw {
            return 2.0 * beta * model.weights()[l].data()[index];
        }
        index -= nw;
        let nb = model.layer_sizes()[l + 1];
        if index < nb {
            return 0.0;
        }
        index -= nb;
    }
    panic!("index out of range");
}

/// Reweighting with lambda = k/(k+1) equals plain cross entropy on data with
/// each minority sample duplicated k times, to 1e-12 relative error.
#[test]
fn criterion_4_duplication_equivalence() {
    let mut rng = RngStream::new(2718);
    for k in 1..=10usize {
        for _ in 0..5 {
            let n = 10 + rng.next_below(40) as usize;
            let probs = rng.sample_uniform(0.02, 0.98, n).unwrap();
            let mut labels: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let lambda = k as f64 / (k as f64 + 1.0);
            let weighted = crcen_loss(&probs, &labels, lambda).unwrap();

            let mut dup_probs = Vec::new();
            let mut dup_labels = Vec::new();
            for (&p, &y) in probs.iter().zip(&labels) {
                for _ in 0..if y == 1 { k } else { 1 } {
                    dup_probs.push(p);
                    dup_labels.push(y);
                }
            }
            // Plain cross entropy via the lambda = 1/2 reduction.
            let plain_ce = 2.0 * crcen_loss(&dup_probs, &dup_labels, 0.5).unwrap().total;
            let rel = (weighted.total / (1.0 - lambda) - plain_ce).abs() / plain_ce;
            assert!(rel <= 1e-12, "k={k}: rel {rel}");
        }
    }
    println!("acceptance [4/8] duplication equivalence: PASS");
}

/// Metric derivations agree exactly with a brute-force recomputation on
/// 1000 random label/prediction pairs, and the worked expense example
/// reproduces 5.53.
#[test]
fn criterion_5_metric_oracles() {
    let mut rng = RngStream::new(1618);
    for _ in 0..1000 {
        let n = 1 + rng.next_below(200) as usize;
        let truth: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();
        let pred: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();

        let cm = confusion(&truth, &pred).unwrap();
        let m = metric_report(&cm);

        // Independent recomputation straight from the label vectors.
        let count = |t: u8, p: u8| {
            truth
                .iter()
                .zip(&pred)
                .filter(|(&a, &b)| a == t && b == p)
                .count()
        };
        let (tp, fp, fn_, tn) = (count(1, 1), count(0, 1), count(1, 0), count(0, 0));
        assert_eq!((cm.tp, cm.fp, cm.fn_, cm.tn), (tp, fp, fn_, tn));
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let specificity = if fp + tn == 0 { 0.0 } else { tn as f64 / (fp + tn) as f64 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let gmean = (recall * specificity).sqrt();
        assert_eq!(m.precision.to_bits(), precision.to_bits());
        assert_eq!(m.recall.to_bits(), recall.to_bits());
        assert_eq!(m.specificity.to_bits(), specificity.to_bits());
        assert_eq!(m.f1.to_bits(), f1.to_bits());
        assert_eq!(m.gmean.to_bits(), gmean.to_bits());
    }

    let prev = ConfusionMatrix { tp: 0, fp: 158, fn_: 32, tn: 0 };
    let next = ConfusionMatrix { tp: 0, fp: 263, fn_: 13, tn: 0 };
    let e = expense(&prev, &next).unwrap();
    assert_eq!(format!("{e:.2}"), "5.53");
    println!("acceptance [5/8] metric oracles and worked expense example: PASS");
}

/// Directional performance: inverse-class-frequency weighting beats plain
/// cross entropy on overlapping imbalanced Gaussians — G-mean by at least
/// 0.05 on average, recall strictly in every seed.
#[test]
fn criterion_6_reweighting_improves_minority_detection() {
    let protocol = SimProtocol::sim2();
    let mut gap_sum = 0.0;
    let seeds: Vec<u64> = (0..10).collect();
    for &s in &seeds {
        let mut data_rng = RngStream::new(RngStream::derive_seed(9000, 2 * s));
        let mut init_rng = RngStream::new(RngStream::derive_seed(9000, 2 * s + 1));
        let train_ds = protocol.draw_dataset(1000, 10_000, &mut data_rng).unwrap();
        let test_ds = protocol.draw_dataset(1000, 1000, &mut data_rng).unwrap();

        let mut eval = |lambda: f64| {
            let mut model =
                MlpModel::init(&protocol.layer_sizes(), Activation::Sigmoid, &mut init_rng)
                    .unwrap();
            let cfg = protocol.train_config(lambda);
            train(&mut model, &train_ds, &cfg).unwrap();
            let probs = predict_proba(&model, test_ds.features()).unwrap();
            let preds = classify(&probs, 0.5);
            metric_report(&confusion(test_ds.labels(), &preds).unwrap())
        };

        let weighted = eval(lambda_from_alpha(1.0, train_ds.n0(), train_ds.n1()).unwrap());
        let plain = eval(0.5);
        assert!(
            weighted.recall > plain.recall,
            "seed {s}: recall {} !> {}",
            weighted.recall,
            plain.recall
        );
        gap_sum += weighted.gmean - plain.gmean;
        println!(
            "  seed {s}: G-mean {:.4} vs {:.4}, recall {:.4} vs {:.4}",
            weighted.gmean, plain.gmean, weighted.recall, plain.recall
        );
    }
    let mean_gap = gap_sum / seeds.len() as f64;
    assert!(mean_gap >= 0.05, "mean G-mean gap {mean_gap}");
    println!("acceptance [6/8] reweighting improves minority detection (gap {mean_gap:.3}): PASS");
}

/// Rerunning a command with the same seed and inputs produces byte-identical
/// JSON reports.
#[test]
fn criterion_7_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_crcen");
    let dir = tempfile::tempdir().unwrap();

    // simulate, twice.
    let (a, b) = (dir.path().join("sim_a"), dir.path().join("sim_b"));
    for out in [&a, &b] {
        let status = Command::new(bin)
            .args(["simulate", "--sim", "1", "--runs", "3", "--seed", "11"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_identical(&a.join("simulate.json"), &b.join("simulate.json"));

    // train, twice, on the same CSV.
    let csv = dir.path().join("data.csv");
    let mut rng = RngStream::new(23);
    let mut rows = rng.sample_normal(-1.0, 1.0, 50).unwrap();
    rows.extend(rng.sample_normal(1.0, 1.0, 500).unwrap());
    let x = Matrix::from_vec(550, 1, rows).unwrap();
    let mut y = vec![1u8; 50];
    y.extend(vec![0u8; 500]);
    crcen_cli::csvio::save_csv(&csv, &Dataset::new(x, y).unwrap(), None).unwrap();

    let (c, d) = (dir.path().join("train_a"), dir.path().join("train_b"));
    for out in [&c, &d] {
        let status = Command::new(bin)
            .args(["train", "--seed", "29", "--alpha", "1", "--hidden", "0", "--lr", "2", "--epochs", "2000"])
            .arg("--csv")
            .arg(&csv)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["model.json", "metrics.json", "keyeq.json"] {
        assert_identical(&c.join(name), &d.join(name));
    }
    println!("acceptance [7/8] byte-identical reruns: PASS");
}

fn assert_identical(a: &Path, b: &Path) {
    let ba = std::fs::read(a).unwrap();
    let bb = std::fs::read(b).unwrap();
    assert!(!ba.is_empty());
    assert_eq!(ba, bb, "{} differs between reruns", a.display());
}

/// Weight-ratio sweep: at alpha in {1/2, 1, 2} the holdout LHS lands within
/// 20% of 1/alpha on a single run, confirming the general-weight analysis.
#[test]
fn criterion_8_weight_ratio_sweep() {
    let rules = [
        LambdaRule::Alpha(0.5),
        LambdaRule::Alpha(1.0),
        LambdaRule::Alpha(2.0),
    ];
    let run = SimProtocol::sim2().run_once(4242, 0, &rules).unwrap();
    for (rule, lhs) in rules.iter().zip(&run.lhs) {
        let lhs = lhs.expect("run must converge");
        let target = match rule {
            LambdaRule::Alpha(a) => 1.0 / a,
            _ => unreachable!(),
        };
        assert!(
            (lhs - target).abs() <= 0.2 * target,
            "{}: lhs {lhs} vs target {target}",
            rule.label()
        );
        println!("  {:<16} lhs {:.4} target {:.4}", rule.label(), lhs, target);
    }
    println!("acceptance [8/8] weight-ratio sweep: PASS");
}
