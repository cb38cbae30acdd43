//! Calibration harness: epochs and wall time to reach the convergence
//! tolerance at several learning rates, for both simulation protocols.
//!
//! Run: cargo run -p crcen-core --example sim_calibrate --release

use std::time::Instant;

use crcen_core::keyeq::{key_eq_generalized, LambdaRule, SimProtocol};
use crcen_core::nn::Activation;
use crcen_core::trainer::{predict_proba, train};
use crcen_core::{MlpModel, RngStream};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("sim2");
    let protocol = match which {
        "sim1" => SimProtocol::Sim1,
        _ => SimProtocol::sim2(),
    };
    let lrs: Vec<f64> = args
        .get(2)
        .map(|s| s.split(',').map(|t| t.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0, 4.0, 8.0]);

    let rules: Vec<LambdaRule> = match args.get(3).map(String::as_str) {
        Some("half") => vec![LambdaRule::Half],
        _ => vec![LambdaRule::Half, LambdaRule::Alpha(1.0), LambdaRule::Alpha(2.0)],
    };
    let mut data_rng = RngStream::new(RngStream::derive_seed(777, 0));
    let train_ds = protocol.draw_dataset(1000, 10_000, &mut data_rng).unwrap();
    let test_ds = protocol.draw_dataset(1000, 1000, &mut data_rng).unwrap();

    for &lr in &lrs {
        for rule in rules.iter() {
            let lambda = rule.lambda(train_ds.n0(), train_ds.n1()).unwrap();
            let mut init_rng = RngStream::new(RngStream::derive_seed(777, 1));
            let mut model =
                MlpModel::init(&protocol.layer_sizes(), Activation::Sigmoid, &mut init_rng)
                    .unwrap();
            let mut cfg = protocol.train_config(lambda);
            cfg.learning_rate = lr;
            let t0 = Instant::now();
            let rep = train(&mut model, &train_ds, &cfg).unwrap();
            let dt = t0.elapsed().as_secs_f64();
            let probs = predict_proba(&model, test_ds.features()).unwrap();
            let kr = key_eq_generalized(
                &probs,
                test_ds.labels(),
                lambda,
                train_ds.n0(),
                train_ds.n1(),
            )
            .unwrap();
            println!(
                "{} lr={lr:<4} {:<14} epochs={:<6} conv={} final_lr={:<10.4e} t={dt:.2}s lhs={:.4} rhs={:.4}",
                protocol.name(),
                rule.label(),
                rep.epochs,
                rep.converged,
                rep.final_learning_rate,
                kr.lhs,
                kr.rhs
            );
        }
    }
}
