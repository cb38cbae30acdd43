//! Sim2 summary statistics vs GD epoch budget, to pick the protocol cap.

use crcen_core::keyeq::{key_eq_generalized, LambdaRule, SimProtocol};
use crcen_core::nn::Activation;
use crcen_core::trainer::{predict_proba, train};
use crcen_core::{MlpModel, RngStream};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1500);
    let runs: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let p = SimProtocol::sim2();
    let rules = [LambdaRule::Half, LambdaRule::Alpha(1.0), LambdaRule::Alpha(2.0)];

    let t0 = Instant::now();
    let handles: Vec<_> = (0..2)
        .map(|w| {
            let rules = rules;
            std::thread::spawn(move || {
                let mut acc: Vec<Vec<f64>> = vec![Vec::new(); rules.len()];
                let mut r = w;
                while r < runs {
                    let mut data_rng = RngStream::new(RngStream::derive_seed(500, 2 * r));
                    let mut init_rng = RngStream::new(RngStream::derive_seed(500, 2 * r + 1));
                    let train_ds = p.draw_dataset(1000, 10_000, &mut data_rng).unwrap();
                    let test_ds = p.draw_dataset(1000, 1000, &mut data_rng).unwrap();
                    for (j, rule) in rules.iter().enumerate() {
                        let lambda = rule.lambda(train_ds.n0(), train_ds.n1()).unwrap();
                        let mut model = MlpModel::init(&[3, 10, 1], Activation::Sigmoid, &mut init_rng).unwrap();
                        let mut cfg = p.train_config(lambda);
                        cfg.max_epochs = epochs;
                        let rep = train(&mut model, &train_ds, &cfg).unwrap();
                        if rep.converged {
                            let probs = predict_proba(&model, test_ds.features()).unwrap();
                            let kr = key_eq_generalized(&probs, test_ds.labels(), lambda, train_ds.n0(), train_ds.n1()).unwrap();
                            acc[j].push(kr.lhs);
                        }
                    }
                    r += 2;
                }
                acc
            })
        })
        .collect();
    let mut acc: Vec<Vec<f64>> = vec![Vec::new(); rules.len()];
    for h in handles {
        for (j, v) in h.join().unwrap().into_iter().enumerate() {
            acc[j].extend(v);
        }
    }
    println!("epochs={epochs} runs={runs} wall={:.0}s", t0.elapsed().as_secs_f64());
    for (j, rule) in rules.iter().enumerate() {
        let v = &acc[j];
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        println!(
            "  {:<14} rhs={:<5} n={} mean={:.4} std={:.4}",
            rule.label(),
            rule.rhs(10_000, 1000),
            v.len(),
            mean,
            var.sqrt()
        );
    }
}
