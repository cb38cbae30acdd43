//! Times the pieces of one full-batch epoch on simulation-sized data.

use std::time::Instant;

use crcen_core::keyeq::SimProtocol;
use crcen_core::loss::crcen_loss;
use crcen_core::nn::{backward, forward, Activation};
use crcen_core::{MlpModel, RngStream};

fn main() {
    let p = SimProtocol::sim2();
    let mut rng = RngStream::new(1);
    let ds = p.draw_dataset(1000, 10_000, &mut rng).unwrap();
    let mut init = RngStream::new(2);
    let model = MlpModel::init(&[3, 10, 1], Activation::Sigmoid, &mut init).unwrap();

    let reps = 200;
    let t = Instant::now();
    let mut trace = forward(&model, ds.features()).unwrap();
    for _ in 0..reps - 1 {
        trace = forward(&model, ds.features()).unwrap();
    }
    println!("forward:  {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps {
        let _ = backward(&model, &trace, ds.labels(), 0.5).unwrap();
    }
    println!("backward: {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps {
        let _ = crcen_loss(trace.probs(), ds.labels(), 0.5).unwrap();
    }
    println!("loss:     {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);
}
