//! Stage-level timings for the hot forward path.

use std::time::Instant;
use crcen_core::keyeq::SimProtocol;
use crcen_core::nn::sigmoid;
use crcen_core::{Matrix, MlpModel, RngStream};
use crcen_core::nn::Activation;

fn main() {
    let p = SimProtocol::sim2();
    let mut rng = RngStream::new(1);
    let ds = p.draw_dataset(1000, 10_000, &mut rng).unwrap();
    let x = ds.features();
    let mut init = RngStream::new(2);
    let model = MlpModel::init(&[3, 10, 1], Activation::Sigmoid, &mut init).unwrap();
    let w1 = &model.weights()[0];
    let reps = 200;

    let t = Instant::now();
    let mut z = x.matmul(w1).unwrap();
    for _ in 0..reps - 1 {
        z = x.matmul(w1).unwrap();
    }
    println!("matmul 11000x3 * 3x10: {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let zdata = z.data().to_vec();
    let t = Instant::now();
    let mut sink = 0.0;
    for _ in 0..reps {
        let a: Vec<f64> = zdata.iter().map(|&v| sigmoid(v)).collect();
        sink += a[0];
    }
    println!("sigmoid over 110k: {:.2} ms (sink {sink:.3})", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let a = Matrix::from_vec(11000, 10, zdata.iter().map(|&v| sigmoid(v)).collect()).unwrap();
    let w2 = &model.weights()[1];
    let t = Instant::now();
    for _ in 0..reps {
        let o = a.matmul(w2).unwrap();
        std::hint::black_box(&o);
    }
    println!("matmul 11000x10 * 10x1: {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);

    let t = Instant::now();
    for _ in 0..reps {
        let c = x.clone();
        std::hint::black_box(&c);
    }
    println!("input clone: {:.2} ms", t.elapsed().as_secs_f64() * 1e3 / reps as f64);
}
