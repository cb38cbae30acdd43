//! Gradient-descent training of the reweighted cross-entropy objective.
//!
//! The optimized objective is `L(theta) + beta * Omega(theta)` where `L` is
//! the sum loss and `Omega` the bias-exempt L2 penalty. Steps use the
//! gradient scaled by `1/N` so one learning rate works across batch sizes;
//! the stationary point is unaffected.
//!
//! Full-batch mode is the reference path: if a step would increase the
//! objective the rate is halved and the step retried (up to 30 halvings), so
//! the epoch-end objective never increases, and convergence is declared when
//! the output-bias gradient of the data loss, normalized by `N`, falls below
//! `convergence_tol`. That component is exactly the quantity whose vanishing
//! yields the key weight/probability identity, which is what makes the
//! verifier's tolerance principled. Mini-batch mode is offered for larger
//! datasets but is a weaker basis for key-equation checks: the stationarity
//! condition only holds approximately at the point where it stops.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RngStream};
use crate::loss::{self, LossValue};
use crate::nn::{self, ForwardTrace, MlpModel};

const MAX_HALVINGS: u32 = 30;

/// How gradients are accumulated per update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BatchMode {
    FullBatch,
    MiniBatch(usize),
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Minority-class weight, strictly inside (0, 1).
    pub lambda: f64,
    /// Step scale applied to the N-normalized gradient. Zero is accepted and
    /// means "evaluate but never step".
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// L2 coefficient on weights (biases exempt).
    pub beta: f64,
    pub batch_mode: BatchMode,
    /// Convergence threshold on `|dL/db_out| / N`.
    pub convergence_tol: f64,
    /// Seed for mini-batch shuffling; unused in full-batch mode.
    pub seed: u64,
    /// Decision threshold for classification, strictly inside (0, 1).
    pub decision_threshold: f64,
    /// After full-batch descent finishes, solve the output bias's own
    /// stationarity condition exactly (1-D Newton with bisection guard).
    /// The objective restricted to that coordinate is strictly convex, so
    /// the refinement can only decrease the loss, and it drives the exact
    /// quantity the convergence criterion is defined on. Ignored in
    /// mini-batch mode and when the learning rate is zero.
    pub refine_output_bias: bool,
}

impl TrainConfig {
    pub fn new(lambda: f64) -> TrainConfig {
        TrainConfig {
            lambda,
            learning_rate: 0.1,
            max_epochs: 20_000,
            beta: 0.0,
            batch_mode: BatchMode::FullBatch,
            convergence_tol: 1e-6,
            seed: 0,
            decision_threshold: 0.5,
            refine_output_bias: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        loss::validate_lambda(self.lambda)?;
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Param(format!(
                "learning_rate must be finite and nonnegative, got {}",
                self.learning_rate
            )));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::Param(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Param(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::Param(format!(
                "decision_threshold must lie inside (0, 1), got {}",
                self.decision_threshold
            )));
        }
        if let BatchMode::MiniBatch(0) = self.batch_mode {
            return Err(Error::Param("mini-batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a training run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    /// Final loss decomposition on the training data (penalty included as
    /// its own component).
    pub loss: LossValue,
    pub epochs: usize,
    pub converged: bool,
    /// Final output-bias gradient of the sum data loss.
    pub output_bias_grad: f64,
    /// `|output_bias_grad| / N`; `converged` means this fell below
    /// `convergence_tol`.
    pub output_bias_grad_normalized: f64,
    /// Learning rate after backoff.
    pub final_learning_rate: f64,
    /// Epoch-end objective values (full-batch mode), for diagnostics.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub objective_history: Vec<f64>,
    /// Measured only when the `std` feature is enabled; excluded from
    /// serialized reports so reruns stay byte-identical.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub wall_time_secs: f64,
}

/// Trains `model` in place. Requires both classes present and matching
/// feature width.
pub fn train(model: &mut MlpModel, data: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if !data.has_both_classes() {
        return Err(Error::Data(format!(
            "training data must contain both classes, got n0={}, n1={}",
            data.n0(),
            data.n1()
        )));
    }
    if data.num_features() != model.input_dim() {
        return Err(Error::Shape(format!(
            "data has {} features, model expects {}",
            data.num_features(),
            model.input_dim()
        )));
    }

    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let mut report = match cfg.batch_mode {
        BatchMode::FullBatch => train_full_batch(model, data, cfg),
        BatchMode::MiniBatch(size) => train_mini_batch(model, data, cfg, size),
    }?;

    #[cfg(feature = "std")]
    {
        report.wall_time_secs = started.elapsed().as_secs_f64();
    }
    Ok(report)
}

fn objective(model: &MlpModel, trace: &ForwardTrace, labels: &[u8], cfg: &TrainConfig) -> Result<LossValue> {
    let mut lv = loss::crcen_loss(trace.probs(), labels, cfg.lambda)?;
    lv.penalty = loss::l2_penalty(model, cfg.beta);
    Ok(lv)
}

/// Adds the penalty gradient `2*beta*W` (weights only) scaled by `scale`.
fn add_penalty_grad(grads: &mut nn::Gradients, model: &MlpModel, beta: f64, scale: f64) {
    if beta == 0.0 {
        return;
    }
    for (g, w) in grads.weights.iter_mut().zip(model.weights()) {
        for (gv, wv) in g.data_mut().iter_mut().zip(w.data()) {
            *gv += scale * 2.0 * beta * wv;
        }
    }
}

fn train_full_batch(model: &mut MlpModel, data: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    let n = data.len() as f64;
    let labels = data.labels();
    let mut lr = cfg.learning_rate;

    let mut trace = nn::forward(model, data.features())?;
    let mut lv = objective(model, &trace, labels, cfg)?;
    let mut obj = lv.total + lv.penalty;
    if !obj.is_finite() {
        return Err(Error::Numeric(format!("initial objective is {obj}")));
    }

    let mut history = Vec::new();
    let mut converged = false;
    let mut epochs = 0;
    let mut bias_grad = f64::NAN;

    for epoch in 0..cfg.max_epochs {
        let mut grads = nn::backward(model, &trace, labels, cfg.lambda)?;
        bias_grad = grads.output_bias();
        if crate::math::abs(bias_grad) / n <= cfg.convergence_tol {
            converged = true;
            break;
        }
        if lr == 0.0 {
            break;
        }
        add_penalty_grad(&mut grads, model, cfg.beta, 1.0);

        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut candidate = model.clone();
            candidate.apply_step(&grads, lr / n);
            let trace_new = match nn::forward(&candidate, data.features()) {
                Ok(t) => t,
                Err(Error::Numeric(_)) => {
                    lr *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let lv_new = objective(&candidate, &trace_new, labels, cfg)?;
            let obj_new = lv_new.total + lv_new.penalty;
            if obj_new.is_nan() || obj_new > obj {
                lr *= 0.5;
                continue;
            }
            *model = candidate;
            trace = trace_new;
            lv = lv_new;
            obj = obj_new;
            accepted = true;
            break;
        }
        epochs = epoch + 1;
        history.push(obj);
        if !accepted {
            // No decrease possible at float precision; re-read the gradient
            // for the report and stop.
            break;
        }
    }

    if !converged && lr > 0.0 && cfg.refine_output_bias {
        let shift = solve_bias_shift(trace.outputs(), labels, cfg.lambda, cfg.convergence_tol * n);
        let out_layer = model.num_layers() - 1;
        let mut refined = model.clone();
        refined.bias_mut(out_layer)[0] += shift;
        let trace_new = nn::forward(&refined, data.features())?;
        let lv_new = objective(&refined, &trace_new, labels, cfg)?;
        // The shift targets the 1-D minimum along the bias, so this only
        // rejects pathological rounding.
        if lv_new.total + lv_new.penalty <= obj {
            *model = refined;
            trace = trace_new;
            lv = lv_new;
        }
    }

    if !converged && lr > 0.0 {
        let grads = nn::backward(model, &trace, labels, cfg.lambda)?;
        bias_grad = grads.output_bias();
        converged = crate::math::abs(bias_grad) / n <= cfg.convergence_tol;
    }

    Ok(TrainReport {
        loss: lv,
        epochs,
        converged,
        output_bias_grad: bias_grad,
        output_bias_grad_normalized: crate::math::abs(bias_grad) / n,
        final_learning_rate: lr,
        objective_history: history,
        wall_time_secs: 0.0,
    })
}

/// Root of the output-bias gradient as a function of a uniform shift of the
/// output-neuron inputs.
///
/// `g(delta) = -lambda * sum_{y=1}(1 - sigma(o+delta)) + (1-lambda) *
/// sum_{y=0} sigma(o+delta)` is strictly increasing with `g(-inf) < 0 <
/// g(+inf)`, so the root exists and is unique. Newton steps are kept inside
/// a shrinking bisection bracket.
fn solve_bias_shift(outputs: &[f64], labels: &[u8], lambda: f64, tol_abs: f64) -> f64 {
    let eval = |delta: f64| {
        let mut grad = 0.0;
        let mut curv = 0.0;
        for (&o, &y) in outputs.iter().zip(labels) {
            let p = nn::sigmoid(o + delta);
            if y == 1 {
                grad += -lambda * (1.0 - p);
                curv += lambda * p * (1.0 - p);
            } else {
                grad += (1.0 - lambda) * p;
                curv += (1.0 - lambda) * p * (1.0 - p);
            }
        }
        (grad, curv)
    };

    let target = (tol_abs * 1e-3).max(1e-12);
    let (mut lo, mut hi) = (-1.0, 1.0);
    while eval(lo).0 > 0.0 && lo > -1e6 {
        lo *= 2.0;
    }
    while eval(hi).0 < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    let mut x = 0.0;
    for _ in 0..128 {
        let (g, c) = eval(x);
        if crate::math::abs(g) <= target {
            return x;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - g / c;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (crate::math::abs(lo) + crate::math::abs(hi)) {
            break;
        }
    }
    x
}

fn train_mini_batch(
    model: &mut MlpModel,
    data: &Dataset,
    cfg: &TrainConfig,
    batch_size: usize,
) -> Result<TrainReport> {
    let n = data.len() as f64;
    let labels = data.labels();
    let mut rng = RngStream::new(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut converged = false;
    let mut epochs = 0;
    let mut bias_grad;

    loop {
        // Convergence is always judged on the full batch.
        let trace = nn::forward(model, data.features())?;
        let grads = nn::backward(model, &trace, labels, cfg.lambda)?;
        bias_grad = grads.output_bias();
        if crate::math::abs(bias_grad) / n <= cfg.convergence_tol {
            converged = true;
            break;
        }
        if epochs >= cfg.max_epochs || cfg.learning_rate == 0.0 {
            break;
        }

        rng.shuffle(&mut order);
        for chunk in order.chunks(batch_size) {
            let xb = data.features().select_rows(chunk)?;
            let yb: Vec<u8> = chunk.iter().map(|&i| labels[i]).collect();
            let trace_b = nn::forward(model, &xb)?;
            let mut grads_b = nn::backward(model, &trace_b, &yb, cfg.lambda)?;
            // Penalty force spread over the epoch in proportion to batch size.
            add_penalty_grad(&mut grads_b, model, cfg.beta, chunk.len() as f64 / n);
            model.apply_step(&grads_b, cfg.learning_rate / chunk.len() as f64);
        }
        epochs += 1;

        let check = nn::forward(model, data.features())?;
        let lv = objective(model, &check, labels, cfg)?;
        if !(lv.total + lv.penalty).is_finite() {
            return Err(Error::Numeric(format!(
                "objective became non-finite after epoch {epochs}"
            )));
        }
    }

    let trace = nn::forward(model, data.features())?;
    let lv = objective(model, &trace, labels, cfg)?;
    Ok(TrainReport {
        loss: lv,
        epochs,
        converged,
        output_bias_grad: bias_grad,
        output_bias_grad_normalized: crate::math::abs(bias_grad) / n,
        final_learning_rate: cfg.learning_rate,
        objective_history: Vec::new(),
        wall_time_secs: 0.0,
    })
}

/// Minority-class probability per row of `x`.
pub fn predict_proba(model: &MlpModel, x: &Matrix) -> Result<Vec<f64>> {
    Ok(nn::forward(model, x)?.probs().to_vec())
}

/// Label 1 iff `p > threshold` (strict; a probability equal to the threshold
/// classifies as 0).
pub fn classify(probs: &[f64], threshold: f64) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p > threshold)).collect()
}
