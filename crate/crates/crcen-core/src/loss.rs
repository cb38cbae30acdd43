//! Class-wise reweighted cross-entropy and its companions.
//!
//! `total = lambda * L1 + (1 - lambda) * L0`, where `L1` sums `-log p` over
//! minority samples and `L0` sums `-log(1-p)` over majority samples. At
//! `lambda = 1/2` this is half the conventional cross entropy. The L2 penalty
//! covers weights only — biases stay unregularized, which is what keeps the
//! output-bias stationarity identity intact under regularized training.

use alloc::format;

use crate::error::{Error, Result};
use crate::math;
use crate::nn::{MlpModel, PROB_EPS};

/// Decomposed loss. `penalty` is reported separately and never folded into
/// `total`; the trainer adds it to the objective it descends.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossValue {
    /// `lambda * L1 + (1 - lambda) * L0`.
    pub total: f64,
    /// Minority term `L1 = -sum_{y=1} log p`.
    pub minority: f64,
    /// Majority term `L0 = -sum_{y=0} log(1-p)`.
    pub majority: f64,
    /// `beta * sum of squared weights` (bias-exempt); zero unless supplied.
    pub penalty: f64,
}

/// Rejects class weights outside the open interval `(0, 1)`.
///
/// The endpoints are excluded because the weight-ratio `(1-lambda)/lambda`
/// degenerates there.
pub fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Param(format!(
            "lambda must lie strictly inside (0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// Evaluates the reweighted cross entropy over a batch.
///
/// Probabilities are clamped to `[1e-12, 1 - 1e-12]` before the logarithm;
/// values outside `[0, 1]` are a caller bug and rejected.
pub fn crcen_loss(probs: &[f64], labels: &[u8], lambda: f64) -> Result<LossValue> {
    if probs.is_empty() {
        return Err(Error::Data("loss over an empty batch".into()));
    }
    if probs.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} probabilities vs {} labels",
            probs.len(),
            labels.len()
        )));
    }
    validate_lambda(lambda)?;

    let mut minority = 0.0;
    let mut majority = 0.0;
    for (i, (&p, &y)) in probs.iter().zip(labels).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Numeric(format!(
                "probability {p} at index {i} outside [0, 1]"
            )));
        }
        if y > 1 {
            return Err(Error::Data(format!("label {y} at index {i} outside {{0, 1}}")));
        }
        let pc = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
        if y == 1 {
            minority -= math::ln(pc);
        } else {
            majority -= math::ln(1.0 - pc);
        }
    }
    Ok(LossValue {
        total: lambda * minority + (1.0 - lambda) * majority,
        minority,
        majority,
        penalty: 0.0,
    })
}

/// `beta` times the sum of squared weight entries over all layers; biases
/// are exempt.
pub fn l2_penalty(model: &MlpModel, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for w in model.weights() {
        for v in w.data() {
            acc += v * v;
        }
    }
    beta * acc
}

/// Weight from the imbalance-scaled parameterization:
/// `lambda = alpha*n0 / (alpha*n0 + n1)`.
pub fn lambda_from_alpha(alpha: f64, n0: usize, n1: usize) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Param(format!("alpha must be positive, got {alpha}")));
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::Param("both class counts must be nonzero".into()));
    }
    let a0 = alpha * n0 as f64;
    Ok(a0 / (a0 + n1 as f64))
}
