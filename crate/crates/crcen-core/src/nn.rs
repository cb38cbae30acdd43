//! Multilayer perceptron with a single sigmoid output neuron, plus exact
//! backpropagation of the class-weighted cross-entropy loss.
//!
//! The output layer always has one unit; `forward` yields the minority-class
//! probability `p(y=1|x)` per row. `backward` returns the gradient of the
//! *sum* loss `L = lambda*L1 + (1-lambda)*L0` with respect to every weight
//! and bias. The gradient of the output bias is accumulated in sample order
//! with the per-sample residual written exactly as
//! `-lambda*(1-p)` (minority) / `(1-lambda)*p` (majority), so independent
//! recomputations of that expression match bitwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, RngStream};
use crate::math;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` so logarithms of
/// either side stay finite.
pub const PROB_EPS: f64 = 1e-12;

/// Hidden-layer nonlinearity. The output layer is always sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Result<Activation> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }

}

/// Numerically stable logistic function, clamped away from exact 0 and 1.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let p = if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Feed-forward network: `layer_sizes = [input, hidden..., 1]`.
///
/// `weights[l]` has shape `layer_sizes[l] x layer_sizes[l+1]` (row-major,
/// input-major); `biases[l]` has length `layer_sizes[l+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    hidden_activation: Activation,
}

impl MlpModel {
    /// Initializes weights uniformly in `±sqrt(6/(fan_in+fan_out))` and
    /// biases at zero. Weight entries are drawn in layer order, row-major.
    pub fn init(
        layer_sizes: &[usize],
        hidden_activation: Activation,
        rng: &mut RngStream,
    ) -> Result<MlpModel> {
        validate_layer_sizes(layer_sizes)?;
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
            let draws = rng.sample_uniform(-limit, limit, fan_in * fan_out)?;
            weights.push(Matrix::from_vec(fan_in, fan_out, draws)?);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden_activation,
        })
    }

    /// Reassembles a model from its parts, validating the shape chain.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        hidden_activation: Activation,
    ) -> Result<MlpModel> {
        validate_layer_sizes(&layer_sizes)?;
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::Config(format!(
                "expected {n_layers} weight matrices and bias vectors, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..n_layers {
            if weights[l].rows() != layer_sizes[l] || weights[l].cols() != layer_sizes[l + 1] {
                return Err(Error::Shape(format!(
                    "layer {l} weights are {}x{}, expected {}x{}",
                    weights[l].rows(),
                    weights[l].cols(),
                    layer_sizes[l],
                    layer_sizes[l + 1]
                )));
            }
            if biases[l].len() != layer_sizes[l + 1] {
                return Err(Error::Shape(format!(
                    "layer {l} bias has length {}, expected {}",
                    biases[l].len(),
                    layer_sizes[l + 1]
                )));
            }
            if biases[l].iter().any(|b| !b.is_finite()) {
                return Err(Error::Numeric(format!("non-finite bias in layer {l}")));
            }
        }
        Ok(MlpModel {
            layer_sizes,
            weights,
            biases,
            hidden_activation,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    /// Total number of scalar parameters.
    pub fn num_params(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Flat parameter read: per layer, weights row-major then biases.
    pub fn param(&self, index: usize) -> f64 {
        let (l, offset, is_bias) = self.locate(index);
        if is_bias {
            self.biases[l][offset]
        } else {
            self.weights[l].data()[offset]
        }
    }

    /// Flat parameter write; same indexing as [`MlpModel::param`].
    pub fn set_param(&mut self, index: usize, value: f64) {
        let (l, offset, is_bias) = self.locate(index);
        if is_bias {
            self.biases[l][offset] = value;
        } else {
            self.weights[l].data_mut()[offset] = value;
        }
    }

    fn locate(&self, mut index: usize) -> (usize, usize, bool) {
        for l in 0..self.num_layers() {
            let nw = self.layer_sizes[l] * self.layer_sizes[l + 1];
            if index < nw {
                return (l, index, false);
            }
            index -= nw;
            let nb = self.layer_sizes[l + 1];
            if index < nb {
                return (l, index, true);
            }
            index -= nb;
        }
        panic!("parameter index out of range");
    }

    pub(crate) fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.biases[layer]
    }

    pub(crate) fn apply_step(&mut self, grads: &Gradients, scale: f64) {
        for l in 0..self.num_layers() {
            let g = grads.weights[l].data();
            for (w, &gw) in self.weights[l].data_mut().iter_mut().zip(g) {
                *w -= scale * gw;
            }
            for (b, &gb) in self.biases[l].iter_mut().zip(&grads.biases[l]) {
                *b -= scale * gb;
            }
        }
    }
}

fn validate_layer_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Config(
            "layer_sizes needs at least input and output entries".into(),
        ));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::Config("layer sizes must be positive".into()));
    }
    if *sizes.last().unwrap() != 1 {
        return Err(Error::Config(format!(
            "output layer must have exactly one neuron, got {}",
            sizes.last().unwrap()
        )));
    }
    Ok(())
}

/// Everything `backward` needs from a forward pass over a batch.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input batch; `activations[l]` for `l >= 1`
    /// the activations of hidden layer `l`.
    activations: Vec<Matrix>,
    /// Hidden-layer pre-activations; kept only when the activation's
    /// derivative needs them (ReLU). Sigmoid and tanh derivatives are
    /// functions of the activation value alone.
    pre_activations: Option<Vec<Matrix>>,
    /// Raw output-neuron inputs `o`, one per row.
    outputs: Vec<f64>,
    /// `sigmoid(o)` per row, clamped strictly inside `(0, 1)`.
    probs: Vec<f64>,
}

impl ForwardTrace {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn batch_size(&self) -> usize {
        self.probs.len()
    }
}

/// Forward pass over a batch; `x.cols()` must equal the model input dim.
pub fn forward(model: &MlpModel, x: &Matrix) -> Result<ForwardTrace> {
    if x.cols() != model.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            model.input_dim()
        )));
    }
    let n_layers = model.num_layers();
    let act = model.hidden_activation;
    let keep_pre = matches!(act, Activation::Relu);
    let mut activations = Vec::with_capacity(n_layers);
    let mut pre_activations = keep_pre.then(|| Vec::with_capacity(n_layers - 1));
    activations.push(x.clone());

    for l in 0..n_layers - 1 {
        let mut z = activations[l].matmul(&model.weights[l])?;
        add_bias_rows(&mut z, &model.biases[l]);
        let mut a_data = Vec::with_capacity(z.data().len());
        match act {
            Activation::Sigmoid => a_data.extend(z.data().iter().map(|&v| sigmoid(v))),
            Activation::Relu => a_data.extend(z.data().iter().map(|&v| v.max(0.0))),
            Activation::Tanh => a_data.extend(z.data().iter().map(|&v| math::tanh(v))),
        }
        let a = Matrix::from_vec_trusted(z.rows(), z.cols(), a_data);
        if let Some(pre) = pre_activations.as_mut() {
            pre.push(z);
        }
        activations.push(a);
    }

    let last = n_layers - 1;
    let mut o_mat = activations[last].matmul(&model.weights[last])?;
    add_bias_rows(&mut o_mat, &model.biases[last]);
    let outputs: Vec<f64> = o_mat.data().to_vec();
    let probs: Vec<f64> = outputs.iter().map(|&o| sigmoid(o)).collect();

    Ok(ForwardTrace {
        activations,
        pre_activations,
        outputs,
        probs,
    })
}

/// Gradient of the sum loss, shaped exactly like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    /// Gradient component of the output neuron's bias.
    pub fn output_bias(&self) -> f64 {
        self.biases.last().expect("at least one layer")[0]
    }

    /// Squared Euclidean norm over all components.
    pub fn squared_norm(&self) -> f64 {
        let mut acc = 0.0;
        for w in &self.weights {
            for v in w.data() {
                acc += v * v;
            }
        }
        for b in &self.biases {
            for v in b {
                acc += v * v;
            }
        }
        acc
    }
}

/// Backpropagates the class-weighted cross-entropy through the trace.
///
/// Labels must be 0/1 and `lambda` strictly inside `(0, 1)`. The returned
/// gradient is for the sum loss over the batch (no `1/N` factor).
pub fn backward(
    model: &MlpModel,
    trace: &ForwardTrace,
    labels: &[u8],
    lambda: f64,
) -> Result<Gradients> {
    let n = trace.batch_size();
    if labels.len() != n {
        return Err(Error::Data(format!(
            "{} labels for a batch of {n} rows",
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Data(format!("label {bad} outside {{0, 1}}")));
    }
    crate::loss::validate_lambda(lambda)?;

    // dL/do per sample; the expression shapes below are canonical.
    let mut delta = Matrix::zeros(n, 1);
    {
        let d = delta.data_mut();
        for i in 0..n {
            let p = trace.probs[i];
            d[i] = if labels[i] == 1 {
                -lambda * (1.0 - p)
            } else {
                (1.0 - lambda) * p
            };
        }
    }

    let n_layers = model.num_layers();
    let mut grad_w: Vec<Matrix> = Vec::with_capacity(n_layers);
    let mut grad_b: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        grad_w.push(Matrix::zeros(model.layer_sizes[l], model.layer_sizes[l + 1]));
        grad_b.push(vec![0.0; model.layer_sizes[l + 1]]);
    }

    for l in (0..n_layers).rev() {
        grad_w[l] = a_transpose_times_b(&trace.activations[l], &delta);
        grad_b[l] = column_sums(&delta);
        if l > 0 {
            let mut next = a_times_b_transpose(&delta, &model.weights[l]);
            let a = trace.activations[l].data();
            match model.hidden_activation {
                Activation::Sigmoid => {
                    for (v, &av) in next.data_mut().iter_mut().zip(a) {
                        *v *= av * (1.0 - av);
                    }
                }
                Activation::Tanh => {
                    for (v, &av) in next.data_mut().iter_mut().zip(a) {
                        *v *= 1.0 - av * av;
                    }
                }
                Activation::Relu => {
                    let z = trace
                        .pre_activations
                        .as_ref()
                        .expect("relu trace keeps pre-activations")[l - 1]
                        .data();
                    for (v, &zv) in next.data_mut().iter_mut().zip(z) {
                        if zv <= 0.0 {
                            *v = 0.0;
                        }
                    }
                }
            }
            delta = next;
        }
    }

    Ok(Gradients {
        weights: grad_w,
        biases: grad_b,
    })
}

fn add_bias_rows(m: &mut Matrix, bias: &[f64]) {
    let cols = m.cols();
    for row in m.data_mut().chunks_exact_mut(cols) {
        for (v, b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

/// `a^T * b` without materializing the transpose.
fn a_transpose_times_b(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.cols(), b.cols());
    let (ac, bc) = (a.cols(), b.cols());
    for i in 0..a.rows() {
        let a_row = a.row(i);
        let b_row = b.row(i);
        for k in 0..ac {
            let scale = a_row[k];
            if scale == 0.0 {
                continue;
            }
            let out_row = &mut out.data_mut()[k * bc..(k + 1) * bc];
            for (o, &b) in out_row.iter_mut().zip(b_row) {
                *o += scale * b;
            }
        }
    }
    out
}

/// `a * b^T` without materializing the transpose.
fn a_times_b_transpose(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.rows());
    let bc = b.rows();
    for i in 0..a.rows() {
        let a_row = a.row(i);
        let out_row = &mut out.data_mut()[i * bc..(i + 1) * bc];
        for (k, slot) in out_row.iter_mut().enumerate() {
            let b_row = b.row(k);
            let mut acc = 0.0;
            for (av, bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            *slot = acc;
        }
    }
    out
}

/// Sums each column of `m`, accumulating rows in order.
fn column_sums(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (acc, v) in out.iter_mut().zip(m.row(i)) {
            *acc += v;
        }
    }
    out
}
