//! Layered feedforward network model.
//!
//! A [`Network`] is an ordered list of [`Layer`]s; layer `l` maps the
//! post-activations of layer `l` (layer 0 consumes the raw input) through an
//! affine map followed by an activation. [`forward`] records the full
//! [`Trace`] of pre- and post-activations, which downstream bound
//! computations consume.
//!
//! All activations are applied component-wise except max-pooling, which
//! reduces contiguous, non-overlapping groups of `group_size` pre-activations
//! to their maximum.

use crate::error::{Result, VerifyError};
use crate::linalg;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

/// Activation applied by a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ActivationRepr", into = "ActivationRepr")]
pub enum ActivationKind {
    Relu,
    Sigmoid,
    Tanh,
    /// ELU with alpha = 1.
    Elu,
    Identity,
    /// Max over contiguous groups of `group_size` inputs.
    MaxPool(usize),
}

/// JSON form: a lowercase name, or `{"maxpool": g}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActivationRepr {
    MaxPool { maxpool: usize },
    Name(String),
}

impl TryFrom<ActivationRepr> for ActivationKind {
    type Error = String;
    fn try_from(repr: ActivationRepr) -> std::result::Result<Self, String> {
        match repr {
            ActivationRepr::MaxPool { maxpool } => Ok(ActivationKind::MaxPool(maxpool)),
            ActivationRepr::Name(name) => match name.as_str() {
                "relu" => Ok(ActivationKind::Relu),
                "sigmoid" => Ok(ActivationKind::Sigmoid),
                "tanh" => Ok(ActivationKind::Tanh),
                "elu" => Ok(ActivationKind::Elu),
                "identity" => Ok(ActivationKind::Identity),
                other => Err(format!("unknown activation {other:?}")),
            },
        }
    }
}

impl From<ActivationKind> for ActivationRepr {
    fn from(kind: ActivationKind) -> Self {
        match kind {
            ActivationKind::MaxPool(g) => ActivationRepr::MaxPool { maxpool: g },
            other => ActivationRepr::Name(other.name().to_string()),
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::MaxPool(g) => write!(f, "maxpool({g})"),
            other => f.write_str(other.name()),
        }
    }
}

impl ActivationKind {
    fn name(&self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Elu => "elu",
            ActivationKind::Identity => "identity",
            ActivationKind::MaxPool(_) => "maxpool",
        }
    }

    pub fn is_componentwise(&self) -> bool {
        !matches!(self, ActivationKind::MaxPool(_))
    }

    /// Differentiable with Lipschitz-continuous derivative.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            ActivationKind::Sigmoid | ActivationKind::Tanh | ActivationKind::Identity
        )
    }

    /// Scalar evaluation. Panics on MaxPool, which is not component-wise.
    pub fn scalar(&self, y: f64) -> f64 {
        match self {
            ActivationKind::Relu => y.max(0.0),
            ActivationKind::Sigmoid => sigmoid(y),
            ActivationKind::Tanh => y.tanh(),
            ActivationKind::Elu => {
                if y >= 0.0 {
                    y
                } else {
                    y.exp() - 1.0
                }
            }
            ActivationKind::Identity => y,
            ActivationKind::MaxPool(_) => panic!("maxpool has no scalar evaluation"),
        }
    }

    /// Scalar first/second derivative for the smooth kinds (plus ELU).
    ///
    /// ELU's second derivative jumps at 0; the right-limit value 0 is used
    /// there.
    pub fn scalar_deriv(&self, y: f64, order: u8) -> Result<f64> {
        let bad = |op| VerifyError::UnsupportedActivation {
            kind: self.to_string(),
            op,
        };
        match (self, order) {
            (ActivationKind::Sigmoid, 1) => {
                let s = sigmoid(y);
                Ok(s * (1.0 - s))
            }
            (ActivationKind::Sigmoid, 2) => {
                let s = sigmoid(y);
                Ok(s * (1.0 - s) * (1.0 - 2.0 * s))
            }
            (ActivationKind::Tanh, 1) => {
                let t = y.tanh();
                Ok(1.0 - t * t)
            }
            (ActivationKind::Tanh, 2) => {
                let t = y.tanh();
                Ok(-2.0 * t * (1.0 - t * t))
            }
            (ActivationKind::Elu, 1) => Ok(if y < 0.0 { y.exp() } else { 1.0 }),
            (ActivationKind::Elu, 2) => Ok(if y < 0.0 { y.exp() } else { 0.0 }),
            (ActivationKind::Identity, 1) => Ok(1.0),
            (ActivationKind::Identity, 2) => Ok(0.0),
            (_, 1 | 2) => Err(bad("derivative")),
            _ => Err(VerifyError::InvalidConfig(format!(
                "derivative order {order} not supported"
            ))),
        }
    }

    /// Output width given the pre-activation width.
    pub fn out_dim(&self, pre_dim: usize) -> usize {
        match self {
            ActivationKind::MaxPool(g) => pre_dim / g,
            _ => pre_dim,
        }
    }
}

fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// Component-wise activation of a vector; MaxPool reduces each group to its
/// maximum.
pub fn activation_eval(kind: ActivationKind, y: &[f64]) -> Result<Vec<f64>> {
    match kind {
        ActivationKind::MaxPool(g) => {
            if g < 2 || y.len() % g != 0 {
                return Err(VerifyError::Shape(format!(
                    "maxpool group {g} does not divide width {}",
                    y.len()
                )));
            }
            Ok(y.chunks(g)
                .map(|chunk| chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect())
        }
        kind => Ok(y.iter().map(|&v| kind.scalar(v)).collect()),
    }
}

/// Component-wise first or second derivative of the activation.
///
/// Rejects ReLU and MaxPool, which are not differentiable everywhere.
pub fn activation_derivs(kind: ActivationKind, y: &[f64], order: u8) -> Result<Vec<f64>> {
    if matches!(kind, ActivationKind::Relu | ActivationKind::MaxPool(_)) {
        return Err(VerifyError::UnsupportedActivation {
            kind: kind.to_string(),
            op: "derivative",
        });
    }
    y.iter().map(|&v| kind.scalar_deriv(v, order)).collect()
}

/// (gamma, eta) = (sup |h''|, sup |h'''|) for a smooth activation.
///
/// Computed once per kind by a dense grid of 10^6 + 1 points over [-10, 10]
/// (both curvatures decay exponentially outside that range) and padded by a
/// 1.01 safety factor, then cached. The third derivative is taken by central
/// differences of the analytic second derivative.
pub fn smoothness_constants(kind: ActivationKind) -> Result<(f64, f64)> {
    match kind {
        ActivationKind::Identity => Ok((0.0, 0.0)),
        ActivationKind::Sigmoid => {
            static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
            Ok(*CACHE.get_or_init(|| grid_smoothness(ActivationKind::Sigmoid)))
        }
        ActivationKind::Tanh => {
            static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
            Ok(*CACHE.get_or_init(|| grid_smoothness(ActivationKind::Tanh)))
        }
        other => Err(VerifyError::UnsupportedActivation {
            kind: other.to_string(),
            op: "smoothness constants",
        }),
    }
}

const SMOOTHNESS_SAFETY: f64 = 1.01;

fn grid_smoothness(kind: ActivationKind) -> (f64, f64) {
    const HALF_WIDTH: f64 = 10.0;
    const POINTS: usize = 1_000_001;
    const FD_STEP: f64 = 1e-5;
    let step = 2.0 * HALF_WIDTH / (POINTS - 1) as f64;
    let mut gamma = 0.0f64;
    let mut eta = 0.0f64;
    for i in 0..POINTS {
        let y = -HALF_WIDTH + step * i as f64;
        let h2 = kind.scalar_deriv(y, 2).expect("smooth kind");
        gamma = gamma.max(h2.abs());
        let h3 = (kind.scalar_deriv(y + FD_STEP, 2).expect("smooth kind")
            - kind.scalar_deriv(y - FD_STEP, 2).expect("smooth kind"))
            / (2.0 * FD_STEP);
        eta = eta.max(h3.abs());
    }
    (gamma * SMOOTHNESS_SAFETY, eta * SMOOTHNESS_SAFETY)
}

/// One affine layer plus activation. Row count of `weights` equals the
/// pre-activation width; `bias` has the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerDoc")]
pub struct Layer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: ActivationKind,
}

#[derive(Deserialize)]
struct LayerDoc {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: ActivationKind,
}

impl TryFrom<LayerDoc> for Layer {
    type Error = VerifyError;
    fn try_from(doc: LayerDoc) -> Result<Self> {
        Layer::new(doc.weights, doc.bias, doc.activation)
    }
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: ActivationKind) -> Result<Self> {
        if weights.is_empty() || bias.is_empty() {
            return Err(VerifyError::InvalidModel("empty layer".into()));
        }
        if weights.len() != bias.len() {
            return Err(VerifyError::Shape(format!(
                "weight rows {} != bias length {}",
                weights.len(),
                bias.len()
            )));
        }
        let in_dim = weights[0].len();
        if in_dim == 0 {
            return Err(VerifyError::InvalidModel("zero-width layer input".into()));
        }
        for row in &weights {
            if row.len() != in_dim {
                return Err(VerifyError::Shape(format!(
                    "ragged weight matrix: row of length {} versus {}",
                    row.len(),
                    in_dim
                )));
            }
            if !linalg::all_finite(row) {
                return Err(VerifyError::NonFinite("layer weights"));
            }
        }
        if !linalg::all_finite(&bias) {
            return Err(VerifyError::NonFinite("layer bias"));
        }
        if let ActivationKind::MaxPool(g) = activation {
            if g < 2 {
                return Err(VerifyError::InvalidModel(format!(
                    "maxpool group size {g} must be at least 2"
                )));
            }
            if weights.len() % g != 0 {
                return Err(VerifyError::InvalidModel(format!(
                    "maxpool group size {g} does not divide layer width {}",
                    weights.len()
                )));
            }
        }
        Ok(Layer {
            weights,
            bias,
            activation,
        })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn in_dim(&self) -> usize {
        self.weights[0].len()
    }

    /// Pre-activation width (rows of the weight matrix).
    pub fn pre_dim(&self) -> usize {
        self.weights.len()
    }

    /// Post-activation width (maxpool divides by the group size).
    pub fn out_dim(&self) -> usize {
        self.activation.out_dim(self.pre_dim())
    }

    pub fn affine(&self, x: &[f64]) -> Vec<f64> {
        linalg::add(&linalg::matvec(&self.weights, x), &self.bias)
    }
}

/// Immutable layered network. Construction validates the shape chain, so
/// every reachable `Network` value is well-formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc")]
pub struct Network {
    layers: Vec<Layer>,
}

#[derive(Deserialize)]
struct NetworkDoc {
    layers: Vec<Layer>,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = VerifyError;
    fn try_from(doc: NetworkDoc) -> Result<Self> {
        Network::new(doc.layers)
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(VerifyError::InvalidModel("network has no layers".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(VerifyError::Shape(format!(
                    "layer {l} output width {} != layer {} input width {}",
                    pair[0].out_dim(),
                    l + 1,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Sub-network made of the first `n_layers` layers.
    pub fn prefix(&self, n_layers: usize) -> Result<Network> {
        if n_layers == 0 || n_layers > self.layers.len() {
            return Err(VerifyError::InvalidModel(format!(
                "prefix of {n_layers} layers out of {}",
                self.layers.len()
            )));
        }
        Network::new(self.layers[..n_layers].to_vec())
    }
}

/// Pre- and post-activations recorded by a forward pass.
///
/// `pre[l]` is the pre-activation of layer `l` (0-based), `post[0]` is the
/// input, and `post[l + 1]` the activation of layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl Trace {
    /// Network output (post-activation of the last layer).
    pub fn output(&self) -> &[f64] {
        self.post.last().unwrap()
    }
}

/// Evaluates the network, recording every pre/post activation.
pub fn forward(net: &Network, x: &[f64]) -> Result<Trace> {
    if x.len() != net.input_dim() {
        return Err(VerifyError::Shape(format!(
            "input length {} != network input width {}",
            x.len(),
            net.input_dim()
        )));
    }
    if !linalg::all_finite(x) {
        return Err(VerifyError::NonFinite("network input"));
    }
    let mut pre = Vec::with_capacity(net.num_layers());
    let mut post = Vec::with_capacity(net.num_layers() + 1);
    post.push(x.to_vec());
    for layer in net.layers() {
        let z = layer.affine(post.last().unwrap());
        let a = activation_eval(layer.activation(), &z)?;
        pre.push(z);
        post.push(a);
    }
    Ok(Trace { pre, post })
}

/// Serializes a network to the JSON model format.
pub fn save_network(net: &Network) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(net).expect("network serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

/// Parses and validates a network from the JSON model format.
pub fn load_network(bytes: &[u8]) -> Result<Network> {
    Ok(serde_json::from_slice(bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_relu() -> Network {
        Network::new(vec![
            Layer::new(vec![vec![1.0, -1.0]], vec![0.0], ActivationKind::Relu).unwrap()
        ])
        .unwrap()
    }

    #[test]
    fn forward_single_relu_layer() {
        let t = forward(&single_relu(), &[1.0, 0.5]).unwrap();
        assert_eq!(t.pre[0], vec![0.5]);
        assert_eq!(t.post[1], vec![0.5]);
        assert_eq!(t.post[0], vec![1.0, 0.5]);
    }

    #[test]
    fn forward_zero_network_is_zero() {
        let net = Network::new(vec![
            Layer::new(vec![vec![0.0, 0.0]; 3], vec![0.0; 3], ActivationKind::Relu).unwrap(),
            Layer::new(vec![vec![0.0; 3]; 2], vec![0.0; 2], ActivationKind::Relu).unwrap(),
        ])
        .unwrap();
        let t = forward(&net, &[4.0, -7.0]).unwrap();
        assert!(t.pre.iter().flatten().all(|&v| v == 0.0));
        assert!(t.post[1..].iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_matches_independent_tanh_evaluation() {
        // Second evaluator coded directly on the recurrence, no shared code.
        let w0 = vec![vec![0.3, -0.8], vec![1.1, 0.4], vec![-0.5, 0.9]];
        let b0 = vec![0.1, -0.2, 0.05];
        let w1 = vec![vec![0.7, -1.2, 0.3], vec![0.2, 0.6, -0.4]];
        let b1 = vec![-0.3, 0.8];
        let net = Network::new(vec![
            Layer::new(w0.clone(), b0.clone(), ActivationKind::Tanh).unwrap(),
            Layer::new(w1.clone(), b1.clone(), ActivationKind::Tanh).unwrap(),
        ])
        .unwrap();
        let x = [0.4, -1.3];
        let t = forward(&net, &x).unwrap();

        let mut h = vec![0.0; 3];
        for i in 0..3 {
            h[i] = (w0[i][0] * x[0] + w0[i][1] * x[1] + b0[i]).tanh();
        }
        let mut out = vec![0.0; 2];
        for i in 0..2 {
            out[i] = (w1[i][0] * h[0] + w1[i][1] * h[1] + w1[i][2] * h[2] + b1[i]).tanh();
        }
        for (a, b) in t.output().iter().zip(&out) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let net = single_relu();
        let a = forward(&net, &[0.123, -4.5]).unwrap();
        let b = forward(&net, &[0.123, -4.5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        assert!(matches!(
            forward(&single_relu(), &[1.0]),
            Err(VerifyError::Shape(_))
        ));
    }

    #[test]
    fn activation_eval_examples() {
        assert_eq!(
            activation_eval(ActivationKind::Relu, &[-1.0, 2.0]).unwrap(),
            vec![0.0, 2.0]
        );
        assert_eq!(
            activation_eval(ActivationKind::MaxPool(2), &[1.0, 3.0, -2.0, -5.0]).unwrap(),
            vec![3.0, -2.0]
        );
        assert_eq!(
            activation_eval(ActivationKind::Sigmoid, &[0.0]).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn maxpool_eval_needs_divisible_width() {
        assert!(activation_eval(ActivationKind::MaxPool(2), &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = activation_derivs(ActivationKind::Sigmoid, &[0.0], 1).unwrap();
        assert!((d[0] - 0.25).abs() < 1e-15);
        let d = activation_derivs(ActivationKind::Tanh, &[0.0], 2).unwrap();
        assert_eq!(d[0], 0.0);
        assert!(activation_derivs(ActivationKind::Relu, &[1.0], 1).is_err());
        assert!(activation_derivs(ActivationKind::MaxPool(2), &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn first_derivatives_match_finite_differences() {
        // Central finite differences of the evaluation as the oracle.
        let delta = 1e-6;
        let mut violations = 0;
        for kind in [
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Elu,
            ActivationKind::Identity,
        ] {
            for i in 0..1000 {
                // Low-discrepancy sweep of [-6, 6].
                let y = -6.0 + 12.0 * ((i as f64 * 0.754_877_666) % 1.0);
                let fd = (kind.scalar(y + delta) - kind.scalar(y - delta)) / (2.0 * delta);
                let an = kind.scalar_deriv(y, 1).unwrap();
                if (fd - an).abs() > 1e-5 {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn sigmoid_first_derivative_at_one_matches_fd() {
        let delta = 1e-6;
        let fd = (ActivationKind::Sigmoid.scalar(1.0 + delta)
            - ActivationKind::Sigmoid.scalar(1.0 - delta))
            / (2.0 * delta);
        let an = ActivationKind::Sigmoid.scalar_deriv(1.0, 1).unwrap();
        assert!((fd - an).abs() < 1e-6);
    }

    #[test]
    fn smoothness_constants_match_closed_forms() {
        // sup|tanh''| = 4/(3 sqrt 3), sup|tanh'''| = 2,
        // sup|sigmoid''| = 1/(6 sqrt 3), sup|sigmoid'''| = 1/8;
        // stored values carry the 1.01 safety factor.
        let (g_tanh, e_tanh) = smoothness_constants(ActivationKind::Tanh).unwrap();
        let (g_sig, e_sig) = smoothness_constants(ActivationKind::Sigmoid).unwrap();
        let gt = 4.0 / (3.0 * 3.0f64.sqrt());
        let gs = 1.0 / (6.0 * 3.0f64.sqrt());
        for (stored, exact) in [(g_tanh, gt), (e_tanh, 2.0), (g_sig, gs), (e_sig, 0.125)] {
            assert!(stored >= exact * 0.9999, "{stored} < {exact}");
            assert!(stored <= exact * 1.0101, "{stored} > 1.01 * {exact}");
        }
        assert_eq!(
            smoothness_constants(ActivationKind::Identity).unwrap(),
            (0.0, 0.0)
        );
        assert!(smoothness_constants(ActivationKind::Relu).is_err());
        assert!(smoothness_constants(ActivationKind::Elu).is_err());
    }

    #[test]
    fn smoothness_constants_match_grid_oracle() {
        // Independent coarse grid of |h''| maxima.
        for (kind, expect) in [
            (ActivationKind::Tanh, 0.769_800_358_919_501),
            (ActivationKind::Sigmoid, 0.096_225_044_864_937_64),
        ] {
            let mut grid_max = 0.0f64;
            for i in 0..200_001 {
                let y = -10.0 + 20.0 * i as f64 / 200_000.0;
                grid_max = grid_max.max(kind.scalar_deriv(y, 2).unwrap().abs());
            }
            assert!((grid_max - expect).abs() < 1e-6);
            let (gamma, _) = smoothness_constants(kind).unwrap();
            assert!((gamma / SMOOTHNESS_SAFETY - grid_max).abs() < 1e-6);
        }
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(Layer::new(vec![vec![1.0], vec![2.0]], vec![0.0], ActivationKind::Relu).is_err());
        assert!(Layer::new(vec![vec![1.0], vec![2.0, 3.0]], vec![0.0; 2], ActivationKind::Relu)
            .is_err());
        assert!(Layer::new(vec![vec![f64::NAN]], vec![0.0], ActivationKind::Relu).is_err());
        assert!(Layer::new(vec![vec![1.0]; 3], vec![0.0; 3], ActivationKind::MaxPool(2)).is_err());
        assert!(Layer::new(vec![vec![1.0]; 2], vec![0.0; 2], ActivationKind::MaxPool(1)).is_err());
        assert!(Network::new(vec![]).is_err());
        // Shape chain breaks: layer 0 emits 2, layer 1 expects 3.
        let l0 = Layer::new(vec![vec![1.0]; 2], vec![0.0; 2], ActivationKind::Relu).unwrap();
        let l1 = Layer::new(vec![vec![1.0, 1.0, 1.0]], vec![0.0], ActivationKind::Relu).unwrap();
        assert!(Network::new(vec![l0, l1]).is_err());
    }

    #[test]
    fn maxpool_width_chains_through_network() {
        let l0 = Layer::new(vec![vec![1.0]; 4], vec![0.0; 4], ActivationKind::MaxPool(2)).unwrap();
        assert_eq!(l0.out_dim(), 2);
        let l1 = Layer::new(vec![vec![1.0, 1.0]], vec![0.0], ActivationKind::Identity).unwrap();
        let net = Network::new(vec![l0, l1]).unwrap();
        assert_eq!(net.output_dim(), 1);
    }

    #[test]
    fn save_load_round_trip() {
        let net = Network::new(vec![
            Layer::new(
                vec![vec![1.5, -2.0], vec![0.25, 0.0], vec![3.0, 1.0], vec![-1.0, 2.0]],
                vec![0.5, -0.5, 0.0, 1.0],
                ActivationKind::MaxPool(2),
            )
            .unwrap(),
            Layer::new(vec![vec![1.0, -1.0]], vec![0.125], ActivationKind::Sigmoid).unwrap(),
        ])
        .unwrap();
        let bytes = save_network(&net);
        let loaded = load_network(&bytes).unwrap();
        assert_eq!(net, loaded);
    }

    #[test]
    fn load_rejects_mismatched_bias() {
        let doc = br#"{"layers":[{"weights":[[1.0,2.0]],"bias":[0.0,1.0],"activation":"relu"}]}"#;
        assert!(load_network(doc).is_err());
    }

    #[test]
    fn load_parses_activation_strings() {
        let doc = br#"{"layers":[
            {"weights":[[1.0]],"bias":[0.0],"activation":"relu"},
            {"weights":[[1.0]],"bias":[0.0],"activation":"elu"},
            {"weights":[[1.0],[2.0]],"bias":[0.0,0.0],"activation":{"maxpool":2}},
            {"weights":[[1.0]],"bias":[0.0],"activation":"identity"}
        ]}"#;
        let net = load_network(doc).unwrap();
        assert_eq!(net.layers()[0].activation(), ActivationKind::Relu);
        assert_eq!(net.layers()[1].activation(), ActivationKind::Elu);
        assert_eq!(net.layers()[2].activation(), ActivationKind::MaxPool(2));
        assert_eq!(net.layers()[3].activation(), ActivationKind::Identity);
    }

    #[test]
    fn load_rejects_unknown_activation() {
        let doc = br#"{"layers":[{"weights":[[1.0]],"bias":[0.0],"activation":"gelu"}]}"#;
        assert!(load_network(doc).is_err());
    }
}
