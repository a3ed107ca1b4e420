//! Moment-based message-passing networks with masked MLPs.

mod backward;
mod checkpoint;
mod optim;
mod train;

pub use backward::{BackwardTrace, Gradients, LayerGradients};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use optim::Adam;
pub use train::{evaluate, predict, train, TrainConfig, Trainer};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::{uniform_init, Mask, Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `(1 + eps) I + A` aggregation.
    Gin,
    /// `D^-1/2 (A + I) D^-1/2` aggregation.
    Gcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Activation {
    Relu,
    LeakyRelu {
        alpha: f64,
    },
    /// `x / (1 + |x|)`: injective, zero-fixing, derivative never zero.
    Softsign,
}

impl Activation {
    pub const LEAKY: Activation = Activation::LeakyRelu { alpha: 0.01 };

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            Activation::Softsign => x / (1.0 + x.abs()),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Softsign => 1.0 / (1.0 + x.abs()).powi(2),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Activation::Relu),
            "leaky_relu" | "leaky-relu" => Ok(Activation::LEAKY),
            "softsign" => Ok(Activation::Softsign),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Number of message-passing layers.
    pub layers: usize,
    /// Linear layers per MLP.
    pub mlp_depth: usize,
    pub activation: Activation,
    pub num_classes: usize,
    /// Whether GIN's epsilon is updated during training.
    pub train_epsilon: bool,
}

impl ModelConfig {
    /// Two-layer MLPs, hidden width equal to the input width, trainable
    /// epsilon.
    pub fn new(variant: Variant, input_dim: usize, layers: usize, num_classes: usize) -> Self {
        Self {
            variant,
            input_dim,
            hidden_dim: input_dim,
            layers,
            mlp_depth: 2,
            activation: Activation::Relu,
            num_classes,
            train_epsilon: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("model {what} must be at least 1")));
        if self.input_dim == 0 {
            return bad("input_dim");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim");
        }
        if self.layers == 0 {
            return bad("layers");
        }
        if self.mlp_depth == 0 {
            return bad("mlp_depth");
        }
        if self.num_classes == 0 {
            return bad("num_classes");
        }
        Ok(())
    }

    /// Weight shape `(in, out)` of every MLP layer, per message-passing layer.
    pub fn mlp_shapes(&self) -> Vec<Vec<(usize, usize)>> {
        (0..self.layers)
            .map(|k| {
                (0..self.mlp_depth)
                    .map(|j| {
                        let fan_in = if k == 0 && j == 0 {
                            self.input_dim
                        } else {
                            self.hidden_dim
                        };
                        (fan_in, self.hidden_dim)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn readout_dim(&self) -> usize {
        self.input_dim + self.layers * self.hidden_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpLayer {
    weights: Matrix,
    mask: Mask,
}

impl MlpLayer {
    pub fn new(weights: Matrix, mask: Mask) -> Result<Self> {
        if weights.shape() != mask.shape() {
            return Err(Error::Shape {
                op: "mlp layer",
                left: weights.shape(),
                right: mask.shape(),
            });
        }
        let weights = mask.apply(&weights)?;
        Ok(Self { weights, mask })
    }

    /// Effective weights `M ⊙ W`; pruned entries are exactly zero.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpLayer {
    pub mlp: Vec<MlpLayer>,
    /// GIN's epsilon; unused by GCN.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    config: ModelConfig,
    layers: Vec<MpLayer>,
    /// `readout_dim x num_classes`.
    classifier: Matrix,
    bias: Vec<f64>,
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `H^(0..=k)`; `H^(0)` is the feature matrix.
    pub embeddings: Vec<Matrix>,
    /// Per message-passing layer: aggregation matrix used.
    pub aggregations: Vec<Matrix>,
    /// Per message-passing layer: MLP inputs `S_0..S_{L-1}` (S_0 aggregated).
    pub inputs: Vec<Vec<Matrix>>,
    /// Per message-passing layer: MLP pre-activations `Z_1..Z_L`.
    pub preactivations: Vec<Vec<Matrix>>,
    pub readout: Vec<f64>,
    pub logits: Vec<f64>,
}

impl Forward {
    /// Graph-level sum of the final message-passing layer's embeddings.
    pub fn final_sum(&self) -> Vec<f64> {
        self.embeddings
            .last()
            .expect("at least H^(0)")
            .column_sums()
    }
}

/// Aggregation operator of `variant` for `graph`.
pub fn aggregation_matrix(graph: &Graph, variant: Variant, epsilon: f64) -> Matrix {
    let n = graph.node_count();
    let mut a = graph.adjacency();
    match variant {
        Variant::Gin => {
            for v in 0..n {
                a.set(v, v, a.get(v, v) + 1.0 + epsilon);
            }
            a
        }
        Variant::Gcn => {
            for v in 0..n {
                a.set(v, v, a.get(v, v) + 1.0);
            }
            let inv_sqrt: Vec<f64> = (0..n)
                .map(|v| 1.0 / a.row(v).iter().sum::<f64>().sqrt())
                .collect();
            Matrix::from_fn(n, n, |u, v| a.get(u, v) * inv_sqrt[u] * inv_sqrt[v])
        }
    }
}

impl GnnModel {
    /// Dense model with uniformly initialized weights: every entry of a
    /// layer with fan-in `m` is drawn from `U(-sqrt(1/m), sqrt(1/m))`.
    pub fn new(config: ModelConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let layers = config
            .mlp_shapes()
            .into_iter()
            .map(|shapes| {
                let mlp = shapes
                    .into_iter()
                    .map(|(i, o)| MlpLayer::new(uniform_init(i, o, i, rng)?, Mask::ones(i, o)))
                    .collect::<Result<_>>()?;
                Ok(MpLayer { mlp, epsilon: 0.0 })
            })
            .collect::<Result<_>>()?;
        let r = config.readout_dim();
        let classifier = uniform_init(r, config.num_classes, r, rng)?;
        let bias = uniform_init(1, config.num_classes, r, rng)?.into_data();
        Ok(Self {
            config,
            layers,
            classifier,
            bias,
        })
    }

    pub fn from_parts(
        config: ModelConfig,
        layers: Vec<MpLayer>,
        classifier: Matrix,
        bias: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let shapes = config.mlp_shapes();
        let layer_shapes: Vec<Vec<(usize, usize)>> = layers
            .iter()
            .map(|l| l.mlp.iter().map(|m| m.weights.shape()).collect())
            .collect();
        if layer_shapes != shapes {
            return Err(Error::Config(
                "layer shapes do not match the model config".into(),
            ));
        }
        let expected = (config.readout_dim(), config.num_classes);
        if classifier.shape() != expected || bias.len() != config.num_classes {
            return Err(Error::Shape {
                op: "classifier",
                left: classifier.shape(),
                right: expected,
            });
        }
        Ok(Self {
            config,
            layers,
            classifier,
            bias,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[MpLayer] {
        &self.layers
    }

    pub fn classifier(&self) -> &Matrix {
        &self.classifier
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn masks(&self) -> Vec<Vec<Mask>> {
        self.layers
            .iter()
            .map(|l| l.mlp.iter().map(|m| m.mask.clone()).collect())
            .collect()
    }

    /// Replaces the masks (checked against the weight shapes) and zeroes the
    /// newly pruned weights.
    pub fn set_masks(&mut self, masks: &[Vec<Mask>]) -> Result<()> {
        let shapes_ok = masks.len() == self.layers.len()
            && masks.iter().zip(&self.layers).all(|(ms, l)| {
                ms.len() == l.mlp.len()
                    && ms
                        .iter()
                        .zip(&l.mlp)
                        .all(|(m, w)| m.shape() == w.weights.shape())
            });
        if !shapes_ok {
            return Err(Error::Config(
                "mask set does not match the model's layer shapes".into(),
            ));
        }
        for (ms, layer) in masks.iter().zip(&mut self.layers) {
            for (m, mlp) in ms.iter().zip(&mut layer.mlp) {
                *mlp = MlpLayer::new(mlp.weights.clone(), m.clone())?;
            }
        }
        Ok(())
    }

    /// Overwrites one MLP weight matrix; the layer's mask is re-applied.
    pub fn set_weights(&mut self, layer: usize, mlp: usize, weights: Matrix) -> Result<()> {
        let slot = &mut self.layers[layer].mlp[mlp];
        *slot = MlpLayer::new(weights, slot.mask.clone())?;
        Ok(())
    }

    pub fn set_epsilon(&mut self, layer: usize, epsilon: f64) {
        self.layers[layer].epsilon = epsilon;
    }

    pub fn aggregation(&self, graph: &Graph, layer: usize) -> Matrix {
        aggregation_matrix(graph, self.config.variant, self.layers[layer].epsilon)
    }

    pub fn forward(&self, graph: &Graph) -> Result<Forward> {
        if graph.feature_dim() != self.config.input_dim {
            return Err(Error::Shape {
                op: "forward",
                left: (graph.node_count(), graph.feature_dim()),
                right: (graph.node_count(), self.config.input_dim),
            });
        }
        let act = self.config.activation;
        let mut h = graph.features();
        let mut readout = h.column_sums();
        let mut out = Forward {
            embeddings: Vec::with_capacity(self.layers.len() + 1),
            aggregations: Vec::with_capacity(self.layers.len()),
            inputs: Vec::with_capacity(self.layers.len()),
            preactivations: Vec::with_capacity(self.layers.len()),
            readout: Vec::new(),
            logits: Vec::new(),
        };
        for (k, layer) in self.layers.iter().enumerate() {
            let agg = self.aggregation(graph, k);
            let mut s = agg.matmul(&h)?;
            let mut inputs = Vec::with_capacity(layer.mlp.len());
            let mut pre = Vec::with_capacity(layer.mlp.len());
            for mlp in &layer.mlp {
                let z = s.matmul(&mlp.weights)?;
                let next = z.map(|x| act.apply(x));
                inputs.push(s);
                pre.push(z);
                s = next;
            }
            readout.extend(s.column_sums());
            out.embeddings.push(std::mem::replace(&mut h, s));
            out.aggregations.push(agg);
            out.inputs.push(inputs);
            out.preactivations.push(pre);
        }
        out.embeddings.push(h);
        let logits = Matrix::row_vector(&readout).matmul(&self.classifier)?;
        out.logits = logits
            .data()
            .iter()
            .zip(&self.bias)
            .map(|(z, b)| z + b)
            .collect();
        out.readout = readout;
        Ok(out)
    }

    /// Number of scalar parameters in [`GnnModel::params`] order.
    pub fn param_count(&self) -> usize {
        let eps = usize::from(self.config.variant == Variant::Gin);
        self.layers
            .iter()
            .map(|l| l.mlp.iter().map(|m| m.weights.data().len()).sum::<usize>() + eps)
            .sum::<usize>()
            + self.classifier.data().len()
            + self.bias.len()
    }

    /// Flat parameter vector: per MP layer its MLP weights (row-major) then
    /// epsilon (GIN only); then classifier weights and bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for m in &layer.mlp {
                p.extend_from_slice(m.weights.data());
            }
            if self.config.variant == Variant::Gin {
                p.push(layer.epsilon);
            }
        }
        p.extend_from_slice(self.classifier.data());
        p.extend_from_slice(&self.bias);
        p
    }

    /// Which entries of [`GnnModel::params`] the optimizer may change.
    pub fn trainable(&self) -> Vec<bool> {
        let mut t = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for m in &layer.mlp {
                t.extend_from_slice(m.mask.bits());
            }
            if self.config.variant == Variant::Gin {
                t.push(self.config.train_epsilon);
            }
        }
        t.extend(std::iter::repeat_n(
            true,
            self.classifier.data().len() + self.bias.len(),
        ));
        t
    }

    /// Loads a flat vector in [`GnnModel::params`] order. Masked entries are
    /// forced back to zero.
    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::Shape {
                op: "set_params",
                left: (p.len(), 1),
                right: (self.param_count(), 1),
            });
        }
        let gin = self.config.variant == Variant::Gin;
        let mut at = 0;
        for layer in &mut self.layers {
            for m in &mut layer.mlp {
                let len = m.weights.data().len();
                for ((w, &v), &keep) in m
                    .weights
                    .data_mut()
                    .iter_mut()
                    .zip(&p[at..at + len])
                    .zip(m.mask.bits())
                {
                    *w = if keep { v } else { 0.0 };
                }
                at += len;
            }
            if gin {
                layer.epsilon = p[at];
                at += 1;
            }
        }
        let len = self.classifier.data().len();
        self.classifier.data_mut().copy_from_slice(&p[at..at + len]);
        at += len;
        self.bias.copy_from_slice(&p[at..]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{cycle, path};

    fn model(variant: Variant, seed: u64) -> GnnModel {
        GnnModel::new(ModelConfig::new(variant, 1, 2, 2), &mut Rng::new(seed, 0)).unwrap()
    }

    #[test]
    fn zero_masks_leave_only_the_feature_sum() {
        let mut m = model(Variant::Gin, 1);
        let zeros: Vec<Vec<Mask>> = m
            .config()
            .mlp_shapes()
            .iter()
            .map(|l| l.iter().map(|&(i, o)| Mask::zeros(i, o)).collect())
            .collect();
        m.set_masks(&zeros).unwrap();
        let g = path(5, 0);
        let f = m.forward(&g).unwrap();
        assert_eq!(f.readout, vec![5.0, 0.0, 0.0]);
        for h in &f.embeddings[1..] {
            assert_eq!(h.max_abs(), 0.0);
        }
        let expected: Vec<f64> = (0..2)
            .map(|c| 5.0 * m.classifier().get(0, c) + m.bias()[c])
            .collect();
        assert_eq!(f.logits, expected);
    }

    #[test]
    fn single_node_identity_layer() {
        let cfg = ModelConfig {
            layers: 1,
            mlp_depth: 1,
            ..ModelConfig::new(Variant::Gin, 1, 1, 1)
        };
        let mut m = GnnModel::new(cfg, &mut Rng::new(0, 0)).unwrap();
        m.set_weights(0, 0, Matrix::identity(1)).unwrap();
        let g = Graph::new(vec![0], 1, &[], 0).unwrap();
        let f = m.forward(&g).unwrap();
        assert_eq!(f.embeddings[1].get(0, 0), 1.0);
    }

    #[test]
    fn gcn_normalization() {
        let a = aggregation_matrix(&path(3, 0), Variant::Gcn, 0.0);
        // degrees with self-loops: 2, 3, 2
        assert!((a.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((a.get(0, 1) - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((a.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.get(0, 2), 0.0);
        let g = aggregation_matrix(&path(3, 0), Variant::Gin, 0.5);
        assert_eq!(g.get(1, 1), 1.5);
        assert_eq!(g.get(1, 0), 1.0);
    }

    #[test]
    fn triangle_and_path_get_distinct_readouts() {
        let mut cfg = ModelConfig::new(Variant::Gin, 1, 2, 2);
        cfg.hidden_dim = 8;
        let m = GnnModel::new(cfg, &mut Rng::new(0, 0)).unwrap();
        let a = m.forward(&cycle(3, 0)).unwrap().readout;
        let b = m.forward(&path(3, 0)).unwrap().readout;
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff > 1.19e-7);
    }

    #[test]
    fn params_round_trip() {
        let mut m = model(Variant::Gin, 3);
        let p = m.params();
        assert_eq!(p.len(), m.param_count());
        assert_eq!(m.trainable().len(), p.len());
        let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        m.set_params(&shifted).unwrap();
        assert_eq!(m.params(), shifted);
    }

    #[test]
    fn activations() {
        for a in [Activation::Relu, Activation::LEAKY, Activation::Softsign] {
            assert_eq!(a.apply(0.0), 0.0);
            let h = 1e-6;
            for x in [-1.3, 0.7] {
                let fd = (a.apply(x + h) - a.apply(x - h)) / (2.0 * h);
                assert!((fd - a.derivative(x)).abs() < 1e-8);
            }
        }
    }
}
