//! Reverse-mode gradients of the softmax cross-entropy loss.

use crate::error::Result;
use crate::graph::Graph;
use crate::tensor::Matrix;

use super::{Forward, GnnModel, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    /// `dL/dW` per MLP layer, zero at pruned entries.
    pub mlp: Vec<Matrix>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
    pub classifier: Matrix,
    pub bias: Vec<f64>,
}

/// Intermediate gradients kept for gradient-diversity analysis.
#[derive(Debug, Clone)]
pub struct BackwardTrace {
    /// `dL/dZ` per MP layer and MLP layer.
    pub dz: Vec<Vec<Matrix>>,
}

impl Gradients {
    pub fn zeros_like(model: &GnnModel) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| LayerGradients {
                    mlp: l
                        .mlp
                        .iter()
                        .map(|m| {
                            let (r, c) = m.weights().shape();
                            Matrix::zeros(r, c)
                        })
                        .collect(),
                    epsilon: 0.0,
                })
                .collect(),
            classifier: Matrix::zeros(model.classifier().rows(), model.classifier().cols()),
            bias: vec![0.0; model.bias().len()],
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, s: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.mlp.iter_mut().zip(&b.mlp) {
                for (p, q) in x.data_mut().iter_mut().zip(y.data()) {
                    *p += s * q;
                }
            }
            a.epsilon += s * b.epsilon;
        }
        for (p, q) in self
            .classifier
            .data_mut()
            .iter_mut()
            .zip(other.classifier.data())
        {
            *p += s * q;
        }
        for (p, q) in self.bias.iter_mut().zip(&other.bias) {
            *p += s * q;
        }
    }

    /// Flattened in the model's parameter order.
    pub fn flatten(&self, variant: Variant) -> Vec<f64> {
        let mut g = Vec::new();
        for l in &self.layers {
            for m in &l.mlp {
                g.extend_from_slice(m.data());
            }
            if variant == Variant::Gin {
                g.push(l.epsilon);
            }
        }
        g.extend_from_slice(self.classifier.data());
        g.extend_from_slice(&self.bias);
        g
    }
}

/// Softmax probabilities, shifted by the max logit for stability.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// `-log softmax(logits)[target]`.
pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[target]
}

impl GnnModel {
    pub fn loss(&self, graph: &Graph) -> Result<f64> {
        Ok(cross_entropy(&self.forward(graph)?.logits, graph.label()))
    }

    /// Loss and gradients for one graph against its own label.
    pub fn backward(&self, graph: &Graph) -> Result<(f64, Gradients)> {
        let (loss, grads, _) = self.backward_with_trace(graph)?;
        Ok((loss, grads))
    }

    pub fn backward_with_trace(&self, graph: &Graph) -> Result<(f64, Gradients, BackwardTrace)> {
        let fwd = self.forward(graph)?;
        let target = graph.label();
        let loss = cross_entropy(&fwd.logits, target);
        let (grads, trace) = self.backward_from(&fwd, target)?;
        Ok((loss, grads, trace))
    }

    fn backward_from(&self, fwd: &Forward, target: usize) -> Result<(Gradients, BackwardTrace)> {
        let cfg = self.config();
        let act = cfg.activation;
        let mut dlogits = softmax(&fwd.logits);
        dlogits[target] -= 1.0;

        let classifier = Matrix::from_fn(cfg.readout_dim(), cfg.num_classes, |r, c| {
            fwd.readout[r] * dlogits[c]
        });
        let dreadout: Vec<f64> = (0..cfg.readout_dim())
            .map(|r| crate::tensor::dot(self.classifier().row(r), &dlogits))
            .collect();

        let k = self.layers().len();
        let mut layers = Vec::with_capacity(k);
        let mut dz_trace = Vec::with_capacity(k);
        // dL/dH^(j) for the layer being processed; starts empty at the top.
        let mut dh: Option<Matrix> = None;
        for j in (0..k).rev() {
            let layer = &self.layers()[j];
            let h_out = &fwd.embeddings[j + 1];
            let offset = cfg.input_dim + j * cfg.hidden_dim;
            let segment = &dreadout[offset..offset + cfg.hidden_dim];
            let mut ds = Matrix::from_fn(h_out.rows(), h_out.cols(), |_, c| segment[c]);
            if let Some(up) = dh.take() {
                ds.add_assign(&up)?;
            }

            let depth = layer.mlp.len();
            let mut dws = vec![Matrix::zeros(0, 0); depth];
            let mut dzs = vec![Matrix::zeros(0, 0); depth];
            for l in (0..depth).rev() {
                let z = &fwd.preactivations[j][l];
                let dz = ds.hadamard(&z.map(|x| act.derivative(x)))?;
                let s_in = &fwd.inputs[j][l];
                let dw = layer.mlp[l].mask().apply(&s_in.t_matmul(&dz)?)?;
                ds = dz.matmul_t(layer.mlp[l].weights())?;
                dws[l] = dw;
                dzs[l] = dz;
            }
            // ds is now dL/dS_0 with S_0 = Agg · H^(j).
            let epsilon = match cfg.variant {
                Variant::Gin => ds.frobenius_inner(&fwd.embeddings[j])?,
                Variant::Gcn => 0.0,
            };
            if j > 0 {
                dh = Some(fwd.aggregations[j].t_matmul(&ds)?);
            }
            layers.push(LayerGradients { mlp: dws, epsilon });
            dz_trace.push(dzs);
        }
        layers.reverse();
        dz_trace.reverse();
        Ok((
            Gradients {
                layers,
                classifier,
                bias: dlogits,
            },
            BackwardTrace { dz: dz_trace },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{Activation, ModelConfig};
    use crate::tensor::{Mask, Rng};

    #[test]
    fn cross_entropy_matches_softmax() {
        let z = [0.3, -1.2, 2.0];
        let p = softmax(&z);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((cross_entropy(&z, 1) + p[1].ln()).abs() < 1e-12);
    }

    #[test]
    fn pruned_entries_get_exact_zero() {
        let mut cfg = ModelConfig::new(Variant::Gcn, 3, 2, 2);
        cfg.activation = Activation::LEAKY;
        let mut rng = Rng::new(4, 0);
        let mut m = GnnModel::new(cfg, &mut rng).unwrap();
        let masks: Vec<Vec<Mask>> = m
            .config()
            .mlp_shapes()
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&(i, o)| Mask::from_fn(i, o, |r, c| (r + c) % 2 == 0))
                    .collect()
            })
            .collect();
        m.set_masks(&masks).unwrap();
        let g = crate::graph::synthetic::erdos_renyi(5, 0.6, 3, &mut rng);
        let (_, grads) = m.backward(&g).unwrap();
        for (lg, lm) in grads.layers.iter().zip(&masks) {
            for (dw, mask) in lg.mlp.iter().zip(lm) {
                for (d, &keep) in dw.data().iter().zip(mask.bits()) {
                    if !keep {
                        assert_eq!(*d, 0.0);
                    }
                }
            }
        }
    }
}
