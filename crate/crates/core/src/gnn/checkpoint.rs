//! JSON checkpoints: shapes, bit-packed masks (hex), f64 weights, epsilons
//! and variant tags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Mask, Matrix};

use super::{GnnModel, MlpLayer, ModelConfig, MpLayer};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ModelConfig,
    pub layers: Vec<LayerRecord>,
    pub classifier: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub epsilon: f64,
    pub mlp: Vec<WeightRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub rows: usize,
    pub cols: usize,
    /// Row-major keep bits, MSB first, hex encoded.
    pub mask: String,
    pub weights: Vec<f64>,
}

impl From<&GnnModel> for Checkpoint {
    fn from(model: &GnnModel) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            config: model.config().clone(),
            layers: model
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    epsilon: l.epsilon,
                    mlp: l
                        .mlp
                        .iter()
                        .map(|m| WeightRecord {
                            rows: m.weights().rows(),
                            cols: m.weights().cols(),
                            mask: hex::encode(m.mask().to_packed()),
                            weights: m.weights().data().to_vec(),
                        })
                        .collect(),
                })
                .collect(),
            classifier: model.classifier().data().to_vec(),
            bias: model.bias().to_vec(),
        }
    }
}

impl Checkpoint {
    pub fn into_model(self) -> Result<GnnModel> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                let mlp = l
                    .mlp
                    .into_iter()
                    .map(|w| {
                        let bytes = hex::decode(&w.mask)
                            .map_err(|e| Error::Checkpoint(format!("bad mask encoding: {e}")))?;
                        let mask = Mask::from_packed(w.rows, w.cols, &bytes)?;
                        MlpLayer::new(Matrix::new(w.rows, w.cols, w.weights)?, mask)
                    })
                    .collect::<Result<_>>()?;
                Ok(MpLayer {
                    mlp,
                    epsilon: l.epsilon,
                })
            })
            .collect::<Result<_>>()?;
        let classifier = Matrix::new(
            self.config.readout_dim(),
            self.config.num_classes,
            self.classifier,
        )?;
        GnnModel::from_parts(self.config, layers, classifier, self.bias)
    }
}

pub fn save_checkpoint(model: &GnnModel, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&Checkpoint::from(model))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<GnnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => e.into(),
    })?;
    let ck: Checkpoint = serde_json::from_str(&text)?;
    ck.into_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::Variant;
    use crate::tensor::Rng;

    #[test]
    fn round_trip_and_byte_stability() {
        let mut m =
            GnnModel::new(ModelConfig::new(Variant::Gin, 3, 2, 2), &mut Rng::new(8, 0)).unwrap();
        let masks: Vec<Vec<Mask>> = m
            .config()
            .mlp_shapes()
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&(i, o)| Mask::from_fn(i, o, |r, c| r != c))
                    .collect()
            })
            .collect();
        m.set_masks(&masks).unwrap();
        m.set_epsilon(1, 0.25);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_checkpoint(&m, &p).unwrap();
        let back = load_checkpoint(&p).unwrap();
        assert_eq!(back, m);
        let p2 = dir.path().join("m2.json");
        save_checkpoint(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn rejects_unknown_version() {
        let m =
            GnnModel::new(ModelConfig::new(Variant::Gcn, 2, 1, 2), &mut Rng::new(0, 0)).unwrap();
        let mut ck = Checkpoint::from(&m);
        ck.version = 99;
        assert!(matches!(ck.into_model(), Err(Error::Checkpoint(_))));
        assert!(matches!(
            load_checkpoint("/nonexistent/ck.json"),
            Err(Error::MissingFile(_))
        ));
    }
}
