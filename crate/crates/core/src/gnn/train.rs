use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph};
use crate::tensor::Rng;

use super::{Adam, GnnModel, Gradients};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 250,
            batch_size: 32,
            lr: 0.01,
        }
    }
}

/// Mini-batch Adam training, one epoch at a time.
pub struct Trainer {
    config: TrainConfig,
    adam: Adam,
    trainable: Vec<bool>,
    rng: Rng,
}

impl Trainer {
    pub fn new(model: &GnnModel, config: TrainConfig, rng: Rng) -> Result<Self> {
        if config.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(config.lr > 0.0 && config.lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} is not positive",
                config.lr
            )));
        }
        Ok(Self {
            adam: Adam::new(config.lr, model.param_count()),
            trainable: model.trainable(),
            config,
            rng,
        })
    }

    /// Shuffles, runs every mini-batch, and returns the mean batch loss.
    pub fn epoch(&mut self, model: &mut GnnModel, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InvalidDataset(
                "cannot train on an empty dataset".into(),
            ));
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        self.rng.shuffle(&mut order);
        let mut total = 0.0;
        let mut batches = 0;
        for batch in order.chunks(self.config.batch_size) {
            let graphs: Vec<&Graph> = batch.iter().map(|&i| data.graph(i)).collect();
            let (loss, grads) = batch_gradients(model, &graphs)?;
            let mut params = model.params();
            self.adam.step(
                &mut params,
                &grads.flatten(model.config().variant),
                &self.trainable,
            );
            model.set_params(&params)?;
            total += loss;
            batches += 1;
        }
        Ok(total / batches as f64)
    }
}

/// Mean loss and mean gradients over `graphs`.
pub fn batch_gradients(model: &GnnModel, graphs: &[&Graph]) -> Result<(f64, Gradients)> {
    let mut acc = Gradients::zeros_like(model);
    let mut loss = 0.0;
    let scale = 1.0 / graphs.len() as f64;
    for g in graphs {
        let (l, grads) = model.backward(g)?;
        loss += l;
        acc.add_scaled(&grads, scale);
    }
    Ok((loss * scale, acc))
}

/// Trains for `config.epochs` epochs; returns the per-epoch mean loss.
pub fn train(
    model: &mut GnnModel,
    data: &Dataset,
    config: &TrainConfig,
    rng: Rng,
) -> Result<Vec<f64>> {
    let mut trainer = Trainer::new(model, config.clone(), rng)?;
    (0..config.epochs)
        .map(|_| trainer.epoch(model, data))
        .collect()
}

/// Index of the largest logit; ties go to the lower class.
pub fn predict(model: &GnnModel, graph: &Graph) -> Result<usize> {
    let logits = model.forward(graph)?.logits;
    let mut best = 0;
    for (c, &z) in logits.iter().enumerate() {
        if z > logits[best] {
            best = c;
        }
    }
    Ok(best)
}

pub fn evaluate(model: &GnnModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidDataset(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    let mut correct = 0;
    for g in data.graphs() {
        if predict(model, g)? == g.label() {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
