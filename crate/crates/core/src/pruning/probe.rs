//! Empirical probe of path criticality: retrain without an edge and compare.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{evaluate, train, GnnModel, TrainConfig};
use crate::graph::Dataset;
use crate::par::{map_slice, Parallelism};
use crate::tensor::Rng;

/// A single MLP weight: message-passing layer, MLP layer, row, column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub layer: usize,
    pub mlp: usize,
    pub input: usize,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeBudget {
    pub epochs: usize,
    pub restarts: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for ProbeBudget {
    fn default() -> Self {
        Self {
            epochs: 100,
            restarts: 3,
            batch_size: 32,
            lr: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub edge: EdgeRef,
    /// Best accuracy over restarts with the model's own masks.
    pub accuracy_with: f64,
    /// Best accuracy over restarts with `edge` additionally pruned.
    pub accuracy_without: f64,
}

fn best_accuracy(model: &GnnModel, data: &Dataset, budget: &ProbeBudget, seed: u64) -> Result<f64> {
    let cfg = TrainConfig {
        epochs: budget.epochs,
        batch_size: budget.batch_size,
        lr: budget.lr,
    };
    let mut best: f64 = 0.0;
    for r in 0..budget.restarts {
        let mut m = model.clone();
        train(&mut m, data, &cfg, Rng::new(seed, r as u64))?;
        best = best.max(evaluate(&m, data)?);
    }
    Ok(best)
}

/// For each candidate edge, retrains from the model's current weights with
/// and without the edge and reports the best training accuracy reached.
/// Evidence about criticality, not proof: only a finite budget of training
/// runs is explored.
pub fn probe_critical_paths(
    model: &GnnModel,
    data: &Dataset,
    candidates: &[EdgeRef],
    budget: &ProbeBudget,
    seed: u64,
    mode: Parallelism,
) -> Result<Vec<ProbeResult>> {
    if budget.epochs == 0 || budget.restarts == 0 {
        return Err(Error::Config(
            "probe budget must allow at least one epoch and one restart".into(),
        ));
    }
    let shapes = model.config().mlp_shapes();
    for e in candidates {
        let ok = shapes
            .get(e.layer)
            .and_then(|l| l.get(e.mlp))
            .is_some_and(|&(r, c)| e.input < r && e.output < c);
        if !ok {
            return Err(Error::Config(format!(
                "probe edge {e:?} is outside the model"
            )));
        }
    }
    let baseline = best_accuracy(model, data, budget, seed)?;
    map_slice(candidates, mode, |&edge| {
        let mut masks = model.masks();
        masks[edge.layer][edge.mlp].set(edge.input, edge.output, false);
        let mut pruned = model.clone();
        pruned.set_masks(&masks)?;
        Ok(ProbeResult {
            edge,
            accuracy_with: baseline,
            accuracy_without: best_accuracy(&pruned, data, budget, seed)?,
        })
    })
    .into_iter()
    .collect()
}
