//! Layer-wise greedy sparsification that keeps every layer injective on the
//! inputs it actually sees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expressivity::{distinct_rows, distinguishable, Tolerance};
use crate::gnn::{Activation, GnnModel};
use crate::graph::Dataset;
use crate::tensor::{Mask, Matrix, Rng};

use super::MaskSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    /// Sparsity added to a layer per accepted step.
    pub rho_step: f64,
    /// Masks sampled per step before the layer is frozen.
    pub k_trials: usize,
    /// Per-layer sparsity is never raised above this.
    pub max_sparsity: f64,
    pub tolerance: Tolerance,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        Self {
            rho_step: 0.1,
            k_trials: 20,
            max_sparsity: 0.9,
            tolerance: Tolerance::Relative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyResult {
    pub masks: MaskSet,
    /// Realized sparsity per message-passing layer and MLP layer.
    pub layer_sparsity: Vec<Vec<f64>>,
    /// Realized sparsity over all MLP weights.
    pub sparsity: f64,
}

fn layer_outputs(inputs: &[Vec<f64>], weights: &Matrix, act: Activation) -> Vec<Vec<f64>> {
    inputs
        .iter()
        .map(|x| {
            (0..weights.cols())
                .map(|c| act.apply((0..weights.rows()).map(|r| x[r] * weights.get(r, c)).sum()))
                .collect()
        })
        .collect()
}

/// True when `candidate` keeps apart every pair of inputs that `reference`
/// keeps apart. With an injective reference this is injectivity itself.
pub fn layer_preserves_distinctions(
    inputs: &[Vec<f64>],
    reference: &Matrix,
    candidate: &Matrix,
    act: Activation,
    tol: Tolerance,
) -> bool {
    let before = layer_outputs(inputs, reference, act);
    let after = layer_outputs(inputs, candidate, act);
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            if distinguishable(&before[i], &before[j], tol)
                && !distinguishable(&after[i], &after[j], tol)
            {
                return false;
            }
        }
    }
    true
}

/// Distinct inputs of MLP layer `mlp` in message-passing layer `layer`
/// across every node of every graph.
fn realized_inputs(
    model: &GnnModel,
    data: &Dataset,
    layer: usize,
    mlp: usize,
    tol: Tolerance,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for g in data.graphs() {
        let f = model.forward(g)?;
        rows.extend(f.inputs[layer][mlp].iter_rows().map(<[f64]>::to_vec));
    }
    Ok(distinct_rows(rows, tol))
}

pub fn injectivity_preserving_sparsify(
    model: &GnnModel,
    data: &Dataset,
    config: &SparsifyConfig,
    rng: &mut Rng,
) -> Result<SparsifyResult> {
    if config.k_trials == 0 {
        return Err(Error::Config("k_trials must be at least 1".into()));
    }
    if !(config.rho_step > 0.0 && config.rho_step <= 1.0) {
        return Err(Error::Config(format!(
            "rho_step {} outside (0, 1]",
            config.rho_step
        )));
    }
    if !(0.0..=1.0).contains(&config.max_sparsity) {
        return Err(Error::Config(format!(
            "max_sparsity {} outside [0, 1]",
            config.max_sparsity
        )));
    }
    let act = model.config().activation;
    let mut work = model.clone();
    let mut masks = work.masks();
    // Sparsify the raw weights; masks already on the model are the start point.
    for (k, layer) in masks.clone().iter().enumerate() {
        for (j, start) in layer.iter().enumerate() {
            let inputs = realized_inputs(&work, data, k, j, config.tolerance)?;
            let weights = model.layers()[k].mlp[j].weights().clone();
            let (rows, cols) = start.shape();
            let n = rows * cols;
            let cap = (config.max_sparsity * n as f64).floor() as usize;
            let mut current = start.clone();
            let mut step = 1;
            loop {
                let target =
                    ((step as f64 * config.rho_step * n as f64 - 1e-9).ceil() as usize).min(cap);
                let have = current.count_zeros();
                if target <= have {
                    if target >= cap {
                        break;
                    }
                    step += 1;
                    continue;
                }
                let reference = current.apply(&weights)?;
                let kept: Vec<usize> = (0..n).filter(|&i| current.bits()[i]).collect();
                let accepted = (0..config.k_trials).find_map(|_| {
                    let mut pool = kept.clone();
                    rng.shuffle(&mut pool);
                    let mut bits = current.bits().to_vec();
                    for &i in &pool[..target - have] {
                        bits[i] = false;
                    }
                    let candidate = Mask::from_bits(rows, cols, bits).expect("shape unchanged");
                    let w = candidate.apply(&weights).expect("shape unchanged");
                    layer_preserves_distinctions(&inputs, &reference, &w, act, config.tolerance)
                        .then_some(candidate)
                });
                match accepted {
                    Some(m) => {
                        current = m;
                        step += 1;
                    }
                    None => break,
                }
            }
            masks[k][j] = current;
            work.set_masks(&masks)?;
        }
    }
    let layer_sparsity = masks
        .iter()
        .map(|l| {
            l.iter()
                .map(|m| m.count_zeros() as f64 / m.len() as f64)
                .collect()
        })
        .collect();
    let masks = MaskSet { layers: masks };
    Ok(SparsifyResult {
        sparsity: masks.sparsity(),
        masks,
        layer_sparsity,
    })
}
