//! Detection of codirectional node embeddings.

use serde::{Deserialize, Serialize};

use super::bounds::required_width;
use super::{distinct_rows, distinguishable, Tolerance};
use crate::error::Result;
use crate::gnn::{GnnModel, ModelConfig};
use crate::graph::{Dataset, Graph};
use crate::par::{map_indices, Parallelism};
use crate::pruning::{random_mask, MaskMode};
use crate::tensor::Rng;
use crate::wl::{refine_jointly, Seed};

/// Angular tolerance in radians.
pub const COLINEAR_TOLERANCE: f64 = 1e-6;

/// Angle between two nonzero vectors via `2 atan2(|â - b̂|, |â + b̂|)`, which
/// stays accurate near 0 and pi.
pub fn angle(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Some(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// Parallel or anti-parallel within `tol` radians. Two zero vectors count as
/// colinear; a zero and a nonzero vector do not.
pub fn is_colinear(a: &[f64], b: &[f64], tol: f64) -> bool {
    match angle(a, b) {
        Some(t) => t <= tol || std::f64::consts::PI - t <= tol,
        None => a.iter().chain(b).all(|&x| x == 0.0),
    }
}

/// Pair counts from [`colinear_pairs`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub checked: usize,
    pub colinear: usize,
    /// Colinear pairs whose aggregated layer inputs were already equal, so
    /// the collision happened in aggregation rather than in the MLP.
    pub from_equal_inputs: usize,
}

/// Compares node embeddings across all graphs and message-passing layers,
/// for every pair of nodes whose 1-WL colours differ at that layer's
/// iteration. `colors[g][t]` holds graph `g`'s colours after `t` rounds.
pub fn colinear_pairs(
    model: &GnnModel,
    graphs: &[&Graph],
    colors: &[Vec<Vec<u32>>],
) -> Result<PairCounts> {
    let forwards = graphs
        .iter()
        .map(|g| model.forward(g))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = PairCounts::default();
    for t in 1..=model.layers().len() {
        let mut nodes: Vec<(u32, &[f64], &[f64])> = Vec::new();
        for (f, c) in forwards.iter().zip(colors) {
            for (v, &color) in c[t].iter().enumerate() {
                nodes.push((color, f.embeddings[t].row(v), f.inputs[t - 1][0].row(v)));
            }
        }
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                if nodes[a].0 == nodes[b].0 {
                    continue;
                }
                counts.checked += 1;
                if is_colinear(nodes[a].1, nodes[b].1, COLINEAR_TOLERANCE) {
                    counts.colinear += 1;
                    counts.from_equal_inputs += usize::from(!distinguishable(
                        nodes[a].2,
                        nodes[b].2,
                        Tolerance::Relative,
                    ));
                }
            }
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColinearityReport {
    pub trials: usize,
    pub pairs_checked: usize,
    pub colinear_pairs: usize,
    /// Colinear pairs already equal after aggregation.
    pub from_equal_inputs: usize,
    pub rate: f64,
    /// Width the injectivity bound asks for at `target_gamma`.
    pub required_width: usize,
    pub target_gamma: f64,
    pub width_sufficient: bool,
}

/// Over `trials` independent (initialization, mask) draws at pruning ratio
/// `rho`, the fraction of checked embedding pairs that are colinear.
pub fn noncolinearity_check(
    config: &ModelConfig,
    data: &Dataset,
    rho: f64,
    trials: usize,
    target_gamma: f64,
    seed: u64,
    mode: Parallelism,
) -> Result<ColinearityReport> {
    config.validate()?;
    let graphs: Vec<&Graph> = data.graphs().iter().collect();
    let wl = refine_jointly(&graphs, Seed::Labels, Some(config.layers));
    let colors: Vec<Vec<Vec<u32>>> = wl
        .iter()
        .map(|c| {
            (0..=config.layers)
                .map(|t| c.colors_at(t).to_vec())
                .collect()
        })
        .collect();

    // Width check against the first layer's realized inputs.
    let mut rows = Vec::new();
    for g in &graphs {
        let s = crate::gnn::aggregation_matrix(g, config.variant, 0.0).matmul(&g.features())?;
        rows.extend(s.iter_rows().map(<[f64]>::to_vec));
    }
    let inputs = distinct_rows(rows, Tolerance::Relative);
    let k = super::min_nonzero_components(&inputs).unwrap_or(1).max(1);
    let needed = if inputs.len() >= 2 && rho > 0.0 {
        required_width(target_gamma, inputs.len(), k, rho)?
    } else {
        1
    };
    let width_sufficient = config.hidden_dim >= needed;
    if !width_sufficient {
        log::warn!(
            "hidden width {} below the {needed} needed for injectivity probability {target_gamma}",
            config.hidden_dim
        );
    }

    let counts = map_indices(trials, mode, |t| -> Result<PairCounts> {
        let mut rng = Rng::new(seed, 2 * t as u64);
        let mut model = GnnModel::new(config.clone(), &mut rng)?;
        let mut mask_rng = Rng::new(seed, 2 * t as u64 + 1);
        let masks = random_mask(
            &config.mlp_shapes(),
            rho,
            MaskMode::Bernoulli,
            &mut mask_rng,
        )?;
        model.set_masks(&masks.layers)?;
        colinear_pairs(&model, &graphs, &colors)
    });
    let mut total = PairCounts::default();
    for c in counts {
        let c = c?;
        total.checked += c.checked;
        total.colinear += c.colinear;
        total.from_equal_inputs += c.from_equal_inputs;
    }
    let (checked, colinear) = (total.checked, total.colinear);
    Ok(ColinearityReport {
        trials,
        pairs_checked: checked,
        colinear_pairs: colinear,
        from_equal_inputs: total.from_equal_inputs,
        rate: if checked == 0 {
            0.0
        } else {
            colinear as f64 / checked as f64
        },
        required_width: needed,
        target_gamma,
        width_sufficient,
    })
}
