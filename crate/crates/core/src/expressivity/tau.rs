use serde::{Deserialize, Serialize};

use super::{distinguishable, Tolerance, FLOAT32_EPS};
use crate::error::Result;
use crate::gnn::GnnModel;
use crate::graph::Dataset;
use crate::par::{map_slice, Parallelism};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauOptions {
    pub tolerance: Tolerance,
    /// Compare sorted node-embedding multisets instead of graph sums.
    /// Not the canonical measure.
    pub node_multiset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityReport {
    pub tau: f64,
    pub representatives: Vec<usize>,
    /// Dataset indices of representative pairs found indistinguishable.
    pub indistinguishable_pairs: Vec<(usize, usize)>,
    pub distinguishable_count: usize,
    pub epsilon: f64,
    pub tolerance: Tolerance,
    pub node_multiset: bool,
    /// Fewer than two representatives: tau is 1 by convention.
    pub degenerate: bool,
}

fn signature(model: &GnnModel, data: &Dataset, i: usize, node_multiset: bool) -> Result<Vec<f64>> {
    let f = model.forward(data.graph(i))?;
    if !node_multiset {
        return Ok(f.final_sum());
    }
    let h = f.embeddings.last().expect("at least one layer");
    let mut rows: Vec<&[f64]> = h.iter_rows().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(*b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows.concat())
}

/// Fraction of representatives whose final-layer graph embedding is
/// distinguishable from every other representative's.
pub fn measure_tau(
    model: &GnnModel,
    data: &Dataset,
    representatives: &[usize],
    options: TauOptions,
    mode: Parallelism,
) -> Result<ExpressivityReport> {
    let sigs: Vec<Vec<f64>> = map_slice(representatives, mode, |&i| {
        signature(model, data, i, options.node_multiset)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let r = representatives.len();
    let mut clash = vec![false; r];
    let mut pairs = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let same_shape = sigs[a].len() == sigs[b].len();
            if same_shape && !distinguishable(&sigs[a], &sigs[b], options.tolerance) {
                clash[a] = true;
                clash[b] = true;
                pairs.push((representatives[a], representatives[b]));
            }
        }
    }
    let distinguishable_count = clash.iter().filter(|&&c| !c).count();
    let degenerate = r < 2;
    Ok(ExpressivityReport {
        tau: if degenerate {
            1.0
        } else {
            distinguishable_count as f64 / r as f64
        },
        representatives: representatives.to_vec(),
        indistinguishable_pairs: pairs,
        distinguishable_count,
        epsilon: FLOAT32_EPS,
        tolerance: options.tolerance,
        node_multiset: options.node_multiset,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{ModelConfig, Variant};
    use crate::graph::synthetic::{cycle, path};
    use crate::tensor::{Mask, Rng};

    fn zero_masked(variant: Variant) -> GnnModel {
        let mut m = GnnModel::new(ModelConfig::new(variant, 1, 2, 2), &mut Rng::new(0, 0)).unwrap();
        let z: Vec<Vec<Mask>> = m
            .config()
            .mlp_shapes()
            .iter()
            .map(|l| l.iter().map(|&(i, o)| Mask::zeros(i, o)).collect())
            .collect();
        m.set_masks(&z).unwrap();
        m
    }

    #[test]
    fn zero_network_collapses_everything() {
        // triangle vs path-3: same node count, same uniform labels
        let ds = Dataset::new("t", vec![cycle(3, 0), path(3, 1)], 2, 1).unwrap();
        let r = measure_tau(
            &zero_masked(Variant::Gin),
            &ds,
            &[0, 1],
            TauOptions::default(),
            Parallelism::Sequential,
        )
        .unwrap();
        assert_eq!(r.tau, 0.0);
        assert_eq!(r.indistinguishable_pairs, vec![(0, 1)]);
    }

    #[test]
    fn single_representative_is_degenerate() {
        let ds = Dataset::new("t", vec![cycle(3, 0)], 1, 1).unwrap();
        let m = zero_masked(Variant::Gcn);
        let r = measure_tau(
            &m,
            &ds,
            &[0],
            TauOptions::default(),
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.tau, 1.0);
    }

    #[test]
    fn dense_wide_gin_separates_triangle_and_path() {
        let ds = Dataset::new("t", vec![cycle(3, 0), path(3, 1)], 2, 1).unwrap();
        let mut full = 0;
        for seed in 0..200 {
            let mut cfg = ModelConfig::new(Variant::Gin, 1, 2, 2);
            cfg.hidden_dim = 16;
            let m = GnnModel::new(cfg, &mut Rng::new(seed, 0)).unwrap();
            let r = measure_tau(
                &m,
                &ds,
                &[0, 1],
                TauOptions::default(),
                Parallelism::Sequential,
            )
            .unwrap();
            full += usize::from(r.tau == 1.0);
        }
        assert_eq!(full, 200);
    }

    #[test]
    fn node_multiset_mode() {
        let ds = Dataset::new("t", vec![cycle(3, 0), path(3, 1)], 2, 1).unwrap();
        let mut cfg = ModelConfig::new(Variant::Gin, 1, 2, 2);
        cfg.hidden_dim = 8;
        let m = GnnModel::new(cfg, &mut Rng::new(1, 0)).unwrap();
        let opts = TauOptions {
            node_multiset: true,
            ..Default::default()
        };
        let r = measure_tau(&m, &ds, &[0, 1], opts, Parallelism::Parallel).unwrap();
        assert!(r.node_multiset);
        assert_eq!(r.tau, 1.0);
    }
}
