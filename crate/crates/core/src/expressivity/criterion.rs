use super::{distinguishable, Tolerance};
use crate::error::Result;
use crate::gnn::GnnModel;
use crate::graph::Dataset;
use crate::wl::wl_distinguishable;

/// Pairs of representatives with different class labels that 1-WL separates
/// within the model's depth but whose final-layer graph embeddings coincide.
/// An empty result is the necessary condition for perfect classification.
pub fn criterion1_check(
    model: &GnnModel,
    data: &Dataset,
    representatives: &[usize],
    tol: Tolerance,
) -> Result<Vec<(usize, usize)>> {
    let depth = model.layers().len();
    let sums = representatives
        .iter()
        .map(|&i| Ok(model.forward(data.graph(i))?.final_sum()))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for a in 0..representatives.len() {
        for b in a + 1..representatives.len() {
            let (ga, gb) = (
                data.graph(representatives[a]),
                data.graph(representatives[b]),
            );
            if ga.label() == gb.label() || distinguishable(&sums[a], &sums[b], tol) {
                continue;
            }
            if wl_distinguishable(ga, gb, depth) {
                violations.push((representatives[a], representatives[b]));
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{ModelConfig, Variant};
    use crate::graph::synthetic::{cycle, path};
    use crate::tensor::{Mask, Rng};

    #[test]
    fn single_class_has_no_violations() {
        let ds = Dataset::new("s", vec![cycle(3, 0), path(3, 0)], 1, 1).unwrap();
        let m =
            GnnModel::new(ModelConfig::new(Variant::Gin, 1, 2, 1), &mut Rng::new(0, 0)).unwrap();
        assert!(criterion1_check(&m, &ds, &[0, 1], Tolerance::Relative)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn zero_masks_violate() {
        let ds = Dataset::new("s", vec![cycle(3, 0), path(3, 1)], 2, 1).unwrap();
        let mut m =
            GnnModel::new(ModelConfig::new(Variant::Gin, 1, 2, 2), &mut Rng::new(0, 0)).unwrap();
        let z: Vec<Vec<Mask>> = m
            .config()
            .mlp_shapes()
            .iter()
            .map(|l| l.iter().map(|&(i, o)| Mask::zeros(i, o)).collect())
            .collect();
        m.set_masks(&z).unwrap();
        assert_eq!(
            criterion1_check(&m, &ds, &[0, 1], Tolerance::Relative).unwrap(),
            vec![(0, 1)]
        );
    }
}
