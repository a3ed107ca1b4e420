use crate::error::{Error, Result};
use crate::gnn::{aggregation_matrix, Variant};
use crate::graph::Graph;
use crate::iso::is_isomorphism;
use crate::tensor::{Mask, Matrix};

/// `Agg1 X1 - P (Agg2 X2)`, where row `v` of the aligned term is row
/// `pi[v]` of `Agg2 X2`.
pub fn first_layer_difference(
    g1: &Graph,
    g2: &Graph,
    pi: &[usize],
    variant: Variant,
    epsilon: f64,
) -> Result<Matrix> {
    if g1.feature_dim() != g2.feature_dim() {
        return Err(Error::Shape {
            op: "first layer difference",
            left: (g1.node_count(), g1.feature_dim()),
            right: (g2.node_count(), g2.feature_dim()),
        });
    }
    if !is_isomorphism(g1, g2, pi, false) {
        return Err(Error::InvalidGraph(
            "permutation is not a structural isomorphism".into(),
        ));
    }
    let s1 = aggregation_matrix(g1, variant, epsilon).matmul(&g1.features())?;
    let s2 = aggregation_matrix(g2, variant, epsilon).matmul(&g2.features())?;
    s1.sub(&s2.select_rows(pi))
}

/// Whether `mask` (the first MLP layer's mask) cancels every aggregated
/// feature difference of the pair, so that first-layer outputs coincide for
/// every choice of weights.
///
/// Row `l` of the mask carries input feature `l`; the outputs coincide for
/// all weights exactly when the difference vanishes in every feature column
/// whose mask row keeps at least one entry.
pub fn is_irrecoverable_first_layer(
    g1: &Graph,
    g2: &Graph,
    pi: &[usize],
    mask: &Mask,
    variant: Variant,
    epsilon: f64,
) -> Result<bool> {
    let delta = first_layer_difference(g1, g2, pi, variant, epsilon)?;
    if mask.shape().0 != delta.cols() {
        return Err(Error::Shape {
            op: "irrecoverability",
            left: delta.shape(),
            right: mask.shape(),
        });
    }
    let (rows, cols) = mask.shape();
    Ok((0..rows)
        .filter(|&l| (0..cols).any(|c| mask.get(l, c)))
        .all(|l| (0..delta.rows()).all(|v| delta.get(v, l) == 0.0)))
}
