//! Structurally isomorphic, feature-divergent graph pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Dataset, Graph};
use crate::iso::{find_isomorphism, is_isomorphism};
use crate::wl::{signatures, Seed};

pub const DEFAULT_NODE_CAP: usize = 16;

/// Graphs `a < b` whose structures are isomorphic via `permutation`
/// (`permutation[v]` is the image in `b` of node `v` of `a`) while no
/// isomorphism also preserves node labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SifdgPair {
    pub a: usize,
    pub b: usize,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SifdgReport {
    pub pairs: Vec<SifdgPair>,
    /// Graphs above the node cap, left out of the search.
    pub skipped: Vec<usize>,
}

pub fn sifdg_pairs(dataset: &Dataset, node_cap: usize) -> SifdgReport {
    let mut skipped = Vec::new();
    let mut eligible = Vec::new();
    for (i, g) in dataset.graphs().iter().enumerate() {
        if g.node_count() > node_cap {
            skipped.push(i);
        } else {
            eligible.push(i);
        }
    }
    if !skipped.is_empty() {
        log::warn!(
            "{}: {} graph(s) above the {node_cap}-node cap skipped in SIFDG search",
            dataset.name(),
            skipped.len()
        );
    }

    let refs: Vec<&Graph> = eligible.iter().map(|&i| dataset.graph(i)).collect();
    let structural = signatures(&refs, Seed::Uniform, None);
    let labeled = signatures(&refs, Seed::Labels, None);

    // Only graphs with equal structural signatures can be isomorphic.
    let mut buckets: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
    for (k, s) in structural.iter().enumerate() {
        buckets.entry(s.as_slice()).or_default().push(k);
    }

    let mut pairs = Vec::new();
    for members in buckets.values() {
        for (x, &ka) in members.iter().enumerate() {
            for &kb in &members[x + 1..] {
                let (ga, gb) = (refs[ka], refs[kb]);
                let identity: Vec<usize> = (0..ga.node_count()).collect();
                let permutation = if is_isomorphism(ga, gb, &identity, false) {
                    identity
                } else {
                    match find_isomorphism(ga, gb, false) {
                        Some(pi) => pi,
                        None => continue,
                    }
                };
                // Different labeled WL signatures already rule out a labeled isomorphism.
                let diverges =
                    labeled[ka] != labeled[kb] || find_isomorphism(ga, gb, true).is_none();
                if diverges {
                    pairs.push(SifdgPair {
                        a: eligible[ka],
                        b: eligible[kb],
                        permutation,
                    });
                }
            }
        }
    }
    pairs.sort_by_key(|p| (p.a, p.b));
    SifdgReport { pairs, skipped }
}
