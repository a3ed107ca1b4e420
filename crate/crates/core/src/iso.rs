//! Exact graph isomorphism by backtracking.
//!
//! Candidate images are restricted to nodes with the same stable colour under
//! joint 1-WL refinement, which is sound because isomorphisms preserve those
//! colours. Intended for small graphs; the search is exponential in the worst
//! case.

use crate::graph::Graph;
use crate::wl::{refine_jointly, Seed};

/// Returns `pi` with `pi[v]` the image in `g2` of node `v` of `g1`, such that
/// edges map onto edges (and, when `labeled`, node labels are preserved).
pub fn find_isomorphism(g1: &Graph, g2: &Graph, labeled: bool) -> Option<Vec<usize>> {
    let n = g1.node_count();
    if n != g2.node_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    let seed = if labeled { Seed::Labels } else { Seed::Uniform };
    let colors = refine_jointly(&[g1, g2], seed, None);
    let (c1, c2) = (colors[0].final_colors(), colors[1].final_colors());
    let (mut s1, mut s2) = (c1.to_vec(), c2.to_vec());
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return None;
    }

    // Visit rarest colour classes first, then by adjacency to already placed nodes.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let class_size = |c: u32| c1.iter().filter(|&&x| x == c).count();
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let linked = g1.neighbors(v).iter().filter(|&&u| placed[u]).count();
                (
                    linked,
                    std::cmp::Reverse(class_size(c1[v])),
                    std::cmp::Reverse(v),
                )
            })
            .expect("unplaced node exists");
        placed[next] = true;
        order.push(next);
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if extend(g1, g2, c1, c2, &order, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    g1: &Graph,
    g2: &Graph,
    c1: &[u32],
    c2: &[u32],
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    for w in 0..g2.node_count() {
        if used[w] || c1[v] != c2[w] || g1.has_edge(v, v) != g2.has_edge(w, w) {
            continue;
        }
        let consistent = order[..depth]
            .iter()
            .all(|&u| g1.has_edge(u, v) == g2.has_edge(map[u], w));
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(g1, g2, c1, c2, order, depth + 1, map, used) {
            return true;
        }
        used[w] = false;
        map[v] = usize::MAX;
    }
    false
}

/// Checks that `pi` maps `g1` onto `g2` edge for edge (and label for label
/// when `labeled`).
pub fn is_isomorphism(g1: &Graph, g2: &Graph, pi: &[usize], labeled: bool) -> bool {
    let n = g1.node_count();
    if n != g2.node_count() || pi.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &w in pi {
        if w >= n || std::mem::replace(&mut seen[w], true) {
            return false;
        }
    }
    if labeled && (0..n).any(|v| g1.node_labels()[v] != g2.node_labels()[pi[v]]) {
        return false;
    }
    (0..n).all(|u| (0..n).all(|v| g1.has_edge(u, v) == g2.has_edge(pi[u], pi[v])))
}
