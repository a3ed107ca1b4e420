//! 1-WL colour refinement.
//!
//! Colours at iteration 0 are the node labels. Each later colour is the id
//! assigned to the pair (own colour, sorted neighbour colours); new pairs get
//! the next unused integer in first-occurrence order. Graphs refined together
//! share one table, which is what makes their colour multisets comparable.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::{Dataset, Graph};
use crate::iso::find_isomorphism;
use crate::par::{map_slice, Parallelism};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorAssignment {
    /// `history[t][v]` is the colour of node `v` after `t` iterations.
    pub history: Vec<Vec<u32>>,
    pub iterations_run: usize,
    /// True when refinement stopped because the colour count settled.
    pub stable: bool,
}

impl ColorAssignment {
    pub fn colors_at(&self, t: usize) -> &[u32] {
        &self.history[t.min(self.iterations_run)]
    }

    pub fn final_colors(&self) -> &[u32] {
        &self.history[self.iterations_run]
    }

    /// Sorted colour multiset at iteration `t` (clamped to the last one run).
    pub fn multiset(&self, t: usize) -> Vec<u32> {
        let mut m = self.colors_at(t).to_vec();
        m.sort_unstable();
        m
    }

    pub fn num_colors(&self, t: usize) -> usize {
        let mut m = self.multiset(t);
        m.dedup();
        m.len()
    }
}

/// Initial colouring used to seed refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    /// Node labels (one-hot feature argmax).
    Labels,
    /// Every node gets colour 0; refines structure only.
    Uniform,
}

#[derive(Default)]
struct ColorTable {
    ids: HashMap<(u32, Vec<u32>), u32>,
    next: u32,
}

impl ColorTable {
    fn id(&mut self, own: u32, neighborhood: Vec<u32>) -> u32 {
        let next = &mut self.next;
        *self.ids.entry((own, neighborhood)).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    }
}

fn count_distinct(colors: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colors.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Refines several graphs with one shared colour table. Stops when the number
/// of distinct colours across all graphs is unchanged, or after
/// `max_iterations` iterations.
pub fn refine_jointly(
    graphs: &[&Graph],
    seed: Seed,
    max_iterations: Option<usize>,
) -> Vec<ColorAssignment> {
    let mut current: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| match seed {
            Seed::Labels => g.node_labels().iter().map(|&l| l as u32).collect(),
            Seed::Uniform => vec![0; g.node_count()],
        })
        .collect();
    let mut table = ColorTable {
        next: current.iter().flatten().max().map_or(0, |m| m + 1),
        ..Default::default()
    };
    let mut histories: Vec<Vec<Vec<u32>>> = current.iter().map(|c| vec![c.clone()]).collect();
    let mut count = count_distinct(&current);
    let mut iterations = 0;
    let mut stable = false;
    let limit = max_iterations.unwrap_or(usize::MAX);

    while iterations < limit {
        let next: Vec<Vec<u32>> = graphs
            .iter()
            .zip(&current)
            .map(|(g, colors)| {
                (0..g.node_count())
                    .map(|v| {
                        let mut nb: Vec<u32> = g.neighbors(v).iter().map(|&u| colors[u]).collect();
                        nb.sort_unstable();
                        table.id(colors[v], nb)
                    })
                    .collect()
            })
            .collect();
        iterations += 1;
        let next_count = count_distinct(&next);
        for (h, c) in histories.iter_mut().zip(&next) {
            h.push(c.clone());
        }
        current = next;
        if next_count == count {
            stable = true;
            break;
        }
        count = next_count;
    }

    histories
        .into_iter()
        .map(|history| ColorAssignment {
            history,
            iterations_run: iterations,
            stable,
        })
        .collect()
}

pub fn refine(graph: &Graph, max_iterations: Option<usize>) -> ColorAssignment {
    refine_jointly(&[graph], Seed::Labels, max_iterations)
        .pop()
        .expect("one graph in, one assignment out")
}

/// True iff the colour multisets of `g1` and `g2` differ at some iteration
/// `<= t` of paired refinement.
pub fn wl_distinguishable(g1: &Graph, g2: &Graph, t: usize) -> bool {
    let res = refine_jointly(&[g1, g2], Seed::Labels, Some(t));
    (0..=res[0].iterations_run).any(|i| res[0].multiset(i) != res[1].multiset(i))
}

/// Final-iteration colour multisets of jointly refined graphs. Two graphs
/// with equal signatures are indistinguishable by `t` rounds of 1-WL (the
/// last colour encodes all earlier ones).
pub fn signatures(graphs: &[&Graph], seed: Seed, t: Option<usize>) -> Vec<Vec<u32>> {
    refine_jointly(graphs, seed, t)
        .into_iter()
        .map(|c| c.multiset(c.iterations_run))
        .collect()
}

/// Isomorphism types of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoTypes {
    /// Smallest graph index of each type, ascending.
    pub representatives: Vec<usize>,
    pub multiplicities: Vec<usize>,
    /// Type index of every graph.
    pub type_of: Vec<usize>,
    /// True when a type was formed from WL equivalence alone because its
    /// graphs exceed the exact-search node cap.
    pub approximate: Vec<bool>,
    /// WL class (equal `t`-round signatures) of each type.
    pub wl_class: Vec<usize>,
}

impl IsoTypes {
    pub fn type_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn any_approximate(&self) -> bool {
        self.approximate.iter().any(|&a| a)
    }
}

/// One representative per labeled isomorphism type.
///
/// Graphs are first grouped by `t`-round WL signature; inside a group, graphs
/// with at most `node_cap` nodes are split by exact labeled isomorphism while
/// larger ones stay together and are flagged approximate.
pub fn isomorphism_type_representatives(
    dataset: &Dataset,
    t: usize,
    node_cap: usize,
    mode: Parallelism,
) -> IsoTypes {
    let refs: Vec<&Graph> = dataset.graphs().iter().collect();
    let sigs = signatures(&refs, Seed::Labels, Some(t));
    let mut groups: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
    for (i, s) in sigs.iter().enumerate() {
        groups.entry(s.as_slice()).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    // Each group yields its types as member lists plus an approximate flag.
    let per_group: Vec<Vec<(Vec<usize>, bool)>> = map_slice(&groups, mode, |members| {
        let mut exact: Vec<Vec<usize>> = Vec::new();
        let mut oversized = Vec::new();
        for &i in members {
            let g = dataset.graph(i);
            if g.node_count() > node_cap {
                oversized.push(i);
                continue;
            }
            match exact
                .iter_mut()
                .find(|ty| find_isomorphism(dataset.graph(ty[0]), g, true).is_some())
            {
                Some(ty) => ty.push(i),
                None => exact.push(vec![i]),
            }
        }
        let mut out: Vec<(Vec<usize>, bool)> = exact.into_iter().map(|t| (t, false)).collect();
        if !oversized.is_empty() {
            out.push((oversized, true));
        }
        out
    });

    let mut types: Vec<(Vec<usize>, bool, usize)> = per_group
        .into_iter()
        .enumerate()
        .flat_map(|(wl, tys)| tys.into_iter().map(move |(m, a)| (m, a, wl)))
        .collect();
    types.sort_by_key(|t| t.0[0]);

    let mut type_of = vec![0; dataset.len()];
    for (ti, (members, _, _)) in types.iter().enumerate() {
        for &i in members {
            type_of[i] = ti;
        }
    }
    IsoTypes {
        representatives: types.iter().map(|t| t.0[0]).collect(),
        multiplicities: types.iter().map(|t| t.0.len()).collect(),
        approximate: types.iter().map(|t| t.1).collect(),
        wl_class: types.iter().map(|t| t.2).collect(),
        type_of,
    }
}
