//! Generated graphs and datasets: small named shapes, random corpora and
//! desk-scale classification sets.

use super::{Dataset, Graph};
use crate::tensor::Rng;

fn uniform_graph(n: usize, edges: &[(usize, usize)], class: usize) -> Graph {
    Graph::new(vec![0; n], 1, edges, class).expect("generated graph is valid")
}

/// Path on `n` nodes, all labelled 0, graph label `class`.
pub fn path(n: usize, class: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    uniform_graph(n, &edges, class)
}

/// Cycle on `n >= 3` nodes, all labelled 0.
pub fn cycle(n: usize, class: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    uniform_graph(n, &edges, class)
}

/// Star with `leaves` leaves around node 0.
pub fn star(leaves: usize, class: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    uniform_graph(leaves + 1, &edges, class)
}

/// Disjoint union; nodes of `b` follow those of `a`. Keeps `a`'s label.
pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
    let off = a.node_count();
    let mut labels = a.node_labels().to_vec();
    labels.extend_from_slice(b.node_labels());
    let mut edges: Vec<_> = a.edges().collect();
    edges.extend(b.edges().map(|(u, v)| (u + off, v + off)));
    Graph::new(
        labels,
        a.feature_dim().max(b.feature_dim()),
        &edges,
        a.label(),
    )
    .expect("union of valid graphs is valid")
}

/// G(n, p) with node labels drawn uniformly from `0..labels`.
pub fn erdos_renyi(n: usize, p: f64, labels: usize, rng: &mut Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }
    let node_labels = (0..n).map(|_| rng.below(labels)).collect();
    Graph::new(node_labels, labels, &edges, 0).expect("generated graph is valid")
}

/// Two 6-cycles with identical structure whose labels differ at node 3.
pub fn thalidomide_pair() -> (Graph, Graph) {
    let edges: Vec<_> = (0..6).map(|v| (v, (v + 1) % 6)).collect();
    let a = Graph::new(vec![1, 0, 0, 0, 0, 0], 2, &edges, 0).expect("valid");
    let b = Graph::new(vec![1, 0, 0, 1, 0, 0], 2, &edges, 0).expect("valid");
    (a, b)
}

/// Path on four nodes labelled (0, 1, 2, 2) and (1, 0, 2, 2), in classes 0
/// and 1. The pair shares its structure and its label multiset, and differs only
/// in feature columns 0 and 1.
pub fn swapped_label_paths() -> (Graph, Graph) {
    let edges = [(0, 1), (1, 2), (2, 3)];
    let a = Graph::new(vec![0, 1, 2, 2], 3, &edges, 0).expect("valid");
    let b = Graph::new(vec![1, 0, 2, 2], 3, &edges, 1).expect("valid");
    (a, b)
}

/// `copies` of each graph of [`swapped_label_paths`], alternating.
pub fn swapped_label_dataset(copies: usize) -> Dataset {
    let (a, b) = swapped_label_paths();
    let graphs = (0..copies).flat_map(|_| [a.clone(), b.clone()]).collect();
    Dataset::new("swapped-paths", graphs, 2, 3).expect("valid")
}

/// Triangles (class 0) and 3-node paths (class 1), uniformly labelled.
pub fn triangle_vs_path(copies: usize) -> Dataset {
    let graphs = (0..copies)
        .flat_map(|_| [cycle(3, 0), path(3, 1)])
        .collect();
    Dataset::new("triangle-path", graphs, 2, 1).expect("valid")
}

fn random_tree(n: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.below(v), v)).collect()
}

/// Random trees (class 0) against unicyclic graphs (class 1) on 4 to 9 nodes
/// with three random node labels, alternating classes.
pub fn trees_vs_unicyclic(count: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed, 0x7EE5);
    let graphs = (0..count)
        .map(|i| {
            let class = i % 2;
            let n = 4 + rng.below(6);
            let mut edges = random_tree(n, &mut rng);
            if class == 1 {
                loop {
                    let (u, v) = (rng.below(n), rng.below(n));
                    if u != v && !edges.contains(&(u.min(v), u.max(v))) {
                        edges.push((u.min(v), u.max(v)));
                        break;
                    }
                }
            }
            let labels = (0..n).map(|_| rng.below(3)).collect();
            Graph::new(labels, 3, &edges, class).expect("valid")
        })
        .collect();
    Dataset::new("trees-unicyclic", graphs, 2, 3).expect("valid")
}

/// Atom codes of the molecular generator.
pub mod atom {
    pub const C: usize = 0;
    pub const N: usize = 1;
    pub const O: usize = 2;
    pub const F: usize = 3;
    pub const I: usize = 4;
    pub const CL: usize = 5;
    pub const BR: usize = 6;
}

struct Molecule {
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Molecule {
    fn add(&mut self, label: usize) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }

    fn bond(&mut self, u: usize, v: usize) {
        self.edges.push((u, v));
    }

    fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Six-membered aromatic ring; returns its atoms in ring order.
    fn ring(&mut self, rng: &mut Rng) -> Vec<usize> {
        let atoms: Vec<usize> = (0..6)
            .map(|_| {
                self.add(if rng.bernoulli(0.08) {
                    atom::N
                } else {
                    atom::C
                })
            })
            .collect();
        for i in 0..6 {
            self.bond(atoms[i], atoms[(i + 1) % 6]);
        }
        atoms
    }

    /// Ring fused onto the bond `(a, b)`: four new atoms close the cycle.
    fn fused_ring(&mut self, a: usize, b: usize) -> Vec<usize> {
        let new: Vec<usize> = (0..4).map(|_| self.add(atom::C)).collect();
        self.bond(a, new[0]);
        for w in new.windows(2) {
            self.bond(w[0], w[1]);
        }
        self.bond(new[3], b);
        let mut atoms = vec![a];
        atoms.extend(&new);
        atoms.push(b);
        atoms
    }
}

/// Nitroaromatic-style molecules over the atom codes in [`atom`]: one to four
/// fused or linked six-rings with nitro groups, halogens and small side
/// chains. A molecule is class 1 when it carries two nitro groups, or one
/// nitro group on at least two rings; 5% of labels are then flipped.
pub fn mutag_like(count: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed, 0x307A);
    let graphs = (0..count)
        .map(|_| {
            let mut m = Molecule {
                labels: Vec::new(),
                edges: Vec::new(),
            };
            let rings = match rng.uniform(0.0, 1.0) {
                x if x < 0.2 => 1,
                x if x < 0.6 => 2,
                x if x < 0.9 => 3,
                _ => 4,
            };
            let mut ring_atoms = m.ring(&mut rng);
            let mut carbons: Vec<usize> = ring_atoms.clone();
            for _ in 1..rings {
                if rng.bernoulli(0.7) {
                    // fuse on a bond whose atoms are both still of degree 2
                    let k = ring_atoms.len();
                    let start = rng.below(k);
                    let bond = (0..k)
                        .map(|j| (ring_atoms[(start + j) % k], ring_atoms[(start + j + 1) % k]))
                        .find(|&(a, b)| m.degree(a) == 2 && m.degree(b) == 2);
                    if let Some((a, b)) = bond {
                        ring_atoms = m.fused_ring(a, b);
                        carbons.extend(&ring_atoms[1..5]);
                        continue;
                    }
                }
                let free: Vec<usize> = carbons
                    .iter()
                    .copied()
                    .filter(|&v| m.degree(v) == 2)
                    .collect();
                let anchor = free[rng.below(free.len())];
                ring_atoms = m.ring(&mut rng);
                m.bond(anchor, ring_atoms[0]);
                carbons.extend(&ring_atoms);
            }

            let nitro = match rng.uniform(0.0, 1.0) {
                x if x < 0.3 => 0,
                x if x < 0.75 => 1,
                _ => 2,
            };
            let others = rng.below(4);
            let mut placed_nitro = 0;
            for s in 0..nitro + others {
                let free: Vec<usize> = carbons
                    .iter()
                    .copied()
                    .filter(|&v| m.degree(v) == 2 && m.labels[v] == atom::C)
                    .collect();
                if free.is_empty() {
                    break;
                }
                let anchor = free[rng.below(free.len())];
                if s < nitro {
                    let n = m.add(atom::N);
                    m.bond(anchor, n);
                    for _ in 0..2 {
                        let o = m.add(atom::O);
                        m.bond(n, o);
                    }
                    placed_nitro += 1;
                    continue;
                }
                let kind = rng.below(7);
                let atom_label = [
                    atom::F,
                    atom::I,
                    atom::CL,
                    atom::BR,
                    atom::O,
                    atom::N,
                    atom::C,
                ][kind];
                let x = m.add(atom_label);
                m.bond(anchor, x);
                if atom_label == atom::C && rng.bernoulli(0.5) {
                    let o = m.add(atom::O);
                    m.bond(x, o);
                }
            }

            let mut class = usize::from(placed_nitro >= 2 || (placed_nitro >= 1 && rings >= 2));
            if rng.bernoulli(0.05) {
                class = 1 - class;
            }
            Graph::new(m.labels, 7, &m.edges, class).expect("generated molecule is valid")
        })
        .collect();
    Dataset::new("mutag-like", graphs, 2, 7).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(path(4, 0).edge_count(), 3);
        assert_eq!(cycle(6, 0).edge_count(), 6);
        assert_eq!(star(3, 0).degree(0), 3);
        let u = disjoint_union(&cycle(3, 0), &cycle(3, 0));
        assert_eq!((u.node_count(), u.edge_count()), (6, 6));
        assert!(!u.has_edge(2, 3));
    }

    #[test]
    fn trees_and_unicyclic_edge_counts() {
        let ds = trees_vs_unicyclic(60, 3);
        for g in ds.graphs() {
            let extra = g.edge_count() + 1 - g.node_count();
            assert_eq!(extra, g.label());
            assert!((4..=9).contains(&g.node_count()));
        }
        assert_eq!(ds.class_counts(), vec![30, 30]);
    }

    #[test]
    fn molecules_are_connected_and_plausible() {
        let ds = mutag_like(188, 0);
        assert_eq!(ds.len(), 188);
        let mean = ds.mean_nodes();
        assert!((12.0..24.0).contains(&mean), "mean nodes {mean}");
        let counts = ds.class_counts();
        assert!(counts[0] > 30 && counts[1] > 30, "{counts:?}");
        for g in ds.graphs() {
            // connected: BFS from 0 reaches every node
            let mut seen = vec![false; g.node_count()];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &u in g.neighbors(v) {
                    if !std::mem::replace(&mut seen[u], true) {
                        stack.push(u);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s));
            assert!((0..g.node_count()).all(|v| g.degree(v) <= 4));
        }
        assert_eq!(mutag_like(20, 5), mutag_like(20, 5));
    }

    #[test]
    fn swapped_paths_share_label_multiset() {
        let (a, b) = swapped_label_paths();
        let (mut la, mut lb) = (a.node_labels().to_vec(), b.node_labels().to_vec());
        la.sort_unstable();
        lb.sort_unstable();
        assert_eq!(la, lb);
        assert_ne!(a.node_labels(), b.node_labels());
    }
}
