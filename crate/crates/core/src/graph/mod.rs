//! Graph data model, dataset container and dataset-level utilities.

mod sifdg;
mod split;
pub mod synthetic;
mod tudataset;

pub use sifdg::{sifdg_pairs, SifdgPair, SifdgReport, DEFAULT_NODE_CAP};
pub use split::{split, split_indices, SplitFractions};
pub use tudataset::{parse_tudataset, write_tudataset};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Undirected graph with one-hot node features and a class label.
///
/// Features are stored as the index of the hot entry per node; the dense
/// feature matrix is materialized on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
    node_labels: Vec<usize>,
    feature_dim: usize,
    label: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse; `(v, v)`
    /// adds an explicit self-loop.
    pub fn new(
        node_labels: Vec<usize>,
        feature_dim: usize,
        edges: &[(usize, usize)],
        label: usize,
    ) -> Result<Self> {
        let n = node_labels.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        if let Some(&bad) = node_labels.iter().find(|&&l| l >= feature_dim) {
            return Err(Error::InvalidGraph(format!(
                "node label {bad} does not fit feature dimension {feature_dim}"
            )));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            neighbors[u].push(v);
            if u != v {
                neighbors[v].push(u);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            neighbors,
            node_labels,
            feature_dim,
            label,
        })
    }

    /// Builds a graph from a symmetric binary adjacency matrix and a one-hot
    /// feature matrix.
    pub fn from_matrices(adjacency: &Matrix, features: &Matrix, label: usize) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n || features.rows() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency {:?} and features {:?} disagree",
                adjacency.shape(),
                features.shape()
            )));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u..n {
                let a = adjacency.get(u, v);
                if a != adjacency.get(v, u) {
                    return Err(Error::InvalidGraph("adjacency is not symmetric".into()));
                }
                if a == 1.0 {
                    edges.push((u, v));
                } else if a != 0.0 {
                    return Err(Error::InvalidGraph("adjacency is not binary".into()));
                }
            }
        }
        let mut labels = Vec::with_capacity(n);
        for row in features.iter_rows() {
            let ones = row.iter().filter(|&&x| x == 1.0).count();
            let zeros = row.iter().filter(|&&x| x == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::InvalidGraph("feature rows must be one-hot".into()));
            }
            labels.push(row.iter().position(|&x| x == 1.0).unwrap());
        }
        Self::new(labels, features.cols(), &edges, label)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Number of undirected edges; a self-loop counts once.
    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Undirected edges as `(u, v)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v >= u).map(move |&v| (u, v)))
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    #[inline]
    pub fn node_labels(&self) -> &[usize] {
        &self.node_labels
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    #[inline]
    pub fn label(&self) -> usize {
        self.label
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = label;
        self
    }

    /// One-hot feature matrix X (n × d).
    pub fn features(&self) -> Matrix {
        Matrix::from_fn(self.node_count(), self.feature_dim, |v, j| {
            if self.node_labels[v] == j {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Binary adjacency matrix A (n × n).
    pub fn adjacency(&self) -> Matrix {
        let n = self.node_count();
        let mut a = Matrix::zeros(n, n);
        for (u, ns) in self.neighbors.iter().enumerate() {
            for &v in ns {
                a.set(u, v, 1.0);
            }
        }
        a
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidGraph("not a permutation".into()));
        }
        let mut labels = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            labels[p] = self.node_labels[i];
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::new(labels, self.feature_dim, &edges, self.label)
    }
}

/// Finite ordered collection of graphs sharing a feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    graphs: Vec<Graph>,
    num_classes: usize,
    feature_dim: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        num_classes: usize,
        feature_dim: usize,
    ) -> Result<Self> {
        for (i, g) in graphs.iter().enumerate() {
            if g.feature_dim() != feature_dim {
                return Err(Error::InvalidDataset(format!(
                    "graph {i} has feature dimension {}, expected {feature_dim}",
                    g.feature_dim()
                )));
            }
            if g.label() >= num_classes {
                return Err(Error::InvalidDataset(format!(
                    "graph {i} has label {} but only {num_classes} classes",
                    g.label()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            graphs,
            num_classes,
            feature_dim,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn graph(&self, i: usize) -> &Graph {
        &self.graphs[i]
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn max_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::node_count).max().unwrap_or(0)
    }

    pub fn mean_nodes(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs
            .iter()
            .map(|g| g.node_count() as f64)
            .sum::<f64>()
            / self.graphs.len() as f64
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for g in &self.graphs {
            counts[g.label()] += 1;
        }
        counts
    }

    /// Rejects graphs without edges. Several guarantees (non-trivial inputs)
    /// only hold on such datasets.
    pub fn check_nontrivial(&self) -> Result<()> {
        match self.graphs.iter().position(|g| g.edge_count() == 0) {
            Some(i) => Err(Error::InvalidDataset(format!("graph {i} has no edges"))),
            None => Ok(()),
        }
    }

    /// Sub-dataset with the given graphs, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            num_classes: self.num_classes,
            feature_dim: self.feature_dim,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_validation() {
        assert!(Graph::new(vec![], 1, &[], 0).is_err());
        assert!(Graph::new(vec![0, 2], 2, &[], 0).is_err());
        assert!(Graph::new(vec![0, 0], 1, &[(0, 5)], 0).is_err());
        let g = Graph::new(vec![0, 1, 0], 2, &[(0, 1), (1, 0), (1, 2)], 0).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(1), 2);
        let a = g.adjacency();
        assert_eq!(a, a.transpose());
        assert_eq!(g.features().column_sums(), vec![2.0, 1.0]);
    }

    #[test]
    fn matrices_round_trip() {
        let g = Graph::new(vec![1, 0, 2], 3, &[(0, 1), (1, 2), (0, 2)], 1).unwrap();
        let h = Graph::from_matrices(&g.adjacency(), &g.features(), 1).unwrap();
        assert_eq!(g, h);
        let mut bad = g.adjacency();
        bad.set(0, 1, 0.0);
        assert!(Graph::from_matrices(&bad, &g.features(), 1).is_err());
        let mut feats = g.features();
        feats.set(0, 0, 1.0);
        assert!(Graph::from_matrices(&g.adjacency(), &feats, 1).is_err());
    }

    #[test]
    fn permutation_preserves_structure() {
        let g = Graph::new(vec![0, 1, 1, 0], 2, &[(0, 1), (1, 2), (2, 3)], 0).unwrap();
        let p = g.permuted(&[3, 1, 0, 2]).unwrap();
        assert_eq!(p.node_labels(), &[1, 1, 0, 0]);
        assert!(p.has_edge(3, 1) && p.has_edge(1, 0) && p.has_edge(0, 2));
        assert!(g.permuted(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn dataset_validation() {
        let g = Graph::new(vec![0], 1, &[], 3).unwrap();
        assert!(Dataset::new("x", vec![g.clone()], 2, 1).is_err());
        assert!(Dataset::new("x", vec![g.clone()], 4, 2).is_err());
        let d = Dataset::new("x", vec![g], 4, 1).unwrap();
        assert!(d.check_nontrivial().is_err());
    }
}
