//! Reader and writer for the TUDataset plain-text format.
//!
//! A dataset `NAME` lives in one directory as `NAME_A.txt` (comma-separated,
//! 1-indexed node pairs), `NAME_graph_indicator.txt`, `NAME_graph_labels.txt`
//! and optionally `NAME_node_labels.txt`. Edge attributes and edge labels are
//! ignored. Without node labels, node degree is used as the label.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Dataset, Graph};
use crate::error::{Error, Result};

fn file_path(root: &Path, name: &str, suffix: &str) -> PathBuf {
    root.join(format!("{name}_{suffix}.txt"))
}

fn read_required(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(fs::read_to_string(path)?)
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int(token: &str, file: &Path, line: usize) -> Result<i64> {
    token.trim().parse::<i64>().map_err(|_| Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: format!("expected an integer, found {:?}", token.trim()),
    })
}

fn parse_column(path: &Path) -> Result<Vec<(usize, i64)>> {
    let text = read_required(path)?;
    lines(&text)
        .map(|(no, l)| {
            // Some label files carry extra comma-separated columns; the first is the label.
            let first = l.split(',').next().unwrap_or(l);
            parse_int(first, path, no).map(|v| (no, v))
        })
        .collect()
}

/// Maps arbitrary integer labels onto `0..k` in ascending label order.
fn dense_codes(values: &[i64]) -> (Vec<usize>, usize) {
    let vocab: Vec<i64> = values
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let codes = values
        .iter()
        .map(|v| vocab.binary_search(v).expect("value is in vocabulary"))
        .collect();
    (codes, vocab.len())
}

pub fn parse_tudataset(root: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let root = root.as_ref();
    let indicator_path = file_path(root, name, "graph_indicator");
    let labels_path = file_path(root, name, "graph_labels");
    let edges_path = file_path(root, name, "A");
    let node_labels_path = file_path(root, name, "node_labels");

    let indicator = parse_column(&indicator_path)?;
    let graph_labels = parse_column(&labels_path)?;
    let edge_text = read_required(&edges_path)?;

    let num_graphs = graph_labels.len();
    let num_nodes = indicator.len();

    // graph id per global node, 0-based; local index per global node.
    let mut graph_of = Vec::with_capacity(num_nodes);
    let mut local = Vec::with_capacity(num_nodes);
    let mut sizes = vec![0usize; num_graphs];
    for &(no, gid) in &indicator {
        if gid < 1 || gid as usize > num_graphs {
            return Err(Error::Parse {
                file: indicator_path.clone(),
                line: no,
                msg: format!("graph id {gid} outside 1..={num_graphs}"),
            });
        }
        let g = gid as usize - 1;
        graph_of.push(g);
        local.push(sizes[g]);
        sizes[g] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidDataset(format!(
            "graph {} has no nodes in {}",
            empty + 1,
            indicator_path.display()
        )));
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (no, l) in lines(&edge_text) {
        let mut parts = l.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                file: edges_path.clone(),
                line: no,
                msg: format!("expected `u, v`, found {l:?}"),
            });
        };
        let u = parse_int(a, &edges_path, no)?;
        let v = parse_int(b, &edges_path, no)?;
        for x in [u, v] {
            if x < 1 || x as usize > num_nodes {
                return Err(Error::Parse {
                    file: edges_path.clone(),
                    line: no,
                    msg: format!("node {x} outside indicator range 1..={num_nodes}"),
                });
            }
        }
        let (u, v) = (u as usize - 1, v as usize - 1);
        if graph_of[u] != graph_of[v] {
            return Err(Error::Parse {
                file: edges_path.clone(),
                line: no,
                msg: format!(
                    "edge joins graphs {} and {}",
                    graph_of[u] + 1,
                    graph_of[v] + 1
                ),
            });
        }
        if u != v {
            edges[graph_of[u]].push((local[u], local[v]));
        }
    }

    let raw_node_labels: Vec<i64> = if node_labels_path.is_file() {
        let column = parse_column(&node_labels_path)?;
        if column.len() != num_nodes {
            return Err(Error::Parse {
                file: node_labels_path.clone(),
                line: column.last().map_or(0, |c| c.0),
                msg: format!("{} node labels for {num_nodes} nodes", column.len()),
            });
        }
        column.into_iter().map(|(_, v)| v).collect()
    } else {
        log::info!("{name}: no node labels, using degree as label");
        let mut degree = vec![0i64; num_nodes];
        let offsets = node_offsets(&graph_of, num_graphs);
        for (g, es) in edges.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(a, b) in es {
                let key = (a.min(b), a.max(b));
                if seen.insert(key) {
                    degree[offsets[g][a]] += 1;
                    degree[offsets[g][b]] += 1;
                }
            }
        }
        degree
    };
    let (node_codes, feature_dim) = dense_codes(&raw_node_labels);
    let (class_codes, num_classes) =
        dense_codes(&graph_labels.iter().map(|&(_, v)| v).collect::<Vec<_>>());

    let mut node_labels: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (global, &g) in graph_of.iter().enumerate() {
        node_labels[g].push(node_codes[global]);
    }
    let graphs = node_labels
        .into_iter()
        .zip(edges)
        .zip(class_codes)
        .map(|((labels, es), class)| Graph::new(labels, feature_dim, &es, class))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(name, graphs, num_classes, feature_dim)
}

/// Global node index for each (graph, local index).
fn node_offsets(graph_of: &[usize], num_graphs: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); num_graphs];
    for (global, &g) in graph_of.iter().enumerate() {
        out[g].push(global);
    }
    out
}

/// Writes `dataset` as TUDataset files named `{name}_*.txt` under `root`.
/// Labels are written as their 0-based codes; edges are listed in both
/// directions, one `u, v` pair per line.
pub fn write_tudataset(dataset: &Dataset, root: impl AsRef<Path>, name: &str) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root)?;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut graph_labels = String::new();
    let mut offset = 0usize;
    for (gi, g) in dataset.graphs().iter().enumerate() {
        for v in 0..g.node_count() {
            writeln!(indicator, "{}", gi + 1).unwrap();
            writeln!(node_labels, "{}", g.node_labels()[v]).unwrap();
            for &u in g.neighbors(v) {
                writeln!(a, "{}, {}", offset + v + 1, offset + u + 1).unwrap();
            }
        }
        writeln!(graph_labels, "{}", g.label()).unwrap();
        offset += g.node_count();
    }
    fs::write(file_path(root, name, "A"), a)?;
    fs::write(file_path(root, name, "graph_indicator"), indicator)?;
    fs::write(file_path(root, name, "node_labels"), node_labels)?;
    fs::write(file_path(root, name, "graph_labels"), graph_labels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, suffix: &str, body: &str) {
        fs::write(file_path(dir, name, suffix), body).unwrap();
    }

    #[test]
    fn minimal_fixture() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "T", "A", "1, 2\n2, 1\n");
        write(dir.path(), "T", "graph_indicator", "1\n1\n");
        write(dir.path(), "T", "graph_labels", "1\n");
        write(dir.path(), "T", "node_labels", "0\n0\n");
        let d = parse_tudataset(dir.path(), "T").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.feature_dim(), 1);
        assert_eq!(d.num_classes(), 1);
        assert_eq!(d.graph(0).edge_count(), 1);
        assert_eq!(d.graph(0).label(), 0);
    }

    #[test]
    fn labels_are_remapped_and_edges_symmetrized() {
        let dir = tempfile::tempdir().unwrap();
        // one direction only, plus a self-loop that must be dropped
        write(dir.path(), "T", "A", "1,2\n3, 3\n3,4\n");
        write(dir.path(), "T", "graph_indicator", "1\n1\n2\n2\n");
        write(dir.path(), "T", "graph_labels", "-1\n1\n");
        write(dir.path(), "T", "node_labels", "6\n2\n2\n9\n");
        let d = parse_tudataset(dir.path(), "T").unwrap();
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.feature_dim(), 3);
        assert_eq!(d.graph(0).label(), 0);
        assert_eq!(d.graph(1).label(), 1);
        assert_eq!(d.graph(0).node_labels(), &[1, 0]);
        assert_eq!(d.graph(1).node_labels(), &[0, 2]);
        assert!(d.graph(0).has_edge(1, 0));
        assert!(!d.graph(1).has_edge(0, 0));
    }

    #[test]
    fn degree_labels_without_node_label_file() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "T", "A", "1, 2\n2, 1\n2, 3\n3, 2\n");
        write(dir.path(), "T", "graph_indicator", "1\n1\n1\n");
        write(dir.path(), "T", "graph_labels", "0\n");
        let d = parse_tudataset(dir.path(), "T").unwrap();
        // degrees 1,2,1 -> codes 0,1,0
        assert_eq!(d.feature_dim(), 2);
        assert_eq!(d.graph(0).node_labels(), &[0, 1, 0]);
    }

    #[test]
    fn errors_name_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "T", "A", "1, 2\n999, 1\n");
        write(dir.path(), "T", "graph_indicator", &"1\n".repeat(10));
        write(dir.path(), "T", "graph_labels", "0\n");
        write(dir.path(), "T", "node_labels", &"0\n".repeat(10));
        match parse_tudataset(dir.path(), "T") {
            Err(Error::Parse { file, line, .. }) => {
                assert!(file.ends_with("T_A.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        write(dir.path(), "T", "A", "1, x\n");
        assert!(matches!(
            parse_tudataset(dir.path(), "T"),
            Err(Error::Parse { line: 1, .. })
        ));
        fs::remove_file(file_path(dir.path(), "T", "graph_labels")).unwrap();
        assert!(matches!(
            parse_tudataset(dir.path(), "T"),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn writer_format() {
        let g = Graph::new(vec![0, 1], 2, &[(0, 1)], 0).unwrap();
        let d = Dataset::new("W", vec![g], 1, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tudataset(&d, dir.path(), "W").unwrap();
        let a = fs::read_to_string(file_path(dir.path(), "W", "A")).unwrap();
        assert_eq!(a, "1, 2\n2, 1\n");
        assert_eq!(parse_tudataset(dir.path(), "W").unwrap(), d);
    }
}
