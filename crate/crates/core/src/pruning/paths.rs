use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Mask;

pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// One weight on a path: MLP layer index and the (input, output) neuron pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathEdge {
    pub layer: usize,
    pub input: usize,
    pub output: usize,
}

/// Input-to-output neuron path through every layer of an MLP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub edges: Vec<PathEdge>,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub alive: u128,
    pub total: u128,
}

fn check_chain(masks: &[Mask]) -> Result<()> {
    if masks.is_empty() {
        return Err(Error::Domain("an MLP needs at least one layer".into()));
    }
    for w in masks.windows(2) {
        if w[0].shape().1 != w[1].shape().0 {
            return Err(Error::Shape {
                op: "path chain",
                left: w[0].shape(),
                right: w[1].shape(),
            });
        }
    }
    Ok(())
}

/// Alive and total path counts by dynamic programming; no listing, no cap.
pub fn count_paths(masks: &[Mask]) -> Result<PathStats> {
    check_chain(masks)?;
    let inputs = masks[0].shape().0;
    let mut alive = vec![1u128; inputs];
    let mut total = inputs as u128;
    for m in masks {
        let (r, c) = m.shape();
        alive = (0..c)
            .map(|o| (0..r).filter(|&i| m.get(i, o)).map(|i| alive[i]).sum())
            .collect();
        total *= c as u128;
    }
    Ok(PathStats {
        alive: alive.iter().sum(),
        total,
    })
}

/// Every path, listed, when there are at most `cap` of them.
pub fn enumerate_paths(masks: &[Mask], cap: u128) -> Result<(PathStats, Vec<Path>)> {
    let stats = count_paths(masks)?;
    if stats.total > cap {
        return Err(Error::PathCapExceeded {
            paths: stats.total,
            cap,
        });
    }
    let mut paths = Vec::with_capacity(stats.total as usize);
    let mut stack = Vec::new();
    for start in 0..masks[0].shape().0 {
        walk(masks, 0, start, &mut stack, &mut paths);
    }
    Ok((stats, paths))
}

fn walk(masks: &[Mask], layer: usize, at: usize, stack: &mut Vec<PathEdge>, out: &mut Vec<Path>) {
    if layer == masks.len() {
        let alive = stack.iter().all(|e| masks[e.layer].get(e.input, e.output));
        out.push(Path {
            edges: stack.clone(),
            alive,
        });
        return;
    }
    for next in 0..masks[layer].shape().1 {
        stack.push(PathEdge {
            layer,
            input: at,
            output: next,
        });
        walk(masks, layer + 1, next, stack, out);
        stack.pop();
    }
}
