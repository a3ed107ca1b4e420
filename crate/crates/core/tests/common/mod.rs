#![allow(dead_code)]

use std::io::Write;

use wlticket::gnn::{Activation, GnnModel, ModelConfig, Variant};
use wlticket::graph::synthetic::erdos_renyi;
use wlticket::graph::Graph;
use wlticket::tensor::{Mask, Rng};

const H: f64 = 1e-5;

/// Sign pattern of every pre-activation, used to spot kink crossings.
fn pattern(model: &GnnModel, g: &Graph) -> Vec<bool> {
    let f = model.forward(g).unwrap();
    f.preactivations
        .iter()
        .flatten()
        .flat_map(|z| z.data().iter().map(|&x| x > 0.0).collect::<Vec<_>>())
        .collect()
}

/// Max relative error between analytic and central-difference gradients
/// over every trainable coordinate, plus the number of coordinates skipped
/// because a probe crossed a kink of a piecewise-linear activation.
pub fn fd_check(model: &GnnModel, g: &Graph) -> (f64, usize) {
    let (_, grads) = model.backward(g).unwrap();
    let analytic = grads.flatten(model.config().variant);
    let base = model.params();
    let trainable = model.trainable();
    let reference = pattern(model, g);
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    let mut probe = model.clone();
    for i in 0..base.len() {
        if !trainable[i] {
            assert_eq!(analytic[i], 0.0, "pruned coordinate {i} has a gradient");
            continue;
        }
        let mut p = base.clone();
        p[i] = base[i] + H;
        probe.set_params(&p).unwrap();
        let (up, up_pat) = (probe.loss(g).unwrap(), pattern(&probe, g));
        p[i] = base[i] - H;
        probe.set_params(&p).unwrap();
        let (down, down_pat) = (probe.loss(g).unwrap(), pattern(&probe, g));
        if model.config().activation != Activation::Softsign
            && (up_pat != reference || down_pat != reference)
        {
            skipped += 1;
            continue;
        }
        let numeric = (up - down) / (2.0 * H);
        let err = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-4);
        worst = worst.max(err);
    }
    (worst, skipped)
}

/// Random masked model with a nonzero epsilon on a random labeled graph.
pub fn fd_fixture(variant: Variant, activation: Activation, seed: u64) -> (GnnModel, Graph) {
    let mut rng = Rng::new(seed, 0);
    let mut cfg = ModelConfig::new(variant, 3, 2, 3);
    cfg.hidden_dim = 4;
    cfg.activation = activation;
    let mut model = GnnModel::new(cfg, &mut rng).unwrap();
    let masks: Vec<Vec<Mask>> = model
        .config()
        .mlp_shapes()
        .iter()
        .map(|l| {
            l.iter()
                .map(|&(i, o)| Mask::from_fn(i, o, |_, _| !rng.bernoulli(0.2)))
                .collect()
        })
        .collect();
    model.set_masks(&masks).unwrap();
    model.set_epsilon(0, rng.uniform(-0.3, 0.3));
    let g = erdos_renyi(4, 0.6, 3, &mut rng).with_label(rng.below(3));
    (model, g)
}

/// Writes to file descriptor 2 directly so the line shows up even when the
/// test harness captures output.
pub fn report(pass: bool, name: &str, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] {name}: {detail}\n");
    #[cfg(unix)]
    {
        use std::os::fd::FromRawFd;
        // SAFETY: fd 2 stays open for the life of the process; ManuallyDrop keeps it open
        let mut err = std::mem::ManuallyDrop::new(unsafe { std::fs::File::from_raw_fd(2) });
        let _ = err.write_all(line.as_bytes());
    }
    #[cfg(not(unix))]
    eprint!("{line}");
}

/// Every permutation of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

/// Brute-force labeled isomorphism test.
pub fn brute_isomorphic(a: &Graph, b: &Graph) -> bool {
    let n = a.node_count();
    if n != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    permutations(n).iter().any(|p| {
        (0..n).all(|v| a.node_labels()[v] == b.node_labels()[p[v]])
            && a.edges().all(|(u, v)| b.has_edge(p[u], p[v]))
    })
}
