//! Sampling check of the layer-injectivity bound.

use serde::{Deserialize, Serialize};

use super::bounds::{injectivity_bound, Probability};
use crate::error::{Error, Result};
use crate::par::{map_indices, Parallelism};
use crate::tensor::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub rho: f64,
    pub k: usize,
    pub m: usize,
    pub input_dim: usize,
    pub trials: usize,
    pub injective: usize,
    pub rate: f64,
    pub gamma: Probability,
    /// Binomial standard error at the clamped bound.
    pub sigma: f64,
    /// `rate >= gamma.raw - 3 sigma`.
    pub passes: bool,
}

/// Minimum number of nonzero components over all pairwise differences.
pub fn min_nonzero_components(inputs: &[Vec<f64>]) -> Option<usize> {
    let mut best = None;
    for (a, x) in inputs.iter().enumerate() {
        for y in &inputs[a + 1..] {
            let k = x.iter().zip(y).filter(|(p, q)| p != q).count();
            best = Some(best.map_or(k, |b: usize| b.min(k)));
        }
    }
    best
}

/// `n` distinct points in `R^dim`, every pairwise difference having exactly
/// `k` nonzero components: the first `k` coordinates are fresh per point,
/// the rest shared.
fn sample_inputs(n: usize, dim: usize, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let shared: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
    (0..n)
        .map(|_| {
            let mut x = shared.clone();
            for v in x.iter_mut().take(k) {
                *v = rng.uniform(-1.0, 1.0);
            }
            x
        })
        .collect()
}

/// Estimates how often a randomly pruned `m x dim` layer keeps `n` inputs
/// apart. Weights are uniform on (-1, 1) and each is pruned with
/// probability `rho`. Collisions are exact: with an injective activation the
/// layer merges two inputs only when `W' x_u == W' x_v` bit for bit, which
/// happens when pruning removed every weight touching their difference.
pub fn injectivity_monte_carlo(
    n: usize,
    rho: f64,
    k: usize,
    m: usize,
    trials: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<MonteCarloReport> {
    let gamma = injectivity_bound(n, rho, k, m)?;
    let input_dim = k.max(2);
    if input_dim > m {
        return Err(Error::Domain(format!(
            "input dimension {input_dim} exceeds width {m}; the bound needs 1 < n <= m"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("at least one trial is needed".into()));
    }
    let outcomes = map_indices(trials, mode, |t| {
        let mut rng = Rng::new(seed, t as u64);
        let inputs = sample_inputs(n, input_dim, k, &mut rng);
        let w: Vec<f64> = (0..m * input_dim)
            .map(|_| {
                let v = rng.uniform(-1.0, 1.0);
                if rng.bernoulli(rho) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let images: Vec<Vec<f64>> = inputs
            .iter()
            .map(|x| {
                (0..m)
                    .map(|r| (0..input_dim).map(|c| w[r * input_dim + c] * x[c]).sum())
                    .collect()
            })
            .collect();
        (0..n).all(|a| (a + 1..n).all(|b| images[a] != images[b]))
    });
    let injective = outcomes.iter().filter(|&&ok| ok).count();
    let rate = injective as f64 / trials as f64;
    let p = gamma.clamped;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(MonteCarloReport {
        n,
        rho,
        k,
        m,
        input_dim,
        trials,
        injective,
        rate,
        gamma,
        sigma,
        passes: rate >= gamma.raw - 3.0 * sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_inputs_have_the_requested_k() {
        let mut rng = Rng::new(0, 0);
        for k in 1..=3 {
            let x = sample_inputs(6, 3, k, &mut rng);
            assert_eq!(min_nonzero_components(&x), Some(k));
        }
    }

    #[test]
    fn bound_holds_on_a_small_point() {
        let r = injectivity_monte_carlo(3, 0.5, 1, 6, 20_000, 1, Parallelism::Parallel).unwrap();
        assert!(r.passes, "{r:?}");
        let again =
            injectivity_monte_carlo(3, 0.5, 1, 6, 20_000, 1, Parallelism::Sequential).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn single_pair_rate_is_exact() {
        // N = 2, k = 1: failure iff the m weights on the differing coordinate are all pruned
        let r = injectivity_monte_carlo(2, 0.5, 1, 2, 40_000, 5, Parallelism::Parallel).unwrap();
        let p = 0.75;
        let sigma = (p * (1.0 - p) / 40_000.0f64).sqrt();
        assert!((r.rate - p).abs() < 4.0 * sigma, "{}", r.rate);
    }
}
