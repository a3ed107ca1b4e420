use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability bound as computed (possibly negative) and clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub raw: f64,
    pub clamped: f64,
}

impl Probability {
    fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }
}

fn choose2(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("pruning ratio {rho} outside (0, 1)")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} = {v} must be at least {min}"
        )))
    }
}

/// `1 - C(N, 2) rho^(k m)`: probability that a randomly pruned layer of
/// width `m` stays injective on `N` inputs whose pairwise differences have
/// at least `k` nonzero components.
pub fn injectivity_bound(n: usize, rho: f64, k: usize, m: usize) -> Result<Probability> {
    at_least("N", n, 2)?;
    check_rho(rho)?;
    at_least("k", k, 1)?;
    at_least("m", m, 1)?;
    Ok(Probability::new(
        1.0 - choose2(n as f64) * rho.powf((k * m) as f64),
    ))
}

/// `gamma^L` for an MLP of `L` layers.
pub fn mlp_bound(gamma: Probability, layers: usize) -> Result<Probability> {
    at_least("L", layers, 1)?;
    Ok(Probability {
        raw: gamma.raw.powi(layers as i32),
        clamped: gamma.clamped.powi(layers as i32),
    })
}

/// `(1 - C(|D| N, 2) rho^(k m_min))^(L M)` for `M` message-passing layers
/// with `L`-layer MLPs on a dataset of `|D|` graphs with at most `N` nodes.
pub fn gnn_bound(
    dataset_size: usize,
    max_nodes: usize,
    rho: f64,
    k: usize,
    m_min: usize,
    mlp_layers: usize,
    mp_layers: usize,
) -> Result<Probability> {
    at_least("|D|", dataset_size, 1)?;
    at_least("N", max_nodes, 1)?;
    at_least("|D| N", dataset_size * max_nodes, 2)?;
    check_rho(rho)?;
    at_least("k", k, 1)?;
    at_least("m_min", m_min, 1)?;
    at_least("L", mlp_layers, 1)?;
    at_least("M", mp_layers, 1)?;
    let base = 1.0 - choose2((dataset_size * max_nodes) as f64) * rho.powf((k * m_min) as f64);
    let e = (mlp_layers * mp_layers) as i32;
    Ok(Probability {
        raw: base.powi(e),
        clamped: base.clamp(0.0, 1.0).powi(e),
    })
}

/// Smallest width `m >= 1` with `m >= log_rho((1 - gamma) / C(N, 2)) / k`.
pub fn required_width(gamma: f64, n: usize, k: usize, rho: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "target probability {gamma} outside (0, 1)"
        )));
    }
    at_least("N", n, 2)?;
    at_least("k", k, 1)?;
    check_rho(rho)?;
    let m = ((1.0 - gamma) / choose2(n as f64)).ln() / rho.ln() / k as f64;
    Ok((m.ceil() as usize).max(1))
}

/// `1 - (1 - 1/C) U / I`: best accuracy when `U` of `I` isomorphism types
/// collapse, with classes uniformly distributed.
pub fn accuracy_ceiling(classes: usize, u: usize, i: usize) -> Result<f64> {
    at_least("C", classes, 1)?;
    at_least("I", i, 1)?;
    if u > i {
        return Err(Error::Domain(format!("U = {u} exceeds I = {i}")));
    }
    Ok(1.0 - (1.0 - 1.0 / classes as f64) * u as f64 / i as f64)
}

/// Every quantity of the injectivity analysis for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub rho: f64,
    pub k: usize,
    pub m: usize,
    pub mlp_layers: usize,
    pub mp_layers: usize,
    pub dataset_size: Option<usize>,
    pub gamma: Probability,
    pub gamma_mlp: Probability,
    pub gamma_gnn: Option<Probability>,
    /// Width needed for `target_gamma`, when one was given.
    pub target_gamma: Option<f64>,
    pub m_min: Option<usize>,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        n: usize,
        rho: f64,
        k: usize,
        m: usize,
        mlp_layers: usize,
        mp_layers: usize,
        dataset_size: Option<usize>,
        target_gamma: Option<f64>,
    ) -> Result<Self> {
        let gamma = injectivity_bound(n, rho, k, m)?;
        let m_min = target_gamma
            .map(|g| required_width(g, n, k, rho))
            .transpose()?;
        let gamma_gnn = dataset_size
            .map(|d| gnn_bound(d, n, rho, k, m_min.unwrap_or(m), mlp_layers, mp_layers))
            .transpose()?;
        Ok(Self {
            n,
            rho,
            k,
            m,
            mlp_layers,
            mp_layers,
            dataset_size,
            gamma,
            gamma_mlp: mlp_bound(gamma, mlp_layers)?,
            gamma_gnn,
            target_gamma,
            m_min,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_values() {
        assert_eq!(injectivity_bound(3, 0.5, 1, 4).unwrap().raw, 0.8125);
        assert_eq!(required_width(0.99, 3, 1, 0.5).unwrap(), 9);
        let tiny = injectivity_bound(50, 1e-12, 1, 2).unwrap();
        assert!(1.0 - tiny.raw < 1e-20);
        let neg = injectivity_bound(10, 0.9, 1, 1).unwrap();
        assert!(neg.raw < 0.0 && neg.clamped == 0.0);
        assert!(
            (mlp_bound(injectivity_bound(3, 0.5, 1, 4).unwrap(), 2)
                .unwrap()
                .raw
                - 0.8125f64.powi(2))
            .abs()
                < 1e-15
        );
        let g = gnn_bound(2, 2, 0.5, 1, 4, 2, 3).unwrap();
        assert!((g.raw - (1.0 - 6.0 / 16.0f64).powi(6)).abs() < 1e-15);
    }

    #[test]
    fn ceilings() {
        assert_eq!(accuracy_ceiling(3, 0, 7).unwrap(), 1.0);
        assert_eq!(accuracy_ceiling(2, 4, 4).unwrap(), 0.5);
        assert!((accuracy_ceiling(5, 2, 10).unwrap() - 0.84).abs() < 1e-15);
        assert!(accuracy_ceiling(2, 3, 2).is_err());
        assert!(accuracy_ceiling(0, 0, 2).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(injectivity_bound(1, 0.5, 1, 1).is_err());
        assert!(injectivity_bound(3, 0.0, 1, 1).is_err());
        assert!(injectivity_bound(3, 1.0, 1, 1).is_err());
        assert!(injectivity_bound(3, 0.5, 0, 1).is_err());
        assert!(required_width(1.0, 3, 1, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_m_and_rho(n in 2usize..20, k in 1usize..4, m in 1usize..20, rho in 0.05f64..0.9) {
            let g = injectivity_bound(n, rho, k, m).unwrap().raw;
            prop_assert!(injectivity_bound(n, rho, k, m + 1).unwrap().raw >= g);
            prop_assert!(injectivity_bound(n, rho + 0.05, k, m).unwrap().raw <= g);
        }

        #[test]
        fn required_width_meets_target(gamma in 0.01f64..0.999, n in 2usize..30, k in 1usize..3, rho in 0.05f64..0.95) {
            let m = required_width(gamma, n, k, rho).unwrap();
            prop_assert!(injectivity_bound(n, rho, k, m).unwrap().raw >= gamma - 1e-12);
            if m > 1 {
                prop_assert!(injectivity_bound(n, rho, k, m - 1).unwrap().raw < gamma + 1e-12);
            }
        }

        #[test]
        fn ceiling_monotone(c in 1usize..10, i in 1usize..20, u_frac in 0.0f64..1.0) {
            let u = ((i as f64) * u_frac) as usize;
            let a = accuracy_ceiling(c, u, i).unwrap();
            prop_assert!(accuracy_ceiling(c + 1, u, i).unwrap() <= a);
            if u < i {
                prop_assert!(accuracy_ceiling(c, u + 1, i).unwrap() <= a);
            }
        }
    }
}
