//! Expressivity measurement and the probabilistic and accuracy bounds.

mod bounds;
mod colinear;
mod criterion;
mod gdiv;
mod montecarlo;
mod tau;

pub use bounds::{
    accuracy_ceiling, gnn_bound, injectivity_bound, mlp_bound, required_width, BoundReport,
    Probability,
};
pub use colinear::{
    angle, colinear_pairs, is_colinear, noncolinearity_check, ColinearityReport, PairCounts,
    COLINEAR_TOLERANCE,
};
pub use criterion::criterion1_check;
pub use gdiv::{gdiv_lower_bound, gradient_diversity, GdivCase, ZetaReport};
pub use montecarlo::{injectivity_monte_carlo, min_nonzero_components, MonteCarloReport};
pub use tau::{measure_tau, ExpressivityReport, TauOptions};

use serde::{Deserialize, Serialize};

/// Machine epsilon of IEEE single precision.
pub const FLOAT32_EPS: f64 = 1.19e-7;

/// How two embeddings are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    /// Equal when `max |a - b| <= eps * max(1, |a|_inf, |b|_inf)`.
    #[default]
    Relative,
    /// Equal when `max |a - b| <= eps`.
    Absolute,
}

impl Tolerance {
    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "relative" => Ok(Self::Relative),
            "absolute" => Ok(Self::Absolute),
            other => Err(crate::Error::Config(format!(
                "unknown tolerance mode `{other}`"
            ))),
        }
    }
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Whether `a` and `b` differ beyond single-precision resolution.
pub fn distinguishable(a: &[f64], b: &[f64], tol: Tolerance) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = match tol {
        Tolerance::Relative => inf_norm(a).max(inf_norm(b)).max(1.0),
        Tolerance::Absolute => 1.0,
    };
    diff > FLOAT32_EPS * scale
}

/// One representative per group of mutually indistinguishable rows, in
/// first-occurrence order.
pub fn distinct_rows(rows: Vec<Vec<f64>>, tol: Tolerance) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        if out.iter().all(|o| distinguishable(o, &r, tol)) {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_rules() {
        assert!(!distinguishable(&[1.0], &[1.0 + 1e-8], Tolerance::Relative));
        assert!(distinguishable(&[1.0], &[1.0 + 1e-6], Tolerance::Relative));
        // large magnitudes: relative mode absorbs rounding, absolute does not
        assert!(!distinguishable(&[1e4], &[1e4 + 1e-4], Tolerance::Relative));
        assert!(distinguishable(&[1e4], &[1e4 + 1e-4], Tolerance::Absolute));
        // symmetric
        assert_eq!(
            distinguishable(&[0.0], &[2e-7], Tolerance::Relative),
            distinguishable(&[2e-7], &[0.0], Tolerance::Relative)
        );
    }

    #[test]
    fn scaling_up_never_merges_pairs() {
        let a = [0.5, -0.25];
        let b = [0.5 + 3e-7, -0.25];
        for c in [1.0, 2.0, 10.0, 1e3] {
            let sa: Vec<f64> = a.iter().map(|x| x * c).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * c).collect();
            assert!(distinguishable(&sa, &sb, Tolerance::Relative), "c = {c}");
        }
    }

    #[test]
    fn dedup() {
        let rows = vec![vec![1.0, 0.0], vec![1.0 + 1e-9, 0.0], vec![0.0, 1.0]];
        assert_eq!(distinct_rows(rows, Tolerance::Relative).len(), 2);
    }
}
