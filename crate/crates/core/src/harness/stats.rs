//! Aggregate statistics over sweep records.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::sweep::RunRecord;
use crate::error::{Error, Result};

/// Dataset label of rows aggregated over every dataset.
pub const ALL: &str = "ALL";

const GRID_SLACK: f64 = 1e-9;

fn same_rho(a: f64, b: f64) -> bool {
    (a - b).abs() < GRID_SLACK
}

fn in_bucket(tau: f64, theta: f64, eps: f64) -> bool {
    (tau - theta).abs() <= eps + GRID_SLACK
}

fn dataset_names(records: &[RunRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| r.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn nonempty(records: &[RunRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Undefined("no run records".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinningCell {
    pub dataset: String,
    pub rho: f64,
    pub theta: f64,
    pub runs: usize,
    pub winners: usize,
    /// Datasets contributing a nonempty bucket (1 on per-dataset rows).
    pub datasets: usize,
    /// NaN for an empty bucket.
    pub probability: f64,
}

/// Winning-ticket probability per (dataset, rho, theta) bucket, plus `ALL`
/// rows. The aggregate averages per-dataset probabilities over datasets with
/// a nonempty bucket, so each dataset weighs the same regardless of how many
/// of its runs land in the bucket.
pub fn winning_probability(
    records: &[RunRecord],
    theta_grid: &[f64],
    eps: f64,
    rho_grid: &[f64],
) -> Result<Vec<WinningCell>> {
    nonempty(records)?;
    let names = dataset_names(records);
    let mut out = Vec::new();
    let mut all = Vec::new();
    for &rho in rho_grid {
        for &theta in theta_grid {
            let mut probs = Vec::new();
            let (mut runs_all, mut winners_all) = (0, 0);
            for name in &names {
                let bucket: Vec<&RunRecord> = records
                    .iter()
                    .filter(|r| {
                        &r.dataset == name
                            && same_rho(r.rho_nominal, rho)
                            && in_bucket(r.tau_pre, theta, eps)
                    })
                    .collect();
                let winners = bucket.iter().filter(|r| r.winning_ticket).count();
                let probability = if bucket.is_empty() {
                    f64::NAN
                } else {
                    winners as f64 / bucket.len() as f64
                };
                if !bucket.is_empty() {
                    probs.push(probability);
                }
                runs_all += bucket.len();
                winners_all += winners;
                out.push(WinningCell {
                    dataset: name.clone(),
                    rho,
                    theta,
                    runs: bucket.len(),
                    winners,
                    datasets: usize::from(!bucket.is_empty()),
                    probability,
                });
            }
            all.push(WinningCell {
                dataset: ALL.into(),
                rho,
                theta,
                runs: runs_all,
                winners: winners_all,
                datasets: probs.len(),
                probability: if probs.is_empty() {
                    f64::NAN
                } else {
                    probs.iter().sum::<f64>() / probs.len() as f64
                },
            });
        }
    }
    out.extend(all);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub kappa: f64,
    /// Runs with `tau_pre < kappa`.
    pub conditioned: usize,
    /// Of those, runs with `tau_post >= kappa`.
    pub transitions: usize,
    pub probability: f64,
}

/// `P(tau_post >= kappa | tau_pre < kappa)` pooled over all records.
pub fn transition_probability(records: &[RunRecord], kappa_grid: &[f64]) -> Vec<TransitionRow> {
    kappa_grid
        .iter()
        .map(|&kappa| {
            let below: Vec<&RunRecord> = records.iter().filter(|r| r.tau_pre < kappa).collect();
            let transitions = below.iter().filter(|r| r.tau_post >= kappa).count();
            TransitionRow {
                kappa,
                conditioned: below.len(),
                transitions,
                probability: if below.is_empty() {
                    f64::NAN
                } else {
                    transitions as f64 / below.len() as f64
                },
            }
        })
        .collect()
}

/// Natural log of the gamma function (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// Student-t cumulative distribution function with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * regularized_beta(df / (df + t * t), df / 2.0, 0.5);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub r: f64,
    pub t: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Pearson product-moment correlation with a two-sided t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "sample lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Undefined(format!(
            "correlation needs at least 3 points, got {n}"
        )));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::Undefined("zero variance".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let (t, p_value) = if r.abs() == 1.0 {
        (r.signum() * f64::INFINITY, 0.0)
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        (t, regularized_beta(df / (df + t * t), df / 2.0, 0.5))
    };
    Ok(Correlation { n, r, t, p_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub dataset: String,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
    /// False when fewer than three points or a zero variance; `r` and
    /// `p_value` are then NaN.
    pub defined: bool,
    pub r: f64,
    pub p_value: f64,
}

fn correlation_row(records: &[RunRecord], dataset: &str, lo: f64, hi: f64) -> CorrelationRow {
    let sel: Vec<&RunRecord> = records
        .iter()
        .filter(|r| {
            (dataset == ALL || r.dataset == dataset)
                && r.rho_nominal >= lo - GRID_SLACK
                && r.rho_nominal <= hi + GRID_SLACK
        })
        .collect();
    let x: Vec<f64> = sel.iter().map(|r| r.tau_pre).collect();
    let y: Vec<f64> = sel.iter().map(|r| r.a_post).collect();
    let c = pearson(&x, &y).ok();
    CorrelationRow {
        dataset: dataset.into(),
        rho_min: lo,
        rho_max: hi,
        n: sel.len(),
        defined: c.is_some(),
        r: c.map_or(f64::NAN, |c| c.r),
        p_value: c.map_or(f64::NAN, |c| c.p_value),
    }
}

/// Correlation of `tau_pre` with `A_post` per rho and over the pooled rho
/// range, for every dataset and for `ALL`.
pub fn correlation_table(
    records: &[RunRecord],
    rho_grid: &[f64],
    pooled: (f64, f64),
) -> Vec<CorrelationRow> {
    let mut scopes = dataset_names(records);
    scopes.push(ALL.into());
    let mut rows = Vec::new();
    for name in &scopes {
        for &rho in rho_grid {
            rows.push(correlation_row(records, name, rho, rho));
        }
        rows.push(correlation_row(records, name, pooled.0, pooled.1));
    }
    rows
}

/// Mean of `(A_post - A_clean) / A_clean` over runs with `tau_pre` in
/// `[theta - eps, theta + eps]`; NaN for an empty bucket.
pub fn mean_relative_accuracy(records: &[RunRecord], theta: f64, eps: f64) -> Result<f64> {
    let bucket: Vec<&RunRecord> = records
        .iter()
        .filter(|r| in_bucket(r.tau_pre, theta, eps))
        .collect();
    if bucket.is_empty() {
        return Ok(f64::NAN);
    }
    if let Some(r) = bucket.iter().find(|r| r.a_clean <= 0.0) {
        return Err(Error::Domain(format!(
            "A_clean = {} for seed {} at rho {}",
            r.a_clean, r.seed, r.rho_nominal
        )));
    }
    Ok(bucket
        .iter()
        .map(|r| (r.a_post - r.a_clean) / r.a_clean)
        .sum::<f64>()
        / bucket.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub dataset: String,
    pub rho: f64,
    pub runs: usize,
    pub tau_pre_mean: f64,
    pub tau_post_mean: f64,
}

/// Mean `tau_pre` and `tau_post` per (dataset, rho).
pub fn tau_scatter(records: &[RunRecord], rho_grid: &[f64]) -> Vec<ScatterRow> {
    let mut rows = Vec::new();
    for name in dataset_names(records) {
        for &rho in rho_grid {
            let sel: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.dataset == name && same_rho(r.rho_nominal, rho))
                .collect();
            let mean = |f: fn(&RunRecord) -> f64| {
                if sel.is_empty() {
                    f64::NAN
                } else {
                    sel.iter().map(|r| f(r)).sum::<f64>() / sel.len() as f64
                }
            };
            rows.push(ScatterRow {
                dataset: name.clone(),
                rho,
                runs: sel.len(),
                tau_pre_mean: mean(|r| r.tau_pre),
                tau_post_mean: mean(|r| r.tau_post),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalRow {
    pub rho: f64,
    pub high_mean: f64,
    pub low_mean: f64,
    /// One side has no nonempty bucket, so there is nothing to compare.
    pub vacuous: bool,
    pub holds: bool,
}

/// Compares the mean `ALL` winning probability over buckets with
/// `theta >= high` against buckets with `theta <= low`, for each rho up to
/// `rho_max`. Empty buckets are left out of the means.
pub fn directional_check(
    cells: &[WinningCell],
    rho_max: f64,
    high: f64,
    low: f64,
) -> Vec<DirectionalRow> {
    let rhos: Vec<f64> = cells
        .iter()
        .filter(|c| c.dataset == ALL && c.rho <= rho_max + GRID_SLACK)
        .map(|c| c.rho)
        .fold(Vec::new(), |mut v, r| {
            if !v.iter().any(|&x| same_rho(x, r)) {
                v.push(r);
            }
            v
        });
    rhos.into_iter()
        .map(|rho| {
            let side = |keep: &dyn Fn(f64) -> bool| {
                let p: Vec<f64> = cells
                    .iter()
                    .filter(|c| {
                        c.dataset == ALL
                            && same_rho(c.rho, rho)
                            && keep(c.theta)
                            && !c.probability.is_nan()
                    })
                    .map(|c| c.probability)
                    .collect();
                if p.is_empty() {
                    f64::NAN
                } else {
                    p.iter().sum::<f64>() / p.len() as f64
                }
            };
            let high_mean = side(&|t| t >= high - GRID_SLACK);
            let low_mean = side(&|t| t <= low + GRID_SLACK);
            let vacuous = high_mean.is_nan() || low_mean.is_nan();
            DirectionalRow {
                rho,
                high_mean,
                low_mean,
                vacuous,
                holds: vacuous || high_mean >= low_mean,
            }
        })
        .collect()
}

/// Fraction of runs whose expressivity did not grow during training.
pub fn degradation_fraction(records: &[RunRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().filter(|r| r.tau_post <= r.tau_pre).count() as f64 / records.len() as f64
}
