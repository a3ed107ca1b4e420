use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// `sum_i |G_i|_F^2 / |sum_i G_i|_F^2`. A vanishing denominator with a
/// nonzero numerator gives `+inf`; all-zero gradients are undefined.
pub fn gradient_diversity(grads: &[Matrix]) -> Result<f64> {
    let first = grads
        .first()
        .ok_or_else(|| Error::Undefined("gradient diversity of an empty set".into()))?;
    let mut total = Matrix::zeros(first.rows(), first.cols());
    let mut num = 0.0;
    for g in grads {
        total.add_assign(g)?;
        num += g.frobenius_norm().powi(2);
    }
    let den = total.frobenius_norm().powi(2);
    if den == 0.0 {
        if num == 0.0 {
            return Err(Error::Undefined("all gradients are zero".into()));
        }
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdivCase {
    /// `S < B`: only the lower end is finite.
    Unbounded,
    /// `S >= B`: `[zeta_plus, zeta_minus]`.
    Bounded,
}

/// Gradient-diversity interval for two graphs from their layer inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    /// `|G_1|_F^2 + |G_2|_F^2`.
    pub s: f64,
    /// `M sqrt(sum cos^2) |A_2^T dZ_2 dZ_1^T A_1|_F`.
    pub b: f64,
    pub cos_sq_sum: f64,
    pub cos_abs_sum: f64,
    /// Smallest and largest squared row norm over kept rows.
    pub m_low: f64,
    pub m_high: f64,
    pub excluded_rows: usize,
    pub zeta_plus: f64,
    /// `+inf` in the unbounded case.
    pub zeta_minus: f64,
    pub case: GdivCase,
    /// `<G_1, G_2>_F`, for diagnosing containment failures.
    pub cross: f64,
    /// Measured diversity of the pair.
    pub delta_s: f64,
    /// `zeta_plus <= delta_s <= zeta_minus`.
    pub contained: bool,
    /// `S / (S ± 2B)`. Since `|G_1 + G_2|^2 = S + 2<G_1, G_2>` and
    /// `|<G_1, G_2>| <= B`, this interval always holds; `zeta_pm` can miss
    /// when `|<G_1, G_2>| > B / 2`.
    pub wide_plus: f64,
    pub wide_minus: f64,
    pub contained_wide: bool,
}

const ROW_EPS: f64 = 1e-12;

/// Gradients `G_i = H_iᵀ A_iᵀ dZ_i` of a layer fed by `A_i H_i`, their
/// measured diversity, and the interval `zeta_pm = S / (S ± B)`.
///
/// Rows of `H_1`, `H_2` with squared norm below `1e-12` have no defined
/// angle; they are dropped from the cosine terms and counted.
pub fn gdiv_lower_bound(
    h1: &Matrix,
    h2: &Matrix,
    a1: &Matrix,
    a2: &Matrix,
    dz1: &Matrix,
    dz2: &Matrix,
) -> Result<ZetaReport> {
    let g1 = a1.matmul(h1)?.t_matmul(dz1)?;
    let g2 = a2.matmul(h2)?.t_matmul(dz2)?;
    let s = g1.frobenius_norm().powi(2) + g2.frobenius_norm().powi(2);
    let cross = g1.frobenius_inner(&g2)?;
    let delta_s = gradient_diversity(&[g1, g2])?;

    let norms = |h: &Matrix| -> Vec<f64> {
        h.iter_rows()
            .map(|r| r.iter().map(|x| x * x).sum())
            .collect()
    };
    let (n1, n2) = (norms(h1), norms(h2));
    let keep1: Vec<usize> = (0..n1.len()).filter(|&i| n1[i] >= ROW_EPS).collect();
    let keep2: Vec<usize> = (0..n2.len()).filter(|&j| n2[j] >= ROW_EPS).collect();
    let excluded_rows = n1.len() + n2.len() - keep1.len() - keep2.len();
    if keep1.is_empty() || keep2.is_empty() {
        return Err(Error::Undefined(
            "every embedding row of a graph is zero".into(),
        ));
    }
    let mut cos_sq_sum = 0.0;
    let mut cos_abs_sum = 0.0;
    for &i in &keep1 {
        for &j in &keep2 {
            let c = crate::tensor::dot(h1.row(i), h2.row(j)) / (n1[i] * n2[j]).sqrt();
            cos_sq_sum += c * c;
            cos_abs_sum += c.abs();
        }
    }
    let kept = keep1
        .iter()
        .map(|&i| n1[i])
        .chain(keep2.iter().map(|&j| n2[j]));
    let (m_low, m_high) = kept.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });

    let c = a2.t_matmul(dz2)?.matmul_t(&a1.t_matmul(dz1)?)?;
    let b = m_high * cos_sq_sum.sqrt() * c.frobenius_norm();
    let zeta_plus = s / (s + b);
    let (case, zeta_minus) = if s < b {
        (GdivCase::Unbounded, f64::INFINITY)
    } else {
        (GdivCase::Bounded, s / (s - b))
    };
    let wide_plus = s / (s + 2.0 * b);
    let wide_minus = if s < 2.0 * b {
        f64::INFINITY
    } else {
        s / (s - 2.0 * b)
    };
    let slack = 1e-12 * delta_s.abs().max(1.0);
    let within = |lo: f64, hi: f64| delta_s >= lo - slack && delta_s <= hi + slack;
    let contained = within(zeta_plus, zeta_minus);
    let contained_wide = within(wide_plus, wide_minus);
    Ok(ZetaReport {
        s,
        b,
        cos_sq_sum,
        cos_abs_sum,
        m_low,
        m_high,
        excluded_rows,
        zeta_plus,
        zeta_minus,
        case,
        cross,
        delta_s,
        contained,
        wide_plus,
        wide_minus,
        contained_wide,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;
    use proptest::prelude::*;

    fn random(r: usize, c: usize, rng: &mut Rng) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.uniform(-1.0, 1.0))
    }

    fn scalar_loop_oracle(grads: &[Matrix]) -> f64 {
        let (r, c) = grads[0].shape();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..r {
            for j in 0..c {
                let mut sum = 0.0;
                for g in grads {
                    num += g.get(i, j) * g.get(i, j);
                    sum += g.get(i, j);
                }
                den += sum * sum;
            }
        }
        num / den
    }

    #[test]
    fn analytic_cases() {
        let g = Matrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 3.0]]).unwrap();
        for n in 1..6 {
            let ds = gradient_diversity(&vec![g.clone(); n]).unwrap();
            assert!((ds - 1.0 / n as f64).abs() < 1e-12);
        }
        let e = |i: usize| Matrix::from_fn(2, 2, |r, c| f64::from(r * 2 + c == i));
        let ds = gradient_diversity(&[e(0), e(1), e(2), e(3)]).unwrap();
        assert!((ds - 1.0).abs() < 1e-12);
        assert_eq!(
            gradient_diversity(&[g.clone(), g.scale(-1.0)]).unwrap(),
            f64::INFINITY
        );
        assert!(gradient_diversity(&[Matrix::zeros(2, 2)]).is_err());
        assert!(gradient_diversity(&[]).is_err());
    }

    #[test]
    fn matches_scalar_loops() {
        let mut rng = Rng::new(17, 0);
        let grads: Vec<Matrix> = (0..3).map(|_| random(4, 3, &mut rng)).collect();
        assert!((gradient_diversity(&grads).unwrap() - scalar_loop_oracle(&grads)).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_embeddings_pin_the_interval_to_one() {
        // rows of H1 live in span(e0, e1), rows of H2 in span(e2, e3)
        let h1 = Matrix::from_rows(&[vec![1.0, 0.5, 0.0, 0.0], vec![-0.3, 2.0, 0.0, 0.0]]).unwrap();
        let h2 = Matrix::from_rows(&[
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.2, -1.0],
            vec![0.0, 0.0, 3.0, 0.1],
        ])
        .unwrap();
        let a1 = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let a2 = Matrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        let mut rng = Rng::new(3, 0);
        for _ in 0..2 {
            let r = gdiv_lower_bound(
                &h1,
                &h2,
                &a1,
                &a2,
                &random(2, 5, &mut rng),
                &random(3, 5, &mut rng),
            )
            .unwrap();
            assert_eq!(r.cos_sq_sum, 0.0);
            assert_eq!((r.zeta_plus, r.zeta_minus), (1.0, 1.0));
            assert!((r.delta_s - 1.0).abs() < 1e-12);
            assert!(r.contained);
        }
    }

    #[test]
    fn zero_rows_are_excluded() {
        let h1 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let h2 = Matrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let a1 = Matrix::identity(2);
        let a2 = Matrix::identity(1);
        let dz1 = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let dz2 = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        let r = gdiv_lower_bound(&h1, &h2, &a1, &a2, &dz1, &dz2).unwrap();
        assert_eq!(r.excluded_rows, 1);
        let z = Matrix::zeros(1, 2);
        assert!(gdiv_lower_bound(&h1, &z, &a1, &a2, &dz1, &dz2).is_err());
    }

    proptest! {
        #[test]
        fn invariant_under_common_rotation(seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU) {
            let mut rng = Rng::new(seed, 0);
            let grads: Vec<Matrix> = (0..3).map(|_| random(3, 2, &mut rng)).collect();
            let rot = Matrix::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]]).unwrap();
            let rotated: Vec<Matrix> = grads.iter().map(|g| g.matmul(&rot).unwrap()).collect();
            let a = gradient_diversity(&grads).unwrap();
            let b = gradient_diversity(&rotated).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn cross_term_is_bounded_by_b(seed in any::<u64>(), n1 in 1usize..5, n2 in 1usize..5) {
            let mut rng = Rng::new(seed, 1);
            let (h1, h2) = (random(n1, 3, &mut rng), random(n2, 3, &mut rng));
            let (a1, a2) = (random(n1, n1, &mut rng), random(n2, n2, &mut rng));
            let (dz1, dz2) = (random(n1, 2, &mut rng), random(n2, 2, &mut rng));
            let r = gdiv_lower_bound(&h1, &h2, &a1, &a2, &dz1, &dz2).unwrap();
            prop_assert!(r.cross.abs() <= r.b * (1.0 + 1e-12));
            prop_assert!(r.contained_wide);
        }
    }
}
