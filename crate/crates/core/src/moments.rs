//! Joint central moments `E[∏ (ξ_{iₜ} - m x_{iₜ})]` of `ξ ~ Multinomial(m, x)`.
//!
//! Orders 2 and 3 have closed forms; order 4 is only available by
//! enumeration, together with the `|μ₄|/m²` scaling check.

use crate::error::{Error, Result};
use crate::simplex::{check_size, for_each_lattice, log_factorials_for, LogPoint, SimplexPoint};

/// Order `m`, point `x` and 2 to 4 coordinate indices (0-based, repeats
/// allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    m: u64,
    x: SimplexPoint,
    indices: Vec<usize>,
}

impl MomentQuery {
    pub fn new(m: u64, x: SimplexPoint, indices: Vec<usize>) -> Result<Self> {
        if !(2..=4).contains(&indices.len()) {
            return Err(Error::InvalidArgument(format!(
                "a moment needs 2 to 4 indices, got {}",
                indices.len()
            )));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= x.dim()) {
            return Err(Error::InvalidArgument(format!(
                "index {} outside 1..={}",
                i + 1,
                x.dim()
            )));
        }
        Ok(MomentQuery { m, x, indices })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn point(&self) -> &SimplexPoint {
        &self.x
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }
}

/// Closed forms for orders 2 and 3:
///
/// * `m (xᵢ1{i=j} - xᵢxⱼ)`
/// * `m (2xᵢxⱼxₗ - 1{i=j}xᵢxₗ - 1{j=l}xᵢxⱼ - 1{i=l}xⱼxₗ + 1{i=j=l}xᵢ)`
pub fn central_moment_analytic(q: &MomentQuery) -> Result<f64> {
    let x = q.x.coords();
    let m = q.m as f64;
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    match *q.indices.as_slice() {
        [i, j] => Ok(m * (x[i] * ind(i == j) - x[i] * x[j])),
        [i, j, l] => Ok(m
            * (2.0 * x[i] * x[j] * x[l]
                - ind(i == j) * x[i] * x[l]
                - ind(j == l) * x[i] * x[j]
                - ind(i == l) * x[j] * x[l]
                + ind(i == j && j == l) * x[i])),
        _ => Err(Error::Unsupported(format!(
            "no closed form for order {}; only the O(m²) bound is known, use enumeration",
            q.order()
        ))),
    }
}

/// Exact moment by summing over all `C(m+d, d)` outcomes.
pub fn central_moment_bruteforce(q: &MomentQuery) -> Result<f64> {
    let d = q.x.dim();
    check_size(q.m, d)?;
    let lp = LogPoint::new(&q.x);
    let lf = log_factorials_for(q.m);
    let mean: Vec<f64> = q.x.coords().iter().map(|&xi| q.m as f64 * xi).collect();
    let mut acc = 0.0;
    for_each_lattice(q.m, d, |k| {
        let p = lp.pmf(k, q.m, &lf);
        if p > 0.0 {
            let prod: f64 = q.indices.iter().map(|&i| k[i] as f64 - mean[i]).product();
            acc += prod * p;
        }
    });
    Ok(acc)
}

/// `|E[∏(ξ - m x)]| / m²` over `m_grid` for an order-4 index set.
pub fn fourth_moment_scaling(m_grid: &[u64], x: &SimplexPoint, indices: &[usize]) -> Result<Vec<f64>> {
    if indices.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "expected 4 indices, got {}",
            indices.len()
        )));
    }
    m_grid
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(Error::InvalidArgument("m must be at least 1".into()));
            }
            let q = MomentQuery::new(m, x.clone(), indices.to_vec())?;
            Ok(central_moment_bruteforce(&q)?.abs() / (m as f64).powi(2))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn q(m: u64, x: &[f64], idx: &[usize]) -> MomentQuery {
        MomentQuery::new(m, SimplexPoint::new(x.to_vec()).unwrap(), idx.to_vec()).unwrap()
    }

    #[test]
    fn hand_values() {
        let a = q(3, &[0.2, 0.3], &[0, 0]);
        assert_abs_diff_eq!(central_moment_analytic(&a).unwrap(), 0.48, epsilon = 1e-15);
        assert_abs_diff_eq!(central_moment_bruteforce(&a).unwrap(), 0.48, epsilon = 1e-12);
        let b = q(3, &[0.2, 0.3], &[0, 1]);
        assert_abs_diff_eq!(central_moment_analytic(&b).unwrap(), -0.18, epsilon = 1e-15);
        assert_abs_diff_eq!(central_moment_bruteforce(&b).unwrap(), -0.18, epsilon = 1e-12);
        assert_abs_diff_eq!(
            central_moment_analytic(&q(2, &[0.5], &[0, 0, 0])).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            central_moment_bruteforce(&q(2, &[0.5], &[0, 0, 0, 0])).unwrap(),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn order_four_has_no_closed_form() {
        let err = central_moment_analytic(&q(2, &[0.5], &[0, 0, 0, 0])).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        assert!(MomentQuery::new(2, SimplexPoint::new(vec![0.5]).unwrap(), vec![0]).is_err());
        assert!(MomentQuery::new(2, SimplexPoint::new(vec![0.5]).unwrap(), vec![0, 1]).is_err());
    }

    #[test]
    fn vertices_are_degenerate() {
        for x in [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]] {
            for idx in [vec![0, 1], vec![0, 0, 1], vec![1, 1, 1, 0]] {
                assert_eq!(central_moment_bruteforce(&q(5, &x, &idx)).unwrap(), 0.0);
            }
        }
        let s = fourth_moment_scaling(&[4, 8, 16], &SimplexPoint::new(vec![1.0]).unwrap(), &[0; 4]).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn binomial_fourth_moment() {
        // m p q (1 + 3 (m - 2) p q)
        for m in [4u64, 8, 16, 32] {
            let exact = m as f64 * 0.25 * (1.0 + 3.0 * (m as f64 - 2.0) * 0.25);
            assert_abs_diff_eq!(
                central_moment_bruteforce(&q(m, &[0.5], &[0; 4])).unwrap(),
                exact,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn covariance_is_positive_semidefinite() {
        for x in [vec![0.2, 0.3], vec![0.1, 0.5, 0.3], vec![0.33, 0.33, 0.33]] {
            let d = x.len();
            let cov: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| central_moment_bruteforce(&q(6, &x, &[i, j])).unwrap())
                        .collect()
                })
                .collect();
            // all leading principal minors ≥ 0 (up to rounding)
            assert!(cov[0][0] >= -1e-12);
            let det2 = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
            assert!(det2 >= -1e-12);
            if d == 3 {
                let c = &cov;
                let det3 = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
                    - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                    + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
                assert!(det3 >= -1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn permutations_leave_moments_unchanged(m in 1u64..7, a in 0.0f64..1.0, b in 0.0f64..1.0, i in 0usize..2, j in 0usize..2, l in 0usize..2) {
            let x = [a * (1.0 - b), b];
            let base = [i, j, l];
            let perms = [[i, j, l], [i, l, j], [j, i, l], [j, l, i], [l, i, j], [l, j, i]];
            let ref_a = central_moment_analytic(&q(m, &x, &base)).unwrap();
            let ref_b = central_moment_bruteforce(&q(m, &x, &base)).unwrap();
            for p in perms {
                prop_assert!((central_moment_analytic(&q(m, &x, &p)).unwrap() - ref_a).abs() < 1e-12);
                prop_assert!((central_moment_bruteforce(&q(m, &x, &p)).unwrap() - ref_b).abs() < 1e-12);
            }
        }

        #[test]
        fn closed_forms_match_enumeration(m in 1u64..7, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, idx in proptest::collection::vec(0usize..3, 2..4)) {
            let x1 = a;
            let x2 = b * (1.0 - x1);
            let x3 = c * (1.0 - x1 - x2);
            let x = SimplexPoint::with_tolerance(vec![x1, x2, x3], 1e-12).unwrap();
            let query = MomentQuery::new(m, x, idx).unwrap();
            let diff = central_moment_analytic(&query).unwrap() - central_moment_bruteforce(&query).unwrap();
            prop_assert!(diff.abs() < 1e-12);
        }
    }
}
