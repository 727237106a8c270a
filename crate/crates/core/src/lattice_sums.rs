//! Exact pmf power sums and min-coupling sums at finite `m`, next to their
//! large-`m` limits.
//!
//! * `m^{(d-|J|)/2} Σ_k P²_{k,m-1}(x) → ψ_{[d]∖J}(x) ∏_{i∈J} e^{-2λᵢ} I₀(2λᵢ)`.
//! * `Σ_{k,ℓ} ((k_p ∧ ℓ_p)/m - x_p) P_{k,m}(x) P_{ℓ,m}(x)` behaves like
//!   `-m⁻¹ λ_p e^{-2λ_p} (I₀ + I₁)(2λ_p)` for a boundary coordinate and
//!   `-m^{-1/2} √(x_p(1-x_p)/π)` for an interior one.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{psi_of, BoundaryProfile};
use crate::error::{Error, Result};
use crate::simplex::{binomial_pmfs, check_size, for_each_lattice, log_factorials_for, LogPoint, SimplexPoint};
use crate::special::{boundary_coupling_factor, boundary_variance_factor};

/// `Σ_{k ∈ N0^d ∩ (m-1)S_d} P_{k,m-1}(x)^power` for `power ∈ {2, 3}`.
///
/// The lattice is split by its first coordinate; partial sums are computed
/// in parallel and added in index order, so the result does not depend on
/// scheduling.
pub fn sum_pmf_power(m: u64, x: &SimplexPoint, power: u32) -> Result<f64> {
    if !(2..=3).contains(&power) {
        return Err(Error::InvalidArgument(format!("power must be 2 or 3, got {power}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let order = m - 1;
    let d = x.dim();
    check_size(order, d)?;
    let lp = LogPoint::new(x);
    let lf = log_factorials_for(order);
    let p = power as f64;
    let partials: Vec<f64> = (0..=order)
        .into_par_iter()
        .map(|k1| {
            let mut k = vec![0u32; d];
            k[0] = k1 as u32;
            let mut acc = 0.0;
            if d == 1 {
                acc += (p * lp.ln_pmf(&k, order, &lf)).exp();
            } else {
                for_each_lattice(order - k1, d - 1, |rest| {
                    k[1..].copy_from_slice(rest);
                    acc += (p * lp.ln_pmf(&k, order, &lf)).exp();
                });
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Limit of `m^{(d-|J|)/2} Σ_k P²_{k,m-1}(x)` for the profile.
pub fn square_sum_limit(profile: &BoundaryProfile) -> f64 {
    let psi = psi_of(profile.interior().map(|(_, x)| x)).expect("profile interior coordinates are valid for ψ");
    psi * profile
        .boundary()
        .map(|(_, l)| boundary_variance_factor(l))
        .product::<f64>()
}

/// Where coordinate `p` sits: fixed in `(0, 1)`, or at `λ/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingRole {
    Interior(f64),
    Boundary(f64),
}

impl CouplingRole {
    pub fn coordinate(&self, m: u64) -> f64 {
        match *self {
            CouplingRole::Interior(x) => x,
            CouplingRole::Boundary(lambda) => lambda / m as f64,
        }
    }

    pub fn of(profile: &BoundaryProfile, p: usize) -> Result<Self> {
        if p >= profile.dim() {
            return Err(Error::InvalidArgument(format!(
                "coordinate {} outside 1..={}",
                p + 1,
                profile.dim()
            )));
        }
        Ok(if profile.is_boundary(p) {
            CouplingRole::Boundary(profile.lambda_or_zero(p))
        } else {
            CouplingRole::Interior(profile.interior_or_zero(p))
        })
    }
}

/// `S(m) = Σ_{k,ℓ=0..m} ((k ∧ ℓ)/m - x_p) b(k) b(ℓ)` with `b` the
/// Binomial(m, x_p) pmf, which is all the multivariate sum depends on.
///
/// Uses `E[K ∧ L] = Σ_{t≥1} P(K ≥ t)²` for independent copies, so the cost
/// is `O(m)`.
pub fn min_coupling_sum(m: u64, role: CouplingRole) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let x = role.coordinate(m);
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x_p must lie in (0, 1), got {x}")));
    }
    let pmf = binomial_pmfs(m, x)?;
    let mut tail = 0.0;
    let mut acc = 0.0;
    for t in (1..=m as usize).rev() {
        tail += pmf[t];
        acc += tail * tail;
    }
    Ok(acc / m as f64 - x)
}

/// Leading behaviour of [`min_coupling_sum`] for coordinate `p` (0-based).
pub fn coupling_prediction(m: u64, profile: &BoundaryProfile, p: usize) -> Result<f64> {
    let mf = m as f64;
    Ok(match CouplingRole::of(profile, p)? {
        CouplingRole::Boundary(l) => -l * boundary_coupling_factor(l) / mf,
        CouplingRole::Interior(x) => -(x * (1.0 - x) / PI).sqrt() / mf.sqrt(),
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumDiagnostic {
    pub m: u64,
    pub exact: f64,
    /// `exact` times the power of `m` that makes it converge.
    pub scaled_exact: f64,
    pub prediction: f64,
    /// `|scaled_exact - prediction| / |prediction|`, or the absolute gap when
    /// the prediction is 0.
    pub rel_gap: f64,
}

impl SumDiagnostic {
    fn new(m: u64, exact: f64, scale: f64, prediction: f64) -> Self {
        let scaled_exact = exact * scale;
        let gap = (scaled_exact - prediction).abs();
        SumDiagnostic {
            m,
            exact,
            scaled_exact,
            prediction,
            rel_gap: if prediction == 0.0 { gap } else { gap / prediction.abs() },
        }
    }

    pub fn row(&self) -> DiagnosticRow {
        DiagnosticRow {
            m: self.m,
            scaled_exact: self.scaled_exact,
            prediction: self.prediction,
            rel_gap: self.rel_gap,
        }
    }
}

/// CSV layout of a diagnostic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub m: u64,
    pub scaled_exact: f64,
    pub prediction: f64,
    pub rel_gap: f64,
}

/// `Σ P²_{k,m-1}` at the profile realized at `m`, scaled by `m^{(d-|J|)/2}`.
pub fn square_sum_diagnostic(profile: &BoundaryProfile, m: u64) -> Result<SumDiagnostic> {
    let x = profile.point(m as f64)?;
    let exact = sum_pmf_power(m, &x, 2)?;
    let k = profile.dim() - profile.boundary_size();
    let scale = (m as f64).powf(k as f64 / 2.0);
    Ok(SumDiagnostic::new(m, exact, scale, square_sum_limit(profile)))
}

/// The min-coupling sum for coordinate `p` (0-based), scaled by `m` for a
/// boundary coordinate and by `m^{1/2}` for an interior one.
pub fn coupling_diagnostic(profile: &BoundaryProfile, p: usize, m: u64) -> Result<SumDiagnostic> {
    let role = CouplingRole::of(profile, p)?;
    let exact = min_coupling_sum(m, role)?;
    let mf = m as f64;
    let scale = match role {
        CouplingRole::Boundary(_) => mf,
        CouplingRole::Interior(_) => mf.sqrt(),
    };
    let prediction = coupling_prediction(m, profile, p)? * scale;
    Ok(SumDiagnostic::new(m, exact, scale, prediction))
}

pub fn write_diagnostics_csv<W: std::io::Write>(writer: W, rows: &[SumDiagnostic]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r.row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv<R: std::io::Read>(reader: R) -> Result<Vec<DiagnosticRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::pmf_table;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    /// Direct double sum over the binomial marginal.
    fn coupling_double_sum(m: u64, x: f64) -> f64 {
        let b = binomial_pmfs(m, x).unwrap();
        let mut acc = 0.0;
        for (k, bk) in b.iter().enumerate() {
            for (l, bl) in b.iter().enumerate() {
                acc += (k.min(l) as f64 / m as f64 - x) * bk * bl;
            }
        }
        acc
    }

    #[test]
    fn hand_enumerations() {
        assert_relative_eq!(sum_pmf_power(2, &pt(&[0.5]), 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(sum_pmf_power(3, &pt(&[0.5]), 2).unwrap(), 0.375, epsilon = 1e-15);
        assert_relative_eq!(sum_pmf_power(10, &pt(&[1.0, 0.0]), 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(sum_pmf_power(10, &pt(&[0.0, 0.0]), 3).unwrap(), 1.0, epsilon = 1e-15);
        assert!(sum_pmf_power(3, &pt(&[0.5]), 4).is_err());
    }

    #[test]
    fn power_sums_match_the_pmf_table() {
        let x = pt(&[0.2, 0.3, 0.1]);
        let table = pmf_table(11, &x, None).unwrap();
        let sq: f64 = table.probabilities().iter().map(|p| p * p).sum();
        assert_relative_eq!(sum_pmf_power(12, &x, 2).unwrap(), sq, max_relative = 1e-12);
    }

    #[test]
    fn limits_of_the_square_sum() {
        let interior = BoundaryProfile::new(1, vec![], vec![(0, 0.5)]).unwrap();
        assert_relative_eq!(square_sum_limit(&interior), 1.0 / PI.sqrt(), max_relative = 1e-14);
        let boundary = BoundaryProfile::new(1, vec![(0, 1.0)], vec![]).unwrap();
        assert_relative_eq!(square_sum_limit(&boundary), 0.308_508_322_553_671, max_relative = 1e-12);
        let mixed = BoundaryProfile::new(2, vec![(1, 0.0)], vec![(0, 0.5)]).unwrap();
        assert_relative_eq!(square_sum_limit(&mixed), 0.564_189_583_547_756_3, max_relative = 1e-12);
    }

    #[test]
    fn coupling_matches_double_sum() {
        for m in [1u64, 2, 5, 17, 60] {
            for x in [0.05, 0.25, 0.5, 0.9] {
                assert_relative_eq!(
                    min_coupling_sum(m, CouplingRole::Interior(x)).unwrap(),
                    coupling_double_sum(m, x),
                    epsilon = 1e-12
                );
            }
        }
        // min of two Bernoulli(x) is Bernoulli(x²)
        let x = 0.3;
        assert_relative_eq!(
            min_coupling_sum(1, CouplingRole::Interior(x)).unwrap(),
            -x * (1.0 - x),
            epsilon = 1e-15
        );
    }

    #[test]
    fn coupling_predictions() {
        let p = BoundaryProfile::new(2, vec![(0, 0.0)], vec![(1, 0.5)]).unwrap();
        assert_eq!(coupling_prediction(100, &p, 0).unwrap(), 0.0);
        assert_relative_eq!(
            coupling_prediction(100, &p, 1).unwrap(),
            -0.1 / (2.0 * PI.sqrt()),
            max_relative = 1e-14
        );
        let b = BoundaryProfile::new(1, vec![(0, 1.0)], vec![]).unwrap();
        assert_relative_eq!(
            coupling_prediction(10, &b, 0).unwrap(),
            -0.052_377_761_180_260_87,
            max_relative = 1e-12
        );
    }

    #[test]
    fn diagnostics_converge() {
        let p = BoundaryProfile::new(1, vec![], vec![(0, 0.5)]).unwrap();
        let a = square_sum_diagnostic(&p, 50).unwrap();
        let b = square_sum_diagnostic(&p, 400).unwrap();
        assert!(b.rel_gap < a.rel_gap);
        let q = BoundaryProfile::new(2, vec![(0, 2.0)], vec![(1, 0.4)]).unwrap();
        let a = square_sum_diagnostic(&q, 50).unwrap();
        let b = square_sum_diagnostic(&q, 400).unwrap();
        assert!(b.rel_gap < a.rel_gap, "{a:?} {b:?}");
    }

    #[test]
    fn cube_sum_rate_is_bounded() {
        for (profile, k) in [
            (BoundaryProfile::new(1, vec![], vec![(0, 0.3)]).unwrap(), 1),
            (BoundaryProfile::new(1, vec![(0, 1.0)], vec![]).unwrap(), 0),
            (BoundaryProfile::new(2, vec![], vec![(0, 0.3), (1, 0.3)]).unwrap(), 2),
        ] {
            let scaled: Vec<f64> = [50u64, 100, 200, 400]
                .iter()
                .map(|&m| sum_pmf_power(m, &profile.point(m as f64).unwrap(), 3).unwrap() * (m as f64).powi(k))
                .collect();
            let (lo, hi) = scaled
                .iter()
                .fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            assert!(hi / lo < 1.2, "{scaled:?}");
        }
    }

    #[test]
    fn diagnostic_csv_round_trip() {
        let p = BoundaryProfile::new(1, vec![(0, 1.0)], vec![]).unwrap();
        let rows: Vec<SumDiagnostic> = [10u64, 20, 40]
            .iter()
            .map(|&m| coupling_diagnostic(&p, 0, m).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, &rows).unwrap();
        assert!(std::str::from_utf8(&buf)
            .unwrap()
            .starts_with("m,scaled_exact,prediction,rel_gap\n"));
        let back = read_diagnostics_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows.iter().map(SumDiagnostic::row).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn power_sums_are_ordered(m in 1u64..40, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let x = pt(&[a * (1.0 - b), b * 0.999]);
            let s2 = sum_pmf_power(m, &x, 2).unwrap();
            let s3 = sum_pmf_power(m, &x, 3).unwrap();
            prop_assert!(s3 <= s2 * (1.0 + 1e-12));
            prop_assert!(s2 <= 1.0 + 1e-12 && s3 > 0.0);
        }

        #[test]
        fn coupling_sum_is_nonpositive(m in 1u64..300, x in 0.001f64..0.999) {
            prop_assert!(min_coupling_sum(m, CouplingRole::Interior(x)).unwrap() <= 1e-15);
        }
    }
}
