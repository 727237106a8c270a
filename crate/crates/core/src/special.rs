//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Only direct power-series summation is provided. Arguments in this crate
//! are `2λ` for a fixed boundary parameter `λ` (in practice `λ ≤ 20`), where
//! the series converges quickly and all terms are positive.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default relative truncation tolerance for [`bessel_i`].
pub const DEFAULT_TOL: f64 = 1e-14;

const MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn nu(self) -> u32 {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(nu: u32) -> Result<Self> {
        match nu {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            other => Err(Error::Domain(format!("only orders 0 and 1 are supported, got {other}"))),
        }
    }
}

/// Result of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselValue {
    pub order: BesselOrder,
    pub argument: f64,
    pub value: f64,
    pub terms_used: usize,
    /// Bound on the neglected tail of the series.
    pub remainder_bound: f64,
}

/// `I_ν(z) = Σ_k (z/2)^{2k+ν} / (k! (k+ν)!)` for `ν ∈ {0, 1}`, `z ≥ 0`.
///
/// Summation stops once the next term drops below `tol` times the partial
/// sum. The ratio of consecutive terms is `(z/2)² / ((k+1)(k+1+ν))`, which
/// decreases in `k`, so once it is below one the tail is bounded by a
/// geometric series; that bound is reported in `remainder_bound`.
pub fn bessel_i(order: BesselOrder, z: f64, tol: f64) -> Result<BesselValue> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!(
            "argument must be finite and non-negative, got {z}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let nu = order.nu() as f64;
    let q = 0.25 * z * z;

    let mut term = if order == BesselOrder::Zero { 1.0 } else { 0.5 * z };
    let mut sum = term;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let ratio = q / ((kf + 1.0) * (kf + 1.0 + nu));
        let next = term * ratio;
        // ratio is decreasing in k, so the tail after `term` is at most
        // next / (1 - ratio) once ratio < 1.
        if ratio < 1.0 && next <= tol * sum {
            let remainder_bound = if next == 0.0 { 0.0 } else { next / (1.0 - ratio) };
            return Ok(BesselValue {
                order,
                argument: z,
                value: sum,
                terms_used: k + 1,
                remainder_bound,
            });
        }
        if k >= MAX_TERMS {
            return Err(Error::Domain(format!("series for z = {z} did not converge")));
        }
        term = next;
        sum += term;
        k += 1;
    }
}

pub fn bessel_i0(z: f64) -> f64 {
    bessel_i(BesselOrder::Zero, z, DEFAULT_TOL)
        .expect("I0 requires a finite non-negative argument")
        .value
}

pub fn bessel_i1(z: f64) -> f64 {
    bessel_i(BesselOrder::One, z, DEFAULT_TOL)
        .expect("I1 requires a finite non-negative argument")
        .value
}

/// `e^{-2λ} I₀(2λ)`, the per-coordinate boundary factor of the density
/// variance and of the limit of `Σ P²`.
pub fn boundary_variance_factor(lambda: f64) -> f64 {
    (-2.0 * lambda).exp() * bessel_i0(2.0 * lambda)
}

/// `e^{-2λ} (I₀(2λ) + I₁(2λ))`, which enters the CDF variance near the
/// boundary and the min-coupling sum.
pub fn boundary_coupling_factor(lambda: f64) -> f64 {
    (-2.0 * lambda).exp() * (bessel_i0(2.0 * lambda) + bessel_i1(2.0 * lambda))
}
