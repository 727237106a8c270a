//! Closed-form leading terms of the bias, variance and MSE of both
//! estimators, at interior points and near the boundary of `S_d`.
//!
//! A [`BoundaryProfile`] splits the coordinates into a boundary set `J`,
//! where `xᵢ = λᵢ/m`, and interior coordinates held fixed. Derivatives "at
//! `x_J = 0`" are the model's derivatives at the slice point returned by
//! [`BoundaryProfile::slice`], so models must be defined on the closed
//! simplex. Remainder orders are reported as strings and never enter the
//! returned values.

mod model;
mod profile;
mod report;

pub use model::{integrate_simplex, DensityModel, FiniteDifferenceCheck, Matrix};
pub use profile::{BoundaryProfile, ProfileSpec};
pub use report::{BiasExpansion, EstimatorKind, ExpansionReport, MOpt, VarianceExpansion};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::special::{boundary_coupling_factor, boundary_variance_factor};

/// Tolerance of the shoulder-condition check.
pub const SHOULDER_TOLERANCE: f64 = 1e-8;

/// `ψ_A(x) = [(4π)^{|A|} (1 - Σ_{i∈A} xᵢ) ∏_{i∈A} xᵢ]^{-1/2}`, with `ψ_∅ = 1`.
/// `set` holds 0-based coordinate indices.
pub fn psi(x: &SimplexPoint, set: &[usize]) -> Result<f64> {
    let mut seen = vec![false; x.dim()];
    for &i in set {
        if i >= x.dim() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!(
                "index set must hold distinct coordinates in 1..={}",
                x.dim()
            )));
        }
    }
    psi_of(set.iter().map(|&i| x.coords()[i]))
}

pub(crate) fn psi_of<I: IntoIterator<Item = f64>>(values: I) -> Result<f64> {
    let mut count = 0i32;
    let mut sum = 0.0;
    let mut prod = 1.0;
    for v in values {
        count += 1;
        sum += v;
        prod *= v;
    }
    if count == 0 {
        return Ok(1.0);
    }
    let base = (4.0 * PI).powi(count) * (1.0 - sum) * prod;
    if base.is_nan() || base <= 0.0 {
        return Err(Error::Domain(format!(
            "ψ needs positive coordinates summing to less than 1 (product term {base})"
        )));
    }
    Ok(base.powf(-0.5))
}

struct DensityDerivatives {
    g: Vec<f64>,
    h: Matrix,
}

fn check_model_dim(model: &dyn DensityModel, d: usize) -> Result<()> {
    if model.dim() == d {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: d,
        })
    }
}

fn finite_or(values: impl IntoIterator<Item = f64>, what: impl FnOnce() -> String) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

fn density_derivatives(model: &dyn DensityModel, at: &[f64]) -> Result<DensityDerivatives> {
    let f = model.density(at);
    let g = model.gradient(at);
    let h = model.hessian(at);
    finite_or(
        std::iter::once(f)
            .chain(g.iter().copied())
            .chain(h.iter().flatten().copied()),
        || format!("{} or its derivatives are not finite at {at:?}", model.name()),
    )?;
    Ok(DensityDerivatives { g, h })
}

/// Both bias brackets for a point with slice coordinates `s` (boundary
/// coordinates already zeroed), boundary parameters `lambda` (0 off `J`),
/// and membership `in_j`. With `J = ∅` these are exactly `Δ₁(s)` and
/// `Δ₂(s)`; with `J = [d]` they are the two brackets of the boundary
/// expansion at the origin.
///
/// The `m⁻²` bracket collects `Δ₂` at the slice together with the `m⁻²`
/// contributions of `Δ₁` at `xᵢ = λᵢ/m` after expanding `∂ᵢf` to first order
/// around the slice.
fn bias_brackets(g: &[f64], h: &Matrix, s: &[f64], lambda: &[f64], in_j: &[bool]) -> (f64, f64) {
    let d = g.len();
    let c = |i: usize, j: usize| if i == j { 1.0 / 6.0 } else { 1.0 / 8.0 };

    let mut b1 = 0.0;
    for i in 0..d {
        b1 += (0.5 - s[i]) * g[i];
    }
    let mut quad = 0.0;
    for i in (0..d).filter(|&i| !in_j[i]) {
        for j in (0..d).filter(|&j| !in_j[j]) {
            let delta = if i == j { s[i] } else { 0.0 };
            quad += (delta - s[i] * s[j]) * h[i][j];
        }
    }
    b1 += 0.5 * quad;

    let mut b2 = 0.0;
    for i in (0..d).filter(|&i| in_j[i]) {
        b2 -= lambda[i] * g[i];
        b2 += 0.5 * lambda[i] * h[i][i];
        for j in (0..d).filter(|&j| !in_j[j]) {
            b2 -= lambda[i] * s[j] * h[i][j];
        }
    }
    for i in 0..d {
        for j in (0..d).filter(|&j| in_j[j]) {
            b2 += (0.5 - s[i]) * lambda[j] * h[i][j];
        }
    }
    for i in 0..d {
        for j in 0..d {
            if in_j[i] || in_j[j] {
                b2 += c(i, j) * h[i][j];
            } else {
                let diag = if i == j { 0.5 * s[i] } else { 0.0 };
                b2 += (c(i, j) - diag - 0.5 * s[j] + s[i] * s[j]) * h[i][j];
            }
        }
    }
    (b1, b2)
}

fn membership(profile: &BoundaryProfile) -> (Vec<f64>, Vec<bool>) {
    let d = profile.dim();
    let lambda = (0..d).map(|i| profile.lambda_or_zero(i)).collect();
    let in_j = (0..d).map(|i| profile.is_boundary(i)).collect();
    (lambda, in_j)
}

fn is_full(profile: &BoundaryProfile) -> bool {
    profile.boundary_size() == profile.dim()
}

fn check_order(m: u64, n: u64) -> Result<()> {
    if m == 0 || n == 0 {
        Err(Error::InvalidArgument(format!(
            "m and n must be at least 1, got m = {m}, n = {n}"
        )))
    } else {
        Ok(())
    }
}

/// `(Δ₁(x), Δ₂(x))`, the `m⁻¹` and `m⁻²` bias coefficients of the density
/// estimator at any `x ∈ S_d`.
pub fn density_bias_terms(model: &dyn DensityModel, x: &SimplexPoint) -> Result<(f64, f64)> {
    check_model_dim(model, x.dim())?;
    let dv = density_derivatives(model, x.coords())?;
    let d = x.dim();
    Ok(bias_brackets(&dv.g, &dv.h, x.coords(), &vec![0.0; d], &vec![false; d]))
}

/// Density bias near the boundary: the `m⁻¹` bracket (derivatives at
/// `x_J = 0`) and the `m⁻²` bracket, with `value = m1/m + m2/m²`.
///
/// For `J = ∅` this is `Δ₁/m + Δ₂/m²` at the interior point, computed by
/// the same arithmetic as [`density_bias_terms`].
pub fn density_bias_boundary(model: &dyn DensityModel, profile: &BoundaryProfile, m: u64) -> Result<BiasExpansion> {
    check_model_dim(model, profile.dim())?;
    check_order(m, 1)?;
    let s = profile.slice();
    let dv = density_derivatives(model, &s)?;
    let (lambda, in_j) = membership(profile);
    let (b1, b2) = bias_brackets(&dv.g, &dv.h, &s, &lambda, &in_j);
    Ok(BiasExpansion::new(b1, b2, m as f64, density_bias_order(profile)))
}

fn density_bias_order(profile: &BoundaryProfile) -> String {
    if is_full(profile) {
        "o(m^-2)".into()
    } else {
        "o(m^-1)".into()
    }
}

/// `f|_{x_J=0} · ψ_{[d]∖J}(x) · ∏_{i∈J} e^{-2λᵢ} I₀(2λᵢ)`, the coefficient of
/// `n⁻¹ m^{(d+|J|)/2}` in the density variance.
pub fn density_variance_coefficient(model: &dyn DensityModel, profile: &BoundaryProfile) -> Result<f64> {
    check_model_dim(model, profile.dim())?;
    let f = model.density(&profile.slice());
    finite_or([f], || format!("{} is not finite at x_J = 0", model.name()))?;
    let psi = psi_of(profile.interior().map(|(_, x)| x))?;
    let bessel: f64 = profile.boundary().map(|(_, l)| boundary_variance_factor(l)).product();
    Ok(f * psi * bessel)
}

fn variance_exponent(profile: &BoundaryProfile) -> f64 {
    (profile.dim() + profile.boundary_size()) as f64 / 2.0
}

fn density_variance_order(profile: &BoundaryProfile) -> String {
    let big_d = profile.dim() + profile.boundary_size();
    let inner = if is_full(profile) { "O(m^-1)" } else { "O(m^-1) + o(1)" };
    format!("n^-1 m^({big_d}/2) [{inner}]")
}

/// `n⁻¹ m^{(d+|J|)/2} f|_{x_J=0} ψ_{[d]∖J}(x) ∏_{i∈J} e^{-2λᵢ} I₀(2λᵢ)`.
pub fn density_variance_leading(
    model: &dyn DensityModel,
    profile: &BoundaryProfile,
    m: u64,
    n: u64,
) -> Result<VarianceExpansion> {
    check_order(m, n)?;
    let coefficient = density_variance_coefficient(model, profile)?;
    Ok(VarianceExpansion {
        value: coefficient * (m as f64).powf(variance_exponent(profile)) / n as f64,
        order: density_variance_order(profile),
    })
}

/// `MSE(m) = V m^a / n + B² m^{-2q}` over real `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTermMse {
    pub variance_coefficient: f64,
    pub variance_exponent: f64,
    pub bias_coefficient: f64,
    pub bias_power: f64,
}

impl TwoTermMse {
    pub fn eval(&self, m: f64, n: f64) -> f64 {
        self.variance_coefficient * m.powf(self.variance_exponent) / n
            + self.bias_coefficient.powi(2) * m.powf(-2.0 * self.bias_power)
    }

    /// Stationary point `m = (2q B² n / (a V))^{1/(a + 2q)}`, which exists
    /// only when both coefficients are non-zero.
    pub fn minimizer(&self, n: f64) -> std::result::Result<f64, &'static str> {
        if self.bias_coefficient == 0.0 {
            return Err("none (zero bias bracket)");
        }
        if self.variance_coefficient.is_nan() || self.variance_coefficient <= 0.0 {
            return Err("none (zero variance coefficient)");
        }
        let a = self.variance_exponent;
        let q = self.bias_power;
        let base = 2.0 * q * self.bias_coefficient.powi(2) * n / (a * self.variance_coefficient);
        Ok(base.powf(1.0 / (a + 2.0 * q)))
    }
}

/// Optimal order with the MSE attained there.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalOrder {
    pub m_opt: MOpt,
    pub mse_at_m_opt: Option<f64>,
}

impl OptimalOrder {
    fn from_mse(mse: &TwoTermMse, n: f64) -> Self {
        match mse.minimizer(n) {
            Ok(m) => OptimalOrder {
                m_opt: MOpt::Value(m),
                mse_at_m_opt: Some(mse.eval(m, n)),
            },
            Err(reason) => OptimalOrder {
                m_opt: MOpt::None(reason.into()),
                mse_at_m_opt: None,
            },
        }
    }

    fn none(reason: &str) -> Self {
        OptimalOrder {
            m_opt: MOpt::None(reason.into()),
            mse_at_m_opt: None,
        }
    }
}

/// The two-term density MSE: leading variance plus the squared `m⁻¹`
/// bias bracket.
pub fn density_two_term(model: &dyn DensityModel, profile: &BoundaryProfile) -> Result<TwoTermMse> {
    let bias = density_bias_boundary(model, profile, 1)?;
    Ok(TwoTermMse {
        variance_coefficient: density_variance_coefficient(model, profile)?,
        variance_exponent: variance_exponent(profile),
        bias_coefficient: bias.m1,
        bias_power: 1.0,
    })
}

/// `m_opt = n^{2/(D+4)} |B|^{4/(D+4)} / ((D/4) V)^{2/(D+4)}` with `D = d + |J|`,
/// `B` the `m⁻¹` bias bracket and `V` the variance coefficient. The absolute
/// value of `B` is used because the MSE depends on `B²` only.
pub fn density_m_opt(model: &dyn DensityModel, profile: &BoundaryProfile, n: u64) -> Result<OptimalOrder> {
    check_order(1, n)?;
    Ok(OptimalOrder::from_mse(&density_two_term(model, profile)?, n as f64))
}

fn density_mse_orders(profile: &BoundaryProfile) -> BTreeMap<String, String> {
    let full = is_full(profile);
    let big_d = profile.dim() + profile.boundary_size();
    let var = density_variance_order(profile);
    let mut orders = BTreeMap::new();
    orders.insert("bias".to_string(), density_bias_order(profile));
    orders.insert("variance".to_string(), var.clone());
    orders.insert(
        "mse".to_string(),
        if full {
            format!("{var} + O(m^-3)")
        } else {
            format!("{var} + O(m^-3) + o(m^-2)")
        },
    );
    orders.insert(
        "mse_at_m_opt".to_string(),
        if full {
            format!("O(n^(-6/{}))", big_d + 4)
        } else {
            format!("O(n^(-5/{0})) + o(n^(-4/{0}))", big_d + 4)
        },
    );
    orders
}

/// Density MSE from the squared `m⁻¹` bias bracket and the leading
/// variance, with the optimal order when the bracket is non-zero.
pub fn density_mse(model: &dyn DensityModel, profile: &BoundaryProfile, m: u64, n: u64) -> Result<ExpansionReport> {
    check_order(m, n)?;
    let bias = density_bias_boundary(model, profile, m)?;
    let var = density_variance_leading(model, profile, m, n)?;
    let opt = density_m_opt(model, profile, n)?;
    let mf = m as f64;
    Ok(ExpansionReport {
        estimator: EstimatorKind::Density,
        model: model.name(),
        profile: profile.clone(),
        m: mf,
        n: n as f64,
        bias_m1: bias.m1,
        bias_m2: bias.m2,
        bias: bias.value,
        var_leading: var.value,
        mse: var.value + (bias.m1 / mf).powi(2),
        m_opt: opt.m_opt,
        mse_at_m_opt: opt.mse_at_m_opt,
        error_orders: density_mse_orders(profile),
        notes: vec!["mse keeps the squared m^-1 bias bracket only; bias includes both brackets".into()],
    })
}

/// Verifies `∂ᵢf = 0` for all `i` and `∂ᵢⱼf = 0` for `i, j ∉ J` at
/// `x_J = 0`, within [`SHOULDER_TOLERANCE`].
pub fn check_shoulder(model: &dyn DensityModel, profile: &BoundaryProfile) -> Result<()> {
    check_model_dim(model, profile.dim())?;
    let s = profile.slice();
    let dv = density_derivatives(model, &s)?;
    for (i, &gi) in dv.g.iter().enumerate() {
        if gi.abs() > SHOULDER_TOLERANCE {
            return Err(Error::Precondition(format!(
                "shoulder condition fails: ∂{}f = {gi:e} at x_J = 0",
                i + 1
            )));
        }
    }
    let interior = profile.interior_indices();
    for &i in &interior {
        for &j in &interior {
            let v = dv.h[i][j];
            if v.abs() > SHOULDER_TOLERANCE {
                return Err(Error::Precondition(format!(
                    "shoulder condition fails: ∂{}∂{}f = {v:e} at x_J = 0",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// `Σ_{(i,j) ∈ [d]² ∖ ([d]∖J)²} ((1/6 + λᵢ) 1{i=j} + (1/8 + λⱼ/2) 1{i≠j}) ∂ᵢⱼf|_{x_J=0}`.
fn shoulder_bracket(h: &Matrix, lambda: &[f64], in_j: &[bool]) -> f64 {
    let d = lambda.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if !(in_j[i] || in_j[j]) {
                continue;
            }
            let w = if i == j {
                1.0 / 6.0 + lambda[i]
            } else {
                1.0 / 8.0 + 0.5 * lambda[j]
            };
            acc += w * h[i][j];
        }
    }
    acc
}

/// Two-term MSE under the shoulder condition: leading variance plus
/// `m⁻⁴ C²` with `C` the shoulder bracket.
pub fn density_two_term_shoulder(model: &dyn DensityModel, profile: &BoundaryProfile) -> Result<TwoTermMse> {
    check_shoulder(model, profile)?;
    let dv = density_derivatives(model, &profile.slice())?;
    let (lambda, in_j) = membership(profile);
    Ok(TwoTermMse {
        variance_coefficient: density_variance_coefficient(model, profile)?,
        variance_exponent: variance_exponent(profile),
        bias_coefficient: shoulder_bracket(&dv.h, &lambda, &in_j),
        bias_power: 2.0,
    })
}

/// `m_opt = n^{1/(d+4)} |C|^{2/(d+4)} / ((d/4) f(0) ∏ e^{-2λᵢ} I₀(2λᵢ))^{1/(d+4)}`,
/// available only for `J = [d]`; otherwise the remainder dominates the
/// leading terms and no optimum is reported.
pub fn density_m_opt_shoulder(model: &dyn DensityModel, profile: &BoundaryProfile, n: u64) -> Result<OptimalOrder> {
    check_order(1, n)?;
    let mse = density_two_term_shoulder(model, profile)?;
    if !is_full(profile) {
        return Ok(OptimalOrder::none("none (requires J = [d])"));
    }
    Ok(OptimalOrder::from_mse(&mse, n as f64))
}

pub fn density_mse_shoulder(
    model: &dyn DensityModel,
    profile: &BoundaryProfile,
    m: u64,
    n: u64,
) -> Result<ExpansionReport> {
    check_order(m, n)?;
    let mse = density_two_term_shoulder(model, profile)?;
    let opt = density_m_opt_shoulder(model, profile, n)?;
    let var = density_variance_leading(model, profile, m, n)?;
    let mf = m as f64;
    let c = mse.bias_coefficient;
    let full = is_full(profile);
    let var_order = density_variance_order(profile);
    let mut orders = BTreeMap::new();
    orders.insert("bias".to_string(), if full { "o(m^-2)" } else { "o(m^-1)" }.to_string());
    orders.insert("variance".to_string(), var_order.clone());
    orders.insert(
        "mse".to_string(),
        if full {
            format!("{var_order} + o(m^-4)")
        } else {
            format!("{var_order} + o(m^-3)")
        },
    );
    if full {
        orders.insert("mse_at_m_opt".to_string(), format!("o(n^(-4/{}))", profile.dim() + 4));
    }
    Ok(ExpansionReport {
        estimator: EstimatorKind::Density,
        model: model.name(),
        profile: profile.clone(),
        m: mf,
        n: n as f64,
        bias_m1: 0.0,
        bias_m2: c,
        bias: c / (mf * mf),
        var_leading: var.value,
        mse: var.value + (c / (mf * mf)).powi(2),
        m_opt: opt.m_opt,
        mse_at_m_opt: opt.mse_at_m_opt,
        error_orders: orders,
        notes: vec!["shoulder condition verified; the m^-1 bias bracket vanishes".into()],
    })
}

struct CdfDerivatives {
    value: f64,
    gradient: Vec<f64>,
    hessian: Matrix,
}

fn cdf_derivatives(model: &dyn DensityModel, at: &[f64]) -> Result<CdfDerivatives> {
    let missing = || Error::Precondition(format!("model {} does not supply a CDF", model.name()));
    let value = model.cdf(at).ok_or_else(missing)?;
    let gradient = model.cdf_gradient(at).ok_or_else(missing)?;
    let hessian = model.cdf_hessian(at).ok_or_else(missing)?;
    finite_or(
        std::iter::once(value)
            .chain(gradient.iter().copied())
            .chain(hessian.iter().flatten().copied()),
        || format!("CDF of {} or its derivatives are not finite at {at:?}", model.name()),
    )?;
    Ok(CdfDerivatives {
        value,
        gradient,
        hessian,
    })
}

fn cdf_bias_order(profile: &BoundaryProfile) -> String {
    if is_full(profile) {
        "O(m^-3)".into()
    } else {
        "O(m^-3) + o(m^-3/2)".into()
    }
}

fn cdf_variance_order(profile: &BoundaryProfile) -> String {
    if is_full(profile) {
        "O(n^-1 m^-2)".into()
    } else {
        "O(n^-1 m^-2) + o(n^-1 m^-1/2)".into()
    }
}

/// CDF bias near the boundary:
/// `(2m)⁻¹ Σ_{i,j∉J} (xᵢ1{i=j} - xᵢxⱼ) ∂ᵢⱼF|_{x_J=0} + (2m²)⁻¹ Σᵢ λᵢ ∂ᵢᵢF|_{x=0}`,
/// with `λᵢ = 0` off `J`. A boundary coordinate with `λᵢ = 0` puts `x` on a
/// face where the estimator is 0 almost surely, and the bias is exactly 0.
pub fn cdf_bias_boundary(model: &dyn DensityModel, profile: &BoundaryProfile, m: u64) -> Result<BiasExpansion> {
    check_model_dim(model, profile.dim())?;
    check_order(m, 1)?;
    if profile.touches_boundary() {
        return Ok(BiasExpansion::zero("exact".into()));
    }
    let s = profile.slice();
    let at_slice = cdf_derivatives(model, &s)?;
    let interior = profile.interior_indices();
    let mut m1 = 0.0;
    for &i in &interior {
        for &j in &interior {
            let delta = if i == j { s[i] } else { 0.0 };
            m1 += (delta - s[i] * s[j]) * at_slice.hessian[i][j];
        }
    }
    let mut m2 = 0.0;
    if profile.boundary_size() > 0 {
        let at_origin = cdf_derivatives(model, &vec![0.0; profile.dim()])?;
        for (i, lambda) in profile.boundary() {
            m2 += lambda * at_origin.hessian[i][i];
        }
    }
    Ok(BiasExpansion::new(
        0.5 * m1,
        0.5 * m2,
        m as f64,
        cdf_bias_order(profile),
    ))
}

/// CDF variance near the boundary:
/// `n⁻¹m⁻¹ Σᵢ ∂ᵢF|_{x_J=0} {λᵢ(1 - e^{-2λᵢ}(I₀+I₁)(2λᵢ)) 1{i∈J} - m^{1/2} √(xᵢ(1-xᵢ)/π) 1{i∉J}}
/// + n⁻¹ F(x)(1 - F(x)) 1{J=∅}`, exactly 0 when some `λᵢ = 0`.
pub fn cdf_variance_boundary(
    model: &dyn DensityModel,
    profile: &BoundaryProfile,
    m: u64,
    n: u64,
) -> Result<VarianceExpansion> {
    check_model_dim(model, profile.dim())?;
    check_order(m, n)?;
    if profile.touches_boundary() {
        return Ok(VarianceExpansion {
            value: 0.0,
            order: "exact".into(),
        });
    }
    let s = profile.slice();
    let dv = cdf_derivatives(model, &s)?;
    let (mf, nf) = (m as f64, n as f64);
    let mut acc = 0.0;
    for (i, &si) in s.iter().enumerate() {
        let factor = if profile.is_boundary(i) {
            let l = profile.lambda_or_zero(i);
            l * (1.0 - boundary_coupling_factor(l))
        } else {
            -mf.sqrt() * (si * (1.0 - si) / PI).sqrt()
        };
        acc += dv.gradient[i] * factor;
    }
    let mut value = acc / (nf * mf);
    if profile.boundary_size() == 0 {
        value += dv.value * (1.0 - dv.value) / nf;
    }
    Ok(VarianceExpansion {
        value,
        order: cdf_variance_order(profile),
    })
}

/// CDF MSE as leading variance plus squared leading bias. There is no
/// finite optimal `m` near the boundary; the interior optimum is not
/// covered here.
pub fn cdf_mse(model: &dyn DensityModel, profile: &BoundaryProfile, m: u64, n: u64) -> Result<ExpansionReport> {
    let bias = cdf_bias_boundary(model, profile, m)?;
    let var = cdf_variance_boundary(model, profile, m, n)?;
    let degenerate = profile.touches_boundary();
    let mut orders = BTreeMap::new();
    let mut notes = Vec::new();
    let m_opt = if profile.boundary_size() == 0 {
        notes.push("interior case: see prior work".to_string());
        MOpt::None("interior case: see prior work".into())
    } else {
        MOpt::None("none".into())
    };
    if degenerate {
        notes.push("x lies on a face where the estimator is 0 almost surely".to_string());
        orders.insert("mse".to_string(), "exact".to_string());
    } else {
        let rest = if is_full(profile) {
            "O(m^-4)"
        } else {
            "O(m^-4) + o(m^-5/2)"
        };
        orders.insert("mse".to_string(), format!("{} + {rest}", cdf_variance_order(profile)));
    }
    orders.insert("bias".to_string(), bias.order.clone());
    orders.insert("variance".to_string(), var.order.clone());
    Ok(ExpansionReport {
        estimator: EstimatorKind::Cdf,
        model: model.name(),
        profile: profile.clone(),
        m: m as f64,
        n: n as f64,
        bias_m1: bias.m1,
        bias_m2: bias.m2,
        bias: bias.value,
        var_leading: var.value,
        mse: if degenerate {
            0.0
        } else {
            var.value + bias.value * bias.value
        },
        m_opt,
        mse_at_m_opt: None,
        error_orders: orders,
        notes,
    })
}
