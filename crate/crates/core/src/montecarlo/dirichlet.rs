use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::asymptotics::{DensityModel, Matrix};
use crate::error::{Error, Result};

/// Dirichlet density on `S_d` with parameters `α = (α₁, …, α_{d+1})`:
///
/// `f(x) = Γ(Σα) / ∏Γ(αᵢ) · ∏_{i≤d} xᵢ^{αᵢ-1} · (1 - ‖x‖₁)^{α_{d+1}-1}`.
///
/// Integer `αᵢ ≥ 1` give a polynomial density whose derivatives are finite
/// on the closed simplex. Non-integer parameters below 3 make some
/// derivatives blow up on the boundary; the expansions then refuse such
/// boundary profiles because the derivatives come back non-finite.
///
/// For `d = 1` the model also supplies the CDF `F(x) = I_x(α₁, α₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletModel {
    alpha: Vec<f64>,
    ln_norm: f64,
}

impl DirichletModel {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet needs d + 1 ≥ 2 parameters, got {}",
                alpha.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet parameters must be positive, got {a}"
            )));
        }
        let total: f64 = alpha.iter().sum();
        let ln_norm = ln_gamma(total) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
        Ok(DirichletModel { alpha, ln_norm })
    }

    /// The uniform density `d!` on `S_d`.
    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![1.0; d + 1])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    fn d(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Factors `u_c`: the coordinates, then the remainder `1 - ‖x‖₁`.
    fn factors(&self, x: &[f64]) -> Vec<f64> {
        let mut u = x.to_vec();
        u.push(1.0 - x.iter().sum::<f64>());
        u
    }

    /// Mixed partial of `∏_c u_c^{α_c-1}` along `dirs` (0-based coordinates).
    ///
    /// Each direction differentiates either its own factor (`+1`) or the
    /// remainder factor (`-1`); the sum runs over all such assignments.
    fn partial(&self, x: &[f64], dirs: &[usize]) -> f64 {
        let u = self.factors(x);
        let last = self.d();
        let r = dirs.len();
        let mut total = 0.0;
        let mut hits = vec![0u32; u.len()];
        for mask in 0..(1u32 << r) {
            hits.iter_mut().for_each(|h| *h = 0);
            let mut sign = 1.0;
            for (t, &i) in dirs.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    hits[last] += 1;
                    sign = -sign;
                } else {
                    hits[i] += 1;
                }
            }
            let mut term = sign;
            for (c, &uc) in u.iter().enumerate() {
                term *= pow_derivative(uc, self.alpha[c] - 1.0, hits[c]);
                if term == 0.0 {
                    break;
                }
            }
            total += term;
        }
        self.ln_norm.exp() * total
    }

    fn beta_cdf(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha[0], self.alpha[1]);
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        if a.fract() == 0.0 && b.fract() == 0.0 {
            // P(Binomial(a + b - 1, x) ≥ a)
            let n = (a + b - 1.0) as u64;
            let lo = a as u64;
            (lo..=n)
                .map(|j| {
                    let ln_c = ln_gamma(n as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0);
                    ln_c.exp() * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32)
                })
                .sum()
        } else {
            beta_reg(a, b, x)
        }
    }

    /// Appends one draw (the first `d` coordinates) to `out`, via normalized
    /// independent gamma variables.
    pub fn draw<R: Rng + ?Sized>(&self, gammas: &[Gamma<f64>], rng: &mut R, out: &mut Vec<f64>) {
        let start = out.len();
        let mut total = 0.0;
        for (c, g) in gammas.iter().enumerate() {
            let v = g.sample(rng);
            total += v;
            if c < self.d() {
                out.push(v);
            }
        }
        for v in &mut out[start..] {
            *v /= total;
        }
    }

    pub fn gammas(&self) -> Vec<Gamma<f64>> {
        self.alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("parameters validated as positive"))
            .collect()
    }
}

/// `d^k/du^k u^a = a(a-1)…(a-k+1) u^{a-k}`, with `0⁰ = 1` and exact zeros
/// once an integer exponent is exhausted.
fn pow_derivative(u: f64, a: f64, k: u32) -> f64 {
    let mut coef = 1.0;
    for t in 0..k {
        coef *= a - t as f64;
    }
    if coef == 0.0 {
        return 0.0;
    }
    let e = a - k as f64;
    if e == 0.0 {
        coef
    } else {
        coef * u.powf(e)
    }
}

impl DensityModel for DirichletModel {
    fn name(&self) -> String {
        let parts: Vec<String> = self.alpha.iter().map(|a| format!("{a}")).collect();
        format!("dirichlet({})", parts.join(","))
    }

    fn dim(&self) -> usize {
        self.d()
    }

    fn density(&self, x: &[f64]) -> f64 {
        self.partial(x, &[])
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d()).map(|i| self.partial(x, &[i])).collect()
    }

    fn hessian(&self, x: &[f64]) -> Matrix {
        (0..self.d())
            .map(|i| (0..self.d()).map(|j| self.partial(x, &[i, j])).collect())
            .collect()
    }

    fn cdf(&self, x: &[f64]) -> Option<f64> {
        (self.d() == 1).then(|| self.beta_cdf(x[0]))
    }

    fn cdf_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.d() == 1).then(|| vec![self.density(x)])
    }

    fn cdf_hessian(&self, x: &[f64]) -> Option<Matrix> {
        (self.d() == 1).then(|| vec![self.gradient(x)])
    }

    fn cdf_third(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.d() == 1).then(|| vec![self.partial(x, &[0, 0])])
    }
}

pub fn dirichlet_model(alpha: Vec<f64>) -> Result<DirichletModel> {
    DirichletModel::new(alpha)
}
