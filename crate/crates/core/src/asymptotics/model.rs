use crate::error::{Error, Result};

/// Square matrix stored as rows.
pub type Matrix = Vec<Vec<f64>>;

/// An analytic target density on the closed simplex, with derivatives.
///
/// Derivatives at points with some coordinates exactly 0 refer to a smooth
/// extension of `f` across the boundary, so implementations must return
/// finite values on the whole of `S_d`.
///
/// CDF methods are optional; models that cannot supply `F` return `None`
/// and are rejected by the CDF expansions.
pub trait DensityModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn density(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> Matrix;

    fn cdf(&self, _x: &[f64]) -> Option<f64> {
        None
    }
    fn cdf_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn cdf_hessian(&self, _x: &[f64]) -> Option<Matrix> {
        None
    }
    /// Third partials `∂³F/∂xᵢ∂xⱼ∂xₗ`, flattened as `[(i*d + j)*d + l]`.
    fn cdf_third(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Tolerances of the derivative self-check.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifferenceCheck {
    pub step: f64,
    /// Allowed `|fd - analytic| / max(|analytic|, 1)`.
    pub rel_tol: f64,
}

impl Default for FiniteDifferenceCheck {
    fn default() -> Self {
        FiniteDifferenceCheck {
            step: 1e-5,
            rel_tol: 1e-5,
        }
    }
}

fn rel_err(fd: f64, exact: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(1.0)
}

fn central<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut dn = x.to_vec();
    up[i] += h;
    dn[i] -= h;
    (f(&up) - f(&dn)) / (2.0 * h)
}

impl FiniteDifferenceCheck {
    /// Compares `gradient` and `hessian` with central differences of
    /// `density` and `gradient` at each interior point.
    pub fn check_density(&self, model: &dyn DensityModel, points: &[Vec<f64>]) -> Result<()> {
        let h = self.step;
        for x in points {
            let g = model.gradient(x);
            let hs = model.hessian(x);
            for i in 0..model.dim() {
                let fd = central(|p| model.density(p), x, i, h);
                self.compare(fd, g[i], || format!("∂{}f at {:?}", i + 1, x))?;
                for (j, &hij) in hs[i].iter().enumerate() {
                    let fd = central(|p| model.gradient(p)[j], x, i, h);
                    self.compare(fd, hij, || format!("∂{}∂{}f at {:?}", i + 1, j + 1, x))?;
                }
            }
        }
        Ok(())
    }

    /// Same check for `F` and its first three derivative arrays.
    pub fn check_cdf(&self, model: &dyn DensityModel, points: &[Vec<f64>]) -> Result<()> {
        let d = model.dim();
        let h = self.step;
        let missing = || Error::Precondition(format!("model {} has no CDF", model.name()));
        for x in points {
            let g = model.cdf_gradient(x).ok_or_else(missing)?;
            let hs = model.cdf_hessian(x).ok_or_else(missing)?;
            let t = model.cdf_third(x).ok_or_else(missing)?;
            for i in 0..d {
                let fd = central(|p| model.cdf(p).unwrap_or(f64::NAN), x, i, h);
                self.compare(fd, g[i], || format!("∂{}F at {:?}", i + 1, x))?;
                for j in 0..d {
                    let fd = central(|p| model.cdf_gradient(p).map_or(f64::NAN, |v| v[j]), x, i, h);
                    self.compare(fd, hs[i][j], || format!("∂{}∂{}F at {:?}", i + 1, j + 1, x))?;
                    for l in 0..d {
                        let fd = central(|p| model.cdf_hessian(p).map_or(f64::NAN, |v| v[j][l]), x, i, h);
                        self.compare(fd, t[(i * d + j) * d + l], || {
                            format!("∂{}∂{}∂{}F at {:?}", i + 1, j + 1, l + 1, x)
                        })?;
                    }
                }
            }
        }
        Ok(())
    }

    fn compare<S: FnOnce() -> String>(&self, fd: f64, exact: f64, what: S) -> Result<()> {
        let err = rel_err(fd, exact);
        if err <= self.rel_tol {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{}: analytic {exact} vs finite difference {fd} (relative error {err:.2e})",
                what()
            )))
        }
    }
}

/// Composite Simpson quadrature over `S_d` (`d ≤ 3`) via the collapsed
/// coordinates `x₁ = u₁`, `x₂ = (1 - u₁) u₂`, …
pub fn integrate_simplex<F: Fn(&[f64]) -> f64>(f: F, d: usize, panels: usize) -> f64 {
    assert!((1..=3).contains(&d), "quadrature supports d in 1..=3");
    let panels = panels.max(2) + panels % 2;
    let mut x = vec![0.0; d];
    collapse(&f, &mut x, 0, 1.0, panels)
}

fn collapse<F: Fn(&[f64]) -> f64>(f: &F, x: &mut Vec<f64>, level: usize, scale: f64, panels: usize) -> f64 {
    let d = x.len();
    let h = 1.0 / panels as f64;
    let mut acc = 0.0;
    for p in 0..=panels {
        let u = p as f64 * h;
        let w = if p == 0 || p == panels {
            1.0
        } else if p % 2 == 1 {
            4.0
        } else {
            2.0
        };
        x[level] = scale * u;
        let inner = if level + 1 == d {
            f(x)
        } else {
            collapse(f, x, level + 1, scale * (1.0 - u), panels)
        };
        acc += w * inner;
    }
    scale * acc * h / 3.0
}
