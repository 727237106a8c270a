//! Sampling from Dirichlet models, Monte Carlo bias/variance/MSE of both
//! estimators, and log-log rate fits.
//!
//! Replicate `r` of a run with master seed `s` draws its data from a
//! ChaCha8 generator seeded with [`replicate_seed`]`(s, r)`, so replicates
//! can run in any order or in parallel and still give bit-identical
//! results. Replicate estimates are reduced in replicate order.

mod dirichlet;

pub use dirichlet::{dirichlet_model, DirichletModel};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    cdf_mse, density_m_opt, density_mse, BoundaryProfile, DensityModel, EstimatorKind, ProfileSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{BernsteinCdf, Dataset, HistogramCounts};
use crate::simplex::SimplexPoint;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(master ^ mix64(stream))`: the seed of stream `stream` (a
/// replicate counter or a grid-cell counter) under `master`.
pub fn replicate_seed(master: u64, stream: u64) -> u64 {
    mix64(master ^ mix64(stream))
}

/// `n` independent draws from `model`, deterministic in `seed`.
pub fn sample(model: &DirichletModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gammas = model.gammas();
    let mut values = Vec::with_capacity(n * model.dim());
    for _ in 0..n {
        model.draw(&gammas, &mut rng, &mut values);
    }
    Dataset::from_flat(model.dim(), values, 1e-12)
}

/// Where the estimators are evaluated: a fixed point, or a boundary profile
/// realized at each `m` as `xᵢ = λᵢ/m` for `i ∈ J`.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Point(SimplexPoint),
    Profile(BoundaryProfile),
}

impl Target {
    pub fn point(&self, m: u64) -> Result<SimplexPoint> {
        match self {
            Target::Point(x) => Ok(x.clone()),
            Target::Profile(p) => p.point(m as f64),
        }
    }

    /// The profile used for theoretical values, if any: the profile itself,
    /// or `J = ∅` for a point with every coordinate in `(0, 1)`.
    pub fn profile(&self) -> Option<BoundaryProfile> {
        match self {
            Target::Profile(p) => Some(p.clone()),
            Target::Point(x) => BoundaryProfile::interior_point(x).ok(),
        }
    }
}

/// One Monte Carlo cell. Column order is the CSV layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub m: u64,
    pub n: u64,
    pub bias: f64,
    pub bias_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub mse: f64,
    pub theory_bias: Option<f64>,
    pub theory_var: Option<f64>,
    pub theory_mse: Option<f64>,
}

impl McResult {
    /// Whether the empirical bias and variance lie within `k` standard errors
    /// of their theoretical values; `None` when theory is unavailable.
    pub fn within_bands(&self, k: f64) -> Option<bool> {
        let tb = self.theory_bias?;
        let tv = self.theory_var?;
        Some((self.bias - tb).abs() <= k * self.bias_se && (self.var - tv).abs() <= k * self.var_se)
    }
}

pub fn write_results_csv<W: std::io::Write>(writer: W, rows: &[McResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(reader: R) -> Result<Vec<McResult>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Sample statistics of replicate estimates around a known true value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateStats {
    pub mean: f64,
    pub var: f64,
    pub bias: f64,
    pub bias_se: f64,
    pub var_se: f64,
}

impl ReplicateStats {
    /// Needs at least two estimates. The variance uses the `R - 1`
    /// denominator; its standard error is `√((μ₄ - σ⁴(R-3)/(R-1)) / R)`.
    pub fn new(estimates: &[f64], truth: f64) -> Result<Self> {
        let r = estimates.len();
        if r < 2 {
            return Err(Error::InvalidArgument("at least two replicates are required".into()));
        }
        let rf = r as f64;
        let mean = estimates.iter().sum::<f64>() / rf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &e in estimates {
            let d2 = (e - mean).powi(2);
            m2 += d2;
            m4 += d2 * d2;
        }
        let var = m2 / (rf - 1.0);
        let mu4 = m4 / rf;
        let var_se = ((mu4 - var * var * (rf - 3.0) / (rf - 1.0)) / rf).max(0.0).sqrt();
        Ok(ReplicateStats {
            mean,
            var,
            bias: mean - truth,
            bias_se: (var / rf).sqrt(),
            var_se,
        })
    }
}

fn estimate(kind: EstimatorKind, data: &Dataset, m: u64, x: &SimplexPoint) -> Result<f64> {
    match kind {
        EstimatorKind::Density => HistogramCounts::new(data, m)?.density_at(x),
        EstimatorKind::Cdf => BernsteinCdf::new(data, m)?.eval(x),
    }
}

fn truth(model: &DirichletModel, kind: EstimatorKind, x: &SimplexPoint) -> Result<f64> {
    match kind {
        EstimatorKind::Density => Ok(model.density(x.coords())),
        EstimatorKind::Cdf => model
            .cdf(x.coords())
            .ok_or_else(|| Error::Precondition(format!("model {} does not supply a CDF", model.name()))),
    }
}

/// Replicate estimates at `(m, n)`, in replicate order.
pub fn replicate_estimates(
    model: &DirichletModel,
    x: &SimplexPoint,
    m: u64,
    n: usize,
    replicates: usize,
    seed: u64,
    kind: EstimatorKind,
) -> Result<Vec<f64>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let data = sample(model, n, replicate_seed(seed, r))?;
            estimate(kind, &data, m, x)
        })
        .collect()
}

/// Empirical bias, variance and MSE of one estimator over `replicates`
/// independent datasets, next to the leading theoretical terms when the
/// target has a profile the expansions accept.
pub fn mc_bias_variance(
    model: &DirichletModel,
    target: &Target,
    m: u64,
    n: usize,
    replicates: usize,
    seed: u64,
    kind: EstimatorKind,
) -> Result<McResult> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be at least 1".into()));
    }
    if replicates < 2 {
        return Err(Error::InvalidArgument("at least two replicates are required".into()));
    }
    let x = target.point(m)?;
    let truth = truth(model, kind, &x)?;
    let estimates = replicate_estimates(model, &x, m, n, replicates, seed, kind)?;
    let stats = ReplicateStats::new(&estimates, truth)?;
    let theory = target.profile().and_then(|p| match kind {
        EstimatorKind::Density => density_mse(model, &p, m, n as u64).ok(),
        EstimatorKind::Cdf => cdf_mse(model, &p, m, n as u64).ok(),
    });
    Ok(McResult {
        m,
        n: n as u64,
        bias: stats.bias,
        bias_se: stats.bias_se,
        var: stats.var,
        var_se: stats.var_se,
        mse: stats.bias * stats.bias + stats.var,
        theory_bias: theory.as_ref().map(|t| t.bias),
        theory_var: theory.as_ref().map(|t| t.var_leading),
        theory_mse: theory.as_ref().map(|t| t.mse),
    })
}

/// Least-squares line through `(ln n, ln mse)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return Err(Error::Domain(format!("rate fit needs positive inputs, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Model families available in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Dirichlet { alpha: Vec<f64> },
    Uniform { d: usize },
}

impl ModelSpec {
    pub fn build(&self) -> Result<DirichletModel> {
        match self {
            ModelSpec::Dirichlet { alpha } => DirichletModel::new(alpha.clone()),
            ModelSpec::Uniform { d } => DirichletModel::uniform(*d),
        }
    }
}

/// A Monte Carlo experiment, read from JSON:
///
/// ```json
/// {"model": {"family": "dirichlet", "alpha": [2, 2]},
///  "profile": {"d": 1, "interior": {"1": 0.3}},
///  "m_grid": [40], "n_grid": [1000000], "replicates": 200,
///  "seed": 7, "kind": "density"}
/// ```
///
/// `point` may replace `profile`. With `"m_opt": true` each `n` uses
/// `m = round(m_opt(n))` from the density expansion instead of `m_grid`.
/// Grid cell `c` (row-major over `n_grid` × `m_grid`) runs with master seed
/// `replicate_seed(seed, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub model: ModelSpec,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub m_grid: Vec<u64>,
    #[serde(default)]
    pub m_opt: bool,
    pub n_grid: Vec<u64>,
    pub replicates: usize,
    pub seed: u64,
    pub kind: EstimatorKind,
    /// Width of the acceptance band in standard errors.
    #[serde(default = "default_bands")]
    pub bands: f64,
}

fn default_bands() -> f64 {
    3.0
}

impl Experiment {
    pub fn from_json(text: &str) -> Result<Self> {
        let e: Experiment = serde_json::from_str(text)?;
        e.validate()?;
        Ok(e)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidArgument("replicates must be at least 2".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::InvalidArgument(
                "n_grid must be non-empty with values ≥ 1".into(),
            ));
        }
        if self.m_opt {
            if self.kind != EstimatorKind::Density {
                return Err(Error::InvalidArgument(
                    "m_opt is only defined for the density estimator".into(),
                ));
            }
        } else if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return Err(Error::InvalidArgument(
                "m_grid must be non-empty with values ≥ 1".into(),
            ));
        }
        if self.profile.is_some() == self.point.is_some() {
            return Err(Error::InvalidArgument(
                "give exactly one of `profile` or `point`".into(),
            ));
        }
        self.target()?;
        self.model.build()?;
        Ok(())
    }

    pub fn target(&self) -> Result<Target> {
        match (&self.profile, &self.point) {
            (Some(p), None) => Ok(Target::Profile(BoundaryProfile::try_from(p.clone())?)),
            (None, Some(x)) => Ok(Target::Point(SimplexPoint::new(x.clone())?)),
            _ => Err(Error::InvalidArgument(
                "give exactly one of `profile` or `point`".into(),
            )),
        }
    }

    /// The `(m, n)` cells in run order.
    pub fn cells(&self) -> Result<Vec<(u64, u64)>> {
        let model = self.model.build()?;
        let mut cells = Vec::new();
        for &n in &self.n_grid {
            if self.m_opt {
                let profile = self
                    .target()?
                    .profile()
                    .ok_or_else(|| Error::InvalidArgument("m_opt needs an interior point or a profile".into()))?;
                let opt = density_m_opt(&model, &profile, n)?;
                let m = opt
                    .m_opt
                    .value()
                    .ok_or_else(|| Error::Precondition(format!("no optimal m for n = {n}: {:?}", opt.m_opt)))?;
                cells.push(((m.round() as u64).max(1), n));
            } else {
                cells.extend(self.m_grid.iter().map(|&m| (m, n)));
            }
        }
        Ok(cells)
    }

    pub fn run(&self) -> Result<Vec<McResult>> {
        self.validate()?;
        let model = self.model.build()?;
        let target = self.target()?;
        self.cells()?
            .into_iter()
            .enumerate()
            .map(|(c, (m, n))| {
                mc_bias_variance(
                    &model,
                    &target,
                    m,
                    n as usize,
                    self.replicates,
                    replicate_seed(self.seed, c as u64),
                    self.kind,
                )
            })
            .collect()
    }
}
