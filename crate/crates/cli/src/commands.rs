use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bernstein_core::asymptotics::{cdf_mse, density_mse, density_mse_shoulder};
use bernstein_core::estimators::BernsteinCdf;
use bernstein_core::lattice_sums::{coupling_diagnostic, square_sum_diagnostic, write_diagnostics_csv};
use bernstein_core::moments::{central_moment_analytic, central_moment_bruteforce, MomentQuery};
use bernstein_core::montecarlo::{write_results_csv, ModelSpec};
use bernstein_core::{BoundaryProfile, Dataset, Error, EstimatorKind, Experiment, HistogramCounts, SimplexPoint};
use serde::Deserialize;

use crate::{Command, Table};

/// Input of `theory`:
///
/// ```json
/// {"model": {"family": "dirichlet", "alpha": [2, 2]},
///  "profile": {"d": 1, "interior": {"1": 0.3}},
///  "m": 40, "n": 100000, "kind": "density"}
/// ```
///
/// `"shoulder": true` switches the density report to the shoulder-condition
/// expansion.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    pub model: ModelSpec,
    pub profile: BoundaryProfile,
    pub m: u64,
    pub n: u64,
    #[serde(default = "default_kind")]
    pub kind: EstimatorKind,
    #[serde(default)]
    pub shoulder: bool,
}

fn default_kind() -> EstimatorKind {
    EstimatorKind::Density
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Estimate { data, m, kind, points } => estimate(&data, m, kind, &points, out),
        Command::Theory { config } => theory(&config, out),
        Command::Verify { config, out: path } => verify(&config, path.as_deref(), out),
        Command::Sums {
            profile,
            m_grid,
            table,
            coordinate,
        } => sums(&profile, &m_grid, table, coordinate, out),
        Command::Moments { d, m, x, indices } => moments(d, m, x, &indices, out),
    }
}

fn read_dataset(path: &Path, flag: &str) -> Result<Dataset> {
    Dataset::from_csv_path(path).with_context(|| format!("{flag} {}", path.display()))
}

fn estimate(data: &Path, m: u64, kind: EstimatorKind, points: &Path, out: &mut dyn Write) -> Result<()> {
    if m == 0 {
        bail!("--m must be at least 1");
    }
    let sample = read_dataset(data, "--data")?;
    let at = read_dataset(points, "--points")?;
    if at.dim() != sample.dim() {
        bail!("--points has {} columns but --data has {}", at.dim(), sample.dim());
    }
    let points = at.points();
    let values: Vec<f64> = match kind {
        EstimatorKind::Cdf => {
            let cdf = BernsteinCdf::new(&sample, m)?;
            points.iter().map(|x| cdf.eval(x)).collect::<Result<_, Error>>()?
        }
        EstimatorKind::Density => {
            let counts = HistogramCounts::new(&sample, m)?;
            points
                .iter()
                .map(|x| counts.density_at(x))
                .collect::<Result<_, Error>>()?
        }
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=sample.dim()).map(|i| format!("x{i}")).collect();
    header.push("estimate".into());
    w.write_record(&header)?;
    for (x, v) in points.iter().zip(values) {
        let mut row: Vec<String> = x.coords().iter().map(f64::to_string).collect();
        row.push(v.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn theory(path: &Path, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("--config {}", path.display()))?;
    let cfg: TheoryConfig = serde_json::from_str(&text).with_context(|| format!("--config {}", path.display()))?;
    let model = cfg.model.build()?;
    let report = match (cfg.kind, cfg.shoulder) {
        (EstimatorKind::Density, false) => density_mse(&model, &cfg.profile, cfg.m, cfg.n)?,
        (EstimatorKind::Density, true) => density_mse_shoulder(&model, &cfg.profile, cfg.m, cfg.n)?,
        (EstimatorKind::Cdf, false) => cdf_mse(&model, &cfg.profile, cfg.m, cfg.n)?,
        (EstimatorKind::Cdf, true) => bail!("--config: `shoulder` applies to the density estimator only"),
    };
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    Ok(())
}

fn verify(path: &Path, copy: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let experiment = Experiment::from_path(path).with_context(|| format!("--config {}", path.display()))?;
    let results = experiment.run()?;
    write_results_csv(&mut *out, &results)?;
    if let Some(copy) = copy {
        let file = std::fs::File::create(copy).with_context(|| format!("--out {}", copy.display()))?;
        write_results_csv(file, &results)?;
    }
    let k = experiment.bands;
    let mut passed = 0;
    let mut checked = 0;
    let mut err = std::io::stderr().lock();
    for r in &results {
        let status = match r.within_bands(k) {
            Some(true) => {
                passed += 1;
                checked += 1;
                "PASS"
            }
            Some(false) => {
                checked += 1;
                "FAIL"
            }
            None => "SKIP",
        };
        writeln!(err, "{status} m={} n={}", r.m, r.n)?;
    }
    writeln!(err, "{passed}/{checked} cells within {k} standard errors")?;
    Ok(())
}

fn read_profile(arg: &str) -> Result<BoundaryProfile> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("--profile {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("--profile {arg}"))
}

fn sums(profile: &str, m_grid: &[u64], table: Table, coordinate: usize, out: &mut dyn Write) -> Result<()> {
    let profile = read_profile(profile)?;
    if coordinate == 0 || coordinate > profile.dim() {
        bail!("--coordinate must lie in 1..={}", profile.dim());
    }
    if let Some(&m) = m_grid.iter().find(|&&m| m == 0) {
        bail!("--m-grid values must be at least 1, got {m}");
    }
    let rows = m_grid
        .iter()
        .map(|&m| match table {
            Table::SquareSum => square_sum_diagnostic(&profile, m),
            Table::Coupling => coupling_diagnostic(&profile, coordinate - 1, m),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    write_diagnostics_csv(out, &rows)?;
    Ok(())
}

fn moments(d: usize, m: u64, x: Vec<f64>, indices: &[usize], out: &mut dyn Write) -> Result<()> {
    if x.len() != d {
        bail!("--x has {} coordinates but --d is {d}", x.len());
    }
    if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > d) {
        bail!("--indices must lie in 1..={d}, got {i}");
    }
    let x = SimplexPoint::new(x).context("--x")?;
    let q = MomentQuery::new(m, x, indices.iter().map(|i| i - 1).collect()).context("--indices")?;
    let brute = central_moment_bruteforce(&q)?;
    let analytic = match central_moment_analytic(&q) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["analytic", "bruteforce", "abs_diff"])?;
    let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    w.write_record([
        fmt(analytic),
        brute.to_string(),
        fmt(analytic.map(|a| (a - brute).abs())),
    ])?;
    w.flush()?;
    Ok(())
}
