//! The empirical CDF and the two Bernstein estimators on `S_d`.
//!
//! * [`bernstein_cdf`]: `F*_{n,m}(x) = Σ_{k ∈ N0^d ∩ m S_d} F_n(k/m) P_{k,m}(x)`.
//! * [`bernstein_density`]: `f̃_{n,m}(x) = m^d Σ_{k ∈ N0^d ∩ (m-1) S_d}
//!   (N_k / n) P_{k,m-1}(x)`, where `N_k` counts observations in the
//!   half-open cube `(k/m, (k+1)/m]`.
//!
//! Grid comparisons are made against the floating-point value `k as f64 / m
//! as f64`, so the precomputed grids agree exactly with a direct evaluation
//! of [`empirical_cdf`] at `k/m`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simplex::{
    check_size, for_each_lattice, log_factorials_for, LatticeIndex, LogPoint, SimplexPoint, MAX_LATTICE_POINTS,
};

/// Slack accepted on simplex constraints for rows read from CSV.
pub const CSV_TOLERANCE: f64 = 1e-9;

/// `n ≥ 1` observations in `S_d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: Vec<SimplexPoint>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("a dataset needs at least one row".into()))?;
        let d = first.dim();
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.dim() != d {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("expected {d} columns, found {}", row.dim()),
                });
            }
            values.extend_from_slice(row.coords());
        }
        Ok(Dataset { d, values })
    }

    /// Builds a dataset from row-major values, validating every row.
    pub fn from_flat(d: usize, mut values: Vec<f64>, tol: f64) -> Result<Self> {
        if d == 0 || values.is_empty() || values.len() % d != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot form rows of dimension {d}",
                values.len()
            )));
        }
        for (i, chunk) in values.chunks_exact_mut(d).enumerate() {
            let p = SimplexPoint::with_tolerance(chunk.to_vec(), tol).map_err(|e| Error::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
            chunk.copy_from_slice(p.coords());
        }
        Ok(Dataset { d, values })
    }

    /// Reads one observation per line, `d` numeric columns, optional header.
    ///
    /// A first line that does not parse as numbers is taken as a header.
    /// Rows violating the simplex constraints by more than `1e-9` are
    /// rejected with their 1-based line number.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut d = None;
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Row {
                        row: line,
                        message: format!("non-numeric field ({e})"),
                    })
                }
            };
            let dim = *d.get_or_insert(row.len());
            if row.len() != dim {
                return Err(Error::Row {
                    row: line,
                    message: format!("expected {dim} columns, found {}", row.len()),
                });
            }
            let p = SimplexPoint::with_tolerance(row, CSV_TOLERANCE).map_err(|e| Error::Row {
                row: line,
                message: e.to_string(),
            })?;
            values.extend_from_slice(p.coords());
        }
        let d = d.ok_or_else(|| Error::InvalidArgument("no data rows found".into()))?;
        Ok(Dataset { d, values })
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file =
            std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> Vec<SimplexPoint> {
        self.rows()
            .map(|r| SimplexPoint::new(r.to_vec()).expect("rows are validated on construction"))
            .collect()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `F_n(x)`: fraction of rows with every coordinate `≤` the matching
/// coordinate of `x`.
pub fn empirical_cdf(data: &Dataset, x: &SimplexPoint) -> Result<f64> {
    check_dim(data.dim(), x.dim())?;
    let xs = x.coords();
    let hits = data.rows().filter(|r| r.iter().zip(xs).all(|(a, b)| a <= b)).count();
    Ok(hits as f64 / data.len() as f64)
}

#[inline]
fn grid_value(c: u64, m: u64) -> f64 {
    c as f64 / m as f64
}

/// Smallest `c ∈ {0..=m}` with `v ≤ c/m` (as floating-point grid values).
fn grid_ceil(v: f64, m: u64) -> u64 {
    let mut c = (v * m as f64).ceil().clamp(0.0, m as f64) as u64;
    while c > 0 && v <= grid_value(c - 1, m) {
        c -= 1;
    }
    while c < m && v > grid_value(c, m) {
        c += 1;
    }
    c
}

fn check_order(m: u64) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidArgument("the order m must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Precomputed empirical CDF on the grid `{k/m}`, reusable across many
/// evaluation points of the Bernstein CDF estimator.
///
/// The estimator is defined for any `x ∈ S_d`, but it is only a sensible
/// CDF estimate when the data's support sits inside a hyperrectangle within
/// the simplex; data with full support on `S_d` put part of the relevant
/// CDF on the unit hypercube, which this estimator never sees.
#[derive(Debug, Clone)]
pub struct BernsteinCdf {
    m: u64,
    d: usize,
    n: usize,
    /// `cumulative[idx(k)] = #{i : X_i ≤ k/m}` over the box `{0..=m}^d`.
    cumulative: Vec<u64>,
}

impl BernsteinCdf {
    pub fn new(data: &Dataset, m: u64) -> Result<Self> {
        check_order(m)?;
        let d = data.dim();
        check_size(m, d)?;
        let side = m as usize + 1;
        let cells = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if cells > MAX_LATTICE_POINTS {
            return Err(Error::SizeLimit {
                m,
                d,
                count: cells,
                limit: MAX_LATTICE_POINTS,
            });
        }
        let mut cumulative = vec![0u64; cells as usize];
        for row in data.rows() {
            let mut idx = 0usize;
            for &v in row {
                idx = idx * side + grid_ceil(v, m) as usize;
            }
            cumulative[idx] += 1;
        }
        // prefix sums along each axis turn cell counts into F_n on the grid
        let mut stride = 1usize;
        for _ in 0..d {
            for i in 0..cumulative.len() {
                if (i / stride) % side != 0 {
                    cumulative[i] += cumulative[i - stride];
                }
            }
            stride *= side;
        }
        Ok(BernsteinCdf {
            m,
            d,
            n: data.len(),
            cumulative,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `F_n(k/m)`.
    pub fn grid_cdf(&self, k: &[u32]) -> f64 {
        let side = self.m as usize + 1;
        let idx = k.iter().fold(0usize, |acc, &ki| acc * side + ki as usize);
        self.cumulative[idx] as f64 / self.n as f64
    }

    pub fn eval(&self, x: &SimplexPoint) -> Result<f64> {
        check_dim(self.d, x.dim())?;
        let lp = LogPoint::new(x);
        let lf = log_factorials_for(self.m);
        let mut acc = 0.0;
        for_each_lattice(self.m, self.d, |k| {
            let w = lp.pmf(k, self.m, &lf);
            if w > 0.0 {
                acc += self.grid_cdf(k) * w;
            }
        });
        Ok(acc.clamp(0.0, 1.0))
    }
}

/// The Bernstein CDF estimator `F*_{n,m}(x)`.
pub fn bernstein_cdf(data: &Dataset, m: u64, x: &SimplexPoint) -> Result<f64> {
    check_dim(data.dim(), x.dim())?;
    BernsteinCdf::new(data, m)?.eval(x)
}

/// Cube counts `N_k = #{i : X_i ∈ (k/m, (k+1)/m]}` for `‖k‖₁ ≤ m - 1`.
///
/// A coordinate equal to 0 lies on a lower face excluded by every half-open
/// cube; such points are placed in the lowest cube (`kᵢ = 0`) so that the
/// counts always sum to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramCounts {
    m: u64,
    d: usize,
    n: usize,
    counts: BTreeMap<LatticeIndex, u64>,
}

/// Cube index of a single observation.
pub fn cube_index(row: &[f64], m: u64) -> LatticeIndex {
    LatticeIndex(
        row.iter()
            .map(|&v| grid_ceil(v, m).saturating_sub(1).min(m - 1) as u32)
            .collect(),
    )
}

impl HistogramCounts {
    pub fn new(data: &Dataset, m: u64) -> Result<Self> {
        check_order(m)?;
        let mut counts: BTreeMap<LatticeIndex, u64> = BTreeMap::new();
        let mut k = vec![0u32; data.dim()];
        for row in data.rows() {
            for (ki, &v) in k.iter_mut().zip(row) {
                *ki = grid_ceil(v, m).saturating_sub(1).min(m - 1) as u32;
            }
            if k.iter().map(|&c| c as u64).sum::<u64>() < m {
                match counts.get_mut(k.as_slice()) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(LatticeIndex(k.clone()), 1);
                    }
                }
            }
        }
        Ok(HistogramCounts {
            m,
            d: data.dim(),
            n: data.len(),
            counts,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<LatticeIndex, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `f̃_{n,m}(x)`, summing only over non-empty cubes.
    pub fn density_at(&self, x: &SimplexPoint) -> Result<f64> {
        check_dim(self.d, x.dim())?;
        let order = self.m - 1;
        let lp = LogPoint::new(x);
        let lf = log_factorials_for(order);
        let mut acc = 0.0;
        for (k, &c) in &self.counts {
            acc += c as f64 * lp.pmf(k.as_slice(), order, &lf);
        }
        Ok((self.m as f64).powi(self.d as i32) * acc / self.n as f64)
    }
}

pub fn histogram_counts(data: &Dataset, m: u64) -> Result<HistogramCounts> {
    HistogramCounts::new(data, m)
}

/// The Bernstein density estimator `f̃_{n,m}(x)`.
pub fn bernstein_density(data: &Dataset, m: u64, x: &SimplexPoint) -> Result<f64> {
    check_dim(data.dim(), x.dim())?;
    check_order(m)?;
    check_size(m - 1, data.dim())?;
    HistogramCounts::new(data, m)?.density_at(x)
}
