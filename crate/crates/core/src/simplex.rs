//! Geometry of the unit simplex, enumeration of the lattice `N0^d ∩ m·S_d`
//! and multinomial probabilities evaluated in log space.
//!
//! Lattice enumeration is lexicographic: `(0,0), (0,1), …, (0,m), (1,0), …`.
//! Every routine that walks the lattice uses the same order, so tables and
//! sums are reproducible bit for bit.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the simplex constraints before a point is rejected.
/// Points inside the slack are clamped onto the simplex.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// Largest lattice (number of entries) any routine will materialize or walk.
pub const MAX_LATTICE_POINTS: u128 = 100_000_000;

/// Size of the shared log-factorial table.
const SHARED_LOG_FACTORIALS: usize = 1 << 16;

/// A point of `S_d = {x ∈ [0,1]^d : ‖x‖₁ ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validates `coords` with the default tolerance of `1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(coords, POINT_TOLERANCE)
    }

    /// Validates `coords`, clamping violations no larger than `tol`.
    ///
    /// Slightly negative coordinates are set to zero; a coordinate sum in
    /// `(1, 1 + tol]` is rescaled onto the face `‖x‖₁ = 1`.
    pub fn with_tolerance(mut coords: Vec<f64>, tol: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("dimension must be at least 1".into()));
        }
        for (i, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::InvalidPoint(format!("coordinate {} is not finite", i + 1)));
            }
            if *c < 0.0 {
                if *c < -tol {
                    return Err(Error::InvalidPoint(format!("coordinate {} is negative ({})", i + 1, c)));
                }
                *c = 0.0;
            }
        }
        let sum: f64 = coords.iter().sum();
        if sum > 1.0 {
            if sum > 1.0 + tol {
                return Err(Error::InvalidPoint(format!("coordinate sum {} exceeds 1", sum)));
            }
            for c in coords.iter_mut() {
                *c /= sum;
            }
        }
        Ok(SimplexPoint { coords })
    }

    pub fn origin(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        SimplexPoint { coords: vec![0.0; d] }
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn l1(&self) -> f64 {
        self.coords.iter().sum()
    }

    /// The mass `1 - ‖x‖₁` left for the implicit last category.
    pub fn remainder(&self) -> f64 {
        (1.0 - self.l1()).max(0.0)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        SimplexPoint::new(coords).map_err(serde::de::Error::custom)
    }
}

/// A lattice index `k ∈ N0^d`, paired with an order `m ≥ ‖k‖₁` by context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeIndex(pub Vec<u32>);

impl LatticeIndex {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn norm(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::borrow::Borrow<[u32]> for LatticeIndex {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for LatticeIndex {
    fn from(v: Vec<u32>) -> Self {
        LatticeIndex(v)
    }
}

/// Number of lattice points `C(m + d, d)`, saturating at `u128::MAX`.
pub fn lattice_count(m: u64, d: usize) -> u128 {
    let mut count: u128 = 1;
    for i in 1..=d as u128 {
        // C(m+i, i) = C(m+i-1, i-1) * (m+i) / i, exact at every step.
        match count.checked_mul(m as u128 + i) {
            Some(v) => count = v / i,
            None => return u128::MAX,
        }
    }
    count
}

/// Refuses `(m, d)` whose lattice exceeds [`MAX_LATTICE_POINTS`].
pub fn check_size(m: u64, d: usize) -> Result<u128> {
    check_count(m, d, lattice_count(m, d))
}

fn check_count(m: u64, d: usize, count: u128) -> Result<u128> {
    if count > MAX_LATTICE_POINTS {
        Err(Error::SizeLimit {
            m,
            d,
            count,
            limit: MAX_LATTICE_POINTS,
        })
    } else {
        Ok(count)
    }
}

/// Calls `visit` on every `k ∈ N0^d` with `‖k‖₁ ≤ m`, in lexicographic order.
///
/// No size guard is applied; callers check [`check_size`] first.
pub fn for_each_lattice<F: FnMut(&[u32])>(m: u64, d: usize, visit: F) {
    let lo = vec![0u32; d];
    let hi = vec![m.min(u32::MAX as u64) as u32; d];
    for_each_in_box(m, &lo, &hi, visit);
}

/// Lexicographic walk over `{k : lo ≤ k ≤ hi, ‖k‖₁ ≤ m}`.
pub fn for_each_in_box<F: FnMut(&[u32])>(m: u64, lo: &[u32], hi: &[u32], mut visit: F) {
    let d = lo.len();
    debug_assert_eq!(d, hi.len());
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut k = lo.to_vec();
    let mut sum: u64 = k.iter().map(|&v| v as u64).sum();
    if sum > m {
        return;
    }
    loop {
        visit(&k);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if k[j] < hi[j] && sum < m {
                k[j] += 1;
                sum += 1;
                break;
            }
            sum -= (k[j] - lo[j]) as u64;
            k[j] = lo[j];
        }
    }
}

/// All lattice indices of `N0^d ∩ m·S_d` in lexicographic order.
pub fn lattice_points(m: u64, d: usize) -> Result<Vec<LatticeIndex>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let count = check_size(m, d)?;
    let mut out = Vec::with_capacity(count as usize);
    for_each_lattice(m, d, |k| out.push(LatticeIndex(k.to_vec())));
    Ok(out)
}

/// Cumulative table of `ln(n!)`, built with compensated summation so the
/// rounding error stays at a few ulps even for large `n`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn up_to(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for i in 1..=max {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        LogFactorials { table }
    }

    /// Process-wide table covering `n < 65536`.
    pub fn shared() -> &'static LogFactorials {
        static SHARED: OnceLock<LogFactorials> = OnceLock::new();
        SHARED.get_or_init(|| LogFactorials::up_to(SHARED_LOG_FACTORIALS - 1))
    }

    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        match self.table.get(n as usize) {
            Some(&v) => v,
            None => statrs::function::gamma::ln_gamma(n as f64 + 1.0),
        }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }
}

/// The shared table when it reaches `m`, otherwise a fresh one.
pub(crate) fn log_factorials_for(m: u64) -> std::borrow::Cow<'static, LogFactorials> {
    let shared = LogFactorials::shared();
    if m as usize <= shared.max() {
        std::borrow::Cow::Borrowed(shared)
    } else {
        std::borrow::Cow::Owned(LogFactorials::up_to(m as usize))
    }
}

/// Precomputed logarithms of a point's coordinates, shared by every
/// lattice index evaluated at that point.
#[derive(Debug, Clone)]
pub(crate) struct LogPoint {
    ln_x: Vec<f64>,
    ln_rem: f64,
}

impl LogPoint {
    pub(crate) fn new(x: &SimplexPoint) -> Self {
        LogPoint {
            ln_x: x.coords().iter().map(|&c| c.ln()).collect(),
            ln_rem: x.remainder().ln(),
        }
    }

    /// `ln P_{k,m}(x)` with the convention `0·ln 0 = 0` (so `0⁰ = 1`).
    #[inline]
    pub(crate) fn ln_pmf(&self, k: &[u32], m: u64, lf: &LogFactorials) -> f64 {
        let mut s: u64 = 0;
        let mut acc = 0.0;
        for (&ki, &lx) in k.iter().zip(&self.ln_x) {
            s += ki as u64;
            acc -= lf.get(ki as u64);
            if ki > 0 {
                acc += ki as f64 * lx;
            }
        }
        debug_assert!(s <= m);
        let rest = m - s;
        acc += lf.get(m) - lf.get(rest);
        if rest > 0 {
            acc += rest as f64 * self.ln_rem;
        }
        acc
    }

    #[inline]
    pub(crate) fn pmf(&self, k: &[u32], m: u64, lf: &LogFactorials) -> f64 {
        self.ln_pmf(k, m, lf).exp()
    }
}

/// `P_{k,m}(x) = m!/((m-‖k‖₁)! ∏kᵢ!) (1-‖x‖₁)^{m-‖k‖₁} ∏xᵢ^{kᵢ}`.
///
/// Evaluated in log space with `0⁰ = 1`.
pub fn multinomial_pmf(k: &LatticeIndex, m: u64, x: &SimplexPoint) -> Result<f64> {
    if k.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: k.dim(),
        });
    }
    if k.norm() > m {
        return Err(Error::InvalidArgument(format!(
            "lattice index with ‖k‖₁ = {} exceeds m = {}",
            k.norm(),
            m
        )));
    }
    Ok(LogPoint::new(x).pmf(k.as_slice(), m, LogFactorials::shared()))
}

/// Binomial(m, p) probabilities for `k = 0..=m`.
pub fn binomial_pmfs(m: u64, p: f64) -> Result<Vec<f64>> {
    let x = SimplexPoint::new(vec![p])?;
    let lp = LogPoint::new(&x);
    let lf = LogFactorials::shared();
    Ok((0..=m).map(|k| lp.pmf(&[k as u32], m, lf)).collect())
}

/// Multinomial probabilities over the lattice, optionally restricted to the
/// bulk of the distribution.
#[derive(Debug, Clone)]
pub struct PmfTable {
    m: u64,
    x: SimplexPoint,
    /// Flattened indices, `d` entries per row, lexicographic.
    indices: Vec<u32>,
    probs: Vec<f64>,
    truncated: bool,
    truncation_mass: f64,
}

impl PmfTable {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn point(&self) -> &SimplexPoint {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Upper bound on the probability dropped by truncation (0 if full).
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.indices.chunks_exact(self.dim()).zip(self.probs.iter().copied())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `k`, or `None` when `k` is outside the stored entries.
    pub fn get(&self, k: &[u32]) -> Option<f64> {
        let d = self.dim();
        if k.len() != d {
            return None;
        }
        let row = |i: usize| &self.indices[i * d..(i + 1) * d];
        let pos = partition_point(self.len(), |i| row(i) < k);
        (pos < self.len() && row(pos) == k).then(|| self.probs[pos])
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn partition_point<P: Fn(usize) -> bool>(len: usize, pred: P) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Half-width (in counts) of the per-coordinate truncation window.
///
/// Hoeffding gives `P(|kᵢ - m xᵢ| > t) ≤ 2 exp(-2t²/m)` for each marginal,
/// so a union over `d` coordinates drops at most `tol` when
/// `t = sqrt(m ln(2d/tol) / 2)`.
pub fn truncation_half_width(m: u64, d: usize, tol: f64) -> f64 {
    (m as f64 * (2.0 * d as f64 / tol).ln() / 2.0).sqrt()
}

/// Multinomial(m, x) probabilities over the lattice.
///
/// With `truncate = Some(tol)`, only indices with every `|kᵢ - m xᵢ| ≤ t`
/// are kept (see [`truncation_half_width`]); the dropped mass is at most
/// `tol` and recorded in [`PmfTable::truncation_mass`].
pub fn pmf_table(m: u64, x: &SimplexPoint, truncate: Option<f64>) -> Result<PmfTable> {
    let d = x.dim();
    let full_hi = m.min(u32::MAX as u64) as u32;
    let mut lo = vec![0u32; d];
    let mut hi = vec![full_hi; d];
    let mut truncated = false;
    let mut truncation_mass = 0.0;

    if let Some(tol) = truncate {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance must lie in (0, 1), got {tol}"
            )));
        }
        let t = truncation_half_width(m, d, tol);
        for (i, &xi) in x.coords().iter().enumerate() {
            let centre = m as f64 * xi;
            lo[i] = (centre - t).ceil().max(0.0) as u32;
            hi[i] = ((centre + t).floor().min(m as f64)) as u32;
        }
        truncated = lo.iter().any(|&l| l > 0) || hi.iter().any(|&h| h < full_hi);
        if truncated {
            let t_eff = t.max(0.0);
            truncation_mass = (2.0 * d as f64 * (-2.0 * t_eff * t_eff / m as f64).exp()).min(tol);
        }
    }

    let box_count = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| (h - l) as u128 + 1)
        .try_fold(1u128, |acc, w| acc.checked_mul(w))
        .unwrap_or(u128::MAX);
    let count = box_count.min(lattice_count(m, d));
    check_count(m, d, count)?;

    let lp = LogPoint::new(x);
    let lf_local;
    let lf = if m as usize <= LogFactorials::shared().max() {
        LogFactorials::shared()
    } else {
        lf_local = LogFactorials::up_to(m as usize);
        &lf_local
    };

    let mut indices = Vec::with_capacity(count as usize * d);
    let mut probs = Vec::with_capacity(count as usize);
    for_each_in_box(m, &lo, &hi, |k| {
        indices.extend_from_slice(k);
        probs.push(lp.pmf(k, m, lf));
    });

    Ok(PmfTable {
        m,
        x: x.clone(),
        indices,
        probs,
        truncated,
        truncation_mass,
    })
}
