use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Which coordinates sit near the boundary, and where.
///
/// Coordinates in the boundary set `J` scale as `xᵢ = λᵢ/m`; the remaining
/// coordinates are fixed interior values. Indices are 0-based in the API and
/// 1-based in the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct BoundaryProfile {
    d: usize,
    lambda: BTreeMap<usize, f64>,
    interior: BTreeMap<usize, f64>,
}

/// Serialized form of [`BoundaryProfile`], keyed by 1-based coordinates:
///
/// ```json
/// {"d": 2, "lambda": {"1": 1.0}, "interior": {"2": 0.3}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub d: usize,
    #[serde(default)]
    pub lambda: BTreeMap<usize, f64>,
    #[serde(default)]
    pub interior: BTreeMap<usize, f64>,
}

impl TryFrom<ProfileSpec> for BoundaryProfile {
    type Error = Error;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        let shift = |m: BTreeMap<usize, f64>| -> Result<Vec<(usize, f64)>> {
            m.into_iter()
                .map(|(i, v)| {
                    if i == 0 {
                        Err(Error::InvalidArgument("profile coordinates are 1-based".into()))
                    } else {
                        Ok((i - 1, v))
                    }
                })
                .collect()
        };
        BoundaryProfile::new(spec.d, shift(spec.lambda)?, shift(spec.interior)?)
    }
}

impl From<BoundaryProfile> for ProfileSpec {
    fn from(p: BoundaryProfile) -> Self {
        ProfileSpec {
            d: p.d,
            lambda: p.lambda.into_iter().map(|(i, v)| (i + 1, v)).collect(),
            interior: p.interior.into_iter().map(|(i, v)| (i + 1, v)).collect(),
        }
    }
}

impl BoundaryProfile {
    /// `boundary` holds `(i, λᵢ)` pairs and `interior` holds `(i, xᵢ)` pairs,
    /// 0-based; together they must cover `0..d` exactly once.
    pub fn new(d: usize, boundary: Vec<(usize, f64)>, interior: Vec<(usize, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let mut seen = vec![false; d];
        let mut mark = |i: usize| -> Result<()> {
            if i >= d {
                return Err(Error::InvalidArgument(format!("coordinate {} outside 1..={d}", i + 1)));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("coordinate {} listed twice", i + 1)));
            }
            Ok(())
        };
        for &(i, lam) in &boundary {
            mark(i)?;
            if !(lam >= 0.0 && lam.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "λ for coordinate {} must be finite and ≥ 0, got {lam}",
                    i + 1
                )));
            }
        }
        for &(i, x) in &interior {
            mark(i)?;
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "interior coordinate {} must lie in (0, 1), got {x}",
                    i + 1
                )));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {} is neither boundary nor interior",
                missing + 1
            )));
        }
        let interior: BTreeMap<usize, f64> = interior.into_iter().collect();
        let total: f64 = interior.values().sum();
        if total >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "interior coordinates sum to {total}, must be < 1"
            )));
        }
        Ok(BoundaryProfile {
            d,
            lambda: boundary.into_iter().collect(),
            interior,
        })
    }

    /// The profile with `J = ∅` at an interior point.
    pub fn interior_point(x: &SimplexPoint) -> Result<Self> {
        Self::new(x.dim(), Vec::new(), x.coords().iter().copied().enumerate().collect())
    }

    /// The profile with `J = [d]`.
    pub fn near_vertex(lambda: &[f64]) -> Result<Self> {
        Self::new(lambda.len(), lambda.iter().copied().enumerate().collect(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `|J|`.
    pub fn boundary_size(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.lambda.contains_key(&i)
    }

    pub fn boundary(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lambda.iter().map(|(&i, &l)| (i, l))
    }

    pub fn interior(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.interior.iter().map(|(&i, &x)| (i, x))
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        self.interior.keys().copied().collect()
    }

    /// `λᵢ` for `i ∈ J`, 0 otherwise.
    pub fn lambda_or_zero(&self, i: usize) -> f64 {
        self.lambda.get(&i).copied().unwrap_or(0.0)
    }

    /// `xᵢ` for `i ∉ J`, 0 otherwise.
    pub fn interior_or_zero(&self, i: usize) -> f64 {
        self.interior.get(&i).copied().unwrap_or(0.0)
    }

    /// True when some `i ∈ J` has `λᵢ = 0` exactly.
    pub fn touches_boundary(&self) -> bool {
        self.lambda.values().any(|&l| l == 0.0)
    }

    /// The point with `x_J = 0`, where the leading coefficients are evaluated.
    pub fn slice(&self) -> Vec<f64> {
        (0..self.d).map(|i| self.interior_or_zero(i)).collect()
    }

    /// The realized point `xᵢ = λᵢ/m` (i ∈ J), interior values elsewhere.
    pub fn point(&self, m: f64) -> Result<SimplexPoint> {
        if m.is_nan() || m <= 0.0 {
            return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
        }
        let coords = (0..self.d)
            .map(|i| match self.lambda.get(&i) {
                Some(&l) => l / m,
                None => self.interior[&i],
            })
            .collect();
        SimplexPoint::new(coords)
            .map_err(|e| Error::InvalidArgument(format!("profile is not realizable at m = {m}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(BoundaryProfile::new(2, vec![(0, 1.0)], vec![(1, 0.3)]).is_ok());
        assert!(BoundaryProfile::new(2, vec![(0, 1.0)], vec![]).is_err());
        assert!(BoundaryProfile::new(2, vec![(0, 1.0)], vec![(0, 0.3)]).is_err());
        assert!(BoundaryProfile::new(2, vec![], vec![(0, 0.6), (1, 0.5)]).is_err());
        assert!(BoundaryProfile::new(1, vec![(0, -1.0)], vec![]).is_err());
        assert!(BoundaryProfile::new(1, vec![], vec![(0, 1.0)]).is_err());
        assert!(BoundaryProfile::new(1, vec![(3, 1.0)], vec![]).is_err());
    }

    #[test]
    fn realized_points() {
        let p = BoundaryProfile::new(2, vec![(0, 2.0)], vec![(1, 0.3)]).unwrap();
        assert_eq!(p.point(10.0).unwrap().coords(), &[0.2, 0.3]);
        assert_eq!(p.slice(), vec![0.0, 0.3]);
        assert!(p.point(2.0).is_err());
        assert!(!p.touches_boundary());
    }

    #[test]
    fn json_uses_one_based_keys() {
        let p: BoundaryProfile = serde_json::from_str(r#"{"d":2,"lambda":{"1":1.5},"interior":{"2":0.25}}"#).unwrap();
        assert_eq!(p.lambda_or_zero(0), 1.5);
        assert_eq!(p.interior_or_zero(1), 0.25);
        let back = serde_json::to_string(&p).unwrap();
        assert_eq!(back, r#"{"d":2,"lambda":{"1":1.5},"interior":{"2":0.25}}"#);
        assert!(serde_json::from_str::<BoundaryProfile>(r#"{"d":1,"lambda":{"0":1.0}}"#).is_err());
    }
}
