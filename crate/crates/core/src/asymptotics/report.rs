use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

use super::profile::BoundaryProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Density,
    Cdf,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Density => "density",
            EstimatorKind::Cdf => "cdf",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "density" => Ok(EstimatorKind::Density),
            "cdf" => Ok(EstimatorKind::Cdf),
            other => Err(Error::InvalidArgument(format!(
                "estimator kind must be `density` or `cdf`, got `{other}`"
            ))),
        }
    }
}

/// Optimal order, or the reason there is none. Serializes as a bare number
/// or a bare string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MOpt {
    Value(f64),
    None(String),
}

impl MOpt {
    pub fn value(&self) -> Option<f64> {
        match self {
            MOpt::Value(v) => Some(*v),
            MOpt::None(_) => None,
        }
    }
}

/// Leading bias terms: `value = m1/m + m2/m²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasExpansion {
    pub m1: f64,
    pub m2: f64,
    pub value: f64,
    /// Order of the neglected remainder.
    pub order: String,
}

impl BiasExpansion {
    pub(crate) fn new(m1: f64, m2: f64, m: f64, order: String) -> Self {
        BiasExpansion {
            m1,
            m2,
            value: m1 / m + m2 / (m * m),
            order,
        }
    }

    pub(crate) fn zero(order: String) -> Self {
        BiasExpansion {
            m1: 0.0,
            m2: 0.0,
            value: 0.0,
            order,
        }
    }
}

/// Leading variance term with the order of the neglected remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceExpansion {
    pub value: f64,
    pub order: String,
}

/// Evaluated leading terms of one expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub estimator: EstimatorKind,
    pub model: String,
    pub profile: BoundaryProfile,
    pub m: f64,
    pub n: f64,
    /// Coefficient of `m⁻¹` in the bias.
    pub bias_m1: f64,
    /// Coefficient of `m⁻²` in the bias (`m⁻²` bracket, or the shoulder bracket).
    pub bias_m2: f64,
    pub bias: f64,
    pub var_leading: f64,
    pub mse: f64,
    pub m_opt: MOpt,
    pub mse_at_m_opt: Option<f64>,
    /// Remainder orders by quantity name; never added into the values.
    pub error_orders: BTreeMap<String, String>,
    pub notes: Vec<String>,
}
