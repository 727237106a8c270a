//! Bernstein CDF and density estimators on the unit simplex `S_d`, the
//! closed-form leading terms of their bias, variance and MSE near the
//! boundary, and numerical checks of the ingredients behind them.
//!
//! Module map:
//!
//! * [`simplex`]: points of `S_d`, the lattice `N0^d ∩ m S_d` and
//!   multinomial probabilities.
//! * [`special`]: the modified Bessel functions `I₀` and `I₁`.
//! * [`estimators`]: the empirical CDF and both Bernstein estimators.
//! * [`asymptotics`]: bias, variance, MSE and optimal `m`.
//! * [`lattice_sums`]: exact pmf power sums and min-coupling sums.
//! * [`moments`]: multinomial joint central moments.
//! * [`montecarlo`]: Dirichlet models, simulation and rate fits.

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod lattice_sums;
pub mod moments;
pub mod montecarlo;
pub mod simplex;
pub mod special;

pub use asymptotics::{BoundaryProfile, DensityModel, EstimatorKind, ExpansionReport, MOpt};
pub use error::{Error, Result};
pub use estimators::{Dataset, HistogramCounts};
pub use montecarlo::{DirichletModel, Experiment, McResult};
pub use simplex::{LatticeIndex, PmfTable, SimplexPoint};
