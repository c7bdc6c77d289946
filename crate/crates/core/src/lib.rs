//! Point charges on a conducting needle.
//!
//! The needle is the unit segment `[0, 1]`; `n` identical charges sit on it
//! with the outermost two pinned at the ends. This crate computes the unique
//! equilibrium configuration, integrates the Newtonian and gradient-flow
//! dynamics, studies how the normalized charge distribution approaches the
//! uniform law, and evaluates the resulting electric fields.
//!
//! All quantities are dimensionless: the Coulomb prefactor is dropped and,
//! wherever a field is computed, the total charge is normalized to one.
//!
//! Index convention: positions are stored and addressed 0-based, so the
//! pinned charges are `0` and `n - 1` and the free ones are `1..n-1`.

pub mod config;
pub mod distribution;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod field;
pub mod quadrature;
pub mod special;
pub mod text;

pub use config::{ChargeConfiguration, ClosedSimplexPoint, OpenSimplexPoint};
pub use distribution::{DyadicTarget, EmpiricalCdf, GapStats};
pub use dynamics::{DynamicsSpec, System, Trajectory};
pub use equilibrium::{EquilibriumReport, Method};
pub use error::{Error, Result};
pub use field::{FieldSample, SpacePoint};
