//! Numerical toolkit for truncated Levy flights: closed-form cumulants of
//! arbitrarily truncated symmetric alpha-stable laws, truncation-shape
//! influence functions, regime analysis, an independent quadrature oracle
//! for the small-parameter asymptotics, and Monte Carlo walk simulation.

pub mod cumulant;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod stable;
pub mod truncation;

pub use error::{Result, TlfError};
pub use stable::StableParams;
pub use truncation::{DeformationKind, DeformationSpec, TlfModel};
