//! Exact-arithmetic toolkit for truthful mechanism design: monotonicity and
//! truthfulness checks, scheduling and routing mechanisms, lower-bound
//! searches over small type domains, and fairness objectives.

pub mod error;
pub mod exec;
pub mod fairness;
pub mod lowerbounds;
pub mod lp;
pub mod model;
pub mod monotonicity;
pub mod routing;
pub mod scalar;
pub mod scheduling;

pub use error::{Error, Result};
pub use num_rational::BigRational;
pub use scalar::ExactScalar;
