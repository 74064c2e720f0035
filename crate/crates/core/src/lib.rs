//! Exact computations with (a,b)-modules: truncated series, the operator
//! algebra `a b - b a = b^2`, log-asymptotic expansion modules, theme
//! presentations and the classification procedures built on them.

pub mod ab_algebra;
pub mod classify;
pub mod error;
pub mod linalg;
pub mod parse;
pub mod series;
pub mod theme;
pub mod xi;

pub use error::{Error, Result};
pub use series::{rat, Rational, TruncSeries};
