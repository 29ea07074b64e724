//! Exact scalars and univariate polynomials over them.

mod poly;
mod rational;

pub use poly::UniPoly;
pub use rational::{ParseRationalError, Rational};
