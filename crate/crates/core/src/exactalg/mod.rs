//! Exact coefficient arithmetic, multivariate polynomials and polynomial
//! matrices.

mod cyclo;
mod matrix;
mod parse;
mod poly;
mod weights;

pub use cyclo::{cyclotomic_polynomial, lcm_order, totient, CycloNumber};
pub use matrix::PolyMatrix;
pub use parse::{poly_parse, MAX_EXPONENT};
pub use poly::{rat, Monomial, Polynomial, Ring};
pub use weights::{monomial_weight, weighted_degree, Homogeneity, WeightSystem};

pub(crate) use cyclo::fmt_rational;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable {name:?} at byte {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("cyclotomic order must be positive")]
    ZeroOrder,
    #[error("no image given for variable {0:?}")]
    MissingImage(String),
    #[error("image of {0:?} lives on a different ring")]
    RingMismatch(String),
    #[error("no weight given for variable {0:?}")]
    MissingWeight(String),
    #[error("weight of {0:?} must be positive")]
    NonPositiveWeight(String),
}

/// Parses a rational literal `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<num_rational::BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: num_bigint::BigInt = n.parse().ok()?;
    let d: num_bigint::BigInt = d.parse().ok()?;
    if num_traits::Zero::is_zero(&d) {
        return None;
    }
    Some(num_rational::BigRational::new(n, d))
}

/// Renders a rational as `p` or `p/q`.
pub fn rational_string(r: &num_rational::BigRational) -> String {
    fmt_rational(r)
}
