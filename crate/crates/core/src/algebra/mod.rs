//! Exact arithmetic: rationals, `π`-radical scalars, half-integer Gamma
//! values, uni- and bivariate polynomials over ℚ, rational functions and a
//! fraction-free nullspace solver.

mod bipoly;
mod factor;
mod linsolve;
mod poly;
mod ratfunc;
pub mod rational;
mod scalar;

pub use bipoly::BiPoly;
pub use factor::square_split;
pub use linsolve::{mat_vec, nullspace_by_elimination, solve_nullspace};
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use rational::{int, rat, Rational};
pub use scalar::{factorial, gamma_exact, gamma_product, ExactScalar};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("Gamma has a pole at x = {}/2", twice_x)]
    Pole { twice_x: i64 },
    #[error("cannot add values of different classes: {left} and {right}")]
    IncompatibleClass { left: String, right: String },
    #[error("radicand must be positive")]
    NonPositiveRadicand,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("value not representable as q·π^(h/2)·√r: {0}")]
    NotRepresentable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Sum of two scalars of the same class.
pub fn scalar_add(a: &ExactScalar, b: &ExactScalar) -> Result<ExactScalar, AlgebraError> {
    a.checked_add(b)
}

/// Product of two scalars.
pub fn scalar_mul(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    a * b
}

pub fn scalar_to_float(a: &ExactScalar) -> f64 {
    a.to_f64()
}

pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    Poly::gcd(a, b)
}

pub fn resultant(a: &Poly, b: &Poly) -> Rational {
    Poly::resultant(a, b)
}
