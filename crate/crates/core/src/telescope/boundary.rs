//! Limits of `G(m,k) = R(m,k)·F(m,k)` along lines `k = a·m + c`.
//!
//! Substituting `k = a·m + c + ε` turns every factor into a function of `m`
//! times a power of `ε`. Gamma factors whose argument loses its `m`
//! dependence sit at a fixed point; at a pole `−n` they contribute
//! `(−1)^n/(n!·s·ε)` where `s` is the `k`-slope of the argument. The total
//! `ε`-order decides whether the limit vanishes, is finite, or diverges.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::rational::pow as rat_pow;
use crate::algebra::{factorial, gamma_exact, int, AlgebraError, BiPoly, ExactScalar, Poly, RatFunc, Rational};
use crate::hyper::{GammaFactor, HyperTerm, PowerFactor};

use super::TelescopeError;

/// `constant · num(m)/den(m) · Π Γ(a·m + c)^{±1} · Π base^{a·m}`, or zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LineValue {
    pub vanishes: bool,
    pub constant: ExactScalar,
    pub num: Poly,
    pub den: Poly,
    pub gammas: Vec<GammaFactor>,
    pub powers: Vec<PowerFactor>,
}

impl LineValue {
    fn zero() -> Self {
        LineValue {
            vanishes: true,
            constant: ExactScalar::zero(),
            num: Poly::zero(),
            den: Poly::one(),
            gammas: Vec::new(),
            powers: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vanishes
    }

    /// Exact value at integer `m`.
    pub fn eval(&self, m: i64) -> Result<ExactScalar, AlgebraError> {
        if self.vanishes {
            return Ok(ExactScalar::zero());
        }
        let mr = int(m);
        let d = self.den.eval(&mr);
        if d.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let mut q = self.num.eval(&mr) / d;
        for p in &self.powers {
            q *= rat_pow(&p.base, p.m_coeff * m);
        }
        let mut acc = self.constant.scale(&q);
        for g in &self.gammas {
            let t = g.twice_arg(m, 0);
            if g.exponent < 0 && t <= 0 && t % 2 == 0 {
                return Ok(ExactScalar::zero());
            }
            let v = gamma_exact(t)?;
            acc = if g.exponent > 0 { &acc * &v } else { acc.checked_div(&v)? };
        }
        Ok(acc)
    }
}

impl fmt::Display for LineValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vanishes {
            return write!(f, "0");
        }
        write!(f, "{} * ({})", self.constant, self.num)?;
        if self.den != Poly::one() {
            write!(f, " / ({})", self.den)?;
        }
        for g in &self.gammas {
            let arg = Rational::new(BigInt::from(g.twice_c), BigInt::from(2));
            let e = if g.exponent > 0 { "" } else { "^-1" };
            write!(f, " * Gamma({}*m + {}){e}", g.m_coeff, arg)?;
        }
        for p in &self.powers {
            write!(f, " * {}^({}*m)", p.base, p.m_coeff)?;
        }
        Ok(())
    }
}

/// The telescoped inhomogeneity `G(m, top) − G(m, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    /// The top line `k = a·m + c`.
    pub top_line: (i64, i64),
    pub top: LineValue,
    pub bottom: LineValue,
}

impl Boundary {
    pub fn is_zero(&self) -> bool {
        self.top.is_zero() && self.bottom.is_zero()
    }

    pub fn eval(&self, m: i64) -> Result<ExactScalar, AlgebraError> {
        let t = self.top.eval(m)?;
        let b = self.bottom.eval(m)?;
        if t.is_zero() {
            return Ok(-&b);
        }
        if b.is_zero() {
            return Ok(t);
        }
        t.checked_sub(&b)
    }
}

/// Serializable summary of a boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundarySummary {
    pub top_line: (i64, i64),
    pub top: String,
    pub bottom: String,
    pub vanishes: bool,
}

impl From<&Boundary> for BoundarySummary {
    fn from(b: &Boundary) -> Self {
        BoundarySummary {
            top_line: b.top_line,
            top: b.top.to_string(),
            bottom: b.bottom.to_string(),
            vanishes: b.is_zero(),
        }
    }
}

/// Lowest nonzero `ε`-coefficient of `p(m, a·m + c + ε)`.
fn poly_on_line(p: &BiPoly, a: i64, c: i64) -> (i64, Poly) {
    if p.is_zero() {
        return (0, Poly::zero());
    }
    let mut q = p.clone();
    let mut order = 0i64;
    let mut fact = Rational::one();
    loop {
        let v = q.on_line(&int(a), &int(c));
        if !v.is_zero() {
            return (order, v.scale(&fact.recip()));
        }
        q = q.derivative_k();
        order += 1;
        fact *= int(order);
    }
}

/// `lim_{ε→0} R·F` on `k = a·m + c + ε`.
pub fn value_on_line(term: &HyperTerm, ratio: &RatFunc, a: i64, c: i64) -> Result<LineValue, TelescopeError> {
    let Some((order, value)) = expand_on_line(term, &[ratio.num()], &[ratio.den()], a, c)? else {
        return Ok(LineValue::zero());
    };
    if order > 0 {
        return Ok(LineValue::zero());
    }
    if order < 0 {
        return Err(TelescopeError::BoundaryDiverges { a, c });
    }
    Ok(value)
}

/// Leading `ε`-order and coefficient of `F·Πups/Πdowns` on the line;
/// `None` when a numerator factor vanishes identically.
pub(crate) fn expand_on_line(
    term: &HyperTerm,
    ups: &[&BiPoly],
    downs: &[&BiPoly],
    a: i64,
    c: i64,
) -> Result<Option<(i64, LineValue)>, TelescopeError> {
    let mut order = 0i64;
    let mut constant = term.constant.clone();
    let mut num = Poly::one();
    let mut den = Poly::one();
    for p in term.num_polys.iter().chain(ups.iter().copied()) {
        let (e, v) = poly_on_line(p, a, c);
        if v.is_zero() {
            return Ok(None);
        }
        order += e;
        num = &num * &v;
    }
    for p in term.den_polys.iter().chain(downs.iter().copied()) {
        let (e, v) = poly_on_line(p, a, c);
        order -= e;
        den = &den * &v;
    }
    let mut gammas = Vec::new();
    for g in &term.gammas {
        let slope_m = g.m_coeff + g.k_coeff * a;
        let twice = 2 * g.k_coeff * c + g.twice_c;
        if slope_m != 0 {
            gammas.push(GammaFactor { m_coeff: slope_m, k_coeff: 0, twice_c: twice, exponent: g.exponent });
            continue;
        }
        if twice <= 0 && twice % 2 == 0 {
            if g.k_coeff == 0 {
                return Err(TelescopeError::Algebra(AlgebraError::Pole { twice_x: twice }));
            }
            let n = -twice / 2;
            // Γ(−n + s·ε) ≈ (−1)^n / (n!·s·ε)
            let mut residue = Rational::from_integer(factorial(n as u64) * BigInt::from(g.k_coeff)).recip();
            if n % 2 == 1 {
                residue = -residue;
            }
            if g.exponent > 0 {
                order -= 1;
                constant = constant.scale(&residue);
            } else {
                order += 1;
                constant = constant.scale(&residue.recip());
            }
        } else {
            let v = gamma_exact(twice)?;
            constant = if g.exponent > 0 { &constant * &v } else { constant.checked_div(&v)? };
        }
    }
    let mut powers = Vec::new();
    for p in &term.powers {
        constant = constant.scale(&rat_pow(&p.base, p.k_coeff * c));
        let slope = p.m_coeff + p.k_coeff * a;
        if slope != 0 {
            powers.push(PowerFactor { base: p.base.clone(), m_coeff: slope, k_coeff: 0 });
        }
    }
    // fold the rational content into the constant
    let nc = num.content();
    let dc = den.content();
    let scale = &nc / &dc;
    let value = LineValue {
        vanishes: false,
        constant: constant.scale(&scale),
        num: num.scale(&nc.recip()),
        den: den.scale(&dc.recip()),
        gammas,
        powers,
    };
    Ok(Some((order, value)))
}
