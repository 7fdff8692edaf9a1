//! Numbers of the form `q·π^{h/2}·√r`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::factor::square_split;
use super::rational::{format_rational, parse_rational, to_f64, Rational};
use super::AlgebraError;

/// Exact value `q·π^{h/2}·√r`.
///
/// The radicand is kept as a squarefree positive integer: a rational
/// radicand `a/b` is rewritten as `√(ab)/b`, which makes the representation
/// unique. Zero is always `(0, 0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    q: Rational,
    h: i64,
    r: BigUint,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar { q: Rational::zero(), h: 0, r: BigUint::one() }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(q: Rational) -> Self {
        Self::from_parts(q, 0, BigUint::one())
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `π^{h/2}`.
    pub fn sqrt_pi_power(h: i64) -> Self {
        ExactScalar { q: Rational::one(), h, r: BigUint::one() }
    }

    /// Builds and canonicalizes `q·π^{h/2}·√r` for a positive rational `r`.
    pub fn new(q: Rational, h: i64, r: Rational) -> Result<Self, AlgebraError> {
        if !r.is_positive() {
            return Err(AlgebraError::NonPositiveRadicand);
        }
        let (num, den) = (r.numer().magnitude().clone(), r.denom().magnitude().clone());
        let (s, t) = square_split(&(&num * &den));
        let scale = Rational::new(BigInt::from(s), BigInt::from(den));
        Ok(Self::from_parts(q * scale, h, t))
    }

    /// `√x` for a nonnegative rational.
    pub fn sqrt_rational(x: &Rational) -> Result<Self, AlgebraError> {
        if x.is_negative() {
            return Err(AlgebraError::NegativeSqrt);
        }
        if x.is_zero() {
            return Ok(Self::zero());
        }
        Self::new(Rational::one(), 0, x.clone())
    }

    fn from_parts(q: Rational, h: i64, r: BigUint) -> Self {
        if q.is_zero() {
            Self::zero()
        } else {
            ExactScalar { q, h, r }
        }
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    /// Exponent of `√π`.
    pub fn h(&self) -> i64 {
        self.h
    }

    pub fn radicand(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.r.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.h == 0 && self.r.is_one()
    }

    /// The rational value, when there is no π or radical part.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.q)
    }

    pub fn signum(&self) -> i32 {
        if self.q.is_zero() {
            0
        } else if self.q.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Same one-dimensional class `π^{h/2}√r·ℚ` (zero belongs to every class).
    pub fn same_class(&self, other: &Self) -> bool {
        self.is_zero() || other.is_zero() || (self.h == other.h && self.r == other.r)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if !self.same_class(other) {
            return Err(AlgebraError::IncompatibleClass { left: self.to_string(), right: other.to_string() });
        }
        Ok(Self::from_parts(&self.q + &other.q, self.h, self.r.clone()))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&-other)
    }

    /// Sum of same-class terms.
    pub fn try_sum<'a>(items: impl IntoIterator<Item = &'a Self>) -> Result<Self, AlgebraError> {
        let mut acc = Self::zero();
        for x in items {
            acc = acc.checked_add(x)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_parts(&self.q * c, self.h, self.r.clone())
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        // 1/(q√r) = √r/(q r)
        let r = Rational::from_integer(BigInt::from(self.r.clone()));
        Ok(ExactScalar { q: (&self.q * r).recip(), h: -self.h, r: self.r.clone() })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, e: i64) -> Result<Self, AlgebraError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Square root; defined when the value is `q·π^{h/2}` with `q ≥ 0`, `h` even.
    pub fn sqrt(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.q.is_negative() {
            return Err(AlgebraError::NegativeSqrt);
        }
        if !self.r.is_one() || self.h % 2 != 0 {
            return Err(AlgebraError::NotRepresentable(format!("sqrt({self})")));
        }
        let root = Self::sqrt_rational(&self.q)?;
        Ok(ExactScalar { q: root.q, h: self.h / 2, r: root.r })
    }

    /// Compares two values of the same class exactly.
    pub fn cmp_same_class(&self, other: &Self) -> Result<Ordering, AlgebraError> {
        if !self.same_class(other) {
            return Err(AlgebraError::IncompatibleClass { left: self.to_string(), right: other.to_string() });
        }
        Ok(self.q.cmp(&other.q))
    }

    /// Double-precision value.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let q = to_f64(&self.q);
        let pi_part = if self.h % 2 == 0 {
            std::f64::consts::PI.powi((self.h / 2) as i32)
        } else {
            // π^{h/2} = π^{(h-1)/2}·√π
            std::f64::consts::PI.powi(((self.h - 1) / 2) as i32) * std::f64::consts::PI.sqrt()
        };
        let root =
            if self.r.is_one() { 1.0 } else { to_f64(&Rational::from_integer(BigInt::from(self.r.clone()))).sqrt() };
        q * pi_part * root
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        if self.is_zero() || rhs.is_zero() {
            return ExactScalar::zero();
        }
        // both radicands are squarefree, so a·b = g²·(a/g)(b/g) with the
        // cofactor again squarefree
        let g = self.r.gcd(&rhs.r);
        let r = (&self.r / &g) * (&rhs.r / &g);
        let q = &self.q * &rhs.q * Rational::from_integer(BigInt::from(g));
        ExactScalar::from_parts(q, self.h + rhs.h, r)
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Div for &ExactScalar {
    type Output = ExactScalar;
    /// Panics on division by zero; use `checked_div` for a `Result`.
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs).expect("division by exact zero")
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::from_parts(-&self.q, self.h, self.r.clone())
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)?;
        match self.h {
            0 => {}
            1 => write!(f, "·√π")?,
            2 => write!(f, "·π")?,
            h if h % 2 == 0 => write!(f, "·π^{}", h / 2)?,
            h => write!(f, "·π^({h}/2)")?,
        }
        if !self.r.is_one() {
            write!(f, "·√{}", self.r)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    q: String,
    h: i64,
    r: String,
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ScalarRepr { q: format_rational(&self.q), h: self.h, r: format_rational(&self.radicand()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ScalarRepr::deserialize(d)?;
        let q = parse_rational(&repr.q).map_err(D::Error::custom)?;
        let r = parse_rational(&repr.r).map_err(D::Error::custom)?;
        ExactScalar::new(q, repr.h, r).map_err(D::Error::custom)
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    BigInt::from_biguint(Sign::Plus, acc)
}

/// `Γ(x)` for `x = twice_x / 2`.
pub fn gamma_exact(twice_x: i64) -> Result<ExactScalar, AlgebraError> {
    if twice_x % 2 == 0 {
        let n = twice_x / 2;
        if n <= 0 {
            return Err(AlgebraError::Pole { twice_x });
        }
        return Ok(ExactScalar::rational(Rational::from_integer(factorial((n - 1) as u64))));
    }
    // x = n + 1/2
    let n = (twice_x - 1) / 2;
    let q = if n >= 0 {
        // Γ(n+1/2) = (2n)!/(4^n n!)·√π
        let n = n as u64;
        Rational::new(factorial(2 * n), BigInt::from(4u32).pow(n as u32) * factorial(n))
    } else {
        // Γ(1/2-k) = (-4)^k k!/(2k)!·√π
        let k = (-n) as u64;
        Rational::new(BigInt::from(-4).pow(k as u32) * factorial(k), factorial(2 * k))
    };
    Ok(ExactScalar { q, h: 1, r: BigUint::one() })
}

/// Product of `Γ(x)^{±1}` factors; a denominator pole makes the product zero.
pub fn gamma_product(num: &[i64], den: &[i64]) -> Result<ExactScalar, AlgebraError> {
    for &x in den {
        if x <= 0 && x % 2 == 0 {
            return Ok(ExactScalar::zero());
        }
    }
    let mut acc = ExactScalar::one();
    for &x in num {
        acc = &acc * &gamma_exact(x)?;
    }
    for &x in den {
        acc = acc.checked_div(&gamma_exact(x)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::rational::{int, rat};
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_exact(1).unwrap(), ExactScalar::sqrt_pi_power(1));
        assert_eq!(gamma_exact(6).unwrap(), ExactScalar::integer(2));
        let g = gamma_exact(-1).unwrap();
        assert_eq!(g, ExactScalar::sqrt_pi_power(1).scale(&int(-2)));
        assert!(matches!(gamma_exact(0), Err(AlgebraError::Pole { twice_x: 0 })));
        assert!(matches!(gamma_exact(-4), Err(AlgebraError::Pole { .. })));
    }

    #[test]
    fn products() {
        let sp = ExactScalar::sqrt_pi_power(1);
        assert_eq!(&sp * &sp, ExactScalar::sqrt_pi_power(2));
        let a = ExactScalar::new(int(2), 0, int(3)).unwrap();
        let b = ExactScalar::new(int(3), 0, int(3)).unwrap();
        assert_eq!(&a * &b, ExactScalar::integer(18));
        let g = gamma_exact(-1).unwrap();
        assert_eq!(&g * &g, ExactScalar::sqrt_pi_power(2).scale(&int(4)));
    }

    #[test]
    fn sums() {
        let inv_pi = ExactScalar::sqrt_pi_power(-2);
        let s = inv_pi.scale(&int(3)).checked_add(&inv_pi.scale(&int(5))).unwrap();
        assert_eq!(s, inv_pi.scale(&int(8)));
        let sp = ExactScalar::sqrt_pi_power(1).scale(&int(2));
        assert_eq!(ExactScalar::zero().checked_add(&sp).unwrap(), sp);
        let err = ExactScalar::sqrt_pi_power(1).checked_add(&ExactScalar::sqrt_pi_power(2));
        assert!(matches!(err, Err(AlgebraError::IncompatibleClass { .. })));
    }

    #[test]
    fn floats() {
        let x = ExactScalar::sqrt_pi_power(-2).scale(&int(8));
        assert!((x.to_f64() - 2.546_479_089_470_325_4).abs() < 1e-15);
        let y = ExactScalar::sqrt_pi_power(2).scale(&rat(1, 2));
        assert_eq!(y.to_f64(), std::f64::consts::FRAC_PI_2);
        assert_eq!(ExactScalar::zero().to_f64(), 0.0);
    }

    #[test]
    fn rational_radicand_is_canonical() {
        let a = ExactScalar::new(int(1), 0, rat(3, 4)).unwrap();
        let b = ExactScalar::new(rat(1, 2), 0, int(3)).unwrap();
        assert_eq!(a, b);
        let c = ExactScalar::new(int(1), 0, rat(8, 1)).unwrap();
        assert_eq!(c, ExactScalar::new(int(2), 0, int(2)).unwrap());
    }

    #[test]
    fn sqrt_roundtrip() {
        let x = ExactScalar::sqrt_pi_power(-4).scale(&rat(75, 8));
        let r = x.sqrt().unwrap();
        assert_eq!(&r * &r, x);
    }

    #[test]
    fn json_roundtrip() {
        let x = ExactScalar::new(rat(-7, 3), -2, int(6)).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"q":"-7/3","h":-2,"r":"6/1"}"#);
        let back: ExactScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
