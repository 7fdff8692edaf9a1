//! Reduced quotients of bivariate polynomials.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::bipoly::BiPoly;
use super::rational::Rational;
use super::AlgebraError;

/// `num/den` with the gcd removed and `den` normalized (integer
/// coefficients, content-free, positive leading coefficient in `k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: BiPoly,
    den: BiPoly,
}

impl RatFunc {
    pub fn new(num: BiPoly, den: BiPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = BiPoly::gcd(&num, &den);
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        let c = den.rational_content();
        Ok(RatFunc { num: num.scale(&c.recip()), den: den.scale(&c.recip()) })
    }

    /// Builds `num/den` for parts already known to be coprime; only the
    /// rational normalization of `den` is applied.
    pub fn from_coprime(num: BiPoly, den: BiPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let c = den.rational_content();
        Ok(RatFunc { num: num.scale(&c.recip()), den: den.scale(&c.recip()) })
    }

    pub fn from_poly(p: BiPoly) -> Self {
        RatFunc { num: p, den: BiPoly::one() }
    }

    pub fn zero() -> Self {
        RatFunc { num: BiPoly::zero(), den: BiPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(BiPoly::one())
    }

    pub fn num(&self) -> &BiPoly {
        &self.num
    }

    pub fn den(&self) -> &BiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Value at a point, `None` where the denominator vanishes.
    pub fn eval(&self, m: &Rational, k: &Rational) -> Option<Rational> {
        let d = self.den.eval(m, k);
        if num_traits::Zero::is_zero(&d) {
            return None;
        }
        Some(self.num.eval(m, k) / d)
    }

    pub fn shift(&self, cm: i64, ck: i64) -> Self {
        RatFunc { num: self.num.shift(cm, ck), den: self.den.shift(cm, ck) }
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    /// Panics when dividing by zero.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.den, &self.den * &rhs.num).expect("division by zero rational function")
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero denominator");
        }
        RatFunc::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
            .expect("nonzero denominators")
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::super::rational::int;
    use super::*;

    fn lin(a: i64, b: i64, c: i64) -> BiPoly {
        BiPoly::linear(int(a), int(b), int(c))
    }

    #[test]
    fn reduces_common_factors() {
        let g = lin(1, 2, 3);
        let r = RatFunc::new(&g * &lin(0, 1, 1), (&g * &lin(2, 0, 1)).scale(&int(-3))).unwrap();
        assert_eq!(r.num(), &lin(0, 1, 1).scale(&Rational::new((-1).into(), 3.into())));
        assert_eq!(r.den(), &lin(2, 0, 1));
        let again = RatFunc::new(r.num().clone(), r.den().clone()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn field_operations() {
        let a = RatFunc::new(lin(1, 1, 0), lin(0, 1, 2)).unwrap();
        let b = RatFunc::new(lin(1, 0, -1), lin(1, 1, 0)).unwrap();
        let s = &(&a + &b) - &b;
        assert_eq!(s, a);
        let p = &(&a * &b) / &b;
        assert_eq!(p, a);
        assert_eq!((&a * &b).eval(&int(2), &int(3)), Some(Rational::new(1.into(), 5.into())));
    }
}
