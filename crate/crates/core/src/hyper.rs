//! Symbolic hypergeometric terms in two integer variables `(m, k)`:
//! a constant times polynomial factors, powers and Gamma factors whose
//! arguments are affine in `m` and `k`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::rational::pow as rat_pow;
use crate::algebra::{gamma_exact, int, AlgebraError, BiPoly, ExactScalar, RatFunc, Rational};

/// `Γ(a_m·m + a_k·k + twice_c/2)^{exponent}`, exponent ±1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaFactor {
    pub m_coeff: i64,
    pub k_coeff: i64,
    pub twice_c: i64,
    pub exponent: i64,
}

impl GammaFactor {
    pub fn num(m_coeff: i64, k_coeff: i64, twice_c: i64) -> Self {
        GammaFactor { m_coeff, k_coeff, twice_c, exponent: 1 }
    }

    pub fn den(m_coeff: i64, k_coeff: i64, twice_c: i64) -> Self {
        GammaFactor { m_coeff, k_coeff, twice_c, exponent: -1 }
    }

    /// Twice the argument at integer `(m, k)`.
    pub fn twice_arg(&self, m: i64, k: i64) -> i64 {
        2 * (self.m_coeff * m + self.k_coeff * k) + self.twice_c
    }

    /// The argument as a polynomial in `(m, k)`.
    pub fn arg(&self) -> BiPoly {
        BiPoly::linear(int(self.m_coeff), int(self.k_coeff), Rational::new(self.twice_c.into(), 2.into()))
    }

    fn is_pole_at(&self, m: i64, k: i64) -> bool {
        let t = self.twice_arg(m, k);
        t <= 0 && t % 2 == 0
    }
}

/// `Γ(x+s)/Γ(x)` as a pair of polynomials in `(m,k)` where `x` is the
/// factor's argument.
fn shift_quotient(x: &BiPoly, s: i64) -> (BiPoly, BiPoly) {
    let mut num = BiPoly::one();
    let mut den = BiPoly::one();
    if s > 0 {
        for i in 0..s {
            num = &num * &(x + &BiPoly::constant(int(i)));
        }
    } else {
        for i in 1..=(-s) {
            den = &den * &(x - &BiPoly::constant(int(i)));
        }
    }
    (num, den)
}

/// `base^{a_m·m + a_k·k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerFactor {
    pub base: Rational,
    pub m_coeff: i64,
    pub k_coeff: i64,
}

/// Summation range `k = 0..=K(m)` with `K(m) = min(a·m + c, cap)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperLimit {
    pub m_coeff: i64,
    pub constant: i64,
    pub cap: Option<i64>,
}

impl UpperLimit {
    pub fn affine(m_coeff: i64, constant: i64) -> Self {
        UpperLimit { m_coeff, constant, cap: None }
    }

    pub fn at(&self, m: i64) -> i64 {
        let v = self.m_coeff * m + self.constant;
        match self.cap {
            Some(c) => v.min(c),
            None => v,
        }
    }
}

/// A bivariate hypergeometric term.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperTerm {
    pub constant: ExactScalar,
    pub num_polys: Vec<BiPoly>,
    pub den_polys: Vec<BiPoly>,
    pub gammas: Vec<GammaFactor>,
    pub powers: Vec<PowerFactor>,
    pub upper: UpperLimit,
}

impl HyperTerm {
    pub fn new(constant: ExactScalar, upper: UpperLimit) -> Self {
        HyperTerm {
            constant,
            num_polys: Vec::new(),
            den_polys: Vec::new(),
            gammas: Vec::new(),
            powers: Vec::new(),
            upper,
        }
    }

    pub fn num_poly(mut self, p: BiPoly) -> Self {
        self.num_polys.push(p);
        self
    }

    pub fn den_poly(mut self, p: BiPoly) -> Self {
        self.den_polys.push(p);
        self
    }

    pub fn gamma(mut self, g: GammaFactor) -> Self {
        self.gammas.push(g);
        self
    }

    pub fn power(mut self, p: PowerFactor) -> Self {
        self.powers.push(p);
        self
    }

    fn poly_value(&self, m: &Rational, k: &Rational) -> Result<Rational, AlgebraError> {
        let mut v = Rational::one();
        for p in &self.num_polys {
            v *= p.eval(m, k);
        }
        for p in &self.den_polys {
            let d = p.eval(m, k);
            if d.is_zero() {
                return Err(AlgebraError::DivisionByZero);
            }
            v /= d;
        }
        for p in &self.powers {
            v *= rat_pow(&p.base, p.m_coeff * m.to_integer_i64() + p.k_coeff * k.to_integer_i64());
        }
        Ok(v)
    }

    fn gamma_value(&self, m: i64, k: i64) -> Result<ExactScalar, AlgebraError> {
        if self.gammas.iter().any(|g| g.exponent < 0 && g.is_pole_at(m, k)) {
            return Ok(ExactScalar::zero());
        }
        let mut acc = self.constant.clone();
        for g in &self.gammas {
            let v = gamma_exact(g.twice_arg(m, k))?;
            acc = if g.exponent > 0 { &acc * &v } else { acc.checked_div(&v)? };
        }
        Ok(acc)
    }

    /// Exact value at integer `(m, k)`. A Gamma pole in a denominator gives 0.
    pub fn eval(&self, m: i64, k: i64) -> Result<ExactScalar, AlgebraError> {
        let g = self.gamma_value(m, k)?;
        if g.is_zero() {
            return Ok(g);
        }
        Ok(g.scale(&self.poly_value(&int(m), &int(k))?))
    }

    /// Floating value at integer `(m, k)`.
    pub fn eval_f64(&self, m: i64, k: i64) -> Result<f64, AlgebraError> {
        self.eval(m, k).map(|v| v.to_f64())
    }

    /// `Σ_{k=0}^{K(m)} F(m,k)`, stepping the Gamma part by rational ratios.
    pub fn sum(&self, m: i64) -> Result<ExactScalar, AlgebraError> {
        let top = self.upper.at(m);
        let mut acc = ExactScalar::zero();
        let mut gamma_part: Option<ExactScalar> = None;
        for k in 0..=top.max(-1) {
            let clean = |kk: i64| self.gammas.iter().all(|g| !g.is_pole_at(m, kk));
            let g = match gamma_part.take() {
                Some(prev) if clean(k - 1) && clean(k) && !prev.is_zero() => {
                    prev.scale(&self.gamma_k_ratio_at(m, k - 1))
                }
                _ => self.gamma_value(m, k)?,
            };
            if !g.is_zero() {
                let term = g.scale(&self.poly_value(&int(m), &int(k))?);
                acc = acc.checked_add(&term)?;
            }
            gamma_part = Some(g);
        }
        Ok(acc)
    }

    /// Gamma part of `F(m,k+1)/F(m,k)` at a point where no argument is a pole.
    fn gamma_k_ratio_at(&self, m: i64, k: i64) -> Rational {
        let mut r = Rational::one();
        for g in &self.gammas {
            let x = Rational::new(BigInt::from(g.twice_arg(m, k)), BigInt::from(2));
            let s = g.k_coeff;
            let mut q = Rational::one();
            if s > 0 {
                for i in 0..s {
                    q *= &x + int(i);
                }
            } else {
                for i in 1..=(-s) {
                    q /= &x - int(i);
                }
            }
            if g.exponent > 0 {
                r *= q;
            } else {
                r /= q;
            }
        }
        r
    }

    /// `F(m + dm, k + dk)/F(m, k)` as a reduced rational function.
    pub fn shift_ratio(&self, dm: i64, dk: i64) -> RatFunc {
        let mut num = BiPoly::one();
        let mut den = BiPoly::one();
        for p in &self.num_polys {
            num = &num * &p.shift(dm, dk);
            den = &den * p;
        }
        for p in &self.den_polys {
            num = &num * p;
            den = &den * &p.shift(dm, dk);
        }
        for g in &self.gammas {
            let s = g.m_coeff * dm + g.k_coeff * dk;
            let (a, b) = shift_quotient(&g.arg(), s);
            if g.exponent > 0 {
                num = &num * &a;
                den = &den * &b;
            } else {
                num = &num * &b;
                den = &den * &a;
            }
        }
        let mut scale = Rational::one();
        for p in &self.powers {
            scale *= rat_pow(&p.base, p.m_coeff * dm + p.k_coeff * dk);
        }
        RatFunc::new(num.scale(&scale), den).expect("nonzero denominator")
    }

    /// `F(m, k+1)/F(m, k)`.
    pub fn k_ratio(&self) -> RatFunc {
        self.shift_ratio(0, 1)
    }

    /// `F(m+1, k)/F(m, k)`.
    pub fn m_ratio(&self) -> RatFunc {
        self.shift_ratio(1, 0)
    }
}

trait ToI64 {
    fn to_integer_i64(&self) -> i64;
}

impl ToI64 for Rational {
    fn to_integer_i64(&self) -> i64 {
        let t = self.to_integer();
        i64::try_from(t).unwrap_or_else(|_| panic!("exponent out of range: {self}"))
    }
}

/// `Σ_{k=0}^{m} 2^k`: the geometric self-test term with a nonzero boundary.
pub fn geometric_term() -> HyperTerm {
    HyperTerm::new(ExactScalar::one(), UpperLimit::affine(1, 0)).power(PowerFactor {
        base: int(2),
        m_coeff: 0,
        k_coeff: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn geometric_sum_and_ratios() {
        let t = geometric_term();
        assert_eq!(t.sum(5).unwrap(), ExactScalar::integer(63));
        assert_eq!(t.k_ratio().eval(&int(3), &int(4)), Some(int(2)));
        assert_eq!(t.m_ratio().eval(&int(3), &int(4)), Some(int(1)));
    }

    #[test]
    fn binomial_term() {
        // binom(m, k) = Γ(m+1)/(Γ(k+1)Γ(m−k+1)), summing to 2^m
        let t = HyperTerm::new(ExactScalar::one(), UpperLimit::affine(1, 0))
            .gamma(GammaFactor::num(1, 0, 2))
            .gamma(GammaFactor::den(0, 1, 2))
            .gamma(GammaFactor::den(1, -1, 2));
        for m in 0..12 {
            assert_eq!(t.sum(m).unwrap(), ExactScalar::integer(1 << m));
        }
        // natural boundary: k beyond m vanishes
        assert!(t.eval(3, 5).unwrap().is_zero());
        let r = t.k_ratio();
        assert_eq!(r.eval(&int(6), &int(2)), Some(rat(4, 3)));
        let r = t.m_ratio();
        assert_eq!(r.eval(&int(6), &int(2)), Some(rat(7, 5)));
    }

    #[test]
    fn half_integer_gammas_step_correctly() {
        // Γ(k−1/2)/Γ(k+1) summed with the ratio walk equals direct sums
        let t = HyperTerm::new(ExactScalar::one(), UpperLimit::affine(2, 1))
            .gamma(GammaFactor::num(0, 1, -1))
            .gamma(GammaFactor::den(0, 1, 2))
            .num_poly(BiPoly::linear(int(1), int(-1), int(3)));
        for m in 0..5 {
            let direct = (0..=2 * m + 1)
                .map(|k| t.eval(m, k).unwrap())
                .try_fold(ExactScalar::zero(), |a, b| a.checked_add(&b))
                .unwrap();
            assert_eq!(t.sum(m).unwrap(), direct);
        }
    }
}
