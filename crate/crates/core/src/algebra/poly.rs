//! Dense univariate polynomials over ℚ.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{common_denominator, Rational};

/// Polynomial with rational coefficients, ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The variable itself.
    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `a·x + b`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![b, a])
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
    }

    pub fn monomial(c: Rational, deg: usize) -> Self {
        let mut v = vec![Rational::zero(); deg + 1];
        v[deg] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + super::rational::to_f64(c);
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `p(x + c)` by Horner's scheme.
    pub fn shift(&self, c: &Rational) -> Self {
        self.compose_linear(&Rational::one(), c)
    }

    /// `p(a·x + c)`.
    pub fn compose_linear(&self, a: &Rational, c: &Rational) -> Self {
        let lin = Poly::linear(a.clone(), c.clone());
        let mut acc = Poly::zero();
        for coef in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(coef.clone());
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let lead_inv = d.leading().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Exact quotient, `None` when the division leaves a remainder.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading().recip())
    }

    /// Rational content with the sign of the leading coefficient, so that
    /// `self = content · primitive` with `primitive` integral, gcd 1 and
    /// positive leading coefficient.
    pub fn content(&self) -> Rational {
        if self.is_zero() {
            return Rational::one();
        }
        let den = common_denominator(self.coeffs.iter());
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            let n = c.numer() * (&den / c.denom());
            g = g.gcd(&n);
        }
        let mut content = Rational::new(g, den);
        if self.leading().is_negative() {
            content = -content;
        }
        content
    }

    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.content().recip())
    }

    /// Integer coefficients of the primitive part.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        self.primitive().coeffs.iter().map(|c| c.numer().clone()).collect()
    }

    /// Monic gcd over ℚ via a primitive remainder sequence.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let mut x = a.primitive();
        let mut y = b.primitive();
        if x.degree() < y.degree() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_zero() {
            let r = x.pseudo_rem(&y);
            x = y;
            y = r.primitive();
        }
        x.monic()
    }

    /// Pseudo-remainder `lc(d)^{deg a - deg d + 1}·a mod d`.
    pub fn pseudo_rem(&self, d: &Poly) -> Poly {
        let (Some(da), Some(dd)) = (self.degree(), d.degree()) else {
            return self.clone();
        };
        if da < dd {
            return self.clone();
        }
        let lc = d.leading();
        let mut rem = self.coeffs.clone();
        for i in (dd..=da).rev() {
            let c = rem[i].clone();
            for r in rem.iter_mut() {
                *r *= &lc;
            }
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i - dd + j] -= &c * dc;
                }
            }
        }
        rem.truncate(dd);
        Poly::new(rem)
    }

    /// Resultant over ℚ by the subresultant remainder sequence.
    pub fn resultant(a: &Poly, b: &Poly) -> Rational {
        let (Some(m), Some(n)) = (a.degree(), b.degree()) else {
            return Rational::zero();
        };
        // res(ca·A, cb·B) = ca^n cb^m res(A, B)
        let ca = a.content();
        let cb = b.content();
        let ia = a.integer_coeffs();
        let ib = b.integer_coeffs();
        let scale = super::rational::pow(&ca, n as i64) * super::rational::pow(&cb, m as i64);
        scale * Rational::from_integer(subresultant(ia, ib))
    }

    /// Real roots that are nonnegative integers.
    pub fn nonnegative_integer_roots(&self) -> Vec<u64> {
        let p = self.integer_coeffs();
        if p.is_empty() {
            return Vec::new();
        }
        let mut roots = Vec::new();
        // strip the factor x^v
        let v = p.iter().position(|c| !c.is_zero()).unwrap_or(0);
        if v > 0 {
            roots.push(0);
        }
        let c0 = p[v].abs();
        if p.len() - v == 1 {
            return roots;
        }
        // any integer root divides the lowest nonzero coefficient
        let Ok(bound) = u64::try_from(&c0) else {
            return roots;
        };
        let mut d = 1u64;
        while d * d <= bound {
            if bound % d == 0 {
                for cand in [d, bound / d] {
                    let x = Rational::from_integer(BigInt::from(cand));
                    if !roots.contains(&cand) && self.eval(&x).is_zero() {
                        roots.push(cand);
                    }
                }
            }
            d += 1;
        }
        roots.sort_unstable();
        roots
    }
}

fn int_degree(p: &[BigInt]) -> usize {
    p.len() - 1
}

fn int_trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn int_prem(a: &[BigInt], d: &[BigInt]) -> Vec<BigInt> {
    let (da, dd) = (int_degree(a), int_degree(d));
    let lc = &d[dd];
    let mut rem = a.to_vec();
    for i in (dd..=da).rev() {
        let c = rem[i].clone();
        for r in rem.iter_mut() {
            *r *= lc;
        }
        if !c.is_zero() {
            for (j, dc) in d.iter().enumerate() {
                rem[i - dd + j] -= &c * dc;
            }
        }
    }
    rem.truncate(dd);
    int_trim(rem)
}

fn int_pow(x: &BigInt, e: i64) -> BigInt {
    num_traits::pow(x.clone(), e as usize)
}

/// Subresultant PRS resultant of two nonzero integer polynomials.
fn subresultant(mut a: Vec<BigInt>, mut b: Vec<BigInt>) -> BigInt {
    let mut sign = BigInt::one();
    if int_degree(&a) < int_degree(&b) {
        if int_degree(&a) % 2 == 1 && int_degree(&b) % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if int_degree(&b) == 0 {
        return sign * int_pow(&b[0], int_degree(&a) as i64);
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    // the quotients stay exact in the classical subresultant recurrence
    loop {
        let (da, db) = (int_degree(&a), int_degree(&b));
        let delta = (da - db) as i64;
        if da % 2 == 1 && db % 2 == 1 {
            sign = -sign;
        }
        let r = int_prem(&a, &b);
        if r.is_empty() {
            return BigInt::zero();
        }
        let divisor = &g * int_pow(&h, delta);
        a = b;
        b = r.into_iter().map(|c| c / &divisor).collect();
        g = a[int_degree(&a)].clone();
        // h = g^δ / h^{δ-1}
        h = if delta == 0 { h } else { int_pow(&g, delta) / int_pow(&h, delta - 1) };
        if int_degree(&b) == 0 {
            let da = int_degree(&a) as i64;
            let lb = b[0].clone();
            // final step: h = lc(B)^{deg A} / h^{deg A - 1}
            let hn = if da == 0 { h } else { int_pow(&lb, da) / int_pow(&h, da - 1) };
            return sign * hn;
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(v)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        // multiply over ℤ after clearing denominators; much cheaper than
        // normalizing a rational at every step
        let (ca, ia) = (self.content(), self.integer_coeffs());
        let (cb, ib) = (rhs.content(), rhs.integer_coeffs());
        let mut out = vec![BigInt::zero(); ia.len() + ib.len() - 1];
        for (i, a) in ia.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in ib.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let c = ca * cb;
        Poly::new(out.into_iter().map(|n| Rational::from_integer(n) * &c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(f, &self.coeffs, "x")
    }
}

pub(crate) fn fmt_poly(f: &mut fmt::Formatter<'_>, coeffs: &[Rational], var: &str) -> fmt::Result {
    if coeffs.iter().all(|c| c.is_zero()) {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        first = false;
        let show_coeff = i == 0 || !mag.is_one();
        if show_coeff {
            write!(f, "{mag}")?;
        }
        match i {
            0 => {}
            1 => write!(f, "{}{var}", if show_coeff { "*" } else { "" })?,
            _ => write!(f, "{}{var}^{i}", if show_coeff { "*" } else { "" })?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::rational::{int, rat};
    use super::*;

    fn p(cs: &[i64]) -> Poly {
        Poly::from_i64s(cs)
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(Poly::gcd(&p(&[-1, 0, 1]), &p(&[-1, 1])), p(&[-1, 1]));
        assert_eq!(Poly::gcd(&p(&[2, 1]), &p(&[3, 1])), Poly::one());
    }

    #[test]
    fn resultant_examples() {
        let k = Poly::x();
        assert_eq!(Poly::resultant(&k, &k), int(0));
        assert_eq!(Poly::resultant(&p(&[-1, 1]), &p(&[1, 1])), int(2));
        assert_eq!(Poly::resultant(&p(&[1, 0, 1]), &k), int(1));
    }

    /// Sylvester determinant over ℚ by plain Gaussian elimination.
    fn sylvester(a: &Poly, b: &Poly) -> Rational {
        let (m, n) = (a.degree().unwrap(), b.degree().unwrap());
        let size = m + n;
        let mut mat = vec![vec![Rational::zero(); size]; size];
        for i in 0..n {
            for (j, c) in a.coeffs().iter().rev().enumerate() {
                mat[i][i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in b.coeffs().iter().rev().enumerate() {
                mat[n + i][i + j] = c.clone();
            }
        }
        let mut det = Rational::one();
        for col in 0..size {
            let Some(piv) = (col..size).find(|&r| !mat[r][col].is_zero()) else {
                return Rational::zero();
            };
            if piv != col {
                mat.swap(piv, col);
                det = -det;
            }
            det *= &mat[col][col];
            for r in col + 1..size {
                let f = &mat[r][col] / &mat[col][col];
                for c in col..size {
                    let v = &f * &mat[col][c];
                    mat[r][c] -= v;
                }
            }
        }
        det
    }

    #[test]
    fn resultant_matches_sylvester() {
        let cases = [
            (p(&[3, -2, 0, 5]), p(&[1, 4, -1])),
            (p(&[0, 1, 1, 1, 2]), p(&[7, 0, 3])),
            (Poly::new(vec![rat(1, 2), rat(-3, 7), int(2)]), p(&[5, 1, 0, 0, 3])),
            (p(&[1, 2, 3, 4, 5, 6]), p(&[6, 5, 4, 3, 2, 1])),
        ];
        for (a, b) in cases {
            assert_eq!(Poly::resultant(&a, &b), sylvester(&a, &b), "{a} | {b}");
            assert_eq!(Poly::resultant(&b, &a), sylvester(&b, &a), "{b} | {a}");
        }
    }

    #[test]
    fn shift_and_roots() {
        let q = p(&[-6, 11, -6, 1]); // (x-1)(x-2)(x-3)
        assert_eq!(q.nonnegative_integer_roots(), vec![1, 2, 3]);
        assert_eq!(q.shift(&int(1)).nonnegative_integer_roots(), vec![0, 1, 2]);
    }
}
