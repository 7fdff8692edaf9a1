//! Polynomials in two variables `m` and `k`, stored as polynomials in `k`
//! whose coefficients are polynomials in `m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::rational::Rational;

/// Bivariate polynomial; `by_k[j]` is the coefficient of `k^j` as a
/// polynomial in `m`. Trailing zero coefficients are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    by_k: Vec<Poly>,
}

impl BiPoly {
    pub fn new(mut by_k: Vec<Poly>) -> Self {
        while by_k.last().is_some_and(|c| c.is_zero()) {
            by_k.pop();
        }
        BiPoly { by_k }
    }

    pub fn zero() -> Self {
        BiPoly { by_k: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![Poly::constant(c)])
    }

    /// Embeds a polynomial in `m`.
    pub fn from_m(p: Poly) -> Self {
        Self::new(vec![p])
    }

    /// Embeds a polynomial in `k` with constant coefficients.
    pub fn from_k(p: &Poly) -> Self {
        Self::new(p.coeffs().iter().map(|c| Poly::constant(c.clone())).collect())
    }

    pub fn var_m() -> Self {
        Self::from_m(Poly::x())
    }

    pub fn var_k() -> Self {
        Self::new(vec![Poly::zero(), Poly::one()])
    }

    /// `a·m + b·k + c`.
    pub fn linear(a: Rational, b: Rational, c: Rational) -> Self {
        Self::new(vec![Poly::linear(a, c), Poly::constant(b)])
    }

    /// Builds from a dense matrix indexed `[deg_m][deg_k]`.
    pub fn from_matrix(rows: &[Vec<Rational>]) -> Self {
        let nk = rows.iter().map(Vec::len).max().unwrap_or(0);
        let by_k = (0..nk)
            .map(|j| Poly::new(rows.iter().map(|r| r.get(j).cloned().unwrap_or_else(Rational::zero)).collect()))
            .collect();
        Self::new(by_k)
    }

    /// Dense matrix indexed `[deg_m][deg_k]`.
    pub fn to_matrix(&self) -> Vec<Vec<Rational>> {
        let nm = self.by_k.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        (0..nm).map(|i| self.by_k.iter().map(|p| p.coeff(i)).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.by_k.is_empty()
    }

    pub fn k_coeffs(&self) -> &[Poly] {
        &self.by_k
    }

    /// Coefficient of `k^j` as a polynomial in `m`.
    pub fn k_coeff(&self, j: usize) -> Poly {
        self.by_k.get(j).cloned().unwrap_or_default()
    }

    pub fn coeff(&self, deg_m: usize, deg_k: usize) -> Rational {
        self.by_k.get(deg_k).map(|p| p.coeff(deg_m)).unwrap_or_else(Rational::zero)
    }

    pub fn degree_k(&self) -> Option<usize> {
        self.by_k.len().checked_sub(1)
    }

    pub fn degree_m(&self) -> Option<usize> {
        self.by_k.iter().filter_map(Poly::degree).max()
    }

    /// Leading coefficient in `k`.
    pub fn leading_k(&self) -> Poly {
        self.by_k.last().cloned().unwrap_or_default()
    }

    pub fn is_constant_in_k(&self) -> bool {
        self.by_k.len() <= 1
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.by_k.iter().map(|p| p.scale(c)).collect())
    }

    pub fn mul_m(&self, p: &Poly) -> Self {
        Self::new(self.by_k.iter().map(|c| c * p).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, m: &Rational, k: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.by_k.iter().rev() {
            acc = acc * k + c.eval(m);
        }
        acc
    }

    pub fn eval_f64(&self, m: f64, k: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.by_k.iter().rev() {
            acc = acc * k + c.eval_f64(m);
        }
        acc
    }

    /// Fixes `m`, leaving a polynomial in `k`.
    pub fn at_m(&self, m: &Rational) -> Poly {
        Poly::new(self.by_k.iter().map(|c| c.eval(m)).collect())
    }

    /// Fixes `k`, leaving a polynomial in `m`.
    pub fn at_k(&self, k: &Rational) -> Poly {
        let mut acc = Poly::zero();
        let kp = Poly::constant(k.clone());
        for c in self.by_k.iter().rev() {
            acc = &(&acc * &kp) + c;
        }
        acc
    }

    /// `p(m, a·m + c)` as a polynomial in `m`.
    pub fn on_line(&self, a: &Rational, c: &Rational) -> Poly {
        let lin = Poly::linear(a.clone(), c.clone());
        let mut acc = Poly::zero();
        for coef in self.by_k.iter().rev() {
            acc = &(&acc * &lin) + coef;
        }
        acc
    }

    /// `p(m, k + c)`.
    pub fn shift_k(&self, c: &Rational) -> Self {
        let lin = BiPoly::linear(Rational::zero(), Rational::one(), c.clone());
        let mut acc = BiPoly::zero();
        for coef in self.by_k.iter().rev() {
            acc = &(&acc * &lin) + &BiPoly::from_m(coef.clone());
        }
        acc
    }

    /// `p(m + c, k)`.
    pub fn shift_m(&self, c: &Rational) -> Self {
        Self::new(self.by_k.iter().map(|p| p.shift(c)).collect())
    }

    /// `p(m + cm, k + ck)` for integer shifts.
    pub fn shift(&self, cm: i64, ck: i64) -> Self {
        let mut out = self.clone();
        if cm != 0 {
            out = out.shift_m(&Rational::from_integer(cm.into()));
        }
        if ck != 0 {
            out = out.shift_k(&Rational::from_integer(ck.into()));
        }
        out
    }

    /// Swaps the roles of `m` and `k`.
    pub fn transpose(&self) -> Self {
        let mat = self.to_matrix();
        let nk = mat.first().map(Vec::len).unwrap_or(0);
        let rows: Vec<Vec<Rational>> = (0..nk).map(|j| mat.iter().map(|r| r[j].clone()).collect()).collect();
        // rows[j][i] = coeff(m^i k^j) so as a [deg_m][deg_k] matrix it is
        // the transpose
        Self::from_matrix(&rows)
    }

    pub fn derivative_k(&self) -> Self {
        Self::new(
            self.by_k.iter().enumerate().skip(1).map(|(i, c)| c.scale(&Rational::from_integer(i.into()))).collect(),
        )
    }

    pub fn derivative_m(&self) -> Self {
        Self::new(self.by_k.iter().map(Poly::derivative).collect())
    }

    /// Content in `k`: monic gcd of the coefficient polynomials.
    pub fn content_k(&self) -> Poly {
        let mut g = Poly::zero();
        for c in &self.by_k {
            g = if g.is_zero() { c.monic() } else { Poly::gcd(&g, c) };
            if g.degree() == Some(0) {
                break;
            }
        }
        g
    }

    /// Removes the polynomial content in `k` and the rational content, with
    /// a positive leading coefficient (leading in `k`, then in `m`).
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self.content_k();
        let mut out: Vec<Poly> = self.by_k.iter().map(|c| c.div_exact(&g).expect("content divides")).collect();
        let mut out_bp = BiPoly::new(std::mem::take(&mut out));
        let rc = out_bp.rational_content();
        out_bp = out_bp.scale(&rc.recip());
        out_bp
    }

    /// Positive rational gcd of all coefficients, signed so that the
    /// leading coefficient (in `k`, then `m`) becomes positive.
    pub fn rational_content(&self) -> Rational {
        if self.is_zero() {
            return Rational::one();
        }
        let all: Vec<Rational> = self.by_k.iter().flat_map(|p| p.coeffs().iter().cloned()).collect();
        let mut c = Poly::new(all).content().abs();
        if self.leading_k().leading().is_negative() {
            c = -c;
        }
        c
    }

    /// Pseudo-remainder in `k` over ℚ[m].
    pub fn pseudo_rem_k(&self, d: &BiPoly) -> BiPoly {
        let (Some(da), Some(dd)) = (self.degree_k(), d.degree_k()) else {
            return self.clone();
        };
        if da < dd {
            return self.clone();
        }
        let lc = d.leading_k();
        let mut rem = self.by_k.clone();
        for i in (dd..=da).rev() {
            let c = rem[i].clone();
            for r in rem.iter_mut() {
                *r = &*r * &lc;
            }
            if !c.is_zero() {
                for (j, dc) in d.by_k.iter().enumerate() {
                    rem[i - dd + j] = &rem[i - dd + j] - &(&c * dc);
                }
            }
        }
        rem.truncate(dd);
        BiPoly::new(rem)
    }

    /// Greatest common divisor in ℚ[m][k], normalized by `primitive` and
    /// multiplied by the monic gcd of the `k`-contents.
    pub fn gcd(a: &BiPoly, b: &BiPoly) -> BiPoly {
        if a.is_zero() {
            return b.normalized();
        }
        if b.is_zero() {
            return a.normalized();
        }
        let ca = a.content_k();
        let cb = b.content_k();
        let c = Poly::gcd(&ca, &cb);
        let mut x = a.primitive();
        let mut y = b.primitive();
        if x.degree_k() < y.degree_k() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_zero() {
            let r = x.pseudo_rem_k(&y);
            x = y;
            y = r.primitive();
        }
        x.mul_m(&c).normalized()
    }

    /// Rescales to integer coefficients with gcd 1 and positive leading
    /// coefficient, without removing any polynomial content.
    pub fn normalized(&self) -> BiPoly {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.rational_content().recip())
    }

    /// Resultant with respect to `k`, a polynomial in `m`, from the
    /// Sylvester matrix by fraction-free (Bareiss) elimination.
    pub fn resultant_k(a: &BiPoly, b: &BiPoly) -> Poly {
        let (Some(da), Some(db)) = (a.degree_k(), b.degree_k()) else {
            return Poly::zero();
        };
        let n = da + db;
        if n == 0 {
            return Poly::one();
        }
        let mut mat = vec![vec![Poly::zero(); n]; n];
        for r in 0..db {
            for (j, c) in a.by_k.iter().rev().enumerate() {
                mat[r][r + j] = c.clone();
            }
        }
        for r in 0..da {
            for (j, c) in b.by_k.iter().rev().enumerate() {
                mat[db + r][r + j] = c.clone();
            }
        }
        let mut sign = false;
        let mut prev = Poly::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !mat[r][col].is_zero()) else {
                return Poly::zero();
            };
            if p != col {
                mat.swap(p, col);
                sign = !sign;
            }
            for r in col + 1..n {
                for c in col + 1..n {
                    let v = &(&mat[col][col] * &mat[r][c]) - &(&mat[r][col] * &mat[col][c]);
                    mat[r][c] = v.div_exact(&prev).expect("Bareiss step divides exactly");
                }
                mat[r][col] = Poly::zero();
            }
            prev = mat[col][col].clone();
        }
        if sign {
            -&prev
        } else {
            prev
        }
    }

    /// Exact division in ℚ[m][k]; `None` when it does not divide.
    pub fn div_exact(&self, d: &BiPoly) -> Option<BiPoly> {
        let dd = d.degree_k()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        let da = self.degree_k()?;
        if da < dd {
            return None;
        }
        let lc = d.leading_k();
        let mut rem = self.by_k.clone();
        let mut quot = vec![Poly::zero(); da - dd + 1];
        for i in (0..=da - dd).rev() {
            let c = rem[i + dd].div_exact(&lc)?;
            if !c.is_zero() {
                for (j, dc) in d.by_k.iter().enumerate() {
                    rem[i + j] = &rem[i + j] - &(&c * dc);
                }
            }
            quot[i] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(BiPoly::new(quot))
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let n = self.by_k.len().max(rhs.by_k.len());
        BiPoly::new(
            (0..n)
                .map(|i| match (self.by_k.get(i), rhs.by_k.get(i)) {
                    (Some(a), Some(b)) => a + b,
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!(),
                })
                .collect(),
        )
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        self + &(-rhs)
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly { by_k: self.by_k.iter().map(|c| -c).collect() }
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let mut out = vec![Poly::zero(); self.by_k.len() + rhs.by_k.len() - 1];
        for (i, a) in self.by_k.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.by_k.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        BiPoly::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: BiPoly) -> BiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.by_k.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "(")?;
            super::poly::fmt_poly(f, c.coeffs(), "m")?;
            write!(f, ")")?;
            match j {
                0 => {}
                1 => write!(f, "*k")?,
                _ => write!(f, "*k^{j}")?,
            }
        }
        Ok(())
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
    fn resultant_in_k_detects_shifts() {
        // res_k(k − 2, k + m) = (−2 − m)·(−1)^{…}: vanishes exactly at m = −2
        let r = BiPoly::resultant_k(&lin(0, 1, -2), &lin(1, 1, 0));
        assert_eq!(r.eval(&int(-2)), Rational::zero());
        assert_ne!(r.eval(&int(3)), Rational::zero());
        // res_k((k+1)(k+3), (k+m)) = (1−m)(3−m)
        let a = &lin(0, 1, 1) * &lin(0, 1, 3);
        let r = BiPoly::resultant_k(&a, &lin(1, 1, 0));
        assert_eq!(r.nonnegative_integer_roots(), vec![1, 3]);
    }

    #[test]
    fn gcd_of_products() {
        let g = lin(2, 1, 3);
        let a = &(&g * &lin(1, -1, 0)) * &lin(0, 2, 1);
        let b = &g * &lin(4, 1, -2);
        assert_eq!(BiPoly::gcd(&a, &b), g.normalized());
        let h = BiPoly::from_m(Poly::from_i64s(&[1, 1]));
        let a2 = &a * &h;
        let b2 = &b * &h;
        assert_eq!(BiPoly::gcd(&a2, &b2), (&g * &h).normalized());
    }

    #[test]
    fn division_and_shift() {
        let a = &lin(1, 1, 1) * &lin(-2, 1, 0);
        let q = a.div_exact(&lin(1, 1, 1)).unwrap();
        assert_eq!(q, lin(-2, 1, 0));
        assert!(a.div_exact(&lin(1, 1, 2)).is_none());
        let s = a.shift(1, -2);
        for (m, k) in [(0, 0), (3, 5), (-2, 7)] {
            assert_eq!(s.eval(&int(m), &int(k)), a.eval(&int(m + 1), &int(k - 2)));
        }
    }

    #[test]
    fn line_and_transpose() {
        let a = &lin(1, 2, 0) * &lin(0, 1, -1);
        let on = a.on_line(&int(2), &int(1));
        for m in 0..5 {
            assert_eq!(on.eval(&int(m)), a.eval(&int(m), &int(2 * m + 1)));
        }
        let t = a.transpose();
        assert_eq!(t.eval(&int(3), &int(5)), a.eval(&int(5), &int(3)));
    }
}
