//! Rational functions of `(m, k)` kept as a constant times lists of
//! normalized polynomial factors, so that shifts and cancellations never
//! expand large products.

use num_traits::One;

use crate::algebra::rational::pow as rat_pow;
use crate::algebra::{int, BiPoly, Rational};
use crate::hyper::HyperTerm;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Factored {
    pub constant: Rational,
    pub num: Vec<BiPoly>,
    pub den: Vec<BiPoly>,
}

impl Factored {
    pub fn one() -> Self {
        Factored { constant: Rational::one(), num: Vec::new(), den: Vec::new() }
    }

    pub fn push_num(&mut self, p: BiPoly) {
        if let Some(f) = absorb(&mut self.constant, p, false) {
            self.num.push(f);
        }
    }

    pub fn push_den(&mut self, p: BiPoly) {
        if let Some(f) = absorb(&mut self.constant, p, true) {
            self.den.push(f);
        }
    }

    /// Removes factors common to numerator and denominator.
    pub fn cancel(&mut self) {
        let mut i = 0;
        while i < self.num.len() {
            if let Some(j) = self.den.iter().position(|d| *d == self.num[i]) {
                self.num.swap_remove(i);
                self.den.swap_remove(j);
            } else {
                i += 1;
            }
        }
        sort_factors(&mut self.num);
        sort_factors(&mut self.den);
    }

    pub fn num_product(&self) -> BiPoly {
        product(&self.num).scale(&self.constant)
    }

    pub fn den_product(&self) -> BiPoly {
        product(&self.den)
    }
}

/// Splits off the rational content of `p` into `constant`; returns the
/// normalized factor, or `None` when `p` was a constant.
fn absorb(constant: &mut Rational, p: BiPoly, invert: bool) -> Option<BiPoly> {
    assert!(!p.is_zero(), "zero factor");
    if p.degree_k() == Some(0) && p.degree_m() == Some(0) {
        let c = p.coeff(0, 0);
        if invert {
            *constant /= c;
        } else {
            *constant *= c;
        }
        return None;
    }
    let c = p.rational_content();
    if invert {
        *constant /= &c;
    } else {
        *constant *= &c;
    }
    Some(p.scale(&c.recip()))
}

/// Normalizes `p`, returning the factor and the constant it was divided by.
pub(crate) fn normalize(p: &BiPoly) -> (Rational, BiPoly) {
    let c = p.rational_content();
    (c.clone(), p.scale(&c.recip()))
}

pub(crate) fn product(fs: &[BiPoly]) -> BiPoly {
    fs.iter().fold(BiPoly::one(), |acc, f| &acc * f)
}

fn sort_factors(fs: &mut [BiPoly]) {
    fs.sort_by_key(|f| format!("{:>4}{:>4}{f}", f.degree_k().unwrap_or(0), f.degree_m().unwrap_or(0)));
}

/// `F(m+dm, k+dk)/F(m, k)` as a factor list.
pub(crate) fn ratio_factors(term: &HyperTerm, dm: i64, dk: i64) -> Factored {
    let mut out = Factored::one();
    for p in &term.num_polys {
        out.push_num(p.shift(dm, dk));
        out.push_den(p.clone());
    }
    for p in &term.den_polys {
        out.push_num(p.clone());
        out.push_den(p.shift(dm, dk));
    }
    for g in &term.gammas {
        let s = g.m_coeff * dm + g.k_coeff * dk;
        let x = g.arg();
        // Γ(x+s)/Γ(x) = Π_{i<s}(x+i) or 1/Π_{i=1}^{|s|}(x−i)
        let pieces: Vec<BiPoly> = if s > 0 {
            (0..s).map(|i| &x + &BiPoly::constant(int(i))).collect()
        } else {
            (1..=-s).map(|i| &x - &BiPoly::constant(int(i))).collect()
        };
        let upstairs = (s > 0) == (g.exponent > 0);
        for p in pieces {
            if upstairs {
                out.push_num(p);
            } else {
                out.push_den(p);
            }
        }
    }
    for p in &term.powers {
        out.constant *= rat_pow(&p.base, p.m_coeff * dm + p.k_coeff * dk);
    }
    out.cancel();
    out
}

/// Least common multiple of several factor multisets.
pub(crate) fn lcm_lists<'a>(lists: impl IntoIterator<Item = &'a Vec<BiPoly>>) -> Vec<BiPoly> {
    let mut out: Vec<BiPoly> = Vec::new();
    for list in lists {
        let mut have = out.clone();
        for f in list {
            if let Some(i) = have.iter().position(|h| h == f) {
                have.swap_remove(i);
            } else {
                out.push(f.clone());
            }
        }
    }
    sort_factors(&mut out);
    out
}

/// `whole − part` as multisets; `part` must be contained in `whole`.
pub(crate) fn list_difference(whole: &[BiPoly], part: &[BiPoly]) -> Vec<BiPoly> {
    let mut out = whole.to_vec();
    for f in part {
        let i = out.iter().position(|h| h == f).expect("factor list is contained");
        out.remove(i);
    }
    out
}

/// Shifts every factor in `k`, returning the new constant and factors.
pub(crate) fn shift_list(fs: &[BiPoly], dk: i64) -> (Rational, Vec<BiPoly>) {
    let mut c = Rational::one();
    let mut out = Vec::with_capacity(fs.len());
    for f in fs {
        let (fc, g) = normalize(&f.shift(0, dk));
        c *= fc;
        out.push(g);
    }
    (c, out)
}
