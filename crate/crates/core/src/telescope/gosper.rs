//! Gosper–Petkovšek normal form of a rational function of `k` over ℚ(m).

use num_traits::{One, Zero};

use super::factors::{normalize, product, Factored};
use crate::algebra::{int, BiPoly, Poly, RatFunc, Rational};

/// Specializations of `m` used to locate integer shifts and certify their
/// absence.
const PROBE_M: [i64; 2] = [7, 13];

/// `r/s = (p1(k+1)/p1(k))·(p2(k)/p3(k))` with `gcd(p2(k), p3(k+j)) = 1`
/// for every integer `j ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GosperForm {
    pub p1: BiPoly,
    pub p2: BiPoly,
    pub p3: BiPoly,
    /// Every `resultant_k(p2(k), p3(k+j))` with `j` up to `shift_bound` is
    /// nonzero at some probe value of `m`.
    pub shift_free: bool,
    pub shift_bound: usize,
    pub(crate) p1_factors: Vec<BiPoly>,
    pub(crate) p2_factors: Vec<BiPoly>,
    pub(crate) p3_factors: Vec<BiPoly>,
    pub(crate) p2_constant: Rational,
}

impl GosperForm {
    /// `p1(k+1)·p2(k)·s(k) − p1(k)·p3(k)·r(k)`, zero when the form is right.
    pub fn defect(&self, ratio: &RatFunc) -> BiPoly {
        let lhs = &(&self.p1.shift(0, 1) * &self.p2) * ratio.den();
        let rhs = &(&self.p1 * &self.p3) * ratio.num();
        &lhs - &rhs
    }
}

/// Normal form of a reduced `r/s`.
pub fn gosper_form(r_over_s: &RatFunc) -> GosperForm {
    let mut f = Factored::one();
    if !r_over_s.num().is_zero() {
        f.push_num(r_over_s.num().clone());
    }
    f.push_den(r_over_s.den().clone());
    gosper_factored(f)
}

pub(crate) fn gosper_factored(ratio: Factored) -> GosperForm {
    let Factored { constant, num: mut p2, den: mut p3 } = ratio;
    let mut p2_constant = constant;
    let mut p1: Vec<BiPoly> = Vec::new();
    loop {
        if let Some((i, j, h)) = find_equal_shift(&p2, &p3) {
            let a = p2.remove(i);
            let b = p3.remove(j);
            // a(k) = λ·b(k+h)
            let bs = b.shift(0, h);
            let lambda = a.leading_k().leading() / bs.leading_k().leading();
            p2_constant *= &lambda;
            for s in 1..=h {
                p1.push(normalize(&a.shift(0, -s)).1);
            }
            continue;
        }
        if split_hidden_shift(&mut p2, &mut p3, &mut p2_constant) {
            continue;
        }
        break;
    }
    let deg = p2.iter().chain(&p3).filter_map(BiPoly::degree_k).max().unwrap_or(0);
    let p2_full = product(&p2).scale(&p2_constant);
    let p3_full = product(&p3);
    let shift_bound = 4 * deg + 20;
    let shift_free = certify_shift_free(&p2_full, &p3_full, shift_bound);
    GosperForm {
        p1: product(&p1),
        p2: p2_full,
        p3: p3_full,
        shift_free,
        shift_bound,
        p1_factors: p1,
        p2_factors: p2,
        p3_factors: p3,
        p2_constant,
    }
}

/// A pair `a ∈ p2`, `b ∈ p3` with `a(k) ∝ b(k+h)`, `h ≥ 0` a constant.
fn find_equal_shift(p2: &[BiPoly], p3: &[BiPoly]) -> Option<(usize, usize, i64)> {
    for (i, a) in p2.iter().enumerate() {
        let Some(d) = a.degree_k().filter(|&d| d > 0) else {
            continue;
        };
        for (j, b) in p3.iter().enumerate() {
            if b.degree_k() != Some(d) {
                continue;
            }
            let Some(h) = constant_shift(a, b, d) else {
                continue;
            };
            if h >= 0 && normalize(&b.shift(0, h)).1 == *a {
                return Some((i, j, h));
            }
        }
    }
    None
}

/// `(a_{d−1}/a_d − b_{d−1}/b_d)/d` when it is an integer constant.
fn constant_shift(a: &BiPoly, b: &BiPoly, d: usize) -> Option<i64> {
    let (ad, ad1) = (a.k_coeff(d), a.k_coeff(d - 1));
    let (bd, bd1) = (b.k_coeff(d), b.k_coeff(d - 1));
    let num = &(&ad1 * &bd) - &(&bd1 * &ad);
    let den = (&ad * &bd).scale(&int(d as i64));
    if num.is_zero() {
        return Some(0);
    }
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() || q.degree() != Some(0) {
        return None;
    }
    let h = q.coeff(0);
    if !h.is_integer() {
        return None;
    }
    i64::try_from(h.to_integer()).ok()
}

/// Looks for a common factor of `a(k)` and `b(k+h)` that is not a whole
/// factor, by resultant roots at the probe values; splits it out.
fn split_hidden_shift(p2: &mut Vec<BiPoly>, p3: &mut Vec<BiPoly>, constant: &mut Rational) -> bool {
    for i in 0..p2.len() {
        if p2[i].degree_k().unwrap_or(0) == 0 {
            continue;
        }
        for j in 0..p3.len() {
            if p3[j].degree_k().unwrap_or(0) == 0 {
                continue;
            }
            for h in shift_candidates(&p2[i], &p3[j]) {
                let g = BiPoly::gcd(&p2[i], &p3[j].shift(0, h));
                if g.degree_k().unwrap_or(0) == 0 {
                    continue;
                }
                let a = p2.remove(i);
                let b = p3.remove(j);
                let gb = g.shift(0, -h);
                let a_rest = a.div_exact(&g).expect("gcd divides");
                let b_rest = b.div_exact(&gb).expect("shifted gcd divides");
                let mut f = Factored { constant: constant.clone(), num: Vec::new(), den: Vec::new() };
                f.push_num(g);
                f.push_num(a_rest);
                f.push_den(gb);
                f.push_den(b_rest);
                *constant = f.constant;
                p2.extend(f.num);
                p3.extend(f.den);
                return true;
            }
        }
    }
    false
}

/// Nonnegative integers `h` with `resultant_k(a(k), b(k+h)) = 0` at every
/// probe value of `m`.
fn shift_candidates(a: &BiPoly, b: &BiPoly) -> Vec<i64> {
    let mut common: Option<Vec<u64>> = None;
    for m0 in PROBE_M {
        let am = a.at_m(&int(m0));
        let bm = b.at_m(&int(m0));
        if am.degree().unwrap_or(0) == 0 || bm.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let res = BiPoly::resultant_k(&BiPoly::from_k(&am), &compose_shift(&bm));
        let roots = if res.is_zero() { Vec::new() } else { res.nonnegative_integer_roots() };
        common = Some(match common {
            None => roots,
            Some(prev) => prev.into_iter().filter(|r| roots.contains(r)).collect(),
        });
    }
    common.unwrap_or_default().into_iter().map(|h| h as i64).collect()
}

/// `b(k + h)` as a polynomial in `(h, k)`, with `h` in the first slot.
fn compose_shift(b: &Poly) -> BiPoly {
    let lin = BiPoly::linear(Rational::one(), Rational::one(), Rational::zero());
    let mut acc = BiPoly::zero();
    for c in b.coeffs().iter().rev() {
        acc = &(&acc * &lin) + &BiPoly::constant(c.clone());
    }
    acc
}

/// `resultant(p2(k), p3(k+j)) ≠ 0` at some probe `m` for every `j ≤ bound`.
pub(crate) fn certify_shift_free(p2: &BiPoly, p3: &BiPoly, bound: usize) -> bool {
    if p2.degree_k().unwrap_or(0) == 0 || p3.degree_k().unwrap_or(0) == 0 {
        return true;
    }
    (0..=bound as i64).all(|j| {
        let shifted = p3.shift(0, j);
        PROBE_M.iter().any(|&m0| {
            let lead_ok = !p2.leading_k().eval(&int(m0)).is_zero() && !shifted.leading_k().eval(&int(m0)).is_zero();
            lead_ok && !Poly::resultant(&p2.at_m(&int(m0)), &shifted.at_m(&int(m0))).is_zero()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(a: i64, b: i64, c: i64) -> BiPoly {
        BiPoly::linear(int(a), int(b), int(c))
    }

    #[test]
    fn pure_telescoping_ratio() {
        let r = RatFunc::new(lin(0, 1, 1), lin(0, 1, 0)).unwrap();
        let g = gosper_form(&r);
        assert_eq!(g.p1, lin(0, 1, 0));
        assert_eq!(g.p2, BiPoly::one());
        assert_eq!(g.p3, BiPoly::one());
        assert!(g.defect(&r).is_zero());
    }

    #[test]
    fn unit_ratio() {
        let g = gosper_form(&RatFunc::one());
        assert_eq!((g.p1.clone(), g.p2.clone(), g.p3.clone()), (BiPoly::one(), BiPoly::one(), BiPoly::one()));
        assert!(g.shift_free);
    }

    #[test]
    fn hidden_shift_in_a_product() {
        // (k+3)(k+m) / ((k+1)(k−m)): the k+3 ~ k+1 shift sits inside products
        let num = &lin(0, 1, 3) * &lin(1, 1, 0);
        let den = &lin(0, 1, 1) * &lin(-1, 1, 0);
        let r = RatFunc::new(num, den).unwrap();
        let g = gosper_form(&r);
        assert!(g.defect(&r).is_zero());
        assert_eq!(g.p1.degree_k(), Some(2));
        assert!(g.shift_free);
    }
}
