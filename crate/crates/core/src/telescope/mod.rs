//! Creative telescoping for the diagonal sums `f(m) = Σ_k F(m,k)`:
//! Gosper normal forms, Zeilberger's recurrence search, certificate
//! checks, boundary terms, and the two-step recurrences with their
//! monotonicity consequences.

mod boundary;
mod factors;
mod gosper;
mod recurrence;

pub use boundary::{value_on_line, Boundary, BoundarySummary, LineValue};
pub use gosper::{gosper_form, GosperForm};
pub use recurrence::{
    kg_sign_coefficients, published_recurrence, ratio_monotone, recurrence_iterate, recurrence_verify,
    wm_sign_coefficients, x1_formula, MonotoneReport, Recurrence, RecurrenceReport,
};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::rational::format_rational;
use crate::algebra::{int, solve_nullspace, AlgebraError, BiPoly, ExactScalar, Poly, RatFunc, Rational};
use crate::coefficients::diag_summand;
use crate::hyper::{HyperTerm, UpperLimit};
use crate::spectrum::{Model, ModelConfig};

use factors::{lcm_lists, list_difference, product, ratio_factors, shift_list, Factored};

/// Largest recurrence order searched.
pub const MAX_ORDER: usize = 4;
/// Default extra degree allowed for `b(k)` above the Gosper bound.
pub const DEFAULT_SLACK: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelescopeError {
    #[error("no recurrence of order <= {j_max} with degree slack {slack}; raise the order or the slack")]
    NoRecurrenceFound { j_max: usize, slack: usize },
    #[error("recurrence order {0} exceeds the maximum of 4")]
    OrderTooLarge(usize),
    #[error("telescoping certificate fails at m = {m}, k = {k}")]
    CertificateInvalid { m: i64, k: i64 },
    #[error("recurrence violated at m = {m}")]
    RecurrenceViolated { m: i64 },
    #[error("monotonicity check failed: {0}")]
    MonotonicityViolated(String),
    #[error("boundary term diverges on the line k = {a}*m + {c}")]
    BoundaryDiverges { a: i64, c: i64 },
    #[error("argument out of range: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `F(m,k)` with `Σ_k F(m,k) = C_00mm/ω_m²`. For the wave-map model the
/// range is the constant `δ−1`, which the natural boundary makes valid for
/// every `m`.
pub fn term_for_diag(cfg: &ModelConfig) -> HyperTerm {
    let omega = BiPoly::linear(int(2), int(0), int(cfg.mass_offset()));
    let mut term = diag_summand(cfg).den_poly(omega.clone()).den_poly(omega);
    if cfg.model() == Model::Wm {
        term.upper = UpperLimit::affine(0, cfg.delta() - 1);
    }
    term
}

/// A telescoping recurrence `Σ_j α_j(m)F(m+j,k) = G(m,k+1) − G(m,k)` with
/// `G = R·F`.
#[derive(Clone, Debug, PartialEq)]
pub struct TelescopeResult {
    pub order: usize,
    pub alphas: Vec<Poly>,
    /// `b(k) = b_num(m,k)/b_den(m)`.
    pub b_num: BiPoly,
    pub b_den: Poly,
    pub certificate: RatFunc,
    pub gosper: GosperForm,
    pub degree_bound: usize,
    pub slack: usize,
    /// Dimension of the solution space that was found.
    pub nullity: usize,
    /// Dimension of the space of recurrences (α's) it contains.
    pub alpha_rank: usize,
    pub boundary: Boundary,
    // kept for the polynomial form of the certificate check
    p0: Vec<BiPoly>,
    den: Vec<BiPoly>,
}

impl TelescopeResult {
    /// `b(k)` coefficients, lowest power first, as rational functions of `m`.
    pub fn b_coeffs(&self) -> Vec<(Poly, Poly)> {
        self.b_num.k_coeffs().iter().map(|c| (c.clone(), self.b_den.clone())).collect()
    }

    /// The same recurrence with `α_j` replaced; used for mutation tests.
    pub fn with_alphas(&self, alphas: Vec<Poly>) -> Self {
        TelescopeResult { alphas, ..self.clone() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let poly = |p: &Poly| p.coeffs().iter().map(format_rational).collect::<Vec<_>>();
        let matrix = |p: &BiPoly| {
            p.to_matrix().iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>()
        };
        serde_json::json!({
            "order": self.order,
            "alphas": self.alphas.iter().map(poly).collect::<Vec<_>>(),
            "b": {
                "numerator_by_k": self.b_num.k_coeffs().iter().map(poly).collect::<Vec<_>>(),
                "denominator": poly(&self.b_den),
            },
            "certificate_ratio": {
                "numerator": matrix(self.certificate.num()),
                "denominator": matrix(self.certificate.den()),
                "layout": "[deg_m][deg_k]",
            },
            "gosper": {
                "p1": self.gosper.p1.to_string(),
                "p2": self.gosper.p2.to_string(),
                "p3": self.gosper.p3.to_string(),
                "shift_free": self.gosper.shift_free,
            },
            "degree_bound": self.degree_bound,
            "slack": self.slack,
            "nullity": self.nullity,
            "alpha_rank": self.alpha_rank,
            "boundary": BoundarySummary::from(&self.boundary),
        })
    }
}

/// Smallest order `J ≤ j_max` admitting a homogeneous telescoping
/// recurrence (both boundary limits vanish identically). When there is
/// none, the smallest order admitting any recurrence is returned, whose
/// boundary term is then the inhomogeneity.
pub fn zeilberger(term: &HyperTerm, j_max: usize, degree_slack: usize) -> Result<TelescopeResult, TelescopeError> {
    if j_max > MAX_ORDER {
        return Err(TelescopeError::OrderTooLarge(j_max));
    }
    for order in 0..=j_max {
        if let Some(r) = try_order(term, order, degree_slack, true, None)? {
            return Ok(r);
        }
    }
    zeilberger_minimal(term, j_max, degree_slack)
}

/// Smallest order `J ≤ j_max` admitting any telescoping recurrence,
/// homogeneous or not.
pub fn zeilberger_minimal(
    term: &HyperTerm,
    j_max: usize,
    degree_slack: usize,
) -> Result<TelescopeResult, TelescopeError> {
    if j_max > MAX_ORDER {
        return Err(TelescopeError::OrderTooLarge(j_max));
    }
    for order in 0..=j_max {
        if let Some(r) = try_order(term, order, degree_slack, false, None)? {
            return Ok(r);
        }
    }
    Err(TelescopeError::NoRecurrenceFound { j_max, slack: degree_slack })
}

/// Homogeneous telescoping recurrence of exactly the given order; the
/// space of such recurrences can have dimension above one when a lower
/// order exists, and the first basis element is returned.
pub fn zeilberger_at(term: &HyperTerm, order: usize, degree_slack: usize) -> Result<TelescopeResult, TelescopeError> {
    if order > MAX_ORDER {
        return Err(TelescopeError::OrderTooLarge(order));
    }
    try_order(term, order, degree_slack, true, None)?
        .ok_or(TelescopeError::NoRecurrenceFound { j_max: order, slack: degree_slack })
}

/// The certificate for a prescribed recurrence `Σ α_j f(m+j) = 0`: solves
/// for `b(k)` with the `α`'s fixed up to a common factor.
pub fn certificate_for(
    term: &HyperTerm,
    alphas: &[Poly],
    degree_slack: usize,
) -> Result<TelescopeResult, TelescopeError> {
    let order = alphas.len().checked_sub(1).ok_or_else(|| TelescopeError::InvalidArgument("no coefficients".into()))?;
    if order > MAX_ORDER {
        return Err(TelescopeError::OrderTooLarge(order));
    }
    try_order(term, order, degree_slack, true, Some(alphas))?
        .ok_or(TelescopeError::NoRecurrenceFound { j_max: order, slack: degree_slack })
}

/// Rows forcing `lim G = 0` on `k = a·m + c`: with `G = b·E` and `E` of
/// `ε`-order `e0`, the Taylor coefficients `b_e` on the line must vanish
/// for `e ≤ −e0`.
fn boundary_rows(
    term: &HyperTerm,
    gosper: &GosperForm,
    den: &[BiPoly],
    line: (i64, i64),
    offset: usize,
    ncols: usize,
    top: usize,
) -> Result<Vec<Vec<Poly>>, TelescopeError> {
    let p3m1 = gosper.p3.shift(0, -1);
    let downs: Vec<&BiPoly> = std::iter::once(&gosper.p1).chain(den).collect();
    let Some((e0, _)) = boundary::expand_on_line(term, &[&p3m1], &downs, line.0, line.1)? else {
        return Ok(Vec::new());
    };
    let mut rows = Vec::new();
    let at = Poly::linear(int(line.0), int(line.1));
    for e in 0..=(-e0).max(-1) {
        let e = e as usize;
        let mut row = vec![Poly::zero(); ncols];
        for l in e..=top {
            // (1/e!)·d^e/dk^e k^l = binom(l, e)·k^{l−e}
            let binom = crate::algebra::rational::binomial(l as u64, e as u64);
            row[offset + l] = at.pow((l - e) as u32).scale(&binom);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn try_order(
    term: &HyperTerm,
    order: usize,
    slack: usize,
    homogeneous: bool,
    fixed: Option<&[Poly]>,
) -> Result<Option<TelescopeResult>, TelescopeError> {
    // t_k/F(m,k) = Σ α_j u_j with u_j = F(m+j,k)/F(m,k) = p0_j/Den
    let shifts: Vec<Factored> = (0..=order).map(|j| ratio_factors(term, j as i64, 0)).collect();
    let den = lcm_lists(shifts.iter().map(|u| &u.den));
    let p0: Vec<BiPoly> = shifts
        .iter()
        .map(|u| {
            let rest = list_difference(&den, &u.den);
            &product(&u.num).scale(&u.constant) * &product(&rest)
        })
        .collect();
    // r/s = F(m,k+1)/F(m,k) · Den(k)/Den(k+1)
    let mut rs = ratio_factors(term, 0, 1);
    for f in &den {
        rs.push_num(f.clone());
        rs.push_den(f.shift(0, 1));
    }
    rs.cancel();
    let gosper = gosper::gosper_factored(rs);
    let p1 = &gosper.p1;
    let p2 = &gosper.p2;
    let p3m1 = gosper.p3.shift(0, -1);

    let mut alpha_cols: Vec<BiPoly> = p0.iter().map(|p| -&(p * p1)).collect();
    if let Some(target) = fixed {
        // a single column Σ α_j·col_j for the prescribed α
        let combined = alpha_cols.iter().zip(target).fold(BiPoly::zero(), |acc, (c, a)| &acc + &c.mul_m(a));
        alpha_cols = vec![combined];
    }
    let n_alpha = alpha_cols.len();
    let deg_p = alpha_cols.iter().filter_map(BiPoly::degree_k).max().unwrap_or(0);
    let degree_bound = b_degree_bound(p2, &p3m1, deg_p);
    let top = degree_bound + slack;
    let kvar = BiPoly::var_k();
    let kp1 = BiPoly::linear(int(0), int(1), int(1));
    let beta_cols: Vec<BiPoly> = (0..=top as u32).map(|l| &(p2 * &kp1.pow(l)) - &(&p3m1 * &kvar.pow(l))).collect();
    let cols: Vec<&BiPoly> = alpha_cols.iter().chain(&beta_cols).collect();
    let rows = cols.iter().filter_map(|c| c.degree_k()).max().unwrap_or(0) + 1;
    let mut matrix: Vec<Vec<Poly>> = (0..rows).map(|i| cols.iter().map(|c| c.k_coeff(i)).collect()).collect();
    let a = term.upper.m_coeff;
    let c = term.upper.m_coeff * order as i64 + term.upper.constant + 1;
    if homogeneous {
        for line in [(a, c), (0, 0)] {
            matrix.extend(boundary_rows(term, &gosper, &den, line, n_alpha, cols.len(), top)?);
        }
    }

    let has_alpha = |v: &Vec<Poly>| v[..n_alpha].iter().any(|e| !e.is_zero());
    let basis = solve_nullspace(&matrix);
    let nullity = basis.len();
    let alpha_rows: Vec<Vec<Poly>> = basis.iter().map(|v| v[..n_alpha].to_vec()).collect();
    let alpha_rank = n_alpha - solve_nullspace(&alpha_rows).len();
    let mut chosen = basis.iter().find(|v| has_alpha(v)).cloned();
    if chosen.is_some() && nullity > 1 {
        // pin b(0) = 0, which makes G(m,0) vanish
        let mut pin = vec![Poly::zero(); cols.len()];
        pin[n_alpha] = Poly::one();
        matrix.push(pin);
        if let Some(v) = solve_nullspace(&matrix).into_iter().find(has_alpha) {
            chosen = Some(v);
        }
    }
    let Some(mut v) = chosen else { return Ok(None) };
    if let Some(target) = fixed {
        let t = v[0].clone();
        v = target.iter().map(|a| a * &t).chain(v[1..].iter().cloned()).collect();
    }

    let (alphas, b_num, b_den) = normalize_solution(&v, order);
    let certificate = certificate_ratio(&gosper, &den, &b_num, &b_den);
    let boundary = Boundary {
        top_line: (a, c),
        top: value_on_line(term, &certificate, a, c)?,
        bottom: value_on_line(term, &certificate, 0, 0)?,
    };
    Ok(Some(TelescopeResult {
        order,
        alphas,
        b_num,
        b_den,
        certificate,
        gosper,
        degree_bound,
        slack,
        nullity,
        alpha_rank,
        boundary,
        p0,
        den,
    }))
}

/// Degree of a polynomial solution of `p2(k)b(k+1) − p3(k−1)b(k) = p(k)`.
fn b_degree_bound(p2: &BiPoly, p3m1: &BiPoly, deg_p: usize) -> usize {
    let d2 = p2.degree_k().unwrap_or(0);
    let d3 = p3m1.degree_k().unwrap_or(0);
    if d2 == d3 && d2 > 0 && p2.leading_k() == p3m1.leading_k() {
        let d = d2;
        let base = (deg_p + 1).saturating_sub(d);
        // n = (B − A)/ℓ when it is a nonnegative integer constant
        let diff = &p3m1.k_coeff(d - 1) - &p2.k_coeff(d - 1);
        let (q, r) = diff.div_rem(&p2.leading_k());
        if r.is_zero() && q.degree().unwrap_or(0) == 0 {
            let n = q.coeff(0);
            if n.is_integer() && n >= Rational::zero() {
                if let Ok(n) = usize::try_from(n.to_integer()) {
                    return base.max(n);
                }
            }
        }
        base
    } else {
        deg_p.saturating_sub(d2.max(d3))
    }
}

/// Makes the α's primitive with a positive leading coefficient of `α_J`
/// and reduces `b`.
fn normalize_solution(v: &[Poly], order: usize) -> (Vec<Poly>, BiPoly, Poly) {
    let alpha_raw = &v[..=order];
    let mut g = Poly::zero();
    for a in alpha_raw.iter().filter(|a| !a.is_zero()) {
        g = if g.is_zero() { a.monic() } else { Poly::gcd(&g, a) };
    }
    let mut alphas: Vec<Poly> = alpha_raw.iter().map(|a| a.div_exact(&g).expect("gcd divides")).collect();
    let all: Vec<Rational> = alphas.iter().flat_map(|a| a.coeffs().iter().cloned()).collect();
    let mut content = Poly::new(all).content();
    if content < Rational::zero() {
        content = -content;
    }
    let last = alphas.iter().rev().find(|a| !a.is_zero()).expect("some α is nonzero");
    if last.leading() < Rational::zero() {
        content = -content;
    }
    alphas = alphas.iter().map(|a| a.scale(&content.recip())).collect();
    let mut b_den = g.scale(&content);
    let mut b_num = BiPoly::new(v[order + 1..].to_vec());
    let h = Poly::gcd(&b_num.content_k(), &b_den);
    if h.degree().unwrap_or(0) > 0 {
        b_num = BiPoly::new(b_num.k_coeffs().iter().map(|c| c.div_exact(&h).expect("content divides")).collect());
        b_den = b_den.div_exact(&h).expect("gcd divides");
    }
    let lead = b_den.leading();
    (alphas, b_num.scale(&lead.recip()), b_den.scale(&lead.recip()))
}

/// `R = p3(k−1)·b(k)/(p1(k)·Den(k))`, cancelling known factors.
fn certificate_ratio(gosper: &GosperForm, den: &[BiPoly], b_num: &BiPoly, b_den: &Poly) -> RatFunc {
    let (c3, p3m1) = shift_list(&gosper.p3_factors, -1);
    let mut f = Factored::one();
    f.constant = c3;
    for p in p3m1 {
        f.push_num(p);
    }
    for p in gosper.p1_factors.iter().chain(den) {
        f.push_den(p.clone());
    }
    f.cancel();
    // divide b by any remaining denominator factor it contains
    let mut b = b_num.clone();
    let mut i = 0;
    while i < f.den.len() {
        match b.div_exact(&f.den[i]) {
            Some(q) if !b.is_zero() => {
                b = q;
                f.den.remove(i);
            }
            _ => i += 1,
        }
    }
    let num = &f.num_product() * &b;
    let den_poly = f.den_product().mul_m(b_den);
    RatFunc::from_coprime(num, den_poly).expect("nonzero denominator")
}

/// `G(m, K(m+J)+1) − G(m, 0)` for a result; recomputed from the term.
pub fn boundary_check(term: &HyperTerm, result: &TelescopeResult) -> Result<Boundary, TelescopeError> {
    let a = term.upper.m_coeff;
    let c = term.upper.m_coeff * result.order as i64 + term.upper.constant + 1;
    Ok(Boundary {
        top_line: (a, c),
        top: value_on_line(term, &result.certificate, a, c)?,
        bottom: value_on_line(term, &result.certificate, 0, 0)?,
    })
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub polynomial_identity: bool,
    pub spot_checks: usize,
    pub exact_spot_checks: usize,
    pub max_relative_residual: f64,
    pub summed_checks: usize,
}

const SPOT_CHECKS: usize = 200;
const SPOT_TOLERANCE: f64 = 1e-8;

/// Checks `Σ α_j F(m+j,k) − G(m,k+1) + G(m,k) = 0` as a polynomial identity
/// after clearing denominators, at random points from direct evaluation of
/// `F`, and summed over `k` against the boundary term.
pub fn verify_certificate(term: &HyperTerm, result: &TelescopeResult) -> Result<CertificateReport, TelescopeError> {
    // with G = R·F, R = p3(k−1)·b/(p1·Den) and F(m+j,k)/F = p0_j/Den, the
    // identity times b_den·p1·Den reads
    //   b_den·p1·Σ α_j p0_j + p3(k−1)·b_num(k) − p2(k)·b_num(k+1) = 0
    let g = &result.gosper;
    let mut lhs = BiPoly::zero();
    for (a, p) in result.alphas.iter().zip(&result.p0) {
        lhs = &lhs + &p.mul_m(a);
    }
    lhs = (&lhs * &g.p1).mul_m(&result.b_den);
    lhs = &lhs + &(&g.p3.shift(0, -1) * &result.b_num);
    lhs = &lhs - &(&g.p2 * &result.b_num.shift(0, 1));
    // R·(b_den·p1·Den) = p3(k−1)·b_num
    let full_den = (&g.p1 * &product(&result.den)).mul_m(&result.b_den);
    let r_check =
        &(result.certificate.num() * &full_den) - &(&(&g.p3.shift(0, -1) * &result.b_num) * result.certificate.den());
    for defect in [&lhs, &r_check] {
        if !defect.is_zero() {
            let (m, k) = witness(defect);
            return Err(TelescopeError::CertificateInvalid { m, k });
        }
    }

    let (exact, max_rel) = spot_checks(term, result)?;
    let summed = summed_checks(term, result)?;
    Ok(CertificateReport {
        polynomial_identity: true,
        spot_checks: SPOT_CHECKS,
        exact_spot_checks: exact,
        max_relative_residual: max_rel,
        summed_checks: summed,
    })
}

fn witness(p: &BiPoly) -> (i64, i64) {
    for s in 0..200i64 {
        for m in 1..=s.max(1) {
            let k = s - m;
            if k >= 0 && !p.eval(&int(m), &int(k)).is_zero() {
                return (m, k);
            }
        }
    }
    (1, 0)
}

fn spot_checks(term: &HyperTerm, result: &TelescopeResult) -> Result<(usize, f64), TelescopeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e1e_5c0e);
    let (mut done, mut exact, mut max_rel) = (0usize, 0usize, 0f64);
    let mut attempts = 0;
    while done < SPOT_CHECKS {
        attempts += 1;
        if attempts > 50 * SPOT_CHECKS {
            return Err(TelescopeError::InvalidArgument("too few regular points for spot checks".into()));
        }
        let m: i64 = rng.gen_range(1..=24);
        let kmax = term.upper.at(m + result.order as i64) + 1;
        let k: i64 = rng.gen_range(0..=kmax.max(0));
        let (mr, kr, kr1) = (int(m), int(k), int(k + 1));
        let (Some(r0), Some(r1)) = (result.certificate.eval(&mr, &kr), result.certificate.eval(&mr, &kr1)) else {
            continue;
        };
        let mut terms: Vec<ExactScalar> = Vec::with_capacity(result.order + 3);
        for (j, a) in result.alphas.iter().enumerate() {
            terms.push(term.eval(m + j as i64, k)?.scale(&a.eval(&mr)));
        }
        terms.push(-&term.eval(m, k + 1)?.scale(&r1));
        terms.push(term.eval(m, k)?.scale(&r0));
        done += 1;
        let scale = terms.iter().map(|t| t.to_f64().abs()).fold(0.0, f64::max);
        let nonzero: Vec<&ExactScalar> = terms.iter().filter(|t| !t.is_zero()).collect();
        match ExactScalar::try_sum(nonzero.iter().copied()) {
            Ok(sum) => {
                exact += 1;
                if !sum.is_zero() {
                    return Err(TelescopeError::CertificateInvalid { m, k });
                }
            }
            Err(AlgebraError::IncompatibleClass { .. }) => {
                let s: f64 = terms.iter().map(ExactScalar::to_f64).sum();
                let rel = if scale > 0.0 { s.abs() / scale } else { 0.0 };
                max_rel = max_rel.max(rel);
                if rel > SPOT_TOLERANCE {
                    return Err(TelescopeError::CertificateInvalid { m, k });
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((exact, max_rel))
}

fn summed_checks(term: &HyperTerm, result: &TelescopeResult) -> Result<usize, TelescopeError> {
    let mut n = 0;
    for m in 1..=6i64 {
        let mut acc: Vec<ExactScalar> = Vec::new();
        for (j, a) in result.alphas.iter().enumerate() {
            let s = term.sum(m + j as i64)?.scale(&a.eval(&int(m)));
            if !s.is_zero() {
                acc.push(s);
            }
        }
        let b = result.boundary.eval(m)?;
        if !b.is_zero() {
            acc.push(-&b);
        }
        let total = ExactScalar::try_sum(acc.iter())?;
        if !total.is_zero() {
            return Err(TelescopeError::CertificateInvalid { m, k: term.upper.at(m) });
        }
        n += 1;
    }
    Ok(n)
}

/// The recurrence read off a telescoping result.
pub fn recurrence_from(result: &TelescopeResult) -> Recurrence {
    Recurrence { coeffs: result.alphas.clone(), inhomogeneous: !result.boundary.is_zero() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::geometric_term;

    fn lin(a: i64, b: i64, c: i64) -> BiPoly {
        BiPoly::linear(int(a), int(b), int(c))
    }

    fn prod(fs: &[BiPoly]) -> BiPoly {
        fs.iter().fold(BiPoly::one(), |a, f| &a * f)
    }

    #[test]
    fn geometric_fixture_has_nonzero_boundary() {
        let t = geometric_term();
        let r = zeilberger_minimal(&t, 2, DEFAULT_SLACK).unwrap();
        assert_eq!(r.order, 0);
        assert!(!r.boundary.is_zero());
        for m in 0..10 {
            let expect = ExactScalar::integer((1i64 << (m + 1)) - 1);
            let got = r.boundary.eval(m).unwrap().scale(&r.alphas[0].eval(&int(m)).recip());
            assert_eq!(got, expect, "m = {m}");
        }
        let rep = verify_certificate(&t, &r).unwrap();
        assert!(rep.polynomial_identity);
    }

    #[test]
    fn kg3_shift_ratios_match_the_printed_displays() {
        let cfg = ModelConfig::kg(3).unwrap();
        let t = term_for_diag(&cfg);
        let m_ratio = t.shift_ratio(-1, 0).recip().unwrap();
        let expect = RatFunc::new(
            prod(&[lin(2, 0, 1), lin(-4, 2, -1), lin(-4, 2, 1), lin(2, 1, 3), lin(2, 1, 4)]),
            prod(&[lin(2, 0, 3), lin(-2, 1, -1), lin(-2, 1, 0), lin(4, 2, 7), lin(4, 2, 9)]),
        )
        .unwrap();
        assert_eq!(m_ratio, expect);
        let k_ratio = t.k_ratio();
        let expect = RatFunc::new(
            prod(&[
                lin(0, 1, 2),
                lin(0, 2, -1),
                lin(0, 2, 1),
                lin(0, 2, 7),
                lin(0, 4, 11),
                lin(-2, 1, -1),
                lin(2, 1, 5),
            ]),
            prod(&[
                lin(0, 1, 1),
                lin(0, 1, 4),
                lin(0, 1, 5),
                lin(0, 2, 5),
                lin(0, 4, 7),
                lin(-4, 2, -1),
                lin(4, 2, 11),
            ]),
        )
        .unwrap();
        assert_eq!(k_ratio, expect);
    }

    fn mpoly(factors: &[(i64, i64)], extra: &[Poly], c: i64) -> Poly {
        let mut p = Poly::constant(int(c));
        for &(a, b) in factors {
            p = &p * &Poly::linear(int(a), int(b));
        }
        for e in extra {
            p = &p * e;
        }
        p
    }

    #[test]
    fn kg3_minimal_recurrence_is_first_order() {
        // f_m is rational in m at δ = 3, so a first-order relation exists
        let cfg = ModelConfig::kg(3).unwrap();
        let t = term_for_diag(&cfg);
        let r = zeilberger(&t, 2, DEFAULT_SLACK).unwrap();
        assert_eq!(r.order, 1);
        assert_eq!(r.nullity, 1);
        assert!(r.boundary.is_zero());
        let rep = verify_certificate(&t, &r).unwrap();
        assert!(rep.polynomial_identity);
        assert_eq!(rep.exact_spot_checks, rep.spot_checks);
        let rec = recurrence_from(&r);
        for m in 1..8usize {
            let lhs = rec.coeffs.iter().enumerate().fold(ExactScalar::zero(), |acc, (j, a)| {
                acc.checked_add(&recurrence::f_value(&cfg, m + j).scale(&a.eval(&int(m as i64)))).unwrap()
            });
            assert!(lhs.is_zero());
        }
        // at order two the space of recurrences is two-dimensional
        let r2 = zeilberger_at(&t, 2, DEFAULT_SLACK).unwrap();
        assert_eq!(r2.alpha_rank, 2);
    }

    #[test]
    fn kg3_reproduces_the_hand_computation() {
        let cfg = ModelConfig::kg(3).unwrap();
        let t = term_for_diag(&cfg);
        let published = published_recurrence(&cfg);
        let r = certificate_for(&t, &published.coeffs, DEFAULT_SLACK).unwrap();
        assert_eq!(r.order, 2);
        assert_eq!(r.gosper.p1, prod(&[lin(0, 1, 1), lin(0, 2, 5), lin(0, 4, 7)]));
        let p2 = prod(&[lin(0, 2, -1), lin(0, 2, 1), lin(-2, 1, -5), lin(2, 1, 5)]);
        assert!(r.gosper.p2.div_exact(&p2).map_or(false, |q| q.degree_k() == Some(0) && q.degree_m() == Some(0)));
        let p3 = prod(&[lin(0, 1, 4), lin(0, 1, 5), lin(-4, 2, -1), lin(4, 2, 19)]);
        assert!(r.gosper.p3.div_exact(&p3).map_or(false, |q| q.degree_k() == Some(0) && q.degree_m() == Some(0)));
        assert!(r.gosper.shift_free);
        // α0 = 2(1+m)²(3+m)(1+2m)(3+2m)²(5+2m)(6+2m)(34+24m+4m²)
        let quad = Poly::from_i64s(&[34, 24, 4]);
        let a0 = mpoly(&[(1, 1), (1, 1), (1, 3), (2, 1), (2, 3), (2, 3), (2, 5), (2, 6)], &[quad], 2);
        assert_eq!(published.coeffs[0], a0);
        // α1 = −8(5+2m)⁴(819 + 4u(106 + u(18 + u))), u = m(5+m)
        let u = Poly::from_i64s(&[0, 5, 1]);
        let inner = &(&u * &(&(&u * &(&u + &Poly::constant(int(18)))) + &Poly::constant(int(106)))).scale(&int(4))
            + &Poly::constant(int(819));
        let a1 = mpoly(&[(2, 5), (2, 5), (2, 5), (2, 5)], &[inner], -8);
        assert_eq!(published.coeffs[1], a1);
        let rep = verify_certificate(&t, &r).unwrap();
        assert!(rep.polynomial_identity);
        assert_eq!(rep.exact_spot_checks, 200);
        assert!(r.boundary.is_zero());
        let ours = Recurrence { coeffs: r.alphas.clone(), inhomogeneous: false };
        assert!(ours.equivalent_to(&published));
        let mut bad = r.alphas.clone();
        bad[1] = &bad[1] + &Poly::one();
        assert!(matches!(verify_certificate(&t, &r.with_alphas(bad)), Err(TelescopeError::CertificateInvalid { .. })));
    }

    #[test]
    fn wm2_recurrence_is_certified_with_zero_boundary() {
        let cfg = ModelConfig::wm(2).unwrap();
        let t = term_for_diag(&cfg);
        let r = zeilberger(&t, 2, DEFAULT_SLACK).unwrap();
        let rep = verify_certificate(&t, &r).unwrap();
        assert!(rep.polynomial_identity);
        assert!(r.boundary.is_zero());
        let published = published_recurrence(&cfg);
        let fixed = certificate_for(&t, &published.coeffs, DEFAULT_SLACK).unwrap();
        assert!(verify_certificate(&t, &fixed).unwrap().polynomial_identity);
        assert!(fixed.boundary.is_zero());
        assert!(Recurrence { coeffs: fixed.alphas.clone(), inhomogeneous: false }.equivalent_to(&published));
    }

    #[test]
    fn derivation_is_deterministic() {
        let t = term_for_diag(&ModelConfig::kg(3).unwrap());
        let a = zeilberger(&t, 2, DEFAULT_SLACK).unwrap();
        let b = zeilberger(&t, 2, DEFAULT_SLACK).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
