//! The two-step recurrences for `f_m = C_00mm/ω_m²`, their exact checks,
//! iteration, and the monotonicity argument built on them.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::TelescopeError;
use crate::algebra::rational::format_rational;
use crate::algebra::{int, ExactScalar, Poly, Rational};
use crate::coefficients::diag_closed;
use crate::spectrum::{omega, Model, ModelConfig};

/// `Σ_j coeffs[j](m)·f_{m+j} = 0` (or a nonzero right side).
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence {
    pub coeffs: Vec<Poly>,
    pub inhomogeneous: bool,
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Divides out the common rational content.
    pub fn content_free(&self) -> Recurrence {
        let all: Vec<Rational> = self.coeffs.iter().flat_map(|c| c.coeffs().iter().cloned()).collect();
        let c = Poly::new(all).content();
        Recurrence {
            coeffs: self.coeffs.iter().map(|p| p.scale(&c.recip())).collect(),
            inhomogeneous: self.inhomogeneous,
        }
    }

    /// True when `self = λ(m)·other` for some nonzero rational function `λ`.
    pub fn equivalent_to(&self, other: &Recurrence) -> bool {
        if self.coeffs.len() != other.coeffs.len() {
            return false;
        }
        let Some(j) = self.coeffs.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        if other.coeffs[j].is_zero() {
            return false;
        }
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a * &other.coeffs[j] == b * &self.coeffs[j])
    }

    /// The constant `λ` with `self = λ·other`, if there is one.
    pub fn proportional_to(&self, other: &Recurrence) -> Option<Rational> {
        if self.coeffs.len() != other.coeffs.len() {
            return None;
        }
        let mut lambda: Option<Rational> = None;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            if a.is_zero() != b.is_zero() {
                return None;
            }
            if a.is_zero() {
                continue;
            }
            let q = a.div_exact(b)?;
            if q.degree() != Some(0) {
                return None;
            }
            let c = q.coeff(0);
            match &lambda {
                Some(l) if *l != c => return None,
                _ => lambda = Some(c),
            }
        }
        lambda
    }
}

/// Polynomial in `m` from `(coefficient, power of δ, power of m)` terms.
fn poly_in_m(delta: i64, terms: &[(i64, u32, usize)]) -> Poly {
    let mut out = Poly::zero();
    for &(c, dp, mp) in terms {
        let v = int(c) * int(delta.pow(dp));
        out = &out + &Poly::monomial(v, mp);
    }
    out
}

/// `a·m + b` with integer data.
fn lin(a: i64, b: i64) -> Poly {
    Poly::linear(int(a), int(b))
}

fn prod(fs: &[Poly]) -> Poly {
    fs.iter().fold(Poly::one(), |acc, f| &acc * f)
}

fn kg_pqr(d: i64) -> [Poly; 3] {
    let p = prod(&[
        Poly::constant(int(2)),
        lin(1, 1).pow(2),
        lin(2, 1),
        lin(2, 3),
        lin(1, d),
        lin(2, d),
        lin(2, d + 3),
        lin(2, 2 * d - 1),
        poly_in_m(d, &[(9, 1, 0), (4, 0, 2), (4, 1, 1), (12, 0, 1), (7, 0, 0)]),
    ]);
    #[rustfmt::skip]
    let q_inner = poly_in_m(d, &[
        (315, 5, 0), (728, 4, 0), (914, 3, 0), (418, 2, 0), (-41, 1, 0),
        (832, 2, 6), (704, 3, 5), (5760, 2, 5), (320, 4, 4), (4432, 3, 4), (15432, 2, 4),
        (64, 5, 3), (1824, 4, 3), (10352, 3, 3), (20224, 2, 3),
        (336, 5, 2), (3620, 4, 2), (11064, 3, 2), (13402, 2, 2),
        (512, 1, 7), (3840, 1, 6), (11424, 1, 5), (17168, 1, 4), (13616, 1, 3), (5280, 1, 2),
        (128, 0, 8), (1024, 0, 7), (3296, 0, 6), (5440, 0, 5), (4792, 0, 4), (2016, 0, 3), (154, 0, 2),
        (572, 5, 1), (2880, 4, 1), (5330, 3, 1), (4100, 2, 1), (698, 1, 1), (-140, 0, 1), (-30, 0, 0),
    ]);
    let q = &lin(2, d + 2).pow(2) * &q_inner;
    let r = prod(&[
        Poly::constant(int(2)),
        lin(1, 2),
        lin(2, 5),
        lin(1, d + 1).pow(2),
        lin(2, d + 1),
        lin(2, d + 4),
        lin(2, 2 * d + 1),
        lin(2, 2 * d + 3),
        poly_in_m(d, &[(5, 1, 0), (4, 0, 2), (4, 1, 1), (4, 0, 1), (-1, 0, 0)]),
    ]);
    [p, q, r]
}

fn wm_pqr(d: i64) -> [Poly; 3] {
    let p = prod(&[
        lin(1, 1),
        lin(1, 2),
        lin(2, 1),
        lin(1, d + 2),
        lin(2, d + 2),
        lin(2, d + 5),
        poly_in_m(d, &[(3, 1, 0), (2, 0, 2), (2, 1, 1), (10, 0, 1), (11, 0, 0)]),
    ]);
    #[rustfmt::skip]
    let q_inner = poly_in_m(d, &[
        (3, 4, 0), (29, 3, 0), (117, 2, 0), (255, 1, 0),
        (28, 2, 4), (16, 3, 3), (188, 2, 3), (4, 4, 2), (70, 3, 2), (439, 2, 2),
        (24, 1, 5), (222, 1, 4), (780, 1, 3), (1286, 1, 2),
        (8, 0, 6), (96, 0, 5), (462, 0, 4), (1136, 0, 3), (1493, 0, 2),
        (8, 4, 1), (89, 3, 1), (410, 2, 1), (973, 1, 1), (980, 0, 1), (244, 0, 0),
    ]);
    let q = &lin(2, d + 4).pow(2) * &q_inner;
    let r = prod(&[
        lin(1, 2),
        lin(1, d + 2),
        lin(1, d + 3),
        lin(2, d + 3),
        lin(2, d + 6),
        lin(2, 2 * d + 7),
        poly_in_m(d, &[(1, 1, 0), (2, 0, 2), (2, 1, 1), (6, 0, 1), (3, 0, 0)]),
    ]);
    [p, q, r]
}

/// The published two-step recurrence `P f_m − Q f_{m+1} + R f_{m+2} = 0`
/// as coefficients `(P, −Q, R)`.
pub fn published_recurrence(cfg: &ModelConfig) -> Recurrence {
    let [p, q, r] = match cfg.model() {
        Model::Kg => kg_pqr(cfg.delta()),
        Model::Wm => wm_pqr(cfg.delta()),
    };
    Recurrence { coeffs: vec![p, -q, r], inhomogeneous: false }
}

/// `f_m = C_00mm/ω_m²`.
pub(crate) fn f_value(cfg: &ModelConfig, m: usize) -> ExactScalar {
    let w = omega(cfg, m);
    diag_closed(cfg, m).scale(&Rational::new((1).into(), (w * w).into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub model: Model,
    pub delta: i64,
    pub m_max: usize,
    pub checked: usize,
}

/// Checks the published recurrence exactly on `m ∈ [1, m_max]`.
pub fn recurrence_verify(cfg: &ModelConfig, m_max: usize) -> Result<RecurrenceReport, TelescopeError> {
    if m_max < 3 {
        return Err(TelescopeError::InvalidArgument(format!("m_max must be at least 3, got {m_max}")));
    }
    let rec = published_recurrence(cfg);
    let f: Vec<ExactScalar> = (0..=m_max + 2).map(|m| f_value(cfg, m)).collect();
    for m in 1..=m_max {
        let mr = int(m as i64);
        let parts: Vec<ExactScalar> =
            rec.coeffs.iter().enumerate().map(|(j, c)| f[m + j].scale(&c.eval(&mr))).filter(|v| !v.is_zero()).collect();
        let total = ExactScalar::try_sum(parts.iter())?;
        if !total.is_zero() {
            return Err(TelescopeError::RecurrenceViolated { m: m as i64 });
        }
    }
    Ok(RecurrenceReport { model: cfg.model(), delta: cfg.delta(), m_max, checked: m_max })
}

/// `f_1, …, f_{m_max}` from the seeds `f_1, f_2` via the published
/// recurrence, in exact arithmetic.
pub fn recurrence_iterate(
    cfg: &ModelConfig,
    f1: &ExactScalar,
    f2: &ExactScalar,
    m_max: usize,
) -> Result<Vec<ExactScalar>, TelescopeError> {
    let [p, q, r] = match cfg.model() {
        Model::Kg => kg_pqr(cfg.delta()),
        Model::Wm => wm_pqr(cfg.delta()),
    };
    let mut out = vec![f1.clone(), f2.clone()];
    for m in 1..=m_max.saturating_sub(2) {
        let mr = int(m as i64);
        let (fm, fm1) = (&out[m - 1], &out[m]);
        // f_{m+2} = (Q f_{m+1} − P f_m)/R
        let next = fm1.scale(&q.eval(&mr)).checked_sub(&fm.scale(&p.eval(&mr)))?;
        let rv = r.eval(&mr);
        if rv.is_zero() {
            return Err(TelescopeError::RecurrenceViolated { m: m as i64 });
        }
        out.push(next.scale(&rv.recip()));
    }
    out.truncate(m_max);
    Ok(out)
}

/// The published `x_1 = f_2/f_1` as a rational function of `δ`.
pub fn x1_formula(cfg: &ModelConfig) -> Rational {
    let d = int(cfg.delta());
    let ev = |cs: &[i64]| Poly::from_i64s(cs).eval(&d);
    match cfg.model() {
        Model::Kg => ev(&[-24, -52, -78, 111, 196, 63]) / ev(&[-48, -236, -136, 492, 448, 80]),
        Model::Wm => ev(&[560, 708, 482, 189, 38, 3]) / ev(&[840, 1472, 1038, 364, 62, 4]),
    }
}

/// `c_0 … c_8` with `Q − P − R = Σ c_j m^j` (Klein–Gordon).
pub fn kg_sign_coefficients(delta: i64) -> Vec<Rational> {
    let rows: [&[i64]; 9] = [
        &[120, -64, -2196, -7401, -10288, -6202, -1532, -85],
        &[176, -4760, -25736, -54816, -51892, -21004, -3140, -108],
        &[-2600, -29816, -101032, -149484, -96308, -24908, -2092, -32],
        &[-11904, -78784, -191808, -198400, -83392, -12416, -448],
        &[-22688, -111136, -198144, -137568, -33984, -2208],
        &[-23296, -89984, -113664, -47744, -5248],
        &[-13440, -41728, -33920, -6528],
        &[-4096, -10240, -4096],
        &[-512, -1024],
    ];
    rows.iter().map(|r| Poly::from_i64s(r).eval(&int(delta))).collect()
}

/// `c_0 … c_6` with `Q − P − R = −Σ c_j m^j` (wave maps).
pub fn wm_sign_coefficients(delta: i64) -> Vec<Rational> {
    let rows: [&[i64]; 7] = [
        &[1072, 3472, 3260, 1379, 291, 29, 1],
        &[4144, 12868, 11054, 4200, 784, 68, 2],
        &[6156, 17998, 13256, 4044, 544, 26],
        &[4608, 12512, 7352, 1576, 112],
        &[1856, 4620, 1924, 216],
        &[384, 864, 192],
        &[32, 64],
    ];
    rows.iter().map(|r| Poly::from_i64s(r).eval(&int(delta))).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub model: Model,
    pub delta: i64,
    pub m_max: usize,
    /// `f_2/f_1` computed from the coefficients.
    pub x1: String,
    /// The published closed form at this `δ`.
    pub x1_formula: String,
    pub x1_matches: bool,
    /// `x_m < 1` for every `m ≤ m_max`.
    pub ratios_below_one: bool,
    pub r_positive: bool,
    pub b_positive: bool,
    pub a_minus_b_below_one: bool,
    /// `Q − P − R` equals the published expansion.
    pub expansion_matches: bool,
    /// Every published coefficient has the required sign.
    pub coefficient_signs: bool,
    pub coefficients: Vec<String>,
}

impl MonotoneReport {
    pub fn all_pass(&self) -> bool {
        self.x1_matches
            && self.ratios_below_one
            && self.r_positive
            && self.b_positive
            && self.a_minus_b_below_one
            && self.expansion_matches
            && self.coefficient_signs
    }
}

/// Exact checks of the monotonicity argument for `f_m`.
pub fn ratio_monotone(cfg: &ModelConfig, m_max: usize) -> Result<MonotoneReport, TelescopeError> {
    if m_max < 2 {
        return Err(TelescopeError::InvalidArgument(format!("m_max must be at least 2, got {m_max}")));
    }
    let d = cfg.delta();
    let f: Vec<ExactScalar> = (0..=m_max + 1).map(|m| f_value(cfg, m)).collect();
    let ratio = |m: usize| -> Result<Rational, TelescopeError> {
        let q = f[m + 1].checked_div(&f[m])?;
        q.as_rational()
            .cloned()
            .ok_or_else(|| TelescopeError::MonotonicityViolated(format!("f_{}/f_{} is not rational", m + 1, m)))
    };
    let x1 = ratio(1)?;
    let x1_closed = x1_formula(cfg);
    let mut below = true;
    for m in 1..=m_max {
        below &= ratio(m)? < Rational::one();
    }
    let [p, q, r] = match cfg.model() {
        Model::Kg => kg_pqr(d),
        Model::Wm => wm_pqr(d),
    };
    let (mut r_pos, mut b_pos, mut amb) = (true, true, true);
    for m in 1..=m_max {
        let mr = int(m as i64);
        let (pv, qv, rv) = (p.eval(&mr), q.eval(&mr), r.eval(&mr));
        r_pos &= rv > Rational::zero();
        if rv > Rational::zero() {
            b_pos &= &pv / &rv > Rational::zero();
            amb &= (&qv - &pv) / &rv < Rational::one();
        }
    }
    let qpr = &(&q - &p) - &r;
    let (coeffs, expansion, signs) = match cfg.model() {
        Model::Kg => {
            let c = kg_sign_coefficients(d);
            let signs = c.iter().all(|x| *x < Rational::zero());
            (c.clone(), qpr == Poly::new(c), signs)
        }
        Model::Wm => {
            let c = wm_sign_coefficients(d);
            let signs = c.iter().all(|x| *x > Rational::zero());
            (c.clone(), qpr == -Poly::new(c), signs)
        }
    };
    Ok(MonotoneReport {
        model: cfg.model(),
        delta: d,
        m_max,
        x1: format_rational(&x1),
        x1_formula: format_rational(&x1_closed),
        x1_matches: x1 == x1_closed,
        ratios_below_one: below,
        r_positive: r_pos,
        b_positive: b_pos,
        a_minus_b_below_one: amb,
        expansion_matches: expansion,
        coefficient_signs: signs,
        coefficients: coeffs.iter().map(format_rational).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn published_recurrences_annihilate_the_sequence() {
        for cfg in [ModelConfig::kg(2), ModelConfig::kg(9), ModelConfig::wm(4)] {
            let cfg = cfg.unwrap();
            let rep = recurrence_verify(&cfg, 50).unwrap();
            assert_eq!(rep.checked, 50);
        }
        assert!(matches!(recurrence_verify(&ModelConfig::kg(2).unwrap(), 2), Err(TelescopeError::InvalidArgument(_))));
    }

    #[test]
    fn kg2_sequence_is_the_constant_over_omega_squared() {
        // C_00mm = 8/π, so f_m = (8/π)/(2m+2)²
        let cfg = ModelConfig::kg(2).unwrap();
        for m in 0..20usize {
            let w = (2 * m + 2) as i64;
            assert_eq!(f_value(&cfg, m), ExactScalar::new(rat(8, w * w), -2, int(1)).unwrap());
        }
    }

    #[test]
    fn iteration_from_exact_seeds_is_exact() {
        for cfg in [ModelConfig::kg(3).unwrap(), ModelConfig::wm(2).unwrap()] {
            let seq = recurrence_iterate(&cfg, &f_value(&cfg, 1), &f_value(&cfg, 2), 30).unwrap();
            assert_eq!(seq.len(), 30);
            for (i, v) in seq.iter().enumerate() {
                assert_eq!(*v, f_value(&cfg, i + 1));
            }
        }
    }

    #[test]
    fn first_ratios_match_the_closed_forms() {
        let kg2 = ratio_monotone(&ModelConfig::kg(2).unwrap(), 20).unwrap();
        assert_eq!(x1_formula(&ModelConfig::kg(2).unwrap()), rat(4, 9));
        assert_eq!(kg2.x1, "4/9");
        assert!(kg2.all_pass());
        let wm1 = ratio_monotone(&ModelConfig::wm(1).unwrap(), 20).unwrap();
        assert_eq!(x1_formula(&ModelConfig::wm(1).unwrap()), rat(11, 21));
        assert!(wm1.all_pass());
    }

    #[test]
    fn sign_certificates_hold_on_the_admissible_ranges() {
        for d in 2..=9 {
            let c = kg_sign_coefficients(d);
            assert_eq!(c.len(), 9);
            assert!(c.iter().all(|x| *x < Rational::zero()), "KG δ={d}");
            assert!(ratio_monotone(&ModelConfig::kg(d).unwrap(), 10).unwrap().all_pass(), "KG δ={d}");
        }
        for d in 1..=9 {
            let c = wm_sign_coefficients(d);
            assert_eq!(c.len(), 7);
            assert!(c.iter().all(|x| *x > Rational::zero()), "WM δ={d}");
            assert!(ratio_monotone(&ModelConfig::wm(d).unwrap(), 10).unwrap().all_pass(), "WM δ={d}");
        }
        // c_0 at δ = 3 from the published list
        let c0 = Poly::from_i64s(&[120, -64, -2196, -7401, -10288, -6202, -1532, -85]).eval(&int(3));
        assert_eq!(kg_sign_coefficients(3)[0], c0);
        assert!(c0 < Rational::zero());
    }
}
