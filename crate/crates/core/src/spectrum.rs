//! Model configuration, eigenvalues, the Jacobi eigenbasis in `y = cos 2x`,
//! and Gauss–Jacobi quadrature.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{gamma_exact, gamma_product, int, AlgebraError, ExactScalar, Poly, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("delta = {delta} is not admissible for {model} (need delta >= {min})")]
    InvalidDelta { model: Model, delta: i64, min: i64 },
    #[error("Jacobi parameters must exceed -1, got ({a}, {b})")]
    InvalidParameters { a: HalfInt, b: HalfInt },
    #[error("eigenvalue solve failed for {npoints} nodes")]
    Convergence { npoints: usize },
    #[error("need between 1 and {max} nodes, got {npoints}")]
    NodeCount { npoints: usize, max: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Largest Gauss–Jacobi rule we trust in double precision.
pub const MAX_NODES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Kg,
    Wm,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Kg => "kg",
            Model::Wm => "wm",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kg" => Ok(Model::Kg),
            "wm" => Ok(Model::Wm),
            other => Err(format!("unknown model {other:?} (expected kg or wm)")),
        }
    }
}

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.0), BigInt::from(2))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Model choice and conformal mass; everything else is derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelConfig {
    model: Model,
    delta: i64,
}

impl ModelConfig {
    pub fn new(model: Model, delta: i64) -> Result<Self, SpectrumError> {
        let min = match model {
            Model::Kg => 2,
            Model::Wm => 1,
        };
        if delta < min {
            return Err(SpectrumError::InvalidDelta { model, delta, min });
        }
        Ok(ModelConfig { model, delta })
    }

    pub fn kg(delta: i64) -> Result<Self, SpectrumError> {
        Self::new(Model::Kg, delta)
    }

    pub fn wm(delta: i64) -> Result<Self, SpectrumError> {
        Self::new(Model::Wm, delta)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// First parameter of the eigenbasis Jacobi polynomials.
    pub fn jacobi_a(&self) -> HalfInt {
        match self.model {
            Model::Kg => HalfInt::from_twice(1),
            Model::Wm => HalfInt::integer(self.delta),
        }
    }

    pub fn jacobi_b(&self) -> HalfInt {
        match self.model {
            Model::Kg => HalfInt::from_twice(2 * self.delta - 3),
            Model::Wm => HalfInt::integer(1),
        }
    }

    /// `ω_n = 2n + mass_offset`.
    pub fn mass_offset(&self) -> i64 {
        match self.model {
            Model::Kg => self.delta,
            Model::Wm => self.delta + 2,
        }
    }

    /// Exponents of `(1−y)` and `(1+y)` in the quartic overlap integral.
    pub fn coeff_weight_exponents(&self) -> (HalfInt, HalfInt) {
        match self.model {
            Model::Kg => (HalfInt::from_twice(1), HalfInt::from_twice(4 * self.delta - 5)),
            Model::Wm => (HalfInt::integer(2 * self.delta - 1), HalfInt::integer(3)),
        }
    }

    /// Power of 2 dividing the quartic overlap integral: `C = 2^{-s}·∏N·∫…`.
    pub fn coeff_scale_exponent(&self) -> i64 {
        match self.model {
            Model::Kg => 2 * self.delta,
            Model::Wm => 2 * (self.delta + 2),
        }
    }

    /// Power of 2 dividing the inner product in `y`: `(f|g) = 2^{-s}∫ f g w`.
    pub fn inner_scale_exponent(&self) -> i64 {
        match self.model {
            Model::Kg => self.delta + 1,
            Model::Wm => self.delta + 3,
        }
    }

    /// Index of the mode hit by the first-mode cube: `ω_δ* = 3ω₀`.
    pub fn resonant_partner(&self) -> usize {
        self.mass_offset() as usize
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} delta={}", self.model, self.delta)
    }
}

/// Linear frequency `ω_n`.
pub fn omega(cfg: &ModelConfig, n: usize) -> i64 {
    2 * n as i64 + cfg.mass_offset()
}

fn check_params(a: HalfInt, b: HalfInt) -> Result<(), SpectrumError> {
    if a.twice() <= -2 || b.twice() <= -2 {
        return Err(SpectrumError::InvalidParameters { a, b });
    }
    Ok(())
}

/// Three-term recurrence coefficients: `P_n = (A y + B) P_{n−1} − C P_{n−2}`.
fn recurrence_coeffs(n: i64, a: &Rational, b: &Rational) -> (Rational, Rational, Rational) {
    let n_r = int(n);
    let s = a + b;
    let two_n_s = &n_r * int(2) + &s;
    let denom = int(2) * &n_r * (&n_r + &s) * (&two_n_s - int(2));
    let lead = (&two_n_s - int(1)) * &two_n_s * (&two_n_s - int(2)) / &denom;
    let konst = (&two_n_s - int(1)) * (a * a - b * b) / &denom;
    let back = int(2) * (&n_r + a - int(1)) * (&n_r + b - int(1)) * &two_n_s / &denom;
    (lead, konst, back)
}

/// Exact `P_n^{(a,b)}(y)` as a polynomial in `y`, via the three-term recurrence.
pub fn jacobi_poly(n: usize, a: HalfInt, b: HalfInt) -> Result<Poly, SpectrumError> {
    check_params(a, b)?;
    Ok(jacobi_family(n, a, b).pop().expect("nonempty family"))
}

/// `P_0, …, P_n` of one family.
pub fn jacobi_family(n: usize, a: HalfInt, b: HalfInt) -> Vec<Poly> {
    let (ar, br) = (a.to_rational(), b.to_rational());
    let mut out = vec![Poly::one()];
    if n == 0 {
        return out;
    }
    // P_1 = (a+1) + (a+b+2)(y−1)/2
    let half = Rational::new(1.into(), 2.into());
    let slope = (&ar + &br + int(2)) * &half;
    out.push(Poly::linear(slope.clone(), &ar + int(1) - &slope));
    for k in 2..=n {
        let (lead, konst, back) = recurrence_coeffs(k as i64, &ar, &br);
        let next = &(&Poly::linear(lead, konst) * &out[k - 1]) - &out[k - 2].scale(&back);
        out.push(next);
    }
    out
}

/// Values `P_0(y), …, P_n(y)` in double precision by the same recurrence.
pub fn jacobi_values(n: usize, a: HalfInt, b: HalfInt, y: f64, out: &mut Vec<f64>) {
    let (a, b) = (a.to_f64(), b.to_f64());
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push((a + 1.0) + (a + b + 2.0) * (y - 1.0) / 2.0);
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let denom = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let lead = (s - 1.0) * s * (s - 2.0);
        let konst = (s - 1.0) * (a * a - b * b);
        let back = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let v = ((lead * y + konst) * out[k - 1] - back * out[k - 2]) / denom;
        out.push(v);
    }
}

/// `N_n²`, the squared normalization of `e_n = N_n P_n(cos 2x)`.
pub fn norm_sq(cfg: &ModelConfig, n: usize) -> ExactScalar {
    let d = cfg.delta;
    let n = n as i64;
    match cfg.model {
        Model::Kg => {
            // 2Γ(n+1)/Γ(n+3/2) · (2n+δ)Γ(n+δ)/Γ(n+δ−1/2)
            let g = gamma_product(&[2 * n + 2, 2 * n + 2 * d], &[2 * n + 3, 2 * n + 2 * d - 1])
                .expect("arguments are positive");
            g.scale(&int(2 * (2 * n + d)))
        }
        Model::Wm => {
            let q = Rational::new(BigInt::from(2 * (d + n + 1) * (d + 2 * n + 2)), BigInt::from(n + 1));
            ExactScalar::rational(q)
        }
    }
}

/// `N_n` itself.
pub fn norm(cfg: &ModelConfig, n: usize) -> ExactScalar {
    norm_sq(cfg, n).sqrt().expect("N_n² is q·π^j with q > 0")
}

/// The constant value of the first eigenfunction.
pub fn e0(cfg: &ModelConfig) -> ExactScalar {
    let d = cfg.delta;
    match cfg.model {
        // (2/π^{1/4})·√(δΓ(δ)/Γ(δ−1/2)); squared: 4/√π · δΓ(δ)/Γ(δ−1/2)
        Model::Kg => {
            let ratio = gamma_product(&[2 * d], &[2 * d - 1]).expect("positive arguments");
            let sq = (&ratio * &ExactScalar::sqrt_pi_power(-1)).scale(&int(4 * d));
            sq.sqrt().expect("e₀² is q/π")
        }
        Model::Wm => ExactScalar::sqrt_rational(&int(2 * (d + 1) * (d + 2))).expect("positive"),
    }
}

/// Gauss–Jacobi nodes and weights for `∫₋₁¹ (1−y)^a (1+y)^b g(y) dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }
}

/// Nodes needed for an integrand of polynomial degree `degree`, with a
/// two-node margin.
pub fn nodes_for_degree(degree: usize) -> usize {
    degree.div_ceil(2) + 2
}

/// `∫₋₁¹ (1−y)^a (1+y)^b dy` exactly.
pub fn weight_mass(a: HalfInt, b: HalfInt) -> ExactScalar {
    let g = gamma_product(&[a.twice() + 2, b.twice() + 2], &[a.twice() + b.twice() + 4]).expect("a, b > -1");
    let e = a.twice() + b.twice() + 2;
    if e % 2 == 0 {
        g.scale(&crate::algebra::rational::pow(&int(2), e / 2))
    } else {
        // 2^{e/2} with e odd: 2^{(e-1)/2}·√2
        let root2 = ExactScalar::sqrt_rational(&int(2)).expect("positive");
        (&g * &root2).scale(&crate::algebra::rational::pow(&int(2), (e - 1) / 2))
    }
}

/// Golub–Welsch: eigen-decomposition of the symmetric Jacobi matrix, then
/// Newton polishing of each node on the orthonormal recurrence and weights
/// recomputed as Christoffel numbers `1/Σ_{k<n} p_k(y)²`.
pub fn gauss_jacobi_rule(a: HalfInt, b: HalfInt, npoints: usize) -> Result<QuadratureRule, SpectrumError> {
    check_params(a, b)?;
    if npoints == 0 || npoints > MAX_NODES {
        return Err(SpectrumError::NodeCount { npoints, max: MAX_NODES });
    }
    let (af, bf) = (a.to_f64(), b.to_f64());
    let mut diag = vec![0.0; npoints];
    let mut off = vec![0.0; npoints];
    for (i, d) in diag.iter_mut().enumerate() {
        let n = i as f64;
        let s = 2.0 * n + af + bf;
        *d = if i == 0 { (bf - af) / (af + bf + 2.0) } else { (bf * bf - af * af) / (s * (s + 2.0)) };
        let k = n + 1.0;
        let s = 2.0 * k + af + bf;
        let beta = if i == 0 {
            4.0 * (1.0 + af) * (1.0 + bf) / ((2.0 + af + bf).powi(2) * (3.0 + af + bf))
        } else {
            4.0 * k * (k + af) * (k + bf) * (k + af + bf) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[i] = beta.sqrt();
    }
    let mut jac = DMatrix::<f64>::zeros(npoints, npoints);
    for i in 0..npoints {
        jac[(i, i)] = diag[i];
        if i + 1 < npoints {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::try_new(jac, 1e-15, 10_000).ok_or(SpectrumError::Convergence { npoints })?;
    let mass = weight_mass(a, b).to_f64();
    let orthonormal = |y: f64| {
        let (mut prev, mut cur) = (0.0, 1.0 / mass.sqrt());
        let (mut dprev, mut dcur) = (0.0, 0.0);
        let mut sum_sq = 0.0;
        for k in 0..npoints {
            sum_sq += cur * cur;
            let back = if k == 0 { 0.0 } else { off[k - 1] };
            let next = ((y - diag[k]) * cur - back * prev) / off[k];
            let dnext = (cur + (y - diag[k]) * dcur - back * dprev) / off[k];
            (prev, cur, dprev, dcur) = (cur, next, dcur, dnext);
        }
        (sum_sq, cur, dcur)
    };
    let mut pairs: Vec<(f64, f64)> = (0..npoints)
        .map(|i| {
            let mut y = eig.eigenvalues[i];
            for _ in 0..2 {
                let (_, p, dp) = orthonormal(y);
                let step = p / dp;
                if step.is_finite() && step.abs() < 1e-8 {
                    y -= step;
                }
            }
            (y, 1.0 / orthonormal(y).0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pairs.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.1 <= 0.0) {
        return Err(SpectrumError::Convergence { npoints });
    }
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        exact_degree: 2 * npoints - 1,
    })
}

/// `|(e_n|e_m) − 𝟙(n=m)|` by quadrature.
pub fn orthonormality_defect(cfg: &ModelConfig, n: usize, m: usize) -> Result<f64, SpectrumError> {
    let (a, b) = (cfg.jacobi_a(), cfg.jacobi_b());
    let rule = gauss_jacobi_rule(a, b, n + m + 2)?;
    let scale = norm(cfg, n).to_f64() * norm(cfg, m).to_f64() * 2f64.powi(-cfg.inner_scale_exponent() as i32);
    let top = n.max(m);
    let mut vals = Vec::with_capacity(top + 1);
    let ip = rule.integrate(|y| {
        jacobi_values(top, a, b, y, &mut vals);
        vals[n] * vals[m]
    }) * scale;
    let target = if n == m { 1.0 } else { 0.0 };
    Ok((ip - target).abs())
}

/// `Γ(x)` as a float for half-integer `x`, exact before rounding.
pub fn gamma_half(twice_x: i64) -> Result<f64, AlgebraError> {
    gamma_exact(twice_x).map(|g| g.to_f64())
}
