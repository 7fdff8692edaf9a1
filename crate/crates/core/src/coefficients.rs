//! Quartic Fourier coefficients `C_ijkm`: exact and quadrature paths,
//! resonance classes, closed diagonal sums, the WM large-`m` limit and
//! persisted coefficient tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{int, AlgebraError, BiPoly, ExactScalar, Rational};
use crate::hyper::{GammaFactor, HyperTerm, UpperLimit};
use crate::par::Exec;
use crate::spectrum::{
    gauss_jacobi_rule, jacobi_values, nodes_for_degree, norm, omega, weight_mass, HalfInt, Model, ModelConfig,
    SpectrumError,
};

/// Largest index the exact engine accepts.
pub const MAX_EXACT_INDEX: usize = 64;
/// Largest index the quadrature path accepts.
pub const MAX_QUAD_INDEX: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error("index {index} exceeds the supported maximum {max}")]
    IndexTooLarge { index: usize, max: usize },
    #[error("{0} is only defined for the wave-map model")]
    WrongModel(&'static str),
    #[error("table does not contain key {0}")]
    TableIncomplete(CoeffKey),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Index quadruple `(i, j, k, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffKey {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub m: usize,
}

impl CoeffKey {
    pub fn new(i: usize, j: usize, k: usize, m: usize) -> Self {
        CoeffKey { i, j, k, m }
    }

    pub fn indices(&self) -> [usize; 4] {
        [self.i, self.j, self.k, self.m]
    }

    pub fn max_index(&self) -> usize {
        self.indices().into_iter().max().unwrap_or(0)
    }

    /// Storage form: `(i, j, k)` sorted ascending, `m` untouched.
    pub fn canonical(&self) -> Self {
        let mut t = [self.i, self.j, self.k];
        t.sort_unstable();
        CoeffKey::new(t[0], t[1], t[2], self.m)
    }

    pub fn is_canonical(&self) -> bool {
        self.i <= self.j && self.j <= self.k
    }
}

impl fmt::Display for CoeffKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.i, self.j, self.k, self.m)
    }
}

impl std::str::FromStr for CoeffKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected i,j,k,m but got {s:?}"));
        }
        let mut v = [0usize; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| format!("bad index {p:?} in {s:?}"))?;
        }
        Ok(CoeffKey::new(v[0], v[1], v[2], v[3]))
    }
}

/// A coefficient with an optional exact value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffValue {
    pub exact: Option<ExactScalar>,
    pub approx: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResonanceClass {
    NonResonant,
    OneMinus,
    TwoMinus,
    NoMinus,
}

/// Which sign patterns `ω_i ± ω_j ± ω_k ± ω_m` vanish, reported by the
/// most restrictive one found (one minus sign first).
pub fn resonance_class(cfg: &ModelConfig, key: &CoeffKey) -> ResonanceClass {
    let w: Vec<i64> = key.indices().iter().map(|&n| omega(cfg, n)).collect();
    let total: i64 = w.iter().sum();
    if total == 0 {
        return ResonanceClass::NoMinus;
    }
    // three minus signs are one minus sign up to an overall sign
    if w.iter().any(|&x| total - 2 * x == 0) {
        return ResonanceClass::OneMinus;
    }
    let pairs = [(0, 1), (0, 2), (0, 3)];
    if pairs.iter().any(|&(a, b)| total - 2 * (w[a] + w[b]) == 0) {
        return ResonanceClass::TwoMinus;
    }
    ResonanceClass::NonResonant
}

/// `∫₋₁¹ (1−y)^a (1+y)^b yⁿ dy` from `yⁿ = ((1+y)−1)ⁿ` and Beta integrals.
pub fn moment(a: HalfInt, b: HalfInt, n: usize) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    let mut binom = BigInt::one();
    for j in 0..=n {
        if j > 0 {
            binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        let sign = if (n - j) % 2 == 0 { 1 } else { -1 };
        let term =
            weight_mass(a, b + HalfInt::integer(j as i64)).scale(&Rational::from_integer(&binom * BigInt::from(sign)));
        acc = acc.checked_add(&term).expect("moments share one class");
    }
    acc
}

/// Exact coefficient engine for one model up to a fixed index.
///
/// Each `P_n` is expanded in `t = (1+y)/2` with integer coefficients `Z_n`
/// over the common denominator `L_n = n!·2ⁿ`. Weighted moments of `t^d` are
/// `μ₀·A_d/D` with integers `A_d`, so an overlap integral is a single big
/// integer dot product.
#[derive(Clone, Debug)]
pub struct ExactEngine {
    cfg: ModelConfig,
    max_index: usize,
    z: Vec<Vec<BigInt>>,
    l: Vec<BigInt>,
    a: Vec<BigInt>,
    d: BigInt,
    norms: Vec<ExactScalar>,
    base: ExactScalar,
}

impl ExactEngine {
    pub fn new(cfg: &ModelConfig, max_index: usize) -> Result<Self, CoeffError> {
        if max_index > MAX_EXACT_INDEX {
            return Err(CoeffError::IndexTooLarge { index: max_index, max: MAX_EXACT_INDEX });
        }
        let (ja, jb) = (cfg.jacobi_a().twice(), cfg.jacobi_b().twice());
        let mut z = Vec::with_capacity(max_index + 1);
        let mut l = Vec::with_capacity(max_index + 1);
        let mut fact = BigInt::one();
        for n in 0..=max_index {
            if n > 0 {
                fact *= BigInt::from(n);
            }
            l.push(&fact << n);
            let ni = n as i64;
            let mut row = Vec::with_capacity(n + 1);
            let mut binom = BigInt::one();
            for j in 0..=n {
                if j > 0 {
                    binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
                }
                let ji = j as i64;
                let mut x = binom.clone();
                for i in (ji + 1)..=ni {
                    x *= BigInt::from(jb + 2 * i);
                }
                for i in 1..=ji {
                    x *= BigInt::from(ja + jb + 2 * ni + 2 * i);
                }
                if (n + j) % 2 == 1 {
                    x = -x;
                }
                row.push(x);
            }
            z.push(row);
        }
        let (wa, wb) = cfg.coeff_weight_exponents();
        let top = 4 * max_index;
        let nums: Vec<i64> = (0..top as i64).map(|i| wb.twice() + 2 + 2 * i).collect();
        let dens: Vec<i64> = (0..top as i64).map(|i| wa.twice() + wb.twice() + 4 + 2 * i).collect();
        let mut a = Vec::with_capacity(top + 1);
        for dd in 0..=top {
            let mut v = BigInt::one();
            for x in &nums[..dd] {
                v *= BigInt::from(*x);
            }
            for x in &dens[dd..] {
                v *= BigInt::from(*x);
            }
            a.push(v);
        }
        let d = dens.iter().fold(BigInt::one(), |acc, x| acc * BigInt::from(*x));
        let norms = (0..=max_index).map(|n| norm(cfg, n)).collect();
        let base = weight_mass(wa, wb).scale(&crate::algebra::rational::pow(&int(2), -cfg.coeff_scale_exponent()));
        Ok(ExactEngine { cfg: *cfg, max_index, z, l, a, d, norms, base })
    }

    pub fn cfg(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    fn product(&self, p: &[BigInt], q: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); p.len() + q.len() - 1];
        for (i, x) in p.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in q.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn coeff(&self, key: &CoeffKey) -> Result<ExactScalar, CoeffError> {
        let top = key.max_index();
        if top > self.max_index {
            return Err(CoeffError::IndexTooLarge { index: top, max: self.max_index });
        }
        let [i, j, k, m] = key.indices();
        let left = self.product(&self.z[i], &self.z[j]);
        let right = self.product(&self.z[k], &self.z[m]);
        let mut s = BigInt::zero();
        for (p, x) in left.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let mut inner = BigInt::zero();
            for (q, y) in right.iter().enumerate() {
                inner += y * &self.a[p + q];
            }
            s += x * inner;
        }
        if s.is_zero() {
            return Ok(ExactScalar::zero());
        }
        let den = &self.l[i] * &self.l[j] * &self.l[k] * &self.l[m] * &self.d;
        let np = &(&self.norms[i] * &self.norms[j]) * &(&self.norms[k] * &self.norms[m]);
        Ok((&self.base * &np).scale(&Rational::new(s, den)))
    }
}

/// `C_ijkm` exactly.
pub fn coeff_exact(cfg: &ModelConfig, key: &CoeffKey) -> Result<ExactScalar, CoeffError> {
    ExactEngine::new(cfg, key.max_index())?.coeff(key)
}

/// Quadrature engine: Gauss–Jacobi rules for every node count a key up to
/// `max_index` can ask for, with basis values tabulated at the nodes.
#[derive(Clone, Debug)]
pub struct QuadEngine {
    cfg: ModelConfig,
    max_index: usize,
    // rules[n] holds (weights, values[node][index]) for n nodes
    rules: Vec<Option<(Vec<f64>, Vec<Vec<f64>>)>>,
    norms: Vec<f64>,
    scale: f64,
}

impl QuadEngine {
    pub fn new(cfg: &ModelConfig, max_index: usize) -> Result<Self, CoeffError> {
        if max_index > MAX_QUAD_INDEX {
            return Err(CoeffError::IndexTooLarge { index: max_index, max: MAX_QUAD_INDEX });
        }
        let (wa, wb) = cfg.coeff_weight_exponents();
        let (ja, jb) = (cfg.jacobi_a(), cfg.jacobi_b());
        let most = nodes_for_degree(4 * max_index);
        let mut rules = vec![None; most + 1];
        let mut buf = Vec::new();
        for (n, slot) in rules.iter_mut().enumerate().skip(2) {
            let rule = gauss_jacobi_rule(wa, wb, n)?;
            let values = rule
                .nodes()
                .iter()
                .map(|&y| {
                    jacobi_values(max_index, ja, jb, y, &mut buf);
                    buf.clone()
                })
                .collect();
            *slot = Some((rule.weights().to_vec(), values));
        }
        let norms = (0..=max_index).map(|n| norm(cfg, n).to_f64()).collect();
        let scale = 2f64.powi(-cfg.coeff_scale_exponent() as i32);
        Ok(QuadEngine { cfg: *cfg, max_index, rules, norms, scale })
    }

    pub fn cfg(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn coeff(&self, key: &CoeffKey) -> Result<f64, CoeffError> {
        let top = key.max_index();
        if top > self.max_index {
            return Err(CoeffError::IndexTooLarge { index: top, max: self.max_index });
        }
        let [i, j, k, m] = key.indices();
        let npoints = nodes_for_degree(i + j + k + m);
        let (weights, values) = self.rules[npoints].as_ref().expect("rule tabulated");
        let mut s = 0.0;
        for (w, v) in weights.iter().zip(values) {
            s += w * v[i] * v[j] * v[k] * v[m];
        }
        Ok(s * self.scale * self.norms[i] * self.norms[j] * self.norms[k] * self.norms[m])
    }
}

/// `C_ijkm` by Gauss–Jacobi quadrature.
pub fn coeff_quad(cfg: &ModelConfig, key: &CoeffKey) -> Result<f64, CoeffError> {
    let top = key.max_index();
    if top > MAX_QUAD_INDEX {
        return Err(CoeffError::IndexTooLarge { index: top, max: MAX_QUAD_INDEX });
    }
    let [i, j, k, m] = key.indices();
    let (wa, wb) = cfg.coeff_weight_exponents();
    let (ja, jb) = (cfg.jacobi_a(), cfg.jacobi_b());
    let rule = gauss_jacobi_rule(wa, wb, nodes_for_degree(i + j + k + m))?;
    let mut buf = Vec::new();
    let s = rule.integrate(|y| {
        jacobi_values(top, ja, jb, y, &mut buf);
        buf[i] * buf[j] * buf[k] * buf[m]
    });
    let n: f64 = key.indices().iter().map(|&n| norm(cfg, n).to_f64()).product();
    Ok(s * n * 2f64.powi(-cfg.coeff_scale_exponent() as i32))
}

fn wm_v_poly(delta: i64) -> BiPoly {
    // rows are powers of k (0..=8), entries are polynomials in m
    // (coefficient of m^0..m^4), each a polynomial in δ written out below
    let d = delta;
    let d2 = d * d;
    let d3 = d2 * d;
    let d4 = d3 * d;
    let rows: [[i64; 5]; 9] = [
        [
            12 * d4 + 24 * d3 + 12 * d2,
            20 * d4 + 84 * d3 + 88 * d2 + 24 * d,
            -d4 + 70 * d3 + 145 * d2 + 74 * d,
            -8 * d4 + 80 * d2 + 72 * d,
            d4 - 10 * d3 + 11 * d2 + 22 * d,
        ],
        [
            -16 * d4 - 72 * d3 - 80 * d2 - 24 * d,
            28 * d4 - 70 * d3 - 274 * d2 - 184 * d - 24,
            36 * d4 + 122 * d3 - 150 * d2 - 316 * d - 88,
            -8 * d4 + 80 * d3 + 92 * d2 - 156 * d - 96,
            -8 * d3 + 48 * d2 - 8 * d - 32,
        ],
        [
            -40 * d4 - 56 * d3 + 46 * d2 + 66 * d + 12,
            -48 * d4 - 302 * d3 - 210 * d2 + 136 * d + 76,
            24 * d4 - 162 * d3 - 528 * d2 - 126 * d + 100,
            52 * d3 - 192 * d2 - 260 * d + 16,
            24 * d2 - 72 * d - 16,
        ],
        [
            16 * d4 + 128 * d3 + 152 * d2 + 14 * d - 16,
            -32 * d4 + 80 * d3 + 488 * d2 + 312 * d - 4,
            -120 * d3 + 156 * d2 + 500 * d + 112,
            -120 * d2 + 136 * d + 128,
            -32 * d + 32,
        ],
        [
            16 * d4 + 8 * d3 - 106 * d2 - 100 * d - 11,
            112 * d3 + 36 * d2 - 244 * d - 96,
            198 * d2 + 6 * d - 124,
            112 * d - 16,
            16,
        ],
        [-32 * d3 - 36 * d2 + 30 * d + 20, -120 * d2 - 72 * d + 36, -120 * d - 24, -32, 0],
        [24 * d2 + 22 * d - 2, 52 * d + 20, 24, 0, 0],
        [-8 * d - 4, -8, 0, 0, 0],
        [1, 0, 0, 0, 0],
    ];
    // BiPoly::from_matrix is indexed [deg_m][deg_k]
    let matrix: Vec<Vec<Rational>> = (0..5).map(|dm| (0..9).map(|dk| int(rows[dk][dm])).collect()).collect();
    BiPoly::from_matrix(&matrix)
}

/// The closed-sum summand whose `k`-sum is `C_00mm`.
pub fn diag_summand(cfg: &ModelConfig) -> HyperTerm {
    let d = cfg.delta();
    let lin = |a: i64, b: i64, c: i64| BiPoly::linear(int(a), int(b), int(c));
    match cfg.model() {
        Model::Kg => HyperTerm::new(ExactScalar::sqrt_pi_power(-4), UpperLimit::affine(2, 1))
            .gamma(GammaFactor::num(0, 0, 2 * d + 2))
            .gamma(GammaFactor::num(0, 0, 4 * d - 3))
            .gamma(GammaFactor::den(0, 0, 2 * d - 1))
            .num_poly(lin(0, -4, 5 - 4 * d))
            .gamma(GammaFactor::num(0, 1, 2 * d - 2))
            .gamma(GammaFactor::num(0, 1, 4 * d - 5))
            .gamma(GammaFactor::den(0, 1, 2 * d - 1))
            .gamma(GammaFactor::den(0, 1, 4 * d - 4))
            .gamma(GammaFactor::den(0, 1, 4 * d - 2))
            .gamma(GammaFactor::num(0, 1, -1))
            .gamma(GammaFactor::num(0, 1, 1))
            .gamma(GammaFactor::den(0, 1, 2))
            .num_poly(lin(2, 0, d))
            .gamma(GammaFactor::num(2, -1, 3))
            .gamma(GammaFactor::num(2, 1, 4 * d - 2))
            .gamma(GammaFactor::den(2, -1, 4))
            .gamma(GammaFactor::den(2, 1, 4 * d - 1)),
        Model::Wm => {
            let g = crate::algebra::factorial((d - 1) as u64);
            let c = Rational::from_integer(BigInt::from(2 * (d + 1) * (d + 2)) * &g * &g);
            HyperTerm::new(ExactScalar::rational(c), UpperLimit { m_coeff: 1, constant: 0, cap: Some(d - 1) })
                .gamma(GammaFactor::den(0, 1, 2))
                .gamma(GammaFactor::den(0, 1, 6))
                .gamma(GammaFactor::num(1, 0, 2))
                .gamma(GammaFactor::num(1, 0, 4))
                .gamma(GammaFactor::den(0, -1, 2 * d))
                .gamma(GammaFactor::den(0, -1, 2 * d + 4))
                .num_poly(lin(2, -2, 2 * d + 1))
                .num_poly(wm_v_poly(d))
                .gamma(GammaFactor::den(1, -1, 2))
                .gamma(GammaFactor::den(1, -1, 4))
                .num_poly(lin(2, 0, d + 2))
                .gamma(GammaFactor::den(1, 0, 2 * d + 2))
                .gamma(GammaFactor::den(1, 0, 2 * d + 4))
                .gamma(GammaFactor::num(1, -1, 4 * d))
                .gamma(GammaFactor::num(1, -1, 4 * d + 2))
                .gamma(GammaFactor::den(2, -1, 4 * d + 4))
                .gamma(GammaFactor::num(2, -1, 2 * d))
                .gamma(GammaFactor::num(2, -1, 2 * d + 4))
                .gamma(GammaFactor::den(2, -1, 4 * d + 8))
        }
    }
}

/// `C_00mm` from the closed finite sum.
pub fn diag_closed(cfg: &ModelConfig, m: usize) -> ExactScalar {
    diag_summand(cfg).sum(m as i64).expect("summand has no poles on its range")
}

/// `lim_{m→∞} C_00mm` for the wave-map model, closed form.
pub fn c_infinity(delta: i64) -> Result<ExactScalar, CoeffError> {
    if delta < 1 {
        return Err(CoeffError::WrongModel("c_infinity"));
    }
    // 3(δ+2)Γ(δ−1/2)/(2√π Γ(δ+1))
    let g = crate::algebra::gamma_product(&[2 * delta - 1], &[2 * delta + 2])?;
    Ok((&g * &ExactScalar::sqrt_pi_power(-1)).scale(&Rational::new(BigInt::from(3 * (delta + 2)), BigInt::from(2))))
}

/// The same limit by iterating its one-step recurrence from `C∞(1) = 9/2`.
pub fn c_infinity_recurrence(delta: i64) -> Result<ExactScalar, CoeffError> {
    if delta < 1 {
        return Err(CoeffError::WrongModel("c_infinity"));
    }
    let mut v = Rational::new(9.into(), 2.into());
    for d in 1..delta {
        v *= Rational::new(BigInt::from((d + 3) * (2 * d - 1)), BigInt::from(2 * (d + 1) * (d + 2)));
    }
    Ok(ExactScalar::rational(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ExactPolicy {
    #[default]
    DiagonalOnly,
    All,
    None,
}

impl std::str::FromStr for ExactPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "diagonalonly" | "diagonal" => Ok(ExactPolicy::DiagonalOnly),
            "all" => Ok(ExactPolicy::All),
            "none" => Ok(ExactPolicy::None),
            other => Err(format!("unknown policy {other:?} (expected diagonal-only, all or none)")),
        }
    }
}

/// Whether the key is `(0,0,m,m)` up to permutation.
pub fn is_diagonal(key: &CoeffKey) -> bool {
    let mut v = key.indices();
    v.sort_unstable();
    v[0] == 0 && v[1] == 0 && v[2] == v[3]
}

/// All canonical keys with indices `≤ max_index`, in lexicographic order.
pub fn canonical_keys(max_index: usize) -> Vec<CoeffKey> {
    let mut out = Vec::new();
    for i in 0..=max_index {
        for j in i..=max_index {
            for k in j..=max_index {
                for m in 0..=max_index {
                    out.push(CoeffKey::new(i, j, k, m));
                }
            }
        }
    }
    out
}

/// Coefficients for every canonical key up to `max_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    cfg: ModelConfig,
    max_index: usize,
    policy: ExactPolicy,
    entries: BTreeMap<CoeffKey, CoeffValue>,
}

impl CoeffTable {
    pub fn cfg(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn policy(&self) -> ExactPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CoeffKey, &CoeffValue)> {
        self.entries.iter()
    }

    /// Looks up any permutation of `(i, j, k)`; `m` is the free index.
    pub fn get(&self, key: &CoeffKey) -> Result<&CoeffValue, CoeffError> {
        self.entries.get(&key.canonical()).ok_or(CoeffError::TableIncomplete(*key))
    }

    pub fn approx(&self, key: &CoeffKey) -> Result<f64, CoeffError> {
        self.get(key).map(|v| v.approx)
    }

    /// Dense `C[i][j][k][m]` in floating point, `(N+1)⁴` entries.
    pub fn dense(&self, trunc: usize) -> Result<Vec<f64>, CoeffError> {
        if trunc > self.max_index {
            return Err(CoeffError::TableIncomplete(CoeffKey::new(trunc, trunc, trunc, trunc)));
        }
        let n = trunc + 1;
        let mut out = vec![0.0; n * n * n * n];
        for (key, v) in self.entries.range(..) {
            if key.max_index() > trunc {
                continue;
            }
            let (i, j, k, m) = (key.i, key.j, key.k, key.m);
            for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                out[((a * n + b) * n + c) * n + m] = v.approx;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<TableEntry> = self
            .entries
            .iter()
            .map(|(k, v)| TableEntry { key: k.indices(), exact: v.exact.clone(), approx: v.approx })
            .collect();
        serde_json::to_value(TableFile {
            model: self.cfg.model(),
            delta: self.cfg.delta(),
            max_index: self.max_index,
            policy: self.policy,
            schema_version: 1,
            entries,
        })
        .expect("table serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let file: TableFile = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        if file.schema_version != 1 {
            return Err(format!("unsupported schema_version {}", file.schema_version));
        }
        let cfg = ModelConfig::new(file.model, file.delta).map_err(|e| e.to_string())?;
        let entries = file
            .entries
            .into_iter()
            .map(|e| {
                let [i, j, k, m] = e.key;
                (CoeffKey::new(i, j, k, m), CoeffValue { exact: e.exact, approx: e.approx })
            })
            .collect();
        Ok(CoeffTable { cfg, max_index: file.max_index, policy: file.policy, entries })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), std::io::Error> {
        let mut w = out;
        writeln!(w, "i,j,k,m,approx")?;
        for (k, v) in &self.entries {
            writeln!(w, "{},{},{},{},{:e}", k.i, k.j, k.k, k.m, v.approx)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    key: [usize; 4],
    exact: Option<ExactScalar>,
    approx: f64,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    model: Model,
    delta: i64,
    max_index: usize,
    policy: ExactPolicy,
    schema_version: u32,
    entries: Vec<TableEntry>,
}

/// Builds a table with the build's default execution policy.
pub fn build_table(cfg: &ModelConfig, max_index: usize, policy: ExactPolicy) -> Result<CoeffTable, CoeffError> {
    build_table_with(cfg, max_index, policy, Exec::auto())
}

/// Builds a table; exact values follow `policy`, and one-minus resonant
/// keys always get an exact value unless the policy is `None`.
pub fn build_table_with(
    cfg: &ModelConfig,
    max_index: usize,
    policy: ExactPolicy,
    exec: Exec,
) -> Result<CoeffTable, CoeffError> {
    if policy == ExactPolicy::All && max_index > MAX_EXACT_INDEX {
        return Err(CoeffError::IndexTooLarge { index: max_index, max: MAX_EXACT_INDEX });
    }
    let keys = canonical_keys(max_index);
    let quad = QuadEngine::new(cfg, max_index)?;
    let exact = match policy {
        ExactPolicy::None => None,
        _ => Some(ExactEngine::new(cfg, max_index.min(MAX_EXACT_INDEX))?),
    };
    let values = exec.map(&keys, |key| -> Result<CoeffValue, CoeffError> {
        let approx = quad.coeff(key)?;
        let want = match policy {
            ExactPolicy::None => false,
            ExactPolicy::All => true,
            ExactPolicy::DiagonalOnly => {
                key.max_index() <= MAX_EXACT_INDEX
                    && (is_diagonal(key) || resonance_class(cfg, key) == ResonanceClass::OneMinus)
            }
        };
        let exact_value = match (&exact, want) {
            (Some(engine), true) => Some(engine.coeff(key)?),
            _ => None,
        };
        Ok(CoeffValue { exact: exact_value, approx })
    });
    let mut entries = BTreeMap::new();
    for (key, v) in keys.into_iter().zip(values) {
        entries.insert(key, v?);
    }
    Ok(CoeffTable { cfg: *cfg, max_index, policy, entries })
}

/// Exact zero test for one-minus resonant keys; `Some(false)` means the
/// vanishing statement fails.
pub fn vanishing_holds(engine: &ExactEngine, key: &CoeffKey) -> Option<bool> {
    if resonance_class(engine.cfg(), key) != ResonanceClass::OneMinus {
        return None;
    }
    engine.coeff(key).ok().map(|v| v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::spectrum::jacobi_poly;

    fn pi_inv(q: Rational) -> ExactScalar {
        ExactScalar::sqrt_pi_power(-2).scale(&q)
    }

    /// Reference path: expand the four Jacobi polynomials in `y` and
    /// integrate monomials with `moment`.
    fn reference(cfg: &ModelConfig, key: &CoeffKey) -> ExactScalar {
        let (ja, jb) = (cfg.jacobi_a(), cfg.jacobi_b());
        let mut p = crate::algebra::Poly::one();
        for n in key.indices() {
            p = &p * &jacobi_poly(n, ja, jb).unwrap();
        }
        let (wa, wb) = cfg.coeff_weight_exponents();
        let mut acc = ExactScalar::zero();
        for (d, c) in p.coeffs().iter().enumerate() {
            acc = acc.checked_add(&moment(wa, wb, d).scale(c)).unwrap();
        }
        let mut np = ExactScalar::one();
        for n in key.indices() {
            np = &np * &norm(cfg, n);
        }
        (&acc * &np).scale(&crate::algebra::rational::pow(&int(2), -cfg.coeff_scale_exponent()))
    }

    #[test]
    fn moments() {
        let z = HalfInt::integer(0);
        assert_eq!(moment(z, z, 2), ExactScalar::rational(rat(2, 3)));
        let h = HalfInt::from_twice(1);
        assert_eq!(moment(h, h, 0), ExactScalar::sqrt_pi_power(2).scale(&rat(1, 2)));
        assert!(moment(h, h, 1).is_zero());
    }

    #[test]
    fn exact_examples() {
        let kg2 = ModelConfig::kg(2).unwrap();
        assert_eq!(coeff_exact(&kg2, &CoeffKey::new(0, 0, 1, 1)).unwrap(), pi_inv(int(8)));
        assert!(coeff_exact(&kg2, &CoeffKey::new(0, 0, 0, 2)).unwrap().is_zero());
        let wm1 = ModelConfig::wm(1).unwrap();
        assert_eq!(coeff_exact(&wm1, &CoeffKey::new(0, 0, 0, 0)).unwrap(), ExactScalar::rational(rat(18, 5)));
        assert!(matches!(coeff_exact(&kg2, &CoeffKey::new(0, 0, 0, 65)), Err(CoeffError::IndexTooLarge { .. })));
    }

    #[test]
    fn engine_matches_reference() {
        for cfg in [ModelConfig::kg(3).unwrap(), ModelConfig::wm(2).unwrap()] {
            for key in [CoeffKey::new(1, 2, 3, 4), CoeffKey::new(0, 2, 2, 5), CoeffKey::new(3, 3, 1, 0)] {
                assert_eq!(coeff_exact(&cfg, &key).unwrap(), reference(&cfg, &key), "{cfg} {key}");
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let kg2 = ModelConfig::kg(2).unwrap();
        let v = coeff_quad(&kg2, &CoeffKey::new(0, 0, 5, 5)).unwrap();
        assert!((v - 8.0 / std::f64::consts::PI).abs() < 1e-10);
        let wm2 = ModelConfig::wm(2).unwrap();
        let key = CoeffKey::new(1, 1, 1, 1);
        let e = coeff_exact(&wm2, &key).unwrap().to_f64();
        assert!((coeff_quad(&wm2, &key).unwrap() - e).abs() < 1e-10 * e.abs().max(1.0));
        let kg3 = ModelConfig::kg(3).unwrap();
        assert!(coeff_quad(&kg3, &CoeffKey::new(0, 0, 0, 3)).unwrap().abs() < 1e-12);
        let engine = QuadEngine::new(&wm2, 4).unwrap();
        assert!((engine.coeff(&key).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn classes() {
        let kg2 = ModelConfig::kg(2).unwrap();
        assert_eq!(resonance_class(&kg2, &CoeffKey::new(0, 0, 0, 2)), ResonanceClass::OneMinus);
        assert_eq!(resonance_class(&kg2, &CoeffKey::new(1, 0, 1, 0)), ResonanceClass::TwoMinus);
        assert_eq!(resonance_class(&kg2, &CoeffKey::new(0, 0, 0, 5)), ResonanceClass::NonResonant);
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diag_closed(&ModelConfig::kg(2).unwrap(), 7), pi_inv(int(8)));
        assert_eq!(diag_closed(&ModelConfig::kg(3).unwrap(), 1), pi_inv(rat(38, 3)));
        assert_eq!(diag_closed(&ModelConfig::wm(1).unwrap(), 1), ExactScalar::rational(rat(30, 7)));
        for cfg in [ModelConfig::kg(4).unwrap(), ModelConfig::wm(3).unwrap()] {
            for m in 0..4 {
                assert_eq!(diag_closed(&cfg, m), coeff_exact(&cfg, &CoeffKey::new(0, 0, m, m)).unwrap());
            }
        }
    }

    #[test]
    fn limits() {
        assert_eq!(c_infinity(1).unwrap(), ExactScalar::rational(rat(9, 2)));
        assert_eq!(c_infinity(2).unwrap(), ExactScalar::rational(rat(3, 2)));
        assert_eq!(c_infinity(3).unwrap(), ExactScalar::rational(rat(15, 16)));
        for d in 1..10 {
            assert_eq!(c_infinity(d).unwrap(), c_infinity_recurrence(d).unwrap());
        }
    }

    #[test]
    fn tables() {
        let kg2 = ModelConfig::kg(2).unwrap();
        let t = build_table(&kg2, 0, ExactPolicy::All).unwrap();
        assert_eq!(t.len(), 1);
        let t = build_table(&kg2, 4, ExactPolicy::All).unwrap();
        assert_eq!(t.get(&CoeffKey::new(0, 0, 2, 2)).unwrap().exact, Some(pi_inv(int(8))));
        let a = t.get(&CoeffKey::new(1, 0, 2, 3)).unwrap();
        assert_eq!(a, t.get(&CoeffKey::new(0, 1, 2, 3)).unwrap());
        assert_eq!(a, t.get(&CoeffKey::new(2, 0, 1, 3)).unwrap());
        let seq = build_table_with(&kg2, 4, ExactPolicy::DiagonalOnly, Exec::Sequential).unwrap();
        let par = build_table_with(&kg2, 4, ExactPolicy::DiagonalOnly, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        let back = CoeffTable::from_json(&seq.to_json()).unwrap();
        assert_eq!(back, seq);
        let mut csv = Vec::new();
        seq.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("i,j,k,m,approx\n0,0,0,0,"));
    }
}
