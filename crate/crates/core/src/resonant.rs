//! The averaged resonant system around first-mode data: the amplitude `κ₀`,
//! the non-degeneracy gaps, the averaged cubic field and its differential,
//! the harmonic energy and linear flow, the time-averaged quartic energy
//! and its second differential on the energy surface.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{gamma_product, int, AlgebraError, ExactScalar, Rational};
use crate::coefficients::{diag_closed, CoeffError, CoeffTable};
use crate::par::Exec;
use crate::spectrum::{omega, Model, ModelConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonantError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0} is not coercive: gap(1) is not positive")]
    NotCoercive(ModelConfig),
    #[error("coercivity violated at sample {sample}: {lhs} < {rhs}")]
    CoercivityViolated { sample: usize, lhs: f64, rhs: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Mode amplitudes `ζ^{(0)}, …, ζ^{(N)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeVector(pub Vec<f64>);

impl ModeVector {
    pub fn zeros(len: usize) -> Self {
        ModeVector(vec![0.0; len])
    }

    /// `amplitude·e_index` in a vector of length `len`.
    pub fn unit(len: usize, index: usize, amplitude: f64) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = amplitude;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        ModeVector(self.0.iter().map(|x| c * x).collect())
    }
}

/// Phase-space point: positions `q` and velocities `p`, one entry per mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateVector {
    pub q: ModeVector,
    pub p: ModeVector,
}

impl StateVector {
    pub fn new(q: ModeVector, p: ModeVector) -> Result<Self, ResonantError> {
        if q.len() != p.len() {
            return Err(ResonantError::InvalidArgument(format!(
                "position and velocity lengths differ: {} vs {}",
                q.len(),
                p.len()
            )));
        }
        Ok(StateVector { q, p })
    }

    pub fn zeros(len: usize) -> Self {
        StateVector { q: ModeVector::zeros(len), p: ModeVector::zeros(len) }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `self + c·other`, componentwise.
    pub fn axpy(&self, c: f64, other: &StateVector) -> StateVector {
        let add = |a: &ModeVector, b: &ModeVector| ModeVector(a.0.iter().zip(&b.0).map(|(x, y)| x + c * y).collect());
        StateVector { q: add(&self.q, &other.q), p: add(&self.p, &other.p) }
    }
}

/// Frequencies `ω_0, …, ω_{len−1}` as floats.
pub fn frequencies(cfg: &ModelConfig, len: usize) -> Vec<f64> {
    (0..len).map(|n| omega(cfg, n) as f64).collect()
}

/// `κ₀² = 8ω₀²/(3C₀₀₀₀)` from the defining relation.
pub fn kappa0_squared_by_definition(cfg: &ModelConfig) -> Result<ExactScalar, ResonantError> {
    let w0 = omega(cfg, 0);
    let c0 = diag_closed(cfg, 0);
    Ok(ExactScalar::rational(int(8 * w0 * w0)).checked_div(&c0.scale(&int(3)))?)
}

/// `κ₀²` from the model-specific closed forms.
pub fn kappa0_squared_closed(cfg: &ModelConfig) -> Result<ExactScalar, ResonantError> {
    let d = cfg.delta();
    match cfg.model() {
        Model::Kg => {
            // 4^δ Γ(δ−½)² Γ(δ+½) / (3 Γ(δ) Γ(2δ−3/2))
            let g = gamma_product(&[2 * d - 1, 2 * d - 1, 2 * d + 1], &[2 * d, 4 * d - 3])?;
            let scale = Rational::from_integer(num_bigint::BigInt::from(4).pow(d as u32)) / int(3);
            Ok(g.scale(&scale))
        }
        Model::Wm => {
            // (2√(2δ(δ+1)(2δ+1)(2δ+3)) / (3(δ+1)))²
            let num = int(8 * d * (d + 1) * (2 * d + 1) * (2 * d + 3));
            let den = int(9 * (d + 1) * (d + 1));
            Ok(ExactScalar::rational(num / den))
        }
    }
}

/// The positive first-mode amplitude `κ₀`; the two expressions for `κ₀²`
/// are checked to agree exactly.
pub fn kappa0(cfg: &ModelConfig) -> Result<ExactScalar, ResonantError> {
    let by_definition = kappa0_squared_by_definition(cfg)?;
    let closed = kappa0_squared_closed(cfg)?;
    if by_definition != closed {
        return Err(ResonantError::InvalidArgument(format!(
            "amplitude expressions disagree for {cfg}: {by_definition} vs {closed}"
        )));
    }
    Ok(by_definition.sqrt()?)
}

/// `C₀₀₀₀/ω₀² − 2C₀₀ₘₘ/ωₘ²`; at `m = 0` this is `−C₀₀₀₀/ω₀²`.
pub fn gap(cfg: &ModelConfig, m: usize) -> Result<ExactScalar, ResonantError> {
    let w0 = omega(cfg, 0);
    let wm = omega(cfg, m);
    let first = diag_closed(cfg, 0).scale(&(int(1) / int(w0 * w0)));
    let second = diag_closed(cfg, m).scale(&(int(2) / int(wm * wm)));
    Ok(first.checked_sub(&second)?)
}

/// Diagonal entry of the differential of the averaged operator at `κ₀e₀`.
pub fn dm_diag(cfg: &ModelConfig, m: usize) -> Result<ExactScalar, ResonantError> {
    let w0 = omega(cfg, 0);
    if m == 0 {
        return Ok(ExactScalar::integer(-2 * w0 * w0));
    }
    let wm = omega(cfg, m);
    let weight = ExactScalar::integer(w0 * w0 * wm * wm).checked_div(&diag_closed(cfg, 0))?;
    Ok(&weight * &gap(cfg, m)?)
}

/// Existence and coercivity classification from the gaps `m ≤ m_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub delta: i64,
    pub model: Model,
    pub m_max: usize,
    /// `gaps[m]` for `m = 0..=m_max`; only `m ≥ 1` enters the classification.
    pub gaps: Vec<f64>,
    pub gaps_exact: Vec<ExactScalar>,
    pub existence_ok: bool,
    pub coercive: bool,
    /// Gaps strictly increase on `1..=m_max`, so the sign of `gap(1)`
    /// decides positivity of the whole family.
    pub monotone: bool,
    pub c_perp: Option<ExactScalar>,
}

pub fn stability_classify(cfg: &ModelConfig, m_max: usize) -> Result<GapReport, ResonantError> {
    stability_classify_with(cfg, m_max, Exec::auto())
}

pub fn stability_classify_with(cfg: &ModelConfig, m_max: usize, exec: Exec) -> Result<GapReport, ResonantError> {
    if m_max < 3 {
        return Err(ResonantError::InvalidArgument(format!("m_max must be at least 3, got {m_max}")));
    }
    let gaps_exact = exec.map_range(m_max + 1, |m| gap(cfg, m)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let existence_ok = gaps_exact[1..].iter().all(|g| !g.is_zero());
    let mut monotone = true;
    for pair in gaps_exact[1..].windows(2) {
        if pair[0].cmp_same_class(&pair[1])? != std::cmp::Ordering::Less {
            monotone = false;
        }
    }
    let coercive = existence_ok && gaps_exact[1..].iter().all(|g| g.signum() > 0);
    Ok(GapReport {
        delta: cfg.delta(),
        model: cfg.model(),
        m_max,
        gaps: gaps_exact.iter().map(ExactScalar::to_f64).collect(),
        c_perp: coercive.then(|| gaps_exact[1].clone()),
        gaps_exact,
        existence_ok,
        coercive,
        monotone,
    })
}

/// Harmonic energy `Σp² + Σω²q²`, without a factor ½.
pub fn harmonic_energy(cfg: &ModelConfig, state: &StateVector) -> f64 {
    let w = frequencies(cfg, state.len());
    state.q.0.iter().zip(&state.p.0).zip(&w).map(|((q, p), w)| p * p + w * w * q * q).sum()
}

/// Exact flow of the linear system: each mode rotates with frequency `ω_m`.
pub fn linear_flow(cfg: &ModelConfig, state: &StateVector, t: f64) -> StateVector {
    let w = frequencies(cfg, state.len());
    let mut q = Vec::with_capacity(state.len());
    let mut p = Vec::with_capacity(state.len());
    for ((q0, p0), w) in state.q.0.iter().zip(&state.p.0).zip(&w) {
        let (s, c) = (w * t).sin_cos();
        q.push(q0 * c + p0 / w * s);
        p.push(-w * q0 * s + p0 * c);
    }
    StateVector { q: ModeVector(q), p: ModeVector(p) }
}

/// Cubic coupling of the truncated mode system, in full and in the
/// symmetry-reduced form used for repeated force evaluations.
#[derive(Clone, Debug)]
pub struct Coupling {
    cfg: ModelConfig,
    len: usize,
    omegas: Vec<f64>,
    dense: Vec<f64>,
    triples: Vec<[usize; 3]>,
    /// `reduced[m·T + t] = multiplicity(t)·C_{t,m}` for triple `t = (i ≤ j ≤ k)`.
    reduced: Vec<f64>,
}

impl Coupling {
    /// Coupling on modes `0..=trunc` from a table covering them.
    pub fn new(table: &CoeffTable, trunc: usize) -> Result<Self, ResonantError> {
        let dense = table.dense(trunc)?;
        let len = trunc + 1;
        let mut triples = Vec::new();
        let mut mults = Vec::new();
        for i in 0..len {
            for j in i..len {
                for k in j..len {
                    triples.push([i, j, k]);
                    mults.push(multiplicity(i, j, k));
                }
            }
        }
        let count = triples.len();
        let mut reduced = vec![0.0; count * len];
        for m in 0..len {
            for (t, [i, j, k]) in triples.iter().enumerate() {
                reduced[m * count + t] = mults[t] * dense[((i * len + j) * len + k) * len + m];
            }
        }
        Ok(Coupling { cfg: *table.cfg(), len, omegas: frequencies(table.cfg(), len), dense, triples, reduced })
    }

    pub fn cfg(&self) -> &ModelConfig {
        &self.cfg
    }

    /// Number of modes `N + 1`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        let n = self.len;
        self.dense[((i * n + j) * n + k) * n + m]
    }

    /// `F_m(q) = −Σ_{ijk} C_ijkm q_i q_j q_k` via the reduced triple sum.
    pub fn force_into(&self, q: &[f64], products: &mut Vec<f64>, out: &mut [f64]) {
        products.clear();
        products.extend(self.triples.iter().map(|&[i, j, k]| q[i] * q[j] * q[k]));
        let count = self.triples.len();
        for (m, slot) in out.iter_mut().enumerate() {
            let row = &self.reduced[m * count..(m + 1) * count];
            *slot = -row.iter().zip(products.iter()).map(|(c, x)| c * x).sum::<f64>();
        }
    }

    pub fn force(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.force_into(q, &mut Vec::with_capacity(self.triples.len()), &mut out);
        out
    }

    /// Same as [`Coupling::force`] with the plain quadruple loop.
    pub fn force_naive(&self, q: &[f64]) -> Vec<f64> {
        let n = self.len;
        (0..n)
            .map(|m| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            acc += self.coeff(i, j, k, m) * q[i] * q[j] * q[k];
                        }
                    }
                }
                -acc
            })
            .collect()
    }

    /// Quartic energy `f(q) = ¼ Σ C_ijkm q_i q_j q_k q_m`.
    pub fn quartic(&self, q: &[f64]) -> f64 {
        let force = self.force(q);
        -0.25 * q.iter().zip(&force).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Equidistant samples that integrate every trigonometric polynomial
    /// of degree `≤ 4ω_N` over one period exactly.
    pub fn time_samples(&self) -> usize {
        4 * self.omegas[self.len - 1] as usize + 8
    }
}

fn multiplicity(i: usize, j: usize, k: usize) -> f64 {
    if i == j && j == k {
        1.0
    } else if i == j || j == k {
        3.0
    } else {
        6.0
    }
}

/// The averaged resonant system on a fixed truncation.
#[derive(Clone, Debug)]
pub struct ResonantSystem {
    coupling: Coupling,
    kappa: f64,
    c0000: f64,
    gaps: Vec<f64>,
}

impl ResonantSystem {
    pub fn new(table: &CoeffTable, trunc: usize) -> Result<Self, ResonantError> {
        let cfg = *table.cfg();
        if trunc < cfg.resonant_partner() + 1 {
            return Err(ResonantError::InvalidArgument(format!(
                "truncation {trunc} must exceed the resonant partner index {}",
                cfg.resonant_partner()
            )));
        }
        let coupling = Coupling::new(table, trunc)?;
        let kappa = kappa0(&cfg)?.to_f64();
        let gaps = (0..=trunc).map(|m| gap(&cfg, m).map(|g| g.to_f64())).collect::<Result<Vec<_>, _>>()?;
        Ok(ResonantSystem { c0000: diag_closed(&cfg, 0).to_f64(), coupling, kappa, gaps })
    }

    pub fn cfg(&self) -> &ModelConfig {
        self.coupling.cfg()
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn len(&self) -> usize {
        self.coupling.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coupling.is_empty()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The base point `ξ = κ₀e₀` with zero velocity.
    pub fn base_point(&self) -> StateVector {
        StateVector { q: ModeVector::unit(self.len(), 0, self.kappa), p: ModeVector::zeros(self.len()) }
    }

    fn check_len(&self, n: usize) -> Result<(), ResonantError> {
        if n != self.len() {
            return Err(ResonantError::InvalidArgument(format!("expected {} modes, got {n}", self.len())));
        }
        Ok(())
    }

    /// Time average of the cubic field along the linear flow from the
    /// position `zeta` at rest, pulled back by the inverse flow; returns
    /// the velocity component, the only one that survives for data at rest.
    pub fn average_f3(&self, zeta: &ModeVector) -> Result<ModeVector, ResonantError> {
        self.check_len(zeta.len())?;
        let n_t = self.coupling.time_samples();
        let w = self.coupling.omegas();
        let mut acc = vec![0.0; self.len()];
        let mut q = vec![0.0; self.len()];
        let mut force = vec![0.0; self.len()];
        let mut products = Vec::new();
        for s in 0..n_t {
            let t = 2.0 * PI * s as f64 / n_t as f64;
            for (m, slot) in q.iter_mut().enumerate() {
                *slot = zeta.0[m] * (w[m] * t).cos();
            }
            self.coupling.force_into(&q, &mut products, &mut force);
            for m in 0..self.len() {
                acc[m] += force[m] * (w[m] * t).cos();
            }
        }
        Ok(ModeVector(acc.into_iter().map(|x| x / n_t as f64).collect()))
    }

    /// `‖Lζ + ⟨f⁽³⁾⟩(ζ)‖` at `ζ = amplitude·e₀`.
    pub fn m_residual_at(&self, amplitude: f64) -> Result<f64, ResonantError> {
        let zeta = ModeVector::unit(self.len(), 0, amplitude);
        let avg = self.average_f3(&zeta)?;
        let w = self.coupling.omegas();
        Ok(zeta.0.iter().zip(&avg.0).zip(w).map(|((z, a), w)| (w * w * z + a).powi(2)).sum::<f64>().sqrt())
    }

    /// `‖M(ξ)‖` at the first-mode base point.
    pub fn m_residual(&self) -> Result<f64, ResonantError> {
        self.m_residual_at(self.kappa)
    }

    /// `⟨f⟩` from the closed resonant sum over `i + j = k + m`.
    pub fn time_average_closed(&self, state: &StateVector) -> Result<f64, ResonantError> {
        self.check_len(state.len())?;
        let n = self.len();
        let w = self.coupling.omegas();
        let (z1, z2) = (&state.q.0, &state.p.0);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let Some(m) = (i + j).checked_sub(k).filter(|&m| m < n) else {
                        continue;
                    };
                    let c = self.coupling.coeff(i, j, k, m);
                    if c == 0.0 {
                        continue;
                    }
                    let p = -z2[i] * z2[j] * z1[k] * z1[m] / (w[i] * w[j])
                        + z2[i] * z1[j] * z2[k] * z1[m] / (w[i] * w[k])
                        + z1[i] * z2[j] * z2[k] * z1[m] / (w[j] * w[k])
                        + z2[i] * z1[j] * z1[k] * z2[m] / (w[i] * w[m])
                        + z1[i] * z2[j] * z1[k] * z2[m] / (w[j] * w[m])
                        - z1[i] * z1[j] * z2[k] * z2[m] / (w[k] * w[m])
                        + z1[i] * z1[j] * z1[k] * z1[m]
                        + z2[i] * z2[j] * z2[k] * z2[m] / (w[i] * w[j] * w[k] * w[m]);
                    acc += c * p;
                }
            }
        }
        Ok(3.0 / 32.0 * acc)
    }

    /// `⟨f⟩` by trapezoid quadrature of `f` along one period of the linear flow.
    pub fn time_average_direct(&self, state: &StateVector) -> Result<f64, ResonantError> {
        self.check_len(state.len())?;
        let n_t = self.coupling.time_samples();
        let cfg = *self.cfg();
        let total: f64 = (0..n_t)
            .map(|s| {
                let t = 2.0 * PI * s as f64 / n_t as f64;
                self.coupling.quartic(&linear_flow(&cfg, state, t).q.0)
            })
            .sum();
        Ok(total / n_t as f64)
    }

    /// Both evaluations of `⟨f⟩`: `(closed, direct)`.
    pub fn time_average_f(&self, state: &StateVector) -> Result<(f64, f64), ResonantError> {
        Ok((self.time_average_closed(state)?, self.time_average_direct(state)?))
    }

    /// `−½h_Ω + ⟨f⟩`, whose critical point is the base point.
    pub fn reduced_energy(&self, state: &StateVector) -> Result<f64, ResonantError> {
        Ok(-0.5 * harmonic_energy(self.cfg(), state) + self.time_average_closed(state)?)
    }

    /// Closed formula for the second differential at the base point along
    /// the tangent `(V, W)`.
    pub fn second_diff(&self, tangent: &StateVector) -> Result<f64, ResonantError> {
        self.check_len(tangent.len())?;
        let w = self.coupling.omegas();
        let (v, wv) = (&tangent.q.0, &tangent.p.0);
        let w0sq = w[0] * w[0];
        let mut sum = 0.0;
        for l in 0..self.len() {
            sum += self.gaps[l] * ((w[l] * v[l]).powi(2) + wv[l] * wv[l]);
        }
        Ok(-(w0sq / self.c0000) * sum + w0sq * v[0] * v[0] - wv[0] * wv[0])
    }

    /// `(ω₀²/C₀₀₀₀)·gap(1)`, the coercivity constant in the spectral norm.
    pub fn coercivity_constant(&self) -> f64 {
        let w0 = self.coupling.omegas()[0];
        w0 * w0 / self.c0000 * self.gaps[1]
    }

    /// Spectral norm `Σ(ω V)² + ΣW²` of a tangent vector.
    pub fn tangent_norm_sq(&self, tangent: &StateVector) -> f64 {
        let w = self.coupling.omegas();
        (0..tangent.len()).map(|l| (w[l] * tangent.q.0[l]).powi(2) + tangent.p.0[l].powi(2)).sum()
    }

    /// Samples random unit tangents orthogonal to the first mode and checks
    /// `−d²(X,X) ≥ c̃⊥‖X‖²`.
    pub fn coercivity_check(&self, samples: usize, seed: u64) -> Result<CoercivityReport, ResonantError> {
        self.coercivity_check_with(samples, seed, Exec::auto())
    }

    pub fn coercivity_check_with(
        &self,
        samples: usize,
        seed: u64,
        exec: Exec,
    ) -> Result<CoercivityReport, ResonantError> {
        if self.gaps[1] <= 0.0 {
            return Err(ResonantError::NotCoercive(*self.cfg()));
        }
        let c_tilde = self.coercivity_constant() - 1e-12;
        let n = self.len();
        let results = exec.map_range(samples, |s| -> Result<(f64, f64), ResonantError> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut tangent = StateVector::zeros(n);
            for l in 1..n {
                tangent.q.0[l] = rng.gen_range(-1.0..1.0);
                tangent.p.0[l] = rng.gen_range(-1.0..1.0);
            }
            let scale = self.tangent_norm_sq(&tangent).sqrt().recip();
            let tangent = StateVector { q: tangent.q.scaled(scale), p: tangent.p.scaled(scale) };
            Ok((-self.second_diff(&tangent)?, self.tangent_norm_sq(&tangent)))
        });
        let mut min_ratio = f64::INFINITY;
        for (s, r) in results.into_iter().enumerate() {
            let (lhs, norm_sq) = r?;
            let rhs = c_tilde * norm_sq;
            if lhs < rhs {
                return Err(ResonantError::CoercivityViolated { sample: s, lhs, rhs });
            }
            min_ratio = min_ratio.min(lhs / norm_sq);
        }
        Ok(CoercivityReport { samples, seed, c_tilde, min_ratio })
    }

    /// Largest central-difference partial derivative of `−½h_Ω + ⟨f⟩` at
    /// the base point, over every position and velocity direction.
    pub fn gradient_residual(&self, step: f64) -> Result<f64, ResonantError> {
        let base = self.base_point();
        let mut worst: f64 = 0.0;
        for l in 0..2 * self.len() {
            let mut dir = StateVector::zeros(self.len());
            if l < self.len() {
                dir.q.0[l] = 1.0;
            } else {
                dir.p.0[l - self.len()] = 1.0;
            }
            let g = |h: f64| self.reduced_energy(&base.axpy(h, &dir));
            let coarse = (g(step)? - g(-step)?) / (2.0 * step);
            let fine = (g(step / 2.0)? - g(-step / 2.0)?) / step;
            worst = worst.max(((4.0 * fine - coarse) / 3.0).abs());
        }
        Ok(worst)
    }

    /// Second directional derivative of `−½h_Ω + ⟨f⟩` at the base point by
    /// Richardson-extrapolated central differences with steps `h` and `h/10`.
    pub fn second_diff_fd(&self, tangent: &StateVector, step: f64) -> Result<f64, ResonantError> {
        let base = self.base_point();
        let g0 = self.reduced_energy(&base)?;
        let d2 = |h: f64| -> Result<f64, ResonantError> {
            Ok((self.reduced_energy(&base.axpy(h, tangent))? - 2.0 * g0
                + self.reduced_energy(&base.axpy(-h, tangent))?)
                / (h * h))
        };
        let coarse = d2(step)?;
        let fine = d2(step / 10.0)?;
        Ok((100.0 * fine - coarse) / 99.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub samples: usize,
    pub seed: u64,
    pub c_tilde: f64,
    /// Smallest observed `−d²(X,X)/‖X‖²`.
    pub min_ratio: f64,
}

/// Random state on `len` modes with entries in `[−1, 1]`, supported on the
/// first `support` modes.
pub fn random_state(len: usize, support: usize, rng: &mut impl Rng) -> StateVector {
    let mut s = StateVector::zeros(len);
    for l in 0..support.min(len) {
        s.q.0[l] = rng.gen_range(-1.0..1.0);
        s.p.0[l] = rng.gen_range(-1.0..1.0);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::coefficients::{build_table, ExactPolicy};

    fn kg(d: i64) -> ModelConfig {
        ModelConfig::kg(d).unwrap()
    }

    fn wm(d: i64) -> ModelConfig {
        ModelConfig::wm(d).unwrap()
    }

    fn system(cfg: ModelConfig, trunc: usize) -> ResonantSystem {
        let table = build_table(&cfg, trunc, ExactPolicy::None).unwrap();
        ResonantSystem::new(&table, trunc).unwrap()
    }

    #[test]
    fn kappa_matches_hand_values() {
        let pi_third = ExactScalar::new(rat(4, 3), 2, int(1)).unwrap();
        assert_eq!(kappa0_squared_by_definition(&kg(2)).unwrap(), pi_third);
        assert_eq!(kappa0_squared_closed(&wm(1)).unwrap(), ExactScalar::rational(rat(20, 3)));
        for d in 2..=9 {
            let k = kappa0(&kg(d)).unwrap();
            assert!(k.signum() > 0);
            let lhs = &(&k * &k) * &diag_closed(&kg(d), 0).scale(&int(3));
            assert_eq!(lhs, ExactScalar::integer(8 * d * d));
        }
        for d in 1..=9 {
            assert!(kappa0(&wm(d)).is_ok());
        }
    }

    #[test]
    fn gap_values() {
        let inv_pi = ExactScalar::new(int(1), -2, int(1)).unwrap();
        assert_eq!(gap(&kg(2), 1).unwrap(), inv_pi);
        assert_eq!(gap(&wm(1), 1).unwrap(), ExactScalar::rational(rat(2, 35)));
        assert!(gap(&kg(10), 1).unwrap().signum() < 0);
        assert_eq!(dm_diag(&kg(2), 0).unwrap(), ExactScalar::integer(-8));
        assert_eq!(dm_diag(&kg(2), 1).unwrap(), ExactScalar::integer(8));
    }

    #[test]
    fn classification_follows_the_admissible_range() {
        for d in 2..=9 {
            let r = stability_classify(&kg(d), 20).unwrap();
            assert!(r.coercive && r.existence_ok && r.monotone, "kg {d}");
            assert_eq!(r.c_perp.as_ref(), Some(&r.gaps_exact[1]));
        }
        let r = stability_classify(&kg(10), 50).unwrap();
        assert!(!r.coercive && r.existence_ok && r.c_perp.is_none());
        for d in 1..=9 {
            assert!(stability_classify(&wm(d), 20).unwrap().coercive, "wm {d}");
        }
        assert!(stability_classify(&kg(2), 2).is_err());
    }

    #[test]
    fn averaged_cubic_field_on_first_mode_data() {
        for cfg in [kg(2), wm(1)] {
            let sys = system(cfg, 8);
            let kappa = sys.kappa();
            let avg = sys.average_f3(&ModeVector::unit(sys.len(), 0, kappa)).unwrap();
            let partner = cfg.resonant_partner();
            for m in 0..sys.len() {
                let c = sys.coupling().coeff(0, 0, 0, m);
                let mut want = 0.0;
                if m == partner {
                    want -= kappa.powi(3) * c / 8.0;
                }
                if m == 0 {
                    want -= 3.0 * kappa.powi(3) * c / 8.0;
                }
                assert!((avg.0[m] - want).abs() <= 1e-12 * kappa.powi(3), "{cfg} m={m}");
            }
            assert!(sys.m_residual().unwrap() <= 1e-10);
            assert!(sys.m_residual_at(1.01 * kappa).unwrap() > 1e-3);
            let zero = sys.average_f3(&ModeVector::zeros(sys.len())).unwrap();
            assert!(zero.0.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn linear_flow_rotates_each_mode() {
        let cfg = kg(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(6, 6, &mut rng);
        let back = linear_flow(&cfg, &s, 2.0 * PI);
        for (a, b) in s.q.0.iter().chain(&s.p.0).zip(back.q.0.iter().chain(&back.p.0)) {
            assert!((a - b).abs() <= 1e-12);
        }
        // ω₀ = 3 is odd, ω₁ = 5 odd: a half period flips the sign
        let half = linear_flow(&cfg, &s, PI);
        assert!((half.q.0[0] + s.q.0[0]).abs() <= 1e-12);
        let even = linear_flow(&kg(2), &s, PI);
        assert!((even.p.0[3] - s.p.0[3]).abs() <= 1e-12);
        let e = harmonic_energy(&cfg, &s);
        assert!((harmonic_energy(&cfg, &linear_flow(&cfg, &s, 0.731)) - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn base_point_energies() {
        let sys = system(kg(2), 6);
        let xi = sys.base_point();
        let k = sys.kappa();
        assert!((harmonic_energy(sys.cfg(), &xi) - 4.0 * k * k).abs() <= 1e-12);
        let (closed, direct) = sys.time_average_f(&xi).unwrap();
        let want = 3.0 / 32.0 * k.powi(4) * 8.0 / PI;
        assert!((closed - want).abs() <= 1e-12 * want);
        assert!((direct - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn second_differential_constants() {
        let sys = system(kg(2), 6);
        let mut x = StateVector::zeros(sys.len());
        x.q.0[1] = 1.0;
        assert!((sys.second_diff(&x).unwrap() + 8.0).abs() <= 1e-12);
        assert!((sys.coercivity_constant() - 0.5).abs() <= 1e-14);
        let unit = StateVector { q: x.q.scaled(1.0 / 16f64.sqrt()), p: x.p.clone() };
        let ratio = -sys.second_diff(&unit).unwrap() / sys.tangent_norm_sq(&unit);
        assert!((ratio - sys.coercivity_constant()).abs() <= 1e-12);
        let mut v0 = StateVector::zeros(sys.len());
        v0.q.0[0] = 1.0;
        assert!((sys.second_diff(&v0).unwrap() - 8.0).abs() <= 1e-12);
        let mut w0 = StateVector::zeros(sys.len());
        w0.p.0[0] = 1.0;
        assert!(sys.second_diff(&w0).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn second_differential_matches_finite_differences() {
        let sys = system(kg(2), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = random_state(sys.len(), sys.len(), &mut rng);
            let closed = sys.second_diff(&x).unwrap();
            let fd = sys.second_diff_fd(&x, 1e-3).unwrap();
            assert!((closed - fd).abs() <= 1e-5 * closed.abs().max(1.0), "{closed} vs {fd}");
        }
        assert!(sys.gradient_residual(1e-3).unwrap() <= 1e-8);
    }

    #[test]
    fn coercivity_on_random_tangents() {
        let sys = system(kg(2), 6);
        let a = sys.coercivity_check_with(200, 3, Exec::Sequential).unwrap();
        let b = sys.coercivity_check_with(200, 3, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.min_ratio >= a.c_tilde);
        let bad = system(kg(10), 12);
        assert!(matches!(bad.coercivity_check(10, 1), Err(ResonantError::NotCoercive(_))));
    }

    #[test]
    fn reduced_force_matches_the_full_loop() {
        let table = build_table(&wm(2), 6, ExactPolicy::None).unwrap();
        let c = Coupling::new(&table, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (a, b) in c.force(&q).iter().zip(c.force_naive(&q)) {
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }
}
