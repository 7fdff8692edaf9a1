//! Galerkin evolution of the truncated cubic mode system with a
//! velocity-Verlet integrator, and diagnostics measuring the distance to
//! the linear orbit of the first-mode data.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::coefficients::CoeffTable;
use crate::par::Exec;
use crate::resonant::{harmonic_energy, kappa0, Coupling, ModeVector, ResonantError, StateVector};
use crate::spectrum::{omega, ModelConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error(transparent)]
    Resonant(#[from] ResonantError),
    #[error("invalid evolution setting: {0}")]
    InvalidConfig(String),
}

/// Settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub cfg: ModelConfig,
    pub eps: f64,
    pub trunc: usize,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl EvolveConfig {
    /// `periods` linear periods `2π` with `steps_per_fastest` steps per
    /// period of the fastest mode, so that `2π/dt` is an integer.
    pub fn with_periods(
        cfg: ModelConfig,
        eps: f64,
        trunc: usize,
        periods: usize,
        steps_per_fastest: usize,
    ) -> Result<Self, EvolveError> {
        let dt = default_dt(&cfg, trunc, steps_per_fastest);
        let ecfg = EvolveConfig { cfg, eps, trunc, dt, t_end: 2.0 * PI * periods as f64, record_every: 1 };
        ecfg.validate()?;
        Ok(ecfg)
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |msg: String| Err(EvolveError::InvalidConfig(msg));
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be finite and nonnegative, got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if self.record_every == 0 {
            return bad("record_every must be positive".into());
        }
        if self.trunc < self.cfg.resonant_partner() + 1 {
            return bad(format!(
                "truncation {} must exceed the resonant partner index {}",
                self.trunc,
                self.cfg.resonant_partner()
            ));
        }
        Ok(())
    }

    /// Number of steps, `round(t_end/dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// `2π/(steps·ω_N)`.
pub fn default_dt(cfg: &ModelConfig, trunc: usize, steps_per_fastest: usize) -> f64 {
    2.0 * PI / (steps_per_fastest as f64 * omega(cfg, trunc) as f64)
}

/// Sampled run: states and diagnostics at the recording times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub energy: Vec<f64>,
    pub h_omega: Vec<f64>,
    pub dist_linear: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sup_dist(&self) -> f64 {
        self.dist_linear.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|H(t) − H(0)|/|H(0)|` over the samples whose time is a
    /// whole multiple of `2π`.
    pub fn stroboscopic_energy_drift(&self, dt: f64) -> f64 {
        let per_period = (2.0 * PI / dt).round() as usize;
        let h0 = self.energy.first().copied().unwrap_or(0.0);
        self.times
            .iter()
            .zip(&self.energy)
            .filter(|(t, _)| ((**t / dt).round() as usize) % per_period == 0)
            .map(|(_, h)| ((h - h0) / h0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|H(t) − H(0)|/|H(0)|` over every sample.
    pub fn energy_band(&self) -> f64 {
        let h0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|h| ((h - h0) / h0).abs()).fold(0.0, f64::max)
    }
}

/// The truncated system `q̈ + ω²q = −ε² Σ C q q q` on modes `0..=N`.
#[derive(Clone, Debug)]
pub struct Evolver {
    coupling: Coupling,
    eps: f64,
    kappa: f64,
}

impl Evolver {
    pub fn new(table: &CoeffTable, trunc: usize, eps: f64) -> Result<Self, EvolveError> {
        let coupling = Coupling::new(table, trunc).map_err(EvolveError::Resonant)?;
        let kappa = kappa0(table.cfg()).map_err(EvolveError::Resonant)?.to_f64();
        Ok(Evolver { coupling, eps, kappa })
    }

    pub fn cfg(&self) -> &ModelConfig {
        self.coupling.cfg()
    }

    pub fn len(&self) -> usize {
        self.coupling.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coupling.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// First-mode data `εκ₀e₀` at rest.
    pub fn first_mode_data(&self) -> StateVector {
        StateVector { q: ModeVector::unit(self.len(), 0, self.eps * self.kappa), p: ModeVector::zeros(self.len()) }
    }

    /// Acceleration `−ω²q − ε² Σ C q q q`.
    pub fn rhs(&self, q: &ModeVector) -> ModeVector {
        let mut out = vec![0.0; self.len()];
        self.rhs_into(&q.0, &mut Vec::new(), &mut out);
        ModeVector(out)
    }

    fn rhs_into(&self, q: &[f64], products: &mut Vec<f64>, out: &mut [f64]) {
        self.coupling.force_into(q, products, out);
        let e2 = self.eps * self.eps;
        for ((a, w), x) in out.iter_mut().zip(self.coupling.omegas()).zip(q) {
            *a = e2 * *a - w * w * x;
        }
    }

    /// One velocity-Verlet step.
    pub fn step(&self, state: &StateVector, dt: f64) -> StateVector {
        let mut q = state.q.0.clone();
        let mut p = state.p.0.clone();
        let mut acc = vec![0.0; self.len()];
        let mut products = Vec::new();
        self.rhs_into(&q, &mut products, &mut acc);
        self.advance(&mut q, &mut p, &mut acc, &mut products, dt);
        StateVector { q: ModeVector(q), p: ModeVector(p) }
    }

    /// Verlet update in place; `acc` holds the acceleration at `q` on entry
    /// and at the new `q` on exit.
    fn advance(&self, q: &mut [f64], p: &mut [f64], acc: &mut [f64], products: &mut Vec<f64>, dt: f64) {
        let half = 0.5 * dt;
        for ((x, v), a) in q.iter_mut().zip(p.iter_mut()).zip(acc.iter()) {
            *v += half * a;
            *x += dt * *v;
        }
        self.rhs_into(q, products, acc);
        for (v, a) in p.iter_mut().zip(acc.iter()) {
            *v += half * a;
        }
    }

    /// `H = ½Σ(p² + ω²q²) + ε² f(q)`.
    pub fn energy(&self, state: &StateVector) -> f64 {
        0.5 * harmonic_energy(self.cfg(), state) + self.eps * self.eps * self.coupling.quartic(&state.q.0)
    }

    /// Phase-space distance to the linear orbit of `εκ₀e₀`.
    pub fn distance_to_linear_orbit(&self, state: &StateVector) -> f64 {
        distance_to_linear_orbit(self.cfg(), state, self.eps * self.kappa)
    }

    pub fn integrate(&self, ecfg: &EvolveConfig, initial: &StateVector) -> Result<Trajectory, EvolveError> {
        ecfg.validate()?;
        if initial.len() != self.len() {
            return Err(EvolveError::InvalidConfig(format!(
                "initial state has {} modes, evolver has {}",
                initial.len(),
                self.len()
            )));
        }
        let steps = ecfg.steps();
        let mut traj = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            h_omega: Vec::new(),
            dist_linear: Vec::new(),
        };
        let mut record = |n: usize, state: StateVector| {
            traj.times.push(n as f64 * ecfg.dt);
            traj.energy.push(self.energy(&state));
            traj.h_omega.push(harmonic_energy(self.cfg(), &state));
            traj.dist_linear.push(self.distance_to_linear_orbit(&state));
            traj.states.push(state);
        };
        let mut q = initial.q.0.clone();
        let mut p = initial.p.0.clone();
        let mut acc = vec![0.0; self.len()];
        let mut products = Vec::new();
        self.rhs_into(&q, &mut products, &mut acc);
        record(0, initial.clone());
        for n in 1..=steps {
            self.advance(&mut q, &mut p, &mut acc, &mut products, ecfg.dt);
            if n % ecfg.record_every == 0 || n == steps {
                record(n, StateVector { q: ModeVector(q.clone()), p: ModeVector(p.clone()) });
            }
        }
        Ok(traj)
    }
}

/// Grid size of the coarse phase search.
const PHASE_GRID: usize = 1024;

/// `inf_τ (Σω²(q − q_lin(τ))² + Σ(p − p_lin(τ))²)^{1/2}` against the orbit
/// of `amplitude·e₀` at rest; coarse grid over one period of the first mode
/// followed by golden-section refinement.
pub fn distance_to_linear_orbit(cfg: &ModelConfig, state: &StateVector, amplitude: f64) -> f64 {
    let w0 = omega(cfg, 0) as f64;
    let mut rest = 0.0;
    for m in 1..state.len() {
        let w = omega(cfg, m) as f64;
        rest += w * w * state.q.0[m] * state.q.0[m] + state.p.0[m] * state.p.0[m];
    }
    let (q0, p0) = (state.q.0[0], state.p.0[0]);
    let first = |tau: f64| {
        let (s, c) = (w0 * tau).sin_cos();
        (w0 * (q0 - amplitude * c)).powi(2) + (p0 + w0 * amplitude * s).powi(2)
    };
    let period = 2.0 * PI / w0;
    let h = period / PHASE_GRID as f64;
    let best = (0..PHASE_GRID).min_by(|&a, &b| first(a as f64 * h).total_cmp(&first(b as f64 * h))).unwrap_or(0);
    let tau = golden_section(first, (best as f64 - 1.0) * h, (best as f64 + 1.0) * h, 1e-10);
    (rest + first(tau).min(first(best as f64 * h))).max(0.0).sqrt()
}

/// Minimizer of a unimodal function on `[lo, hi]` to tolerance `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// One point of an amplitude sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub eps: f64,
    pub sup_dist: f64,
    pub energy_drift: f64,
}

/// Amplitude sweep with first-mode data and its log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    pub slope_estimate: f64,
}

/// Runs first-mode data for each `eps` over `periods` periods; runs are
/// independent and execute concurrently under `exec`.
pub fn scaling_study(
    table: &CoeffTable,
    trunc: usize,
    eps_values: &[f64],
    periods: usize,
    record_every: usize,
    exec: Exec,
) -> Result<ScalingStudy, EvolveError> {
    let runs = exec.map(eps_values, |&eps| -> Result<ScalingPoint, EvolveError> {
        let evolver = Evolver::new(table, trunc, eps)?;
        let mut ecfg = EvolveConfig::with_periods(*table.cfg(), eps, trunc, periods, 64)?;
        ecfg.record_every = record_every;
        let traj = evolver.integrate(&ecfg, &evolver.first_mode_data())?;
        Ok(ScalingPoint { eps, sup_dist: traj.sup_dist(), energy_drift: traj.stroboscopic_energy_drift(ecfg.dt) })
    });
    let points = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.eps.ln(), p.sup_dist.ln())).collect();
    Ok(ScalingStudy { slope_estimate: least_squares_slope(&xy), points })
}

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn least_squares_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_table, ExactPolicy};
    use crate::resonant::{linear_flow, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn evolver(trunc: usize, eps: f64) -> Evolver {
        let cfg = ModelConfig::kg(2).unwrap();
        let table = build_table(&cfg, trunc, ExactPolicy::None).unwrap();
        Evolver::new(&table, trunc, eps).unwrap()
    }

    #[test]
    fn linear_limit_and_zero_state() {
        let ev = evolver(4, 0.0);
        let a = 0.7;
        let acc = ev.rhs(&ModeVector::unit(5, 1, a));
        assert_eq!(acc.0[1], -16.0 * a);
        let ev = evolver(4, 0.3);
        assert!(ev.rhs(&ModeVector::zeros(5)).0.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn verlet_is_time_reversible() {
        let ev = evolver(6, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_state(7, 7, &mut rng);
        let dt = default_dt(ev.cfg(), 6, 64);
        let back = ev.step(&ev.step(&s, dt), -dt);
        for (a, b) in s.q.0.iter().chain(&s.p.0).zip(back.q.0.iter().chain(&back.p.0)) {
            assert!((a - b).abs() <= 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn free_oscillator_tracks_the_exact_rotation() {
        let ev = evolver(4, 0.0);
        let s = StateVector { q: ModeVector::unit(5, 2, 1.0), p: ModeVector::zeros(5) };
        let ecfg = EvolveConfig::with_periods(*ev.cfg(), 0.0, 4, 1, 64).unwrap();
        let traj = ev.integrate(&ecfg, &s).unwrap();
        let end = traj.states.last().unwrap();
        let exact = linear_flow(ev.cfg(), &s, traj.times.last().copied().unwrap());
        let w = 6.0;
        let err = (w * (end.q.0[2] - exact.q.0[2])).hypot(end.p.0[2] - exact.p.0[2]);
        // phase error of order (ω dt)² per radian, over ω·2π radians
        let dt = ecfg.dt;
        assert!(err <= w * w * 2.0 * PI * (w * dt).powi(2) / 12.0, "{err}");
    }

    #[test]
    fn first_mode_data_without_coupling_stays_on_the_orbit() {
        let ev = evolver(4, 0.0);
        let mut ecfg = EvolveConfig::with_periods(*ev.cfg(), 0.0, 4, 2, 64).unwrap();
        ecfg.record_every = 7;
        let s = StateVector { q: ModeVector::unit(5, 0, 1.3), p: ModeVector::zeros(5) };
        let traj = ev.integrate(&ecfg, &s).unwrap();
        // the evolver's orbit is εκ₀e₀ = 0 here; measure against the data instead
        let worst = traj.states.iter().map(|st| distance_to_linear_orbit(ev.cfg(), st, 1.3)).fold(0.0, f64::max);
        // Verlet stays on a slightly squeezed ellipse, of relative size (ω₀dt)²/8
        assert!(worst <= 1.3 * 2.0 * (2.0 * ecfg.dt).powi(2) / 8.0 * 1.01, "{worst}");
    }

    #[test]
    fn orbit_distance_cases() {
        let cfg = ModelConfig::kg(2).unwrap();
        let amp = 0.05 * 1.7;
        let on = linear_flow(&cfg, &StateVector { q: ModeVector::unit(5, 0, amp), p: ModeVector::zeros(5) }, 0.37);
        assert!(distance_to_linear_orbit(&cfg, &on, amp) <= 1e-8);
        let mut off = StateVector { q: ModeVector::unit(5, 0, amp), p: ModeVector::zeros(5) };
        let eta = 1e-4;
        off.q.0[2] = eta;
        assert!((distance_to_linear_orbit(&cfg, &off, amp) - eta * 6.0).abs() <= 1e-6 * eta * 6.0);
        assert!((distance_to_linear_orbit(&cfg, &StateVector::zeros(5), amp) - 2.0 * amp).abs() <= 1e-14);
        // closed form for the first mode: | |(ω₀q₀, p₀)| − ω₀·amp |
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let s = random_state(5, 1, &mut rng);
            let want = ((2.0 * s.q.0[0]).hypot(s.p.0[0]) - 2.0 * amp).abs();
            assert!((distance_to_linear_orbit(&cfg, &s, amp) - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn energy_band_shrinks_at_second_order() {
        let ev = evolver(6, 1.0);
        let data = StateVector { q: ModeVector::unit(7, 0, 0.4), p: ModeVector::unit(7, 1, 0.3) };
        let band = |steps: usize| {
            let ecfg = EvolveConfig::with_periods(*ev.cfg(), 1.0, 6, 2, steps).unwrap();
            ev.integrate(&ecfg, &data).unwrap().energy_band()
        };
        let ratio = band(16) / band(32);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn runs_are_deterministic_across_policies() {
        let cfg = ModelConfig::kg(2).unwrap();
        let table = build_table(&cfg, 4, ExactPolicy::None).unwrap();
        let a = scaling_study(&table, 4, &[0.1, 0.2], 1, 5, Exec::Sequential).unwrap();
        let b = scaling_study(&table, 4, &[0.1, 0.2], 1, 5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slope_of_a_power_law() {
        let xy: Vec<(f64, f64)> = [0.02f64, 0.04, 0.08].iter().map(|e| (e.ln(), (3.0 * e * e).ln())).collect();
        assert!((least_squares_slope(&xy) - 2.0).abs() <= 1e-12);
    }
}
