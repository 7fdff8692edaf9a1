use std::f64::consts::PI;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resonance_core::algebra::{gamma_exact, int, mat_vec, rat, solve_nullspace, BiPoly, ExactScalar, Poly, Rational};
use resonance_core::coefficients::{build_table, coeff_exact, coeff_quad, diag_closed, CoeffKey, ExactPolicy};
use resonance_core::evolve::{default_dt, EvolveConfig, Evolver};
use resonance_core::resonant::{
    harmonic_energy, kappa0_squared_by_definition, kappa0_squared_closed, linear_flow, random_state,
    stability_classify, ResonantSystem, StateVector,
};
use resonance_core::spectrum::{jacobi_family, norm_sq, omega, orthonormality_defect, HalfInt, Model, ModelConfig};
use resonance_core::telescope::{
    kg_sign_coefficients, recurrence_iterate, term_for_diag, wm_sign_coefficients, zeilberger,
};

fn kg(delta: i64) -> ModelConfig {
    ModelConfig::kg(delta).unwrap()
}

fn wm(delta: i64) -> ModelConfig {
    ModelConfig::wm(delta).unwrap()
}

fn admissible() -> Vec<ModelConfig> {
    (2..=9).map(kg).chain((1..=9).map(wm)).collect()
}

fn any_config() -> impl Strategy<Value = ModelConfig> {
    prop_oneof![(2i64..=9).prop_map(kg), (1i64..=9).prop_map(wm)]
}

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..=60, 1i64..=24).prop_map(|(n, d)| rat(n, d))
}

fn poly(max_degree: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-9i64..=9, 1..=max_degree + 1).prop_map(|cs| Poly::from_i64s(&cs))
}

fn bipoly() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec(prop::collection::vec(rational(), 1..=3), 1..=3).prop_map(|rows| BiPoly::from_matrix(&rows))
}

/// Radicands sharing a class after squarefree reduction are fine; the class
/// of a draw is fixed by `(h, r)`.
fn scalar_class() -> impl Strategy<Value = (i64, Rational)> {
    (-4i64..=4, prop::sample::select(vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(5, 7), rat(6, 5), rat(1, 30)]))
}

fn scalar_in(class: &(i64, Rational), q: Rational) -> ExactScalar {
    ExactScalar::new(q, class.0, class.1.clone()).unwrap()
}

fn add(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    a.checked_add(b).unwrap()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rational_ring_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        prop_assert!(a.denom() > &0.into());
    }

    #[test]
    fn scalar_ring_laws_within_a_class(
        class in scalar_class(),
        other in scalar_class(),
        qs in (rational(), rational(), rational(), rational()),
    ) {
        let (x, y, z) = (scalar_in(&class, qs.0), scalar_in(&class, qs.1), scalar_in(&class, qs.2));
        let s = scalar_in(&other, qs.3);
        prop_assert_eq!(add(&add(&x, &y), &z), add(&x, &add(&y, &z)));
        prop_assert_eq!(add(&x, &y), add(&y, &x));
        prop_assert_eq!(&s * &add(&x, &y), add(&(&s * &x), &(&s * &y)));
        prop_assert_eq!(&(&s * &x) * &y, &s * &(&x * &y));
    }

    #[test]
    fn scalar_canonical_form_is_idempotent(q in rational(), h in -6i64..=6, rn in 1i64..=200, rd in 1i64..=200) {
        let x = ExactScalar::new(q.clone(), h, rat(rn, rd)).unwrap();
        let again = ExactScalar::new(x.q().clone(), x.h(), x.radicand()).unwrap();
        prop_assert_eq!(&again, &x);
        if x.is_zero() {
            prop_assert_eq!((x.h(), x.radicand()), (0, Rational::one()));
        }
        let direct = to_f64(&q) * PI.sqrt().powi(h as i32) * (rn as f64 / rd as f64).sqrt();
        prop_assert!((x.to_f64() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn poly_ring_laws(a in poly(5), b in poly(5), c in poly(5)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(Poly::new(a.coeffs().to_vec()), a);
    }

    #[test]
    fn bipoly_ring_laws(a in bipoly(), b in bipoly(), c in bipoly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(BiPoly::from_matrix(&a.to_matrix()), a);
    }

    #[test]
    fn gcd_is_multiplicative_in_a_common_factor(a in poly(6), b in poly(6), g in poly(6)) {
        prop_assume!(!g.is_zero() && !(a.is_zero() && b.is_zero()));
        let lhs = Poly::gcd(&(&a * &g), &(&b * &g));
        let rhs = &g * &Poly::gcd(&a, &b);
        prop_assert_eq!(lhs.monic(), rhs.monic());
    }
}

fn to_f64(q: &Rational) -> f64 {
    resonance_core::algebra::rational::to_f64(q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nullspace_vectors_annihilate_the_matrix(
        rows in 1usize..=3,
        extra in 1usize..=2,
        seed in prop::collection::vec(poly(2), 15),
    ) {
        let cols = rows + extra;
        let matrix: Vec<Vec<Poly>> = (0..rows).map(|r| seed[r * cols..(r + 1) * cols].to_vec()).collect();
        let basis = solve_nullspace(&matrix);
        prop_assert!(basis.len() >= extra);
        for v in &basis {
            prop_assert!(v.iter().any(|p| !p.is_zero()));
            prop_assert!(mat_vec(&matrix, v).iter().all(Poly::is_zero));
        }
    }

    #[test]
    fn omega_has_constant_gap_two(cfg in any_config(), n in 0usize..500) {
        prop_assert_eq!(omega(&cfg, n + 1) - omega(&cfg, n), 2);
        prop_assert_eq!(omega(&cfg, 0), cfg.mass_offset());
    }

    #[test]
    fn quartic_coefficients_are_fully_symmetric(
        cfg in prop_oneof![(2i64..=4).prop_map(kg), (1i64..=3).prop_map(wm)],
        idx in prop::array::uniform4(0usize..=8),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let key = CoeffKey::new(idx[0], idx[1], idx[2], idx[3]);
        let shuffled = CoeffKey::new(idx[perm[0]], idx[perm[1]], idx[perm[2]], idx[perm[3]]);
        let exact = coeff_exact(&cfg, &key).unwrap();
        prop_assert_eq!(&coeff_exact(&cfg, &shuffled).unwrap(), &exact);
        let quad = coeff_quad(&cfg, &shuffled).unwrap();
        prop_assert!((quad - exact.to_f64()).abs() <= 1e-10 * quad.abs().max(1.0));
    }
}

#[test]
fn gamma_satisfies_the_functional_equation() {
    // x = twice_x/2 runs over the half-integers in [−19/2, 20].
    for twice_x in -19..=40i64 {
        if twice_x <= 0 && twice_x % 2 == 0 {
            assert!(gamma_exact(twice_x).is_err(), "pole at {twice_x}/2");
            continue;
        }
        let lhs = gamma_exact(twice_x + 2).unwrap();
        let rhs = gamma_exact(twice_x).unwrap().scale(&rat(twice_x, 2));
        assert_eq!(lhs, rhs, "x = {twice_x}/2");
    }
}

/// The textbook recurrence for `P_n^{(a,b)}`, written out independently.
fn jacobi_recurrence_residual(family: &[Poly], n: usize, a: HalfInt, b: HalfInt) -> Poly {
    let (a, b) = (a.to_rational(), b.to_rational());
    let nr = int(n as i64);
    let s = &(&nr * int(2)) + &(&a + &b);
    let lead = &(&(&nr * int(2)) * &(&nr + &(&a + &b))) * &(&s - int(2));
    let mid = &s - int(1);
    let linear = Poly::linear(&s * &(&s - int(2)), &a * &a - &b * &b);
    let back = &(&(&(&nr + &a) - int(1)) * &(&(&nr + &b) - int(1))) * &(&s * int(2));
    let lhs = family[n].scale(&lead);
    let rhs = &(&linear * &family[n - 1]).scale(&mid) - &family[n - 2].scale(&back);
    &lhs - &rhs
}

#[test]
fn jacobi_polynomials_satisfy_the_three_term_recurrence() {
    for cfg in admissible() {
        let (a, b) = (cfg.jacobi_a(), cfg.jacobi_b());
        let family = jacobi_family(40, a, b);
        for n in 2..=40 {
            assert!(jacobi_recurrence_residual(&family, n, a, b).is_zero(), "{cfg:?} n = {n}");
        }
    }
}

#[test]
fn norms_are_positive_and_in_the_expected_class() {
    for cfg in admissible() {
        for n in 0..=30 {
            let v = norm_sq(&cfg, n);
            assert_eq!(v.signum(), 1);
            match cfg.model() {
                Model::Wm => assert!(v.is_rational(), "{cfg:?} n = {n}"),
                Model::Kg => assert_eq!((v.h(), v.radicand()), (-2, Rational::one()), "{cfg:?} n = {n}"),
            }
        }
    }
}

#[test]
fn eigenbasis_is_orthonormal_under_quadrature() {
    for cfg in admissible() {
        for n in 0..=20 {
            for m in 0..=20 {
                let d = orthonormality_defect(&cfg, n, m).unwrap();
                assert!(d <= 1e-12, "{cfg:?} ({n},{m}): {d:e}");
            }
        }
    }
}

#[test]
fn zeilberger_is_deterministic_and_shift_free() {
    for cfg in [kg(2), wm(1)] {
        let term = term_for_diag(&cfg);
        let first = zeilberger(&term, 2, 2).unwrap();
        let second = zeilberger(&term, 2, 2).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.to_json(), second.to_json());

        let g = &first.gosper;
        assert!(g.shift_free);
        let bound = 4 * g.p2.degree_m().max(g.p3.degree_m()).unwrap_or(0) + 20;
        let probe = rat(7, 3);
        let p2 = g.p2.at_m(&probe);
        for j in 0..=bound as i64 {
            let p3 = g.p3.shift_k(&int(j)).at_m(&probe);
            assert!(!Poly::resultant(&p2, &p3).is_zero(), "{cfg:?} j = {j}");
        }
    }
}

#[test]
fn recurrence_iteration_stays_exact() {
    let f = |cfg: &ModelConfig, m: usize| {
        let w = omega(cfg, m);
        diag_closed(cfg, m).scale(&rat(1, w * w))
    };
    for cfg in [kg(2), kg(3), kg(6), wm(1), wm(2), wm(5)] {
        let iterated = recurrence_iterate(&cfg, &f(&cfg, 1), &f(&cfg, 2), 40).unwrap();
        assert_eq!(iterated.len(), 40);
        for (m, value) in (1..=40).zip(&iterated) {
            assert_eq!(value, &f(&cfg, m), "{cfg:?} m = {m}");
        }
    }
}

#[test]
fn sign_certificates_hold_on_the_whole_range() {
    for d in 2..=9 {
        let cs = kg_sign_coefficients(d);
        assert_eq!(cs.len(), 9);
        assert!(cs.iter().all(|c| c < &Rational::zero()), "KG δ = {d}");
    }
    for d in 1..=9 {
        let cs = wm_sign_coefficients(d);
        assert_eq!(cs.len(), 7);
        assert!(cs.iter().all(|c| c > &Rational::zero()), "WM δ = {d}");
    }
}

#[test]
fn kappa_formulas_agree() {
    for cfg in admissible() {
        let by_definition = kappa0_squared_by_definition(&cfg).unwrap();
        assert_eq!(by_definition, kappa0_squared_closed(&cfg).unwrap(), "{cfg:?}");
        assert_eq!(by_definition.signum(), 1);
    }
}

#[test]
fn gaps_increase_strictly() {
    for cfg in [kg(2), kg(5), kg(9), wm(1), wm(4), wm(9)] {
        let report = stability_classify(&cfg, 200).unwrap();
        assert!(report.monotone, "{cfg:?}");
        assert_eq!(report.gaps.len(), 201);
    }
}

fn system(cfg: ModelConfig, trunc: usize) -> ResonantSystem {
    let table = build_table(&cfg, trunc, ExactPolicy::DiagonalOnly).unwrap();
    ResonantSystem::new(&table, trunc).unwrap()
}

fn seeded_state(len: usize, seed: u64) -> StateVector {
    random_state(len, len, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn linear_flow_conserves_energy_and_is_periodic(cfg in any_config(), seed in any::<u64>(), t in 0.0f64..50.0) {
        let state = seeded_state(12, seed);
        let e0 = harmonic_energy(&cfg, &state);
        prop_assert!(relative(harmonic_energy(&cfg, &linear_flow(&cfg, &state, t)), e0) <= 1e-12);
        let back = linear_flow(&cfg, &state, 2.0 * PI);
        let scale = e0.sqrt().max(1.0);
        for (x, y) in back.q.as_slice().iter().chain(back.p.as_slice()).zip(state.q.as_slice().iter().chain(state.p.as_slice())) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn time_average_closed_form_matches_quadrature() {
    for cfg in [kg(2), wm(1)] {
        let sys = system(cfg, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let state = random_state(sys.len(), sys.len(), &mut rng);
            let (closed, direct) = sys.time_average_f(&state).unwrap();
            assert!(relative(closed, direct) <= 1e-8, "{cfg:?}: {closed} vs {direct}");
        }
    }
}

#[test]
fn time_average_is_invariant_under_the_linear_flow() {
    for cfg in [kg(2), kg(3), wm(1), wm(2)] {
        let sys = system(cfg, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..50 {
            let state = random_state(sys.len(), sys.len(), &mut rng);
            let base = sys.time_average_closed(&state).unwrap();
            let t = 0.37 * i as f64;
            let moved = sys.time_average_closed(&linear_flow(&cfg, &state, t)).unwrap();
            assert!(relative(moved, base) <= 1e-8, "{cfg:?} t = {t}: {moved} vs {base}");
        }
    }
}

fn evolver(cfg: ModelConfig, trunc: usize, eps: f64) -> Evolver {
    let table = build_table(&cfg, trunc, ExactPolicy::DiagonalOnly).unwrap();
    Evolver::new(&table, trunc, eps).unwrap()
}

fn run(ev: &Evolver, initial: &StateVector, dt: f64, steps: usize) -> Vec<f64> {
    let mut state = initial.clone();
    let mut energy = Vec::with_capacity(steps + 1);
    energy.push(ev.energy(&state));
    for _ in 0..steps {
        state = ev.step(&state, dt);
        energy.push(ev.energy(&state));
    }
    energy
}

#[test]
fn verlet_energy_error_is_a_bounded_band_of_order_dt_squared() {
    let ev = evolver(kg(2), 6, 0.3);
    let initial = seeded_state(ev.len(), 3);
    let dt = default_dt(ev.cfg(), 6, 16);
    let steps = 100_000;
    let coarse = run(&ev, &initial, dt, steps);
    let fine = run(&ev, &initial, dt / 2.0, 2 * steps);
    let band = |h: &[f64], range: std::ops::Range<usize>| h[range].iter().map(|e| (e - h[0]).abs()).fold(0.0, f64::max);

    let (band_coarse, band_fine) = (band(&coarse, 0..steps + 1), band(&fine, 0..2 * steps + 1));
    let ratio = band_coarse / band_fine;
    assert!((3.0..=5.0).contains(&ratio), "band ratio {ratio}");

    let tenth = steps / 10;
    let early = band(&coarse, 0..tenth);
    let late = band(&coarse, steps + 1 - tenth..steps + 1);
    assert!(late <= 2.0 * early, "early band {early:e}, late band {late:e}");
}

#[test]
fn uncoupled_actions_are_conserved_per_period() {
    let trunc = 8;
    let ev = evolver(kg(2), trunc, 0.0);
    let dt = default_dt(ev.cfg(), trunc, 32);
    let per_period = (2.0 * PI / dt).round() as usize;
    let w: Vec<f64> = (0..=trunc).map(|n| omega(ev.cfg(), n) as f64).collect();
    let actions = |s: &StateVector| -> Vec<(f64, f64)> {
        (0..=trunc)
            .map(|n| {
                let (q, p, w) = (s.q.as_slice()[n], s.p.as_slice()[n], w[n]);
                let shrink = 1.0 - w * w * dt * dt / 4.0;
                ((p * p + w * w * q * q) / (2.0 * w), (p * p + w * w * shrink * q * q) / (2.0 * w))
            })
            .collect()
    };
    let mut state = seeded_state(trunc + 1, 8);
    let start = actions(&state);
    for period in 1..=20 {
        let before = actions(&state);
        for _ in 0..per_period {
            state = ev.step(&state, dt);
        }
        for (n, ((plain, modified), (_, prev_modified))) in actions(&state).into_iter().zip(before).enumerate() {
            let c = w[n] * w[n] * dt * dt / 4.0;
            assert!((modified - prev_modified).abs() <= 1e-8 * prev_modified.max(1e-300), "mode {n} period {period}");
            assert!((plain - start[n].0).abs() <= start[n].0 * c / (1.0 - c) + 1e-14, "mode {n} period {period}");
        }
    }
}

fn first_mode_run(trunc: usize, eps: f64, dt: f64, periods: usize) -> f64 {
    let ev = evolver(kg(2), trunc, eps);
    let ecfg = EvolveConfig { cfg: kg(2), eps, trunc, dt, t_end: 2.0 * PI * periods as f64, record_every: 16 };
    ev.integrate(&ecfg, &ev.first_mode_data()).unwrap().sup_dist()
}

#[test]
fn first_mode_orbit_stays_within_eps_squared() {
    let dt = default_dt(&kg(2), 16, 64);
    let ratios: Vec<f64> =
        [0.02, 0.04, 0.08].iter().map(|&eps| first_mode_run(16, eps, dt, 50) / (eps * eps)).collect();
    for r in &ratios {
        assert!(r.is_finite() && *r <= 1e-2, "dist/eps^2 = {r:e}");
    }
}

#[test]
fn doubling_the_truncation_barely_moves_the_distance() {
    let dt = default_dt(&kg(2), 32, 64);
    for eps in [0.02, 0.08] {
        let coarse = first_mode_run(16, eps, dt, 50);
        let fine = first_mode_run(32, eps, dt, 50);
        assert!(relative(coarse, fine) <= 1e-2, "eps = {eps}: {coarse:e} vs {fine:e}");
    }
}
