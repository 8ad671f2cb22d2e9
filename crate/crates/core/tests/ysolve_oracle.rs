use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvable_plane::oracle::{finite_difference_check, integrate, OdeProblem, Tolerances};
use solvable_plane::ysolve::{
    fit_elliptic_params, AnharmonicSolution, AnharmonicSpec, LogisticFlow, LogisticSpec,
    YSolveError, VALIDATION_TOL,
};
use solvable_plane::Complex64 as C;

fn unit_disc(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(
        rng.gen_range(0.0f64..1.0).sqrt(),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn anharmonic_oracle(s: AnharmonicSpec, y0: [C; 2], times: &[f64]) -> Vec<Vec<C>> {
    let p = OdeProblem::new(
        move |_t, y: &[C], d: &mut [C]| {
            let r = s.rhs([y[0], y[1]]);
            d.copy_from_slice(&r);
        },
        0.0,
        y0.to_vec(),
        Tolerances::uniform(1e-12),
    );
    integrate(&p, times).unwrap().states
}

#[test]
fn anharmonic_matches_oracle_for_both_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let times = grid(0.5, 25);
    let mut skipped = 0;
    for n in [1u8, 2] {
        for _ in 0..30 {
            let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
            let (y1, y2) = (unit_disc(&mut rng), unit_disc(&mut rng));
            let spec = AnharmonicSpec::for_example(n, a, b).unwrap();
            let sol = AnharmonicSolution::solve(&spec, y1, y2).unwrap();
            // passing close to a pole amplifies the oracle's own error well
            // beyond its tolerance; such runs are counted, not compared
            let peak = grid(0.5, 500)
                .iter()
                .map(|&t| {
                    sol.eval(t)
                        .map(|(a, b)| a.norm().max(b.norm()))
                        .unwrap_or(f64::INFINITY)
                })
                .fold(0.0, f64::max);
            if peak > 50.0 {
                skipped += 1;
                continue;
            }
            let want = anharmonic_oracle(spec, [y1, y2], &times);
            for (t, w) in times.iter().zip(&want) {
                let (g1, g2) = sol.eval(*t).unwrap();
                assert!(rel(g1, w[0]) < 1e-8 && rel(g2, w[1]) < 1e-8, "ex{n} t={t}");
            }
        }
    }
    assert!(skipped <= 6, "{skipped} near-pole runs");
}

#[test]
fn selection_never_returns_an_unvalidated_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
        let (y1, y2) = (unit_disc(&mut rng), unit_disc(&mut rng));
        let spec = AnharmonicSpec::for_example(1, a, b).unwrap();
        match fit_elliptic_params(&spec, y1, y2) {
            Ok(p) => assert!(p.mismatch < VALIDATION_TOL),
            Err(YSolveError::SelectionFailed { best_mismatch }) => {
                assert!(best_mismatch >= VALIDATION_TOL)
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn second_derivative_is_the_quartic_force() {
    let spec = AnharmonicSpec::for_example(1, C::new(0.4, 0.1), C::new(-0.3, 0.6)).unwrap();
    let sol = AnharmonicSolution::solve(&spec, C::new(0.2, -0.5), C::new(0.3, 0.1)).unwrap();
    // ẏ₁ = α₀ + α₁y₂, checked by centered differences of y₁
    let f = |t: f64| sol.eval(t).unwrap().0;
    let df = |t: f64| spec.alpha0 + spec.alpha1 * sol.eval(t).unwrap().1;
    let r = finite_difference_check(f, df, &grid(0.8, 8), 1e-3);
    assert!((r.ratio - 4.0).abs() < 0.8, "{r:?}");
    // ÿ₁ = α₁(β₀y₁ + β₁y₁³) by second differences
    let h = 1e-4;
    for t in grid(0.8, 8) {
        let dd = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        let y = f(t);
        let force = spec.alpha1 * (spec.beta0 * y + spec.beta1 * y * y * y);
        assert!((dd - force).norm() < 1e-5 * force.norm().max(1.0), "t={t}");
    }
}

#[test]
fn weak_coupling_is_a_linear_oscillator() {
    // β₁ small and y small: ÿ₁ ≈ α₁β₀y₁
    let spec = AnharmonicSpec::for_example(1, C::new(-0.5, 0.0), C::new(1e-6, 0.0)).unwrap();
    let y1 = C::new(1e-3, 0.0);
    let y2 = -spec.alpha0 / spec.alpha1;
    let sol = AnharmonicSolution::solve(&spec, y1, y2).unwrap();
    let w = (spec.alpha1 * spec.beta0).sqrt();
    for t in grid(0.5, 5) {
        let lin = y1 * (w * t).cosh();
        assert!((sol.eval(t).unwrap().0 - lin).norm() < 1e-9);
    }
}

fn logistic_oracle(s: LogisticSpec, y0: [C; 2], times: &[f64]) -> Vec<Vec<C>> {
    let p = OdeProblem::new(
        move |_t, y: &[C], d: &mut [C]| {
            let r = s.rhs(y[0], y[1]);
            d.copy_from_slice(&r);
        },
        0.0,
        y0.to_vec(),
        Tolerances::uniform(1e-12),
    );
    integrate(&p, times).unwrap().states
}

#[test]
fn logistic_matches_oracle_for_both_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let times = grid(1.0, 40);
    let mut checked = 0;
    for n in [3u8, 4] {
        for _ in 0..40 {
            let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
            let (lead, follow) = (unit_disc(&mut rng), unit_disc(&mut rng));
            let spec = LogisticSpec::for_example(n, a, b).unwrap();
            let want = logistic_oracle(spec, [lead, follow], &times);
            if want.len() < times.len() {
                continue;
            }
            let mut flow = LogisticFlow::new(&spec, lead, follow);
            for (t, w) in times.iter().zip(&want) {
                let (g1, g2) = flow.eval(*t).unwrap();
                assert!(rel(g1, w[0]) < 1e-8 && rel(g2, w[1]) < 1e-8, "ex{n} t={t}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 70);
}

#[test]
fn imaginary_growth_is_periodic() {
    // a = i: the leader y₃ has period 2π/3, the follower y₁ period 2π
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let period = std::f64::consts::TAU;
    for _ in 0..10 {
        let spec = LogisticSpec::for_example(3, C::new(0.0, 1.0), C::new(1.0, 0.0)).unwrap();
        let (lead, follow) = (0.3 * unit_disc(&mut rng), unit_disc(&mut rng));
        let mut flow = LogisticFlow::new(&spec, lead, follow);
        let (l0, f0) = flow.eval(0.0).unwrap();
        let (l1, _) = flow.eval(period / 3.0).unwrap();
        let (l2, f2) = flow.eval(period).unwrap();
        assert!((l1 - l0).norm() < 1e-8 && (l2 - l0).norm() < 1e-8);
        assert!((f2 - f0).norm() < 1e-8);
    }
}
