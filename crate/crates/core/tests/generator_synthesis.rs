mod common;

use common::{unit_disc, unit_disc_away};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use solvable_plane::correspondence::{roots_to_coeffs, xdot_from_ydot, Config, Pair, RootState};
use solvable_plane::generator::{
    anharmonic_family, builtin_example, builtin_symbolic, check_condition, logistic_family,
    synthesize_xsystem, GeneratorError, XSystem, YSystemSpec,
};
use solvable_plane::Complex64 as C;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Zero velocities from the coefficient flow, through the correspondence.
fn velocity_via_coefficients(spec: &YSystemSpec, x1: C, x2: C) -> (C, C) {
    let r = RootState::new(spec.config, x1, x2);
    let y = roots_to_coeffs(&r).values();
    let (i, j) = spec.pair.indices();
    let (ni, nj) = spec.pair.names();
    let at = [(ni, y[i - 1]), (nj, y[j - 1])];
    let mut yd = [c(0.0, 0.0); 3];
    yd[i - 1] = spec.f_first.evaluate(&at).unwrap();
    yd[j - 1] = spec.f_second.evaluate(&at).unwrap();
    xdot_from_ydot(&r, yd, spec.pair).unwrap()
}

#[test]
fn synthesized_systems_reproduce_the_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=4u8 {
        let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
        let (spec, xs) = builtin_example(n, a, b);
        for _ in 0..100 {
            let x1 = unit_disc_away(&mut rng, &[c(0.0, 0.0)], 0.1);
            let x2 = unit_disc_away(&mut rng, &[x1], 0.1);
            let (p1, p2) = xs.eval(x1, x2);
            let (q1, q2) = velocity_via_coefficients(&spec, x1, x2);
            assert!(
                (p1 - q1).norm() < 1e-11 && (p2 - q2).norm() < 1e-11,
                "ex{n}"
            );
        }
    }
}

#[test]
fn built_in_conditions_hold() {
    let (a, b) = (c(0.7, 0.2), c(0.4, -0.9));
    for n in 1..=4u8 {
        let (spec, _) = builtin_example(n, a, b);
        let r = check_condition(&spec).unwrap();
        assert!(r.satisfied, "ex{n}: {r}");
        assert!(r.residual.is_zero());
    }
}

fn perturbed_specs(a: C, b: C) -> Vec<(&'static str, YSystemSpec)> {
    let e = 1e-3;
    let (b0, b1) = (-a, b);
    let (d0, d1) = (-2.0 * a, -2.0 * b);
    let (l1, l2) = (2.0 * a, 2.0 * b);
    vec![
        (
            "ex1 alpha0",
            anharmonic_family(Config::Generic2, 2.0 * b0 + e, 8.0 * b1, b0, b1),
        ),
        (
            "ex1 alpha1",
            anharmonic_family(Config::Generic2, 2.0 * b0, 8.0 * b1 + e, b0, b1),
        ),
        (
            "ex2 alpha0",
            anharmonic_family(Config::DoubleZero3, 1.5 * d0 + e, 4.5 * d1, d0, d1),
        ),
        (
            "ex2 alpha1",
            anharmonic_family(Config::DoubleZero3, 1.5 * d0, 4.5 * d1 + e, d0, d1),
        ),
        (
            "ex3 beta1",
            logistic_family(Pair::Y13, a, b, 3.0 * a + e, 3.0 * b),
        ),
        (
            "ex3 beta2",
            logistic_family(Pair::Y13, a, b, 3.0 * a, 3.0 * b + e),
        ),
        (
            "ex4 beta1",
            logistic_family(Pair::Y23, l1, l2, 1.5 * l1 + e, 1.5 * l2),
        ),
        (
            "ex4 beta2",
            logistic_family(Pair::Y23, l1, l2, 1.5 * l1, 1.5 * l2 + e),
        ),
    ]
}

#[test]
fn perturbed_relations_leave_a_remainder() {
    for (name, spec) in perturbed_specs(c(0.7, 0.2), c(0.4, -0.9)) {
        match synthesize_xsystem(&spec) {
            Err(GeneratorError::NonPolynomial { .. }) => {}
            other => panic!("{name}: {other:?}"),
        }
        assert!(!check_condition(&spec).unwrap().satisfied, "{name}");
    }
}

#[test]
fn random_instantiations_match_the_symbolic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for n in 1..=4u8 {
        let [s1, s2] = builtin_symbolic(n).unwrap();
        for _ in 0..8 {
            let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
            let (_, xs) = builtin_example(n, a, b);
            let bind = |s: &str| {
                s.replace('a', &format!("({})", lit(a)))
                    .replace('b', &format!("({})", lit(b)))
            };
            let sym = XSystem::parse(&bind(&s1), &bind(&s2)).unwrap();
            for _ in 0..5 {
                let (x1, x2) = (unit_disc(&mut rng), unit_disc(&mut rng));
                let (p, q) = (xs.eval(x1, x2), sym.eval(x1, x2));
                assert!(
                    (p.0 - q.0).norm() < 1e-13 && (p.1 - q.1).norm() < 1e-13,
                    "ex{n}"
                );
            }
        }
    }
}

fn lit(z: C) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[test]
fn displayed_example_systems() {
    let expect = [
        [
            "a + b*(x1^2 - 4*x1*x2 - x2^2)",
            "a + b*(x2^2 - 4*x1*x2 - x1^2)",
        ],
        [
            "a + b*(x1^2 + 7*x1*x2 + x2^2)",
            "a + b*(7*x1^2 + 4*x1*x2 - 2*x2^2)",
        ],
        ["x1*(a - b*x1^2*x2)", "x2*(a - b*x1^2*x2)"],
        ["x1*(a + b*x1*(x1 + 2*x2))", "x2*(a + b*x1*(x1 + 2*x2))"],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for (n, [e1, e2]) in (1..=4u8).zip(expect) {
        let (a, b) = (unit_disc(&mut rng), unit_disc(&mut rng));
        let (_, xs) = builtin_example(n, a, b);
        let bind = |s: &str| {
            s.replace('a', &format!("({})", lit(a)))
                .replace('b', &format!("({})", lit(b)))
        };
        let want = XSystem::parse(&bind(e1), &bind(e2)).unwrap();
        let d1 = xs.p1.sub(&want.p1).unwrap();
        let d2 = xs.p2.sub(&want.p2).unwrap();
        assert!(
            d1.max_coeff_modulus() < 1e-14 && d2.max_coeff_modulus() < 1e-14,
            "ex{n}"
        );
    }
}
