mod common;

use common::{identity_suite, IDENTITY_CASES};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use solvable_plane::correspondence::{
    coeffs_to_roots, roots_to_coeffs, xdot_from_ydot, Config, Pair, RootState,
};
use solvable_plane::Complex64 as C;

fn disc() -> impl Strategy<Value = C> {
    (0.0f64..1.0, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| C::from_polar(r.sqrt(), a))
}

fn separated() -> impl Strategy<Value = (C, C)> {
    (disc(), disc()).prop_filter("separated zeros", |(a, b)| (a - b).norm() >= 0.1)
}

/// `(ẏ₁, ẏ₂, ẏ₃)` of the double-zero coefficients by the chain rule.
fn dz3_ydot(x1: C, x2: C, v1: C, v2: C) -> [C; 3] {
    [
        -(2.0 * v1 + v2),
        2.0 * x1 * v1 + 2.0 * v1 * x2 + 2.0 * x1 * v2,
        -(2.0 * x1 * v1 * x2 + x1 * x1 * v2),
    ]
}

proptest! {
    #[test]
    fn generic_round_trip((x1, x2) in separated()) {
        let r = RootState::new(Config::Generic2, x1, x2);
        let c = roots_to_coeffs(&r);
        let back = coeffs_to_roots(&c, Some(&r)).unwrap();
        prop_assert!(!back.ambiguous);
        prop_assert!((back.state.x1 - x1).norm() < 1e-12 && (back.state.x2 - x2).norm() < 1e-12);
    }

    #[test]
    fn double_zero_round_trip((x1, x2) in separated()) {
        let r = RootState::new(Config::DoubleZero3, x1, x2);
        let c = roots_to_coeffs(&r);
        let back = coeffs_to_roots(&c, None).unwrap();
        prop_assert!((back.state.x1 - x1).norm() < 1e-10, "{:?}", back);
        prop_assert!((back.state.x2 - x2).norm() < 1e-10);
    }

    #[test]
    fn three_pairs_agree((x1, x2) in separated(), v1 in disc(), v2 in disc()) {
        prop_assume!(x1.norm() >= 0.1);
        let r = RootState::new(Config::DoubleZero3, x1, x2);
        let yd = dz3_ydot(x1, x2, v1, v2);
        for pair in [Pair::Y12, Pair::Y13, Pair::Y23] {
            let (w1, w2) = xdot_from_ydot(&r, yd, pair).unwrap();
            prop_assert!((w1 - v1).norm() < 1e-9 && (w2 - v2).norm() < 1e-9, "{:?}", pair);
        }
    }

    #[test]
    fn generic_velocities_invert_the_chain_rule((x1, x2) in separated(), v1 in disc(), v2 in disc()) {
        let r = RootState::new(Config::Generic2, x1, x2);
        let yd = [-(v1 + v2), v1 * x2 + x1 * v2, C::new(0.0, 0.0)];
        let (w1, w2) = xdot_from_ydot(&r, yd, Pair::Y12).unwrap();
        prop_assert!((w1 - v1).norm() < 1e-10 && (w2 - v2).norm() < 1e-10);
    }
}

#[test]
fn velocities_are_second_order_accurate_along_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (config, pair) in IDENTITY_CASES {
        for r in identity_suite(&mut rng, config, pair, 12, 1e-2) {
            for fd in r {
                assert!((fd.ratio - 4.0).abs() < 0.8, "{config:?} {pair:?} {fd:?}");
            }
        }
    }
}

#[test]
fn collisions_are_refused() {
    let z = C::new(0.3, 0.2);
    let r = RootState::new(Config::Generic2, z, z);
    assert!(xdot_from_ydot(&r, [C::new(1.0, 0.0); 3], Pair::Y12).is_err());
    let r = RootState::new(Config::DoubleZero3, C::new(0.0, 0.0), z);
    assert!(xdot_from_ydot(&r, [C::new(1.0, 0.0); 3], Pair::Y13).is_err());
}
