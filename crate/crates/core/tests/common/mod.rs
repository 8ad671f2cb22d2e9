#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use solvable_plane::correspondence::{
    coeffs_to_roots, track_double_zero, xdot_from_ydot, CoeffState, Config, Pair, RootState,
};
use solvable_plane::oracle::{
    finite_difference_check, integrate, FdReport, OdeProblem, Tolerances,
};
use solvable_plane::Complex64 as C;

pub fn unit_disc(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(
        rng.gen_range(0.0f64..1.0).sqrt(),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
}

/// Uniform in the unit disc, rejecting points within `min` of `avoid`.
pub fn unit_disc_away(rng: &mut ChaCha8Rng, avoid: &[C], min: f64) -> C {
    loop {
        let z = unit_disc(rng);
        if avoid.iter().all(|a| (z - a).norm() >= min) {
            return z;
        }
    }
}

pub fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

/// `y(t) = c₀ + c₁t + c₂ sin t` and its derivative.
#[derive(Clone, Copy)]
pub struct SmoothPath([C; 3]);

impl SmoothPath {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        SmoothPath([unit_disc(rng), unit_disc(rng), unit_disc(rng)])
    }

    pub fn at(&self, t: f64) -> C {
        self.0[0] + self.0[1] * t + self.0[2] * t.sin()
    }

    pub fn rate(&self, t: f64) -> C {
        self.0[1] + self.0[2] * t.cos()
    }
}

/// Labeled zeros at `t`, continued from `prev`.
fn zeros_at(
    config: Config,
    pair: Pair,
    paths: &[SmoothPath; 2],
    t: f64,
    prev: &RootState,
    strict: bool,
) -> Option<RootState> {
    let (i, j) = pair.indices();
    let mut y = [C::new(0.0, 0.0); 3];
    y[i - 1] = paths[0].at(t);
    y[j - 1] = paths[1].at(t);
    let lab = match config {
        Config::Generic2 => coeffs_to_roots(&CoeffState::generic2(y[0], y[1]), Some(prev)).ok()?,
        Config::DoubleZero3 => track_double_zero(pair, y, prev).ok()?,
    };
    (!strict || !lab.ambiguous).then_some(lab.state)
}

/// Zeros at `t = 0` and then continued in small steps to each of `times`.
fn track_path(
    config: Config,
    pair: Pair,
    paths: &[SmoothPath; 2],
    times: &[f64],
) -> Option<Vec<RootState>> {
    let seeds = [
        C::new(2.0, 0.0),
        C::new(-2.0, 0.0),
        C::new(0.0, 2.0),
        C::new(0.0, -2.0),
    ];
    let mut state = seeds.iter().find_map(|&s| {
        let seed = RootState::new(config, s, -s);
        zeros_at(config, pair, paths, 0.0, &seed, false).filter(|r| r.x1.norm() >= 0.1)
    })?;
    let (mut t, dt) = (0.0, 0.005);
    let mut out = Vec::new();
    for &target in times {
        while t < target {
            t = (t + dt).min(target);
            state = zeros_at(config, pair, paths, t, &state, true)?;
        }
        out.push(state);
    }
    Some(out)
}

/// Compares the zero velocities given by the coefficient velocities with
/// centered differences of the tracked zeros along one random path.
///
/// Returns `None` when the path comes within 0.1 of a collision (or of the
/// origin, for the double-zero pairs that divide by `x₁`); otherwise the
/// finite-difference reports for `x₁` and `x₂`.
pub fn identity_case(
    rng: &mut ChaCha8Rng,
    config: Config,
    pair: Pair,
    h: f64,
) -> Option<[FdReport; 2]> {
    let paths = [SmoothPath::random(rng), SmoothPath::random(rng)];
    let times = grid(0.9, 9);
    let bases = track_path(config, pair, &paths, &times)?;
    for s in &bases {
        let near_origin = config == Config::DoubleZero3 && pair != Pair::Y12 && s.x1.norm() < 0.1;
        if s.separation() < 0.1 || near_origin {
            return None;
        }
    }
    let (i, j) = pair.indices();
    let mut reports = Vec::new();
    for k in 0..2 {
        let pick = |s: RootState| if k == 0 { s.x1 } else { s.x2 };
        let f = |t: f64| {
            let b = nearest_base(&times, &bases, t);
            pick(zeros_at(config, pair, &paths, t, b, true).expect("tracked near a checked base"))
        };
        let claimed = |t: f64| {
            let b = nearest_base(&times, &bases, t);
            let mut yd = [C::new(0.0, 0.0); 3];
            yd[i - 1] = paths[0].rate(t);
            yd[j - 1] = paths[1].rate(t);
            let v = xdot_from_ydot(b, yd, pair).expect("separated zeros");
            if k == 0 {
                v.0
            } else {
                v.1
            }
        };
        reports.push(finite_difference_check(f, claimed, &times, h));
    }
    Some([reports[0], reports[1]])
}

fn nearest_base<'a>(times: &[f64], bases: &'a [RootState], t: f64) -> &'a RootState {
    let k = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .unwrap()
        .0;
    &bases[k]
}

/// Draws accepted identity cases until `n` have been collected.
pub fn identity_suite(
    rng: &mut ChaCha8Rng,
    config: Config,
    pair: Pair,
    n: usize,
    h: f64,
) -> Vec<[FdReport; 2]> {
    let mut out = Vec::new();
    while out.len() < n {
        if let Some(r) = identity_case(rng, config, pair, h) {
            out.push(r);
        }
    }
    out
}

pub const IDENTITY_CASES: [(Config, Pair); 4] = [
    (Config::Generic2, Pair::Y12),
    (Config::DoubleZero3, Pair::Y12),
    (Config::DoubleZero3, Pair::Y13),
    (Config::DoubleZero3, Pair::Y23),
];

/// sn at `z` for parameter `m`, by integrating the (sn, cn, dn) system along
/// the ray 0 → z.
pub fn sn_by_integration(z: C, m: C) -> C {
    let p = OdeProblem::new(
        move |_s, y: &[C], d: &mut [C]| {
            d[0] = z * y[1] * y[2];
            d[1] = -z * y[0] * y[2];
            d[2] = -z * m * y[0] * y[1];
        },
        0.0,
        vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0)],
        Tolerances::uniform(1e-14),
    );
    integrate(&p, &[1.0]).unwrap().states[0][0]
}
