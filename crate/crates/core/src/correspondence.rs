//! Zeros ↔ coefficients for the two polynomial configurations in use:
//! a generic monic quadratic `z² + y₁z + y₂ = (z − x₁)(z − x₂)` and a monic
//! cubic with a permanent double zero `z³ + y₁z² + y₂z + y₃ = (z − x₁)²(z − x₂)`.
//!
//! Recovering zeros from coefficients loses their labels; the tracking
//! functions here restore them by continuity against the previous state and
//! report how decisive the match was.

use num_complex::Complex64;

type C = Complex64;

/// Relative separation below which two zeros are considered collided.
pub const COLLISION_TOL: f64 = 1e-9;

/// Pairings whose cost ratio is below this are reported as ambiguous.
pub const AMBIGUITY_RATIO: f64 = 2.0;

/// Relative residual accepted for `p₃(x₁) = 0` when locating the double zero.
pub const DOUBLE_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Config {
    /// Degree 2, two simple zeros.
    Generic2,
    /// Degree 3, `x₁` double and `x₂` simple.
    DoubleZero3,
}

/// Which two coefficients evolve autonomously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    Y12,
    Y13,
    Y23,
}

impl Pair {
    /// One-based coefficient indices of the pair.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Pair::Y12 => (1, 2),
            Pair::Y13 => (1, 3),
            Pair::Y23 => (2, 3),
        }
    }

    pub fn names(self) -> (&'static str, &'static str) {
        match self {
            Pair::Y12 => ("y1", "y2"),
            Pair::Y13 => ("y1", "y3"),
            Pair::Y23 => ("y2", "y3"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrespondenceError {
    #[error("zeros collide: |x1 - x2| = {separation:e}")]
    Collision { separation: f64 },
    #[error("double zero too close to the origin: |x1| = {modulus:e}")]
    NearOrigin { modulus: f64 },
    #[error("inconsistent double-zero coefficients: best |p3(x)| residual {residual:e}")]
    Inconsistent { residual: f64 },
    #[error("pair {pair:?} is not available for {config:?}")]
    UnsupportedPair { config: Config, pair: Pair },
}

/// The zeros of one polynomial configuration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootState {
    pub config: Config,
    pub x1: C,
    pub x2: C,
}

impl RootState {
    pub fn new(config: Config, x1: C, x2: C) -> Self {
        RootState { config, x1, x2 }
    }

    pub fn separation(&self) -> f64 {
        (self.x1 - self.x2).norm()
    }

    fn scale(&self) -> f64 {
        1f64.max(self.x1.norm()).max(self.x2.norm())
    }

    pub fn is_collided(&self) -> bool {
        self.separation() < COLLISION_TOL * self.scale()
    }

    pub fn near_origin(&self) -> bool {
        self.x1.norm() < COLLISION_TOL * self.scale()
    }
}

/// The coefficients `y₁, y₂[, y₃]` of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffState {
    pub config: Config,
    values: [C; 3],
}

impl CoeffState {
    pub fn generic2(y1: C, y2: C) -> Self {
        CoeffState {
            config: Config::Generic2,
            values: [y1, y2, C::new(0.0, 0.0)],
        }
    }

    /// Checked constructor: the cubic must actually have a double zero.
    pub fn double_zero3(y1: C, y2: C, y3: C) -> Result<Self, CorrespondenceError> {
        let c = CoeffState {
            config: Config::DoubleZero3,
            values: [y1, y2, y3],
        };
        locate_double_zero(&c.values)?;
        Ok(c)
    }

    /// Coefficient `y_i` with one-based `i`.
    pub fn y(&self, i: usize) -> C {
        self.values[i - 1]
    }

    pub fn values(&self) -> [C; 3] {
        self.values
    }
}

/// A labeled root state together with how trustworthy the labels are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootLabeling {
    pub state: RootState,
    /// Cost ratio of the rejected to the chosen assignment (∞ when decisive).
    pub ratio: f64,
    pub ambiguous: bool,
}

pub fn roots_to_coeffs(r: &RootState) -> CoeffState {
    let (x1, x2) = (r.x1, r.x2);
    match r.config {
        Config::Generic2 => CoeffState::generic2(-(x1 + x2), x1 * x2),
        Config::DoubleZero3 => CoeffState {
            config: Config::DoubleZero3,
            values: [-(2.0 * x1 + x2), x1 * (x1 + 2.0 * x2), -(x1 * x1) * x2],
        },
    }
}

/// Both roots of `a z² + b z + c`, computed without cancellation.
pub fn quadratic_roots(a: C, b: C, c: C) -> [C; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // pick the sign that avoids subtracting nearly equal numbers
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return [C::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// The three roots of `a z³ + b z² + c z + d` (Cardano, then Newton-polished).
pub fn cubic_roots(a: C, b: C, c: C, d: C) -> [C; 3] {
    let (p, q, r) = (b / a, c / a, d / a);
    let shift = p / 3.0;
    let pp = q - p * p / 3.0;
    let qq = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let s = (qq * qq / 4.0 + pp * pp * pp / 27.0).sqrt();
    let u1 = -qq / 2.0 + s;
    let u2 = -qq / 2.0 - s;
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = if u.norm() == 0.0 {
        // pp == qq == 0: triple root
        [C::new(0.0, 0.0); 3]
    } else {
        let cbrt = u.powf(1.0 / 3.0);
        let mut out = [C::new(0.0, 0.0); 3];
        let mut w = C::new(1.0, 0.0);
        for o in out.iter_mut() {
            let t = w * cbrt;
            *o = t - pp / (3.0 * t);
            w *= omega;
        }
        out
    };
    for z in roots.iter_mut() {
        *z -= shift;
        for _ in 0..3 {
            let f = ((*z + p) * *z + q) * *z + r;
            let df = (3.0 * *z + 2.0 * p) * *z + q;
            if df.norm() == 0.0 || f.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *z -= step;
        }
    }
    roots
}

fn p3(y: &[C; 3], x: C) -> C {
    ((x + y[0]) * x + y[1]) * x + y[2]
}

fn p3_scale(y: &[C; 3], x: C) -> f64 {
    let m = x.norm();
    m.powi(3).max(1.0) + y[0].norm() * m * m + y[1].norm() * m + y[2].norm()
}

/// Selects the root of `3x² + 2y₁x + y₂` that also annihilates `p₃`.
fn locate_double_zero(y: &[C; 3]) -> Result<C, CorrespondenceError> {
    let cands = quadratic_roots(C::new(3.0, 0.0), 2.0 * y[0], y[1]);
    let rel = |x: C| p3(y, x).norm() / p3_scale(y, x);
    let (best, res) = cands
        .iter()
        .map(|&x| (x, rel(x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if res > DOUBLE_ZERO_TOL {
        return Err(CorrespondenceError::Inconsistent { residual: res });
    }
    Ok(best)
}

fn canonical_order(a: C, b: C) -> (C, C) {
    if (a.re, a.im) <= (b.re, b.im) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Recovers labeled zeros from coefficients.
///
/// For `Generic2` the labels follow `previous` by minimizing total distance,
/// or a lexicographic `(re, im)` order without it. For `DoubleZero3` the
/// double zero is intrinsically distinguished, so `previous` is not needed.
pub fn coeffs_to_roots(
    c: &CoeffState,
    previous: Option<&RootState>,
) -> Result<RootLabeling, CorrespondenceError> {
    match c.config {
        Config::Generic2 => {
            let [ra, rb] = quadratic_roots(C::new(1.0, 0.0), c.y(1), c.y(2));
            Ok(match previous {
                Some(prev) => match_pair(prev, ra, rb),
                None => {
                    let (x1, x2) = canonical_order(ra, rb);
                    let state = RootState::new(Config::Generic2, x1, x2);
                    let collided = state.is_collided();
                    RootLabeling {
                        state,
                        ratio: if collided { 1.0 } else { f64::INFINITY },
                        ambiguous: collided,
                    }
                }
            })
        }
        Config::DoubleZero3 => {
            let y = c.values();
            let x1 = locate_double_zero(&y)?;
            let state = RootState::new(Config::DoubleZero3, x1, -y[0] - 2.0 * x1);
            let collided = state.is_collided();
            Ok(RootLabeling {
                state,
                ratio: if collided { 1.0 } else { f64::INFINITY },
                ambiguous: collided,
            })
        }
    }
}

fn match_pair(prev: &RootState, ra: C, rb: C) -> RootLabeling {
    let keep = (ra - prev.x1).norm() + (rb - prev.x2).norm();
    let swap = (rb - prev.x1).norm() + (ra - prev.x2).norm();
    let (x1, x2, best, other) = if keep <= swap {
        (ra, rb, keep, swap)
    } else {
        (rb, ra, swap, keep)
    };
    let ratio = if best == 0.0 {
        if other == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        other / best
    };
    let state = RootState::new(prev.config, x1, x2);
    RootLabeling {
        state,
        ratio,
        ambiguous: ratio < AMBIGUITY_RATIO || state.is_collided(),
    }
}

/// Continuity tracking of the double-zero configuration when only one
/// coefficient pair is known.
///
/// `y` holds `[y₁, y₂, y₃]`; only the entries named by `pair` are read.
/// The double zero solves `3x² + 2y₁x + y₂ = 0` (Y12), `2x³ + y₁x² − y₃ = 0`
/// (Y13) or `x³ − y₂x − 2y₃ = 0` (Y23); the candidate nearest to the
/// previous `x₁` is kept.
pub fn track_double_zero(
    pair: Pair,
    y: [C; 3],
    previous: &RootState,
) -> Result<RootLabeling, CorrespondenceError> {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let cands: Vec<C> = match pair {
        Pair::Y12 => quadratic_roots(C::new(3.0, 0.0), 2.0 * y[0], y[1]).to_vec(),
        Pair::Y13 => cubic_roots(C::new(2.0, 0.0), y[0], zero, -y[2]).to_vec(),
        Pair::Y23 => cubic_roots(one, zero, -y[1], -2.0 * y[2]).to_vec(),
    };
    let mut dist: Vec<(f64, C)> = cands
        .iter()
        .map(|&x| ((x - previous.x1).norm(), x))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d0, x1) = dist[0];
    let d1 = dist[1].0;
    let ratio = if d0 == 0.0 {
        if d1 == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        d1 / d0
    };
    let x2 = match pair {
        Pair::Y12 | Pair::Y13 => -y[0] - 2.0 * x1,
        Pair::Y23 => {
            if x1.norm() == 0.0 {
                return Err(CorrespondenceError::NearOrigin { modulus: 0.0 });
            }
            (y[1] - x1 * x1) / (2.0 * x1)
        }
    };
    let state = RootState::new(Config::DoubleZero3, x1, x2);
    Ok(RootLabeling {
        state,
        ratio,
        ambiguous: ratio < AMBIGUITY_RATIO || state.is_collided(),
    })
}

/// Zero velocities induced by coefficient velocities.
///
/// `ydot` holds `[ẏ₁, ẏ₂, ẏ₃]`; only the entries in `pair` are read.
pub fn xdot_from_ydot(
    r: &RootState,
    ydot: [C; 3],
    pair: Pair,
) -> Result<(C, C), CorrespondenceError> {
    if r.is_collided() {
        return Err(CorrespondenceError::Collision {
            separation: r.separation(),
        });
    }
    let (x1, x2) = (r.x1, r.x2);
    let [yd1, yd2, yd3] = ydot;
    let diff = x1 - x2;
    match (r.config, pair) {
        (Config::Generic2, Pair::Y12) => Ok((-(x1 * yd1 + yd2) / diff, (x2 * yd1 + yd2) / diff)),
        (Config::Generic2, p) => Err(CorrespondenceError::UnsupportedPair {
            config: Config::Generic2,
            pair: p,
        }),
        (Config::DoubleZero3, Pair::Y12) => Ok((
            -(2.0 * x1 * yd1 + yd2) / (2.0 * diff),
            ((x1 + x2) * yd1 + yd2) / diff,
        )),
        (Config::DoubleZero3, p) => {
            if r.near_origin() {
                return Err(CorrespondenceError::NearOrigin { modulus: x1.norm() });
            }
            Ok(match p {
                Pair::Y13 => (
                    -(x1 * x1 * yd1 - yd3) / (2.0 * x1 * diff),
                    (x1 * x2 * yd1 - yd3) / (x1 * diff),
                ),
                _ => (
                    (x1 * yd2 + 2.0 * yd3) / (2.0 * x1 * diff),
                    -(x1 * x2 * yd2 + (x1 + x2) * yd3) / (x1 * x1 * diff),
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }
    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn forward_maps() {
        let g = roots_to_coeffs(&RootState::new(Config::Generic2, r(1.0), r(-1.0)));
        assert_eq!((g.y(1), g.y(2)), (r(0.0), r(-1.0)));
        let d = roots_to_coeffs(&RootState::new(Config::DoubleZero3, r(2.0), r(-1.0)));
        assert_eq!(d.values(), [r(-3.0), r(0.0), r(4.0)]);
        let d0 = roots_to_coeffs(&RootState::new(Config::DoubleZero3, r(0.0), r(5.0)));
        assert_eq!(d0.values(), [r(-5.0), r(0.0), r(0.0)]);
    }

    #[test]
    fn generic_canonical_labels() {
        let l = coeffs_to_roots(&CoeffState::generic2(r(0.0), r(-1.0)), None).unwrap();
        assert_eq!((l.state.x1, l.state.x2), (r(-1.0), r(1.0)));
        assert!(!l.ambiguous);
    }

    #[test]
    fn double_zero_selection_checks_both_candidates() {
        // 3x² − 6x = 0 has roots 0 and 2; p₃(0) = 4, p₃(2) = 0
        let y = [r(-3.0), r(0.0), r(4.0)];
        assert_eq!(p3(&y, r(0.0)), r(4.0));
        assert_eq!(p3(&y, r(2.0)), r(0.0));
        let cs = CoeffState::double_zero3(y[0], y[1], y[2]).unwrap();
        let l = coeffs_to_roots(&cs, None).unwrap();
        assert!((l.state.x1 - r(2.0)).norm() < 1e-14);
        assert!((l.state.x2 - r(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn inconsistent_double_zero_rejected() {
        let e = CoeffState::double_zero3(r(-3.0), r(0.0), r(5.0)).unwrap_err();
        assert!(matches!(e, CorrespondenceError::Inconsistent { .. }));
    }

    #[test]
    fn double_root_flags_ambiguity() {
        let l = coeffs_to_roots(&CoeffState::generic2(r(-2.0), r(1.0)), None).unwrap();
        assert!(l.ambiguous);
        assert!((l.state.x1 - r(1.0)).norm() < 1e-7);
        assert!((l.state.x2 - r(1.0)).norm() < 1e-7);
    }

    #[test]
    fn tracking_follows_previous() {
        let prev = RootState::new(Config::Generic2, r(1.0), r(-1.0));
        let l = coeffs_to_roots(&CoeffState::generic2(r(0.0), r(-1.0)), Some(&prev)).unwrap();
        assert_eq!((l.state.x1, l.state.x2), (r(1.0), r(-1.0)));
        assert!(!l.ambiguous);
        // previous halfway between the two roots: cannot decide
        let mid = RootState::new(Config::Generic2, c(0.0, 1.0), c(0.0, -1.0));
        let l = coeffs_to_roots(&CoeffState::generic2(r(0.0), r(-1.0)), Some(&mid)).unwrap();
        assert!(l.ambiguous);
    }

    #[test]
    fn generic_velocity_direct_substitution() {
        let st = RootState::new(Config::Generic2, r(0.0), r(1.0));
        let (a, b) = xdot_from_ydot(&st, [r(1.0), r(0.0), r(0.0)], Pair::Y12).unwrap();
        assert_eq!(a, r(0.0));
        assert_eq!(b, r(-1.0));
    }

    #[test]
    fn double_zero_y13_direct_substitution() {
        let st = RootState::new(Config::DoubleZero3, r(1.0), r(-1.0));
        let (a, b) = xdot_from_ydot(&st, [r(0.0), r(0.0), r(2.0)], Pair::Y13).unwrap();
        assert_eq!(a, r(0.5));
        assert_eq!(b, r(-1.0));
    }

    #[test]
    fn guards() {
        let st = RootState::new(Config::Generic2, r(1.0), r(1.0));
        assert!(matches!(
            xdot_from_ydot(&st, [r(1.0); 3], Pair::Y12),
            Err(CorrespondenceError::Collision { .. })
        ));
        let st = RootState::new(Config::DoubleZero3, r(0.0), r(1.0));
        assert!(matches!(
            xdot_from_ydot(&st, [r(1.0); 3], Pair::Y13),
            Err(CorrespondenceError::NearOrigin { .. })
        ));
        // Y12 has no x₁ denominator
        assert!(xdot_from_ydot(&st, [r(1.0); 3], Pair::Y12).is_ok());
        let g = RootState::new(Config::Generic2, r(0.0), r(1.0));
        assert!(matches!(
            xdot_from_ydot(&g, [r(1.0); 3], Pair::Y13),
            Err(CorrespondenceError::UnsupportedPair { .. })
        ));
    }

    #[test]
    fn cubic_solver_recovers_known_roots() {
        let roots = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0)];
        let (a, b, cc) = (roots[0], roots[1], roots[2]);
        let got = cubic_roots(
            r(1.0),
            -(a + b + cc),
            a * b + a * cc + b * cc,
            -(a * b * cc),
        );
        for want in roots {
            let d = got
                .iter()
                .map(|g| (g - want).norm())
                .fold(f64::MAX, f64::min);
            assert!(d < 1e-13, "{want} missing from {got:?}");
        }
    }

    #[test]
    fn pair_trackers_recover_the_double_zero() {
        let st = RootState::new(Config::DoubleZero3, c(0.7, -0.2), c(-0.3, 0.9));
        let y = roots_to_coeffs(&st).values();
        let nudged = RootState::new(Config::DoubleZero3, st.x1 + c(1e-3, 0.0), st.x2);
        for pair in [Pair::Y12, Pair::Y13, Pair::Y23] {
            let l = track_double_zero(pair, y, &nudged).unwrap();
            assert!(!l.ambiguous, "{pair:?}");
            assert!((l.state.x1 - st.x1).norm() < 1e-13, "{pair:?}");
            assert!((l.state.x2 - st.x2).norm() < 1e-13, "{pair:?}");
        }
    }
}
