//! Closed-form coefficient flows.
//!
//! Two families appear among the built-in examples:
//!
//! - the anharmonic pair `ẏ₁ = α₀ + α₁y₂`, `ẏ₂ = β₀y₁ + β₁y₁³`, so that
//!   `ÿ₁ = α₁(β₀y₁ + β₁y₁³)`, solved by `y₁ = μ sn(λt + ρ | m)`;
//! - the logistic pair, a leader `Ẏ = Y(g + cY)` driving a follower
//!   `Ḟ = F(h + dY)`, solved by `Y = Y₀e^{gt}/B` and `F = F₀e^{ht}B^{−d/c}`
//!   with `B = 1 − (c/g)Y₀(e^{gt} − 1)`.
//!
//! Matching the sn ansatz to the quartic oscillator gives
//! `λ²(1 + m) = −α₁β₀`, `μ² = 2mλ²/(α₁β₁)` and, from the first integral
//! `E = ẏ₁² − α₁β₀y₁² − ½α₁β₁y₁⁴`, the quadratic `E(1 + m)² = (2α₁β₀²/β₁)m`.
//! Its two roots are reciprocal and describe the same function. The signs of
//! `λ` and `μ` are fixed by the initial velocity. Every candidate is scored
//! against a short oracle run before one is accepted.

use num_complex::Complex64;

use crate::correspondence::Pair;
use crate::elliptic::{jacobi_m, EllipticError, EllipticModulus};
use crate::generator::{builtin_spec, YSystemSpec};
use crate::oracle::{integrate, OdeProblem, Tolerances};

type C = Complex64;

/// Oracle samples used to score an elliptic candidate.
pub const VALIDATION_SAMPLES: usize = 10;
/// Horizon of the scoring run.
pub const VALIDATION_HORIZON: f64 = 0.01;
/// Candidates scoring worse than this are rejected.
pub const VALIDATION_TOL: f64 = 1e-8;
const RHO_NEWTON_ITERS: usize = 50;
/// Largest change of `arg B` allowed between tracking points.
const BRANCH_STEP: f64 = std::f64::consts::FRAC_PI_4;
const MIN_TRACK_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum YSolveError {
    #[error("zero first integral: the motion is a separatrix, outside the sn family")]
    Separatrix,
    #[error("no elliptic candidate passed validation (best mismatch {best_mismatch:e})")]
    SelectionFailed { best_mismatch: f64 },
    #[error("closed form is singular near t = {time}")]
    Singularity { time: f64 },
    #[error("{0} is not a {1} family")]
    WrongFamily(String, &'static str),
    #[error("unknown example {0}")]
    UnknownExample(u8),
}

/// `ẏ₁ = α₀ + α₁y₂`, `ẏ₂ = β₀y₁ + β₁y₁³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnharmonicSpec {
    pub alpha0: C,
    pub alpha1: C,
    pub beta0: C,
    pub beta1: C,
}

fn param(spec: &YSystemSpec, name: &str) -> Option<C> {
    spec.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
}

impl AnharmonicSpec {
    pub fn new(alpha0: C, alpha1: C, beta0: C, beta1: C) -> Self {
        AnharmonicSpec {
            alpha0,
            alpha1,
            beta0,
            beta1,
        }
    }

    /// Reads the parameters of an anharmonic-family [`YSystemSpec`].
    pub fn from_ysystem(spec: &YSystemSpec) -> Result<Self, YSolveError> {
        let get = |n| param(spec, n);
        match (get("alpha0"), get("alpha1"), get("beta0"), get("beta1")) {
            (Some(a0), Some(a1), Some(b0), Some(b1)) if spec.pair == Pair::Y12 => {
                Ok(AnharmonicSpec::new(a0, a1, b0, b1))
            }
            _ => Err(YSolveError::WrongFamily(spec.to_string(), "anharmonic")),
        }
    }

    /// The coefficient flow of example 1 or 2.
    pub fn for_example(n: u8, a: C, b: C) -> Result<Self, YSolveError> {
        if !matches!(n, 1 | 2) {
            return Err(YSolveError::UnknownExample(n));
        }
        AnharmonicSpec::from_ysystem(&builtin_spec(n, a, b).expect("1 or 2"))
    }

    pub fn rhs(&self, y: [C; 2]) -> [C; 2] {
        [
            self.alpha0 + self.alpha1 * y[1],
            self.beta0 * y[0] + self.beta1 * y[0] * y[0] * y[0],
        ]
    }

    /// The first integral `ẏ₁² − α₁β₀y₁² − ½α₁β₁y₁⁴`.
    pub fn energy(&self, y1: C, y2: C) -> C {
        let v = self.alpha0 + self.alpha1 * y2;
        let s = y1 * y1;
        v * v - self.alpha1 * self.beta0 * s - 0.5 * self.alpha1 * self.beta1 * s * s
    }
}

/// Parameters of `y₁(t) = μ sn(λt + ρ | k²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParams {
    pub k: C,
    /// `m = k²`.
    pub m: C,
    pub lambda: C,
    pub mu: C,
    pub rho: C,
    /// Max relative deviation from the scoring oracle run.
    pub mismatch: f64,
}

impl EllipticParams {
    pub fn modulus(&self) -> EllipticModulus {
        EllipticModulus::new(self.k)
    }
}

/// Every sign/root combination tried by [`fit_elliptic_params`], with its
/// score (`f64::INFINITY` when `ρ` could not be found).
pub fn elliptic_candidates(
    spec: &AnharmonicSpec,
    y1_0: C,
    y2_0: C,
) -> Result<Vec<EllipticParams>, YSolveError> {
    let AnharmonicSpec {
        alpha0,
        alpha1,
        beta0,
        beta1,
    } = *spec;
    let e = spec.energy(y1_0, y2_0);
    let scale = (alpha0 + alpha1 * y2_0).norm_sqr() + (alpha1 * beta0 * y1_0 * y1_0).norm();
    if e.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(YSolveError::Separatrix);
    }
    let kq = 2.0 * alpha1 * beta0 * beta0 / beta1;
    let ydot0 = alpha0 + alpha1 * y2_0;
    let reference = short_oracle(spec, y1_0, y2_0);
    let one = C::new(1.0, 0.0);
    let mut out = Vec::new();
    let c = alpha1 * beta1;
    let branches: Vec<(C, C)> = if beta0.norm() == 0.0 {
        // ÿ₁ = cy₁³: the quadratic collapses to m = −1 and λ⁴ = −cE/2
        let l2 = (-0.5 * c * e).sqrt();
        vec![(-one, l2), (-one, -l2)]
    } else {
        modulus_roots(e, kq)
            .into_iter()
            .filter(|m| m.re.is_finite() && m.im.is_finite() && (one + m).norm() >= 1e-12)
            .map(|m| (m, -alpha1 * beta0 / (one + m)))
            .collect()
    };
    for (m, lam_sq) in branches {
        let mu_sq = 2.0 * m * lam_sq / c;
        for lam in [lam_sq.sqrt(), -lam_sq.sqrt()] {
            for mu in [mu_sq.sqrt(), -mu_sq.sqrt()] {
                let mut p = EllipticParams {
                    k: m.sqrt(),
                    m,
                    lambda: lam,
                    mu,
                    rho: C::new(0.0, 0.0),
                    mismatch: f64::INFINITY,
                };
                if let Some(rho) = invert_sn(y1_0 / mu, m) {
                    p.rho = rho;
                    p.mismatch = score(spec, &p, ydot0, &reference);
                }
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Fits `(k, λ, μ, ρ)` to the initial data, choosing among the candidates
/// by their oracle mismatch; near-ties go to the smaller `|m|`.
pub fn fit_elliptic_params(
    spec: &AnharmonicSpec,
    y1_0: C,
    y2_0: C,
) -> Result<EllipticParams, YSolveError> {
    let cands = elliptic_candidates(spec, y1_0, y2_0)?;
    let best = cands
        .iter()
        .map(|c| c.mismatch)
        .fold(f64::INFINITY, f64::min);
    if best.is_nan() || best >= VALIDATION_TOL {
        return Err(YSolveError::SelectionFailed {
            best_mismatch: best,
        });
    }
    let tie = (10.0 * best).max(1e-12);
    let chosen = cands
        .iter()
        .filter(|c| c.mismatch <= tie)
        .min_by(|a, b| a.m.norm().total_cmp(&b.m.norm()))
        .expect("best is among them");
    Ok(*chosen)
}

/// Roots of `E(1 + m)² = K m`. They multiply to 1, and the discriminant
/// `K(K − 4E)` is formed directly so the double root `m = 1` stays exact.
fn modulus_roots(e: C, kq: C) -> [C; 2] {
    let root = (kq * (kq - 4.0 * e)).sqrt();
    let half = kq - 2.0 * e;
    let big = if (half.conj() * root).re >= 0.0 {
        (half + root) / (2.0 * e)
    } else {
        (half - root) / (2.0 * e)
    };
    [big, big.inv()]
}

fn short_oracle(spec: &AnharmonicSpec, y1_0: C, y2_0: C) -> Vec<[C; 2]> {
    let s = *spec;
    let problem = OdeProblem::new(
        move |_t, y: &[C], d: &mut [C]| {
            let r = s.rhs([y[0], y[1]]);
            d[0] = r[0];
            d[1] = r[1];
        },
        0.0,
        vec![y1_0, y2_0],
        Tolerances::uniform(1e-13),
    );
    let times: Vec<f64> = (1..=VALIDATION_SAMPLES)
        .map(|i| VALIDATION_HORIZON * i as f64 / VALIDATION_SAMPLES as f64)
        .collect();
    match integrate(&problem, &times) {
        Ok(sol) => sol.states.iter().map(|s| [s[0], s[1]]).collect(),
        Err(_) => Vec::new(),
    }
}

fn score(spec: &AnharmonicSpec, p: &EllipticParams, ydot0: C, reference: &[[C; 2]]) -> f64 {
    let Ok(j) = jacobi_m(p.rho, p.m) else {
        return f64::INFINITY;
    };
    let mut worst = (p.lambda * p.mu * j.cn * j.dn - ydot0).norm() / ydot0.norm().max(1.0);
    if reference.len() < VALIDATION_SAMPLES {
        return f64::INFINITY;
    }
    for (i, want) in reference.iter().enumerate() {
        let t = VALIDATION_HORIZON * (i + 1) as f64 / VALIDATION_SAMPLES as f64;
        match elliptic_y(spec, p, t) {
            Ok(got) => {
                for c in 0..2 {
                    worst = worst.max((got[c] - want[c]).norm() / want[c].norm().max(1.0));
                }
            }
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

/// Solves `sn(ρ | m) = s` by damped Newton, first from `arcsin s` and then
/// from the incomplete-integral estimate `s·R_F(1 − s², 1 − ms², 1)`.
fn invert_sn(s: C, m: C) -> Option<C> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return None;
    }
    let mut starts = vec![s.asin()];
    let one = C::new(1.0, 0.0);
    if let Some(rf) = carlson_rf(one - s * s, one - m * s * s, one) {
        starts.push(s * rf);
    }
    let tol = 1e-14 * s.norm().max(1.0);
    for start in starts {
        let mut rho = start;
        let Ok(j) = jacobi_m(rho, m) else { continue };
        let mut f = j.sn - s;
        let mut deriv = j.cn * j.dn;
        for _ in 0..RHO_NEWTON_ITERS {
            if f.norm() <= tol {
                return Some(rho);
            }
            if deriv.norm() == 0.0 {
                break;
            }
            let step = f / deriv;
            let mut damp = 1.0;
            let mut moved = false;
            while damp > 1e-4 {
                let trial = rho - step * damp;
                if let Ok(jt) = jacobi_m(trial, m) {
                    let ft = jt.sn - s;
                    if ft.norm() < f.norm() {
                        rho = trial;
                        f = ft;
                        deriv = jt.cn * jt.dn;
                        moved = true;
                        break;
                    }
                }
                damp *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if f.norm() <= 1e3 * tol {
            return Some(rho);
        }
    }
    None
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
fn carlson_rf(x: C, y: C, z: C) -> Option<C> {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..60 {
        let a = (x + y + z) / 3.0;
        let dev = [(x - a).norm(), (y - a).norm(), (z - a).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        if dev <= 1e-3 * a.norm() {
            let (dx, dy) = (1.0 - x / a, 1.0 - y / a);
            let dz = -(dx + dy);
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
            return Some(series / a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let l = sx * sy + sy * sz + sz * sx;
        x = (x + l) / 4.0;
        y = (y + l) / 4.0;
        z = (z + l) / 4.0;
    }
    None
}

fn pole_error(e: EllipticError, p: &EllipticParams, t: f64) -> YSolveError {
    match e {
        EllipticError::Pole { nearest_pole, .. } => YSolveError::Singularity {
            time: ((nearest_pole - p.rho) / p.lambda).re,
        },
        EllipticError::NonFinite => YSolveError::Singularity { time: t },
    }
}

fn elliptic_y(spec: &AnharmonicSpec, p: &EllipticParams, t: f64) -> Result<[C; 2], YSolveError> {
    let j = jacobi_m(p.lambda * t + p.rho, p.m).map_err(|e| pole_error(e, p, t))?;
    let y1 = p.mu * j.sn;
    let y2 = (p.lambda * p.mu * j.cn * j.dn - spec.alpha0) / spec.alpha1;
    Ok([y1, y2])
}

/// `(y₁, y₂)` at `t` on the sn solution.
pub fn anharmonic_y(
    spec: &AnharmonicSpec,
    params: &EllipticParams,
    t: f64,
) -> Result<(C, C), YSolveError> {
    let [y1, y2] = elliptic_y(spec, params, t)?;
    Ok((y1, y2))
}

/// A solved anharmonic initial-value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnharmonicSolution {
    /// `α₁ ≠ 0`, `β₁ ≠ 0`: the sn form.
    Elliptic {
        spec: AnharmonicSpec,
        params: EllipticParams,
    },
    /// `α₁ = 0`: `y₁` is linear in `t` and `y₂` a quartic polynomial.
    Polynomial {
        spec: AnharmonicSpec,
        y1_0: C,
        y2_0: C,
    },
    /// `β₁ = 0`, `α₁ ≠ 0`: a linear oscillator `ÿ₁ = α₁β₀y₁`.
    Linear {
        spec: AnharmonicSpec,
        y1_0: C,
        y2_0: C,
    },
}

impl AnharmonicSolution {
    pub fn solve(spec: &AnharmonicSpec, y1_0: C, y2_0: C) -> Result<Self, YSolveError> {
        let spec = *spec;
        if spec.alpha1.norm() == 0.0 {
            return Ok(AnharmonicSolution::Polynomial { spec, y1_0, y2_0 });
        }
        if spec.beta1.norm() == 0.0 {
            return Ok(AnharmonicSolution::Linear { spec, y1_0, y2_0 });
        }
        let params = fit_elliptic_params(&spec, y1_0, y2_0)?;
        Ok(AnharmonicSolution::Elliptic { spec, params })
    }

    pub fn eval(&self, t: f64) -> Result<(C, C), YSolveError> {
        match *self {
            AnharmonicSolution::Elliptic { spec, params } => anharmonic_y(&spec, &params, t),
            AnharmonicSolution::Polynomial { spec, y1_0, y2_0 } => {
                let a0 = spec.alpha0;
                let y1 = y1_0 + a0 * t;
                // ∫₀ᵗ β₀y₁ + β₁y₁³ ds with y₁ = y₁(0) + α₀s
                let i1 = y1_0 * t + 0.5 * a0 * t * t;
                let i3 = y1_0 * y1_0 * y1_0 * t
                    + 1.5 * y1_0 * y1_0 * a0 * t * t
                    + y1_0 * a0 * a0 * t * t * t
                    + 0.25 * a0 * a0 * a0 * t * t * t * t;
                Ok((y1, y2_0 + spec.beta0 * i1 + spec.beta1 * i3))
            }
            AnharmonicSolution::Linear { spec, y1_0, y2_0 } => {
                let w = (spec.alpha1 * spec.beta0).sqrt();
                let v0 = spec.alpha0 + spec.alpha1 * y2_0;
                let (ch, sh_over_w, w_sh) = if w.norm() * t.abs() < 1e-8 {
                    (C::new(1.0, 0.0), C::new(t, 0.0), w * w * t)
                } else {
                    let wt = w * t;
                    (wt.cosh(), wt.sinh() / w, w * wt.sinh())
                };
                let y1 = y1_0 * ch + v0 * sh_over_w;
                let v = y1_0 * w_sh + v0 * ch;
                Ok((y1, (v - spec.alpha0) / spec.alpha1))
            }
        }
    }
}

/// Leader `Ẏ = Y(g + cY)` driving follower `Ḟ = F(h + dY)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticSpec {
    pub growth: C,
    pub coupling: C,
    pub follower_growth: C,
    pub follower_coupling: C,
}

impl LogisticSpec {
    pub fn new(growth: C, coupling: C, follower_growth: C, follower_coupling: C) -> Self {
        LogisticSpec {
            growth,
            coupling,
            follower_growth,
            follower_coupling,
        }
    }

    /// Reads a logistic-family [`YSystemSpec`]. On Y13 the leader is `y₃`
    /// and the follower `y₁`; on Y23 the leader is `y₂` and the follower `y₃`.
    pub fn from_ysystem(spec: &YSystemSpec) -> Result<Self, YSolveError> {
        let get = |n| param(spec, n);
        let (Some(a1), Some(a2), Some(b1), Some(b2)) =
            (get("alpha1"), get("alpha2"), get("beta1"), get("beta2"))
        else {
            return Err(YSolveError::WrongFamily(spec.to_string(), "logistic"));
        };
        match spec.pair {
            Pair::Y13 => Ok(LogisticSpec::new(b1, b2, a1, a2)),
            Pair::Y23 => Ok(LogisticSpec::new(a1, a2, b1, b2)),
            Pair::Y12 => Err(YSolveError::WrongFamily(spec.to_string(), "logistic")),
        }
    }

    /// The coefficient flow of example 3 or 4.
    pub fn for_example(n: u8, a: C, b: C) -> Result<Self, YSolveError> {
        if !matches!(n, 3 | 4) {
            return Err(YSolveError::UnknownExample(n));
        }
        LogisticSpec::from_ysystem(&builtin_spec(n, a, b).expect("3 or 4"))
    }

    /// `[Ẏ, Ḟ]`.
    pub fn rhs(&self, leader: C, follower: C) -> [C; 2] {
        [
            leader * (self.growth + self.coupling * leader),
            follower * (self.follower_growth + self.follower_coupling * leader),
        ]
    }
}

/// `eᶻ − 1` without cancellation for small `z`.
fn expm1(z: C) -> C {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    C::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `(e^{gt} − 1)/g`, continuous through `g = 0`.
fn growth_integral(g: C, t: f64, scale: f64) -> C {
    if g.norm() <= 1e-12 * scale || g.norm() == 0.0 {
        C::new(t, 0.0) + 0.5 * g * t * t
    } else {
        expm1(g * t) / g
    }
}

/// Evaluates the logistic closed form along a time grid, tracking the branch
/// of `B^{−d/c}` by continuity from `B(0) = 1`.
#[derive(Debug, Clone)]
pub struct LogisticFlow {
    spec: LogisticSpec,
    leader_0: C,
    follower_0: C,
    t: f64,
    /// Unwrapped `arg B(t)`.
    arg: f64,
}

impl LogisticFlow {
    pub fn new(spec: &LogisticSpec, leader_0: C, follower_0: C) -> Self {
        LogisticFlow {
            spec: *spec,
            leader_0,
            follower_0,
            t: 0.0,
            arg: 0.0,
        }
    }

    fn b(&self, t: f64) -> C {
        let s = &self.spec;
        let scale = (s.coupling * self.leader_0).norm();
        C::new(1.0, 0.0) - s.coupling * self.leader_0 * growth_integral(s.growth, t, scale)
    }

    /// Advances the branch tracker to `t` (either direction).
    fn track_to(&mut self, t: f64) -> Result<(), YSolveError> {
        while self.t != t {
            let full = t - self.t;
            let mut step = full;
            loop {
                // only a step that had to be halved this small means B spins
                // around a zero; a short remaining distance is accepted as is
                if step.abs() < MIN_TRACK_STEP && step != full {
                    return Err(YSolveError::Singularity { time: self.t });
                }
                let b0 = self.b(self.t);
                let b1 = self.b(self.t + step);
                if b1.norm() == 0.0 || !b1.re.is_finite() || !b1.im.is_finite() {
                    step *= 0.5;
                    continue;
                }
                let turn = (b1 / b0).arg();
                if turn.abs() < BRANCH_STEP {
                    self.arg += turn;
                    self.t = if (self.t + step - t).abs() <= f64::EPSILON * t.abs() {
                        t
                    } else {
                        self.t + step
                    };
                    break;
                }
                step *= 0.5;
            }
        }
        Ok(())
    }

    /// `(leader, follower)` at `t`.
    pub fn eval(&mut self, t: f64) -> Result<(C, C), YSolveError> {
        let s = self.spec;
        let y0 = self.leader_0;
        let scale = (s.coupling * y0).norm();
        let (h, d) = (s.follower_growth, s.follower_coupling);
        if s.coupling.norm() == 0.0 {
            let leader = y0 * (s.growth * t).exp();
            let follower =
                self.follower_0 * (h * t + d * y0 * growth_integral(s.growth, t, scale)).exp();
            return Ok((leader, follower));
        }
        self.track_to(t)?;
        let b = self.b(t);
        if b.norm() < 1e-300 {
            return Err(YSolveError::Singularity { time: t });
        }
        let log_b = C::new(b.norm().ln(), self.arg);
        let leader = y0 * (s.growth * t).exp() / b;
        let follower = self.follower_0 * (h * t - (d / s.coupling) * log_b).exp();
        Ok((leader, follower))
    }
}

/// `(leader, follower)` at a single time.
pub fn logistic_y(
    spec: &LogisticSpec,
    leader_0: C,
    follower_0: C,
    t: f64,
) -> Result<(C, C), YSolveError> {
    LogisticFlow::new(spec, leader_0, follower_0).eval(t)
}
