//! End-to-end solves of the built-in examples.
//!
//! The algebraic route maps the initial zeros to coefficients, evaluates the
//! closed-form coefficient flow, and extracts the zeros again at every output
//! time, keeping their labels by continuity. An internal grid is refined
//! until consecutive root moves are under a tenth of the root separation;
//! the output grid is a subset of it, so no interpolation is involved.
//!
//! The oracle route integrates the synthesized x-system directly. The two are
//! compared by [`verify_against_oracle`].

use std::fmt;

use num_complex::Complex64;

use crate::correspondence::{
    coeffs_to_roots, roots_to_coeffs, track_double_zero, CoeffState, Config, Pair, RootState,
};
use crate::generator::{builtin_example, synthesize_xsystem, GeneratorError, XSystem, YSystemSpec};
use crate::oracle::{integrate, OdeEventKind, OdeProblem, OracleError, Tolerances};
use crate::ysolve::{AnharmonicSolution, AnharmonicSpec, LogisticFlow, LogisticSpec, YSolveError};

type C = Complex64;

/// Largest root move per internal step, relative to the root separation.
pub const MOVE_FRACTION: f64 = 0.1;
/// Smallest internal step, relative to `t_max`.
pub const MIN_STEP_FRACTION: f64 = 1e-9;
/// Half-width of the window excluded around an event, relative to `t_max`.
pub const EVENT_WINDOW: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("t_max must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("grid must have at least 2 points, got {0}")]
    BadGrid(usize),
    #[error("initial zeros collide (|x1 - x2| = {0:e})")]
    InitialCollision(f64),
    #[error("initial double zero too close to the origin (|x1| = {0:e})")]
    InitialNearOrigin(f64),
    #[error("no closed form for this system: {0}")]
    NoClosedForm(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which system to solve.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemChoice {
    /// Built-in example 1 to 4.
    Example(u8),
    /// A user coefficient flow; the algebraic route needs its `params` to
    /// identify an anharmonic or logistic family.
    Custom(YSystemSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub system: SystemChoice,
    pub a: C,
    pub b: C,
    pub x1_0: C,
    pub x2_0: C,
    pub t_max: f64,
    /// Number of output points, including `t = 0` and `t = t_max`.
    pub grid: usize,
}

impl SolveRequest {
    pub fn example(n: u8, a: C, b: C, x1_0: C, x2_0: C, t_max: f64, grid: usize) -> Self {
        SolveRequest {
            system: SystemChoice::Example(n),
            a,
            b,
            x1_0,
            x2_0,
            t_max,
            grid,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.grid - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_max
                } else {
                    self.t_max * i as f64 / n as f64
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(PipelineError::BadHorizon(self.t_max));
        }
        if self.grid < 2 {
            return Err(PipelineError::BadGrid(self.grid));
        }
        Ok(())
    }

    /// The coefficient flow and its x-system.
    pub fn systems(&self) -> Result<(YSystemSpec, XSystem), PipelineError> {
        match &self.system {
            SystemChoice::Example(n) => {
                if !(1..=4).contains(n) {
                    return Err(GeneratorError::UnknownExample(*n).into());
                }
                Ok(builtin_example(*n, self.a, self.b))
            }
            SystemChoice::Custom(spec) => Ok((spec.clone(), synthesize_xsystem(spec)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Algebraic,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Algebraic => "algebraic",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The closed form has a pole or blow-up.
    Singularity,
    /// Root labels could not be decided even at the smallest step.
    Ambiguity,
    /// The two zeros met.
    Collision,
    /// The integrator's step size collapsed.
    StepUnderflow,
    /// The integrator met a non-finite right-hand side.
    NonFinite,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Singularity => "singularity",
            EventKind::Ambiguity => "ambiguity",
            EventKind::Collision => "collision",
            EventKind::StepUnderflow => "step-underflow",
            EventKind::NonFinite => "non-finite",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            EventKind::Singularity,
            EventKind::Ambiguity,
            EventKind::Collision,
            EventKind::StepUnderflow,
            EventKind::NonFinite,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// Labeled zeros on a time grid; truncated at the first event.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<(C, C)>,
    pub labels_valid: bool,
    pub method: Method,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, (C, C))> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Closed-form coefficients `[y₁, y₂, y₃]` along increasing time.
enum CoeffFlow {
    Anharmonic(AnharmonicSolution),
    /// Logistic flow with the indices (0-based) of leader and follower.
    Logistic(LogisticFlow, usize, usize),
}

impl CoeffFlow {
    fn eval(&mut self, t: f64) -> Result<[C; 3], YSolveError> {
        let zero = C::new(0.0, 0.0);
        match self {
            CoeffFlow::Anharmonic(sol) => {
                let (y1, y2) = sol.eval(t)?;
                Ok([y1, y2, zero])
            }
            CoeffFlow::Logistic(flow, lead, follow) => {
                let (l, f) = flow.eval(t)?;
                let mut y = [zero; 3];
                y[*lead] = l;
                y[*follow] = f;
                Ok(y)
            }
        }
    }
}

fn coeff_flow(spec: &YSystemSpec, y0: [C; 3]) -> Result<CoeffFlow, PipelineError> {
    let unavailable = |e: YSolveError| PipelineError::NoClosedForm(e.to_string());
    match spec.pair {
        Pair::Y12 => {
            let s = AnharmonicSpec::from_ysystem(spec).map_err(unavailable)?;
            let sol = AnharmonicSolution::solve(&s, y0[0], y0[1]).map_err(unavailable)?;
            Ok(CoeffFlow::Anharmonic(sol))
        }
        Pair::Y13 | Pair::Y23 => {
            let s = LogisticSpec::from_ysystem(spec).map_err(unavailable)?;
            let (lead, follow) = if spec.pair == Pair::Y13 {
                (2, 0)
            } else {
                (1, 2)
            };
            let flow = LogisticFlow::new(&s, y0[lead], y0[follow]);
            Ok(CoeffFlow::Logistic(flow, lead, follow))
        }
    }
}

enum Step {
    Ok(RootState),
    Retry,
    Stop(EventKind),
}

fn recover(spec: &YSystemSpec, y: [C; 3], prev: &RootState) -> Step {
    let labeling = match spec.config {
        Config::Generic2 => coeffs_to_roots(&CoeffState::generic2(y[0], y[1]), Some(prev)),
        Config::DoubleZero3 => track_double_zero(spec.pair, y, prev),
    };
    let Ok(l) = labeling else {
        return Step::Stop(EventKind::Collision);
    };
    if l.state.is_collided() {
        return Step::Stop(EventKind::Collision);
    }
    let sep = prev.separation();
    let moved = (l.state.x1 - prev.x1)
        .norm()
        .max((l.state.x2 - prev.x2).norm());
    if l.ambiguous || moved > MOVE_FRACTION * sep {
        Step::Retry
    } else {
        Step::Ok(l.state)
    }
}

/// Closed-form solve with continuity-labeled root extraction.
pub fn solve_algebraic(req: &SolveRequest) -> Result<Trajectory, PipelineError> {
    req.validate()?;
    let (spec, _) = req.systems()?;
    let r0 = RootState::new(spec.config, req.x1_0, req.x2_0);
    if r0.is_collided() {
        return Err(PipelineError::InitialCollision(r0.separation()));
    }
    if spec.config == Config::DoubleZero3 && spec.pair != Pair::Y12 && r0.near_origin() {
        return Err(PipelineError::InitialNearOrigin(req.x1_0.norm()));
    }
    let y0 = roots_to_coeffs(&r0).values();
    let mut flow = coeff_flow(&spec, y0)?;
    let times = req.times();
    let min_step = MIN_STEP_FRACTION * req.t_max;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![(r0.x1, r0.x2)],
        labels_valid: true,
        method: Method::Algebraic,
        events: Vec::new(),
    };
    let mut prev = r0;
    let mut t = 0.0;
    let mut h = times[1];
    'outer: for &target in &times[1..] {
        while t < target {
            let trial = if t + h >= target { target } else { t + h };
            let y = match flow.eval(trial) {
                Ok(y) => y,
                Err(YSolveError::Singularity { time }) => {
                    traj.events.push(Event {
                        time: time.clamp(t, trial),
                        kind: EventKind::Singularity,
                    });
                    break 'outer;
                }
                Err(e) => return Err(PipelineError::NoClosedForm(e.to_string())),
            };
            match recover(&spec, y, &prev) {
                Step::Ok(r) => {
                    prev = r;
                    h = (trial - t) * 2.0;
                    t = trial;
                }
                Step::Retry if trial - t > min_step => h = 0.5 * (trial - t),
                Step::Retry => {
                    traj.labels_valid = false;
                    traj.events.push(Event {
                        time: trial,
                        kind: EventKind::Ambiguity,
                    });
                    break 'outer;
                }
                Step::Stop(kind) => {
                    traj.labels_valid = false;
                    traj.events.push(Event { time: trial, kind });
                    break 'outer;
                }
            }
        }
        traj.times.push(target);
        traj.states.push((prev.x1, prev.x2));
    }
    Ok(traj)
}

/// Direct integration of the x-system.
pub fn solve_oracle(req: &SolveRequest, tol: Tolerances) -> Result<Trajectory, PipelineError> {
    req.validate()?;
    let (_, xs) = req.systems()?;
    integrate_xsystem(&xs, req.x1_0, req.x2_0, &req.times(), tol)
}

/// Integrates any x-system from `t = 0` over `times`.
pub fn integrate_xsystem(
    xs: &XSystem,
    x1_0: C,
    x2_0: C,
    times: &[f64],
    tol: Tolerances,
) -> Result<Trajectory, PipelineError> {
    let problem = OdeProblem::new(xs.rhs(), 0.0, vec![x1_0, x2_0], tol);
    let sol = integrate(&problem, times)?;
    let events = sol
        .event
        .map(|e| Event {
            time: e.time,
            kind: match e.kind {
                OdeEventKind::StepUnderflow => EventKind::StepUnderflow,
                OdeEventKind::NonFiniteRhs => EventKind::NonFinite,
            },
        })
        .into_iter()
        .collect();
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.iter().map(|s| (s[0], s[1])).collect(),
        labels_valid: true,
        method: Method::Oracle,
        events,
    })
}

/// Algebraic solve, falling back to the oracle when no closed form applies.
pub fn solve(req: &SolveRequest, tol: Tolerances) -> Result<Trajectory, PipelineError> {
    match solve_algebraic(req) {
        Err(PipelineError::NoClosedForm(_)) => solve_oracle(req, tol),
        other => other,
    }
}

/// `|Δ| / max(1, |reference|)`.
pub fn relative_deviation(x: C, reference: C) -> f64 {
    (x - reference).norm() / reference.norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub max_deviation: f64,
    pub mean_deviation: f64,
    /// Grid points compared.
    pub compared: usize,
    /// Time windows left out around events.
    pub excluded: Vec<(f64, f64)>,
    pub algebraic_events: Vec<Event>,
    pub oracle_events: Vec<Event>,
    pub within_tolerance: bool,
}

impl VerifyReport {
    pub fn has_events(&self) -> bool {
        !self.algebraic_events.is_empty() || !self.oracle_events.is_empty()
    }
}

/// Compares the algebraic and oracle trajectories on their common grid.
///
/// Deviations are relative per [`relative_deviation`], maximized over both
/// zeros. Points within [`EVENT_WINDOW`]·`t_max` of an event are excluded.
pub fn verify_against_oracle(
    req: &SolveRequest,
    oracle_tol: Tolerances,
    tol: f64,
) -> Result<VerifyReport, PipelineError> {
    let alg = solve_algebraic(req)?;
    let ora = solve_oracle(req, oracle_tol)?;
    let w = EVENT_WINDOW * req.t_max;
    let excluded: Vec<(f64, f64)> = alg
        .events
        .iter()
        .chain(&ora.events)
        .map(|e| ((e.time - w).max(0.0), req.t_max))
        .collect();
    let mut max_dev: f64 = 0.0;
    let mut sum = 0.0;
    let mut compared = 0;
    for (i, (&t, a)) in alg.times.iter().zip(&alg.states).enumerate() {
        let Some(o) = ora.states.get(i) else { break };
        if excluded.iter().any(|&(lo, hi)| t >= lo && t <= hi) {
            continue;
        }
        let d = relative_deviation(a.0, o.0).max(relative_deviation(a.1, o.1));
        max_dev = max_dev.max(d);
        sum += d;
        compared += 1;
    }
    Ok(VerifyReport {
        max_deviation: max_dev,
        mean_deviation: if compared > 0 {
            sum / compared as f64
        } else {
            0.0
        },
        compared,
        excluded,
        algebraic_events: alg.events,
        oracle_events: ora.events,
        within_tolerance: max_dev < tol,
    })
}

/// Integrates forward to `t`, then the time-reversed system back, and
/// returns the distance from the starting point.
pub fn time_reversal_error(
    xs: &XSystem,
    x1_0: C,
    x2_0: C,
    t: f64,
    tol: Tolerances,
) -> Result<f64, PipelineError> {
    let fwd = integrate_xsystem(xs, x1_0, x2_0, &[t], tol)?;
    let Some((_, (x1, x2))) = fwd.last() else {
        return Ok(f64::INFINITY);
    };
    if !fwd.events.is_empty() {
        return Ok(f64::INFINITY);
    }
    let reversed = XSystem::new(&xs.p1.neg(), &xs.p2.neg())?;
    let back = integrate_xsystem(&reversed, x1, x2, &[t], tol)?;
    let Some((_, (b1, b2))) = back.last() else {
        return Ok(f64::INFINITY);
    };
    Ok((b1 - x1_0).norm().max((b2 - x2_0).norm()))
}

/// Smallest multiple `q ≤ max_q` of a base period after which a sampled
/// orbit returns to its start.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub q: Option<u32>,
    /// Closure error at each multiple `1..=max_q` that was reached.
    pub errors: Vec<f64>,
}

/// `at_multiples[j]` is the state at `(j + 1)·T`.
pub fn closure_search(start: (C, C), at_multiples: &[(C, C)], tol: f64) -> ClosureReport {
    let errors: Vec<f64> = at_multiples
        .iter()
        .map(|s| (s.0 - start.0).norm().max((s.1 - start.1).norm()))
        .collect();
    let q = errors.iter().position(|&e| e < tol).map(|i| i as u32 + 1);
    ClosureReport { q, errors }
}

/// Runs `solve_algebraic` over `max_q` base periods and searches for closure.
pub fn algebraic_closure(
    req: &SolveRequest,
    period: f64,
    max_q: u32,
    tol: f64,
) -> Result<(ClosureReport, Trajectory), PipelineError> {
    let per = 64usize;
    let r = SolveRequest {
        t_max: period * max_q as f64,
        grid: per * max_q as usize + 1,
        ..req.clone()
    };
    let traj = solve_algebraic(&r)?;
    let at: Vec<(C, C)> = (1..=max_q as usize)
        .filter_map(|q| traj.states.get(q * per).copied())
        .collect();
    Ok((closure_search((req.x1_0, req.x2_0), &at, tol), traj))
}

/// Integrates an x-system over `max_q` base periods and searches for closure.
pub fn oracle_closure(
    xs: &XSystem,
    x1_0: C,
    x2_0: C,
    period: f64,
    max_q: u32,
    tol: f64,
    oracle_tol: Tolerances,
) -> Result<ClosureReport, PipelineError> {
    let times: Vec<f64> = (1..=max_q).map(|q| q as f64 * period).collect();
    let traj = integrate_xsystem(xs, x1_0, x2_0, &times, oracle_tol)?;
    Ok(closure_search((x1_0, x2_0), &traj.states, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn linear_limit_of_example_3() {
        // b = 0: ẋₙ = a xₙ
        let a = c(0.3, 0.8);
        let req = SolveRequest::example(3, a, c(0.0, 0.0), c(0.5, 0.2), c(-0.4, 0.6), 1.0, 11);
        let tr = solve_algebraic(&req).unwrap();
        assert_eq!(tr.len(), 11);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let e = (a * *t).exp();
            assert!((s.0 - c(0.5, 0.2) * e).norm() < 1e-10);
            assert!((s.1 - c(-0.4, 0.6) * e).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_velocity_of_example_1() {
        // b = 0: xₙ(t) = xₙ(0) + a t
        let a = c(0.5, -0.25);
        let req = SolveRequest::example(1, a, c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.5), 2.0, 5);
        let tr = solve_algebraic(&req).unwrap();
        let ora = solve_oracle(&req, Tolerances::default()).unwrap();
        for ((t, s), o) in tr.times.iter().zip(&tr.states).zip(&ora.states) {
            assert!((s.0 - (c(1.0, 0.0) + a * *t)).norm() < 1e-12);
            assert!((o.1 - (c(-1.0, 0.5) + a * *t)).norm() < 1e-9);
        }
    }

    #[test]
    fn initial_checks() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let same = SolveRequest::example(1, one, one, one, one, 1.0, 3);
        assert!(matches!(
            solve_algebraic(&same),
            Err(PipelineError::InitialCollision(_))
        ));
        let origin = SolveRequest::example(3, one, one, z, one, 1.0, 3);
        assert!(matches!(
            solve_algebraic(&origin),
            Err(PipelineError::InitialNearOrigin(_))
        ));
        let grid = SolveRequest {
            grid: 1,
            ..SolveRequest::example(1, one, one, one, z, 1.0, 3)
        };
        assert_eq!(solve_algebraic(&grid), Err(PipelineError::BadGrid(1)));
    }

    #[test]
    fn deterministic() {
        let req = SolveRequest::example(
            2,
            c(0.3, 0.1),
            c(0.2, -0.4),
            c(0.5, 0.5),
            c(-0.3, 0.1),
            1.0,
            21,
        );
        assert_eq!(
            solve_algebraic(&req).unwrap(),
            solve_algebraic(&req).unwrap()
        );
    }

    #[test]
    fn closure_search_picks_smallest_multiple() {
        let s = (c(1.0, 0.0), c(0.0, 1.0));
        let r = closure_search(s, &[(c(2.0, 0.0), s.1), s, s], 1e-9);
        assert_eq!(r.q, Some(2));
        assert!(closure_search(s, &[(c(2.0, 0.0), s.1)], 1e-9).q.is_none());
    }

    #[test]
    fn event_names_round_trip() {
        for k in [
            EventKind::Singularity,
            EventKind::Ambiguity,
            EventKind::StepUnderflow,
        ] {
            assert_eq!(EventKind::from_name(k.name()), Some(k));
        }
    }
}
