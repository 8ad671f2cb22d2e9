//! Reference numerics: an adaptive Dormand–Prince 5(4) integrator for complex
//! ODE systems and a centered finite-difference checker.
//!
//! Nothing here depends on the closed-form modules; every closed-form claim
//! in the crate is tested against these routines.

use num_complex::Complex64;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol }
    }

    pub fn uniform(tol: f64) -> Self {
        Tolerances::new(tol, tol)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::uniform(1e-10)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("tolerances must be positive (rtol={rtol}, atol={atol})")]
    InvalidTolerance { rtol: f64, atol: f64 },
    #[error("state dimension must be at least 1")]
    EmptyState,
    #[error("sample times must move monotonically away from t0")]
    NonMonotoneSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeEventKind {
    /// The controller asked for a step below the representable resolution.
    StepUnderflow,
    /// The right-hand side returned NaN or an infinity.
    NonFiniteRhs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeEvent {
    pub time: f64,
    pub kind: OdeEventKind,
}

/// A first-order system `y' = f(t, y)` over complex states.
pub struct OdeProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub y0: Vec<C>,
    pub tol: Tolerances,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[C], &mut [C]),
{
    pub fn new(rhs: F, t0: f64, y0: Vec<C>, tol: Tolerances) -> Self {
        OdeProblem { rhs, t0, y0, tol }
    }
}

/// Samples of an integration run. `states[i]` belongs to `times[i]`; when an
/// event stops the run, only the samples reached before it are present.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C>>,
    pub event: Option<OdeEvent>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl OdeSolution {
    pub fn is_complete(&self) -> bool {
        self.event.is_none()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error coefficients: fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;
const MAX_STEPS: usize = 2_000_000;

fn is_finite(v: &[C]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn err_norm(err: &[C], y: &[C], ynew: &[C], tol: Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sr = tol.atol + tol.rtol * y[i].re.abs().max(ynew[i].re.abs());
        let si = tol.atol + tol.rtol * y[i].im.abs().max(ynew[i].im.abs());
        acc += (err[i].re / sr).powi(2) + (err[i].im / si).powi(2);
    }
    (acc / (2 * err.len()) as f64).sqrt()
}

fn initial_step<F>(f: &F, t0: f64, y0: &[C], f0: &[C], dir: f64, tol: Tolerances) -> f64
where
    F: Fn(f64, &[C], &mut [C]),
{
    let n = y0.len();
    let zeros = vec![C::new(0.0, 0.0); n];
    let d0 = err_norm(y0, &zeros, y0, tol);
    let d1 = err_norm(f0, &zeros, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<C> = (0..n).map(|i| y0[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![C::new(0.0, 0.0); n];
    f(t0 + dir * h0, &y1, &mut f1);
    let df: Vec<C> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = err_norm(&df, &zeros, y0, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `problem` and reports the state at every sample time.
///
/// Sample times must be ordered monotonically away from `t0` (backward
/// integration is allowed). The run stops with an event on step underflow or
/// a non-finite right-hand side.
pub fn integrate<F>(
    problem: &OdeProblem<F>,
    sample_times: &[f64],
) -> Result<OdeSolution, OracleError>
where
    F: Fn(f64, &[C], &mut [C]),
{
    let tol = problem.tol;
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(OracleError::InvalidTolerance {
            rtol: tol.rtol,
            atol: tol.atol,
        });
    }
    let n = problem.y0.len();
    if n == 0 {
        return Err(OracleError::EmptyState);
    }
    let t0 = problem.t0;
    let t_end = sample_times.last().copied().unwrap_or(t0);
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut last = t0;
    for &s in sample_times {
        if dir * (s - last) < 0.0 {
            return Err(OracleError::NonMonotoneSamples);
        }
        last = s;
    }

    let f = &problem.rhs;
    let mut sol = OdeSolution {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        event: None,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next_sample = 0;
    let mut t = t0;
    let mut y = problem.y0.clone();
    while next_sample < sample_times.len() && sample_times[next_sample] == t0 {
        sol.times.push(t0);
        sol.states.push(y.clone());
        next_sample += 1;
    }
    if next_sample == sample_times.len() {
        return Ok(sol);
    }

    let zero = C::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    f(t, &y, &mut k1);
    if !is_finite(&k1) {
        sol.event = Some(OdeEvent {
            time: t,
            kind: OdeEventKind::NonFiniteRhs,
        });
        return Ok(sol);
    }
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut err = vec![zero; n];

    let span = (t_end - t0).abs();
    let mut h = initial_step(f, t, &y, &k1, dir, tol).min(span);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..MAX_STEPS {
        let remaining = (t_end - t).abs();
        if h > remaining {
            h = remaining;
        }
        let min_step = 16.0 * f64::EPSILON * t.abs().max(span).max(1.0);
        if h < min_step {
            sol.event = Some(OdeEvent {
                time: t,
                kind: OdeEventKind::StepUnderflow,
            });
            return Ok(sol);
        }
        let hs = dir * h;
        for i in 0..n {
            tmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] =
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + hs, &tmp, &mut k6);
        for i in 0..n {
            ynew[i] =
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + hs, &ynew, &mut k7);

        let finite = is_finite(&ynew) && is_finite(&k7);
        let e = if finite {
            for i in 0..n {
                err[i] = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            err_norm(&err, &y, &ynew, tol)
        } else {
            f64::INFINITY
        };

        if e <= 1.0 {
            let t_new = if h == remaining { t_end } else { t + hs };
            // dense output for the samples inside (t, t_new]
            while next_sample < sample_times.len()
                && dir * (sample_times[next_sample] - t_new) <= 0.0
            {
                let ts = sample_times[next_sample];
                if ts == t_new {
                    sol.states.push(ynew.clone());
                } else {
                    let theta = (ts - t) / hs;
                    let th1 = 1.0 - theta;
                    let state = (0..n)
                        .map(|i| {
                            let r1 = y[i];
                            let r2 = ynew[i] - y[i];
                            let r3 = hs * k1[i] - r2;
                            let r4 = r2 - hs * k7[i] - r3;
                            let r5 = hs
                                * (D1 * k1[i]
                                    + D3 * k3[i]
                                    + D4 * k4[i]
                                    + D5 * k5[i]
                                    + D6 * k6[i]
                                    + D7 * k7[i]);
                            r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))
                        })
                        .collect();
                    sol.states.push(state);
                }
                sol.times.push(ts);
                next_sample += 1;
            }
            sol.accepted_steps += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            if next_sample == sample_times.len() {
                return Ok(sol);
            }
            let e_safe = e.max(1e-10);
            let mut fac = SAFETY * e_safe.powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(MIN_SHRINK, MAX_GROWTH);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h *= fac;
            err_prev = e_safe;
            rejected_last = false;
        } else {
            sol.rejected_steps += 1;
            if !finite && h <= min_step * 2.0 {
                sol.event = Some(OdeEvent {
                    time: t,
                    kind: OdeEventKind::NonFiniteRhs,
                });
                return Ok(sol);
            }
            let fac = if e.is_finite() {
                (SAFETY * e.powf(-1.0 / 5.0)).max(MIN_SHRINK)
            } else {
                MIN_SHRINK
            };
            h *= fac;
            rejected_last = true;
        }
    }
    sol.event = Some(OdeEvent {
        time: t,
        kind: OdeEventKind::StepUnderflow,
    });
    Ok(sol)
}

/// Result of comparing a claimed derivative with centered differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// Max residual with step `h`.
    pub residual: f64,
    /// Max residual with step `h/2`.
    pub residual_half: f64,
    /// `residual / residual_half`; about 4 for a second-order match.
    pub ratio: f64,
    /// `log2(ratio)`.
    pub observed_order: f64,
}

fn max_fd_residual<F, D>(f: &F, df: &D, grid: &[f64], h: f64) -> f64
where
    F: Fn(f64) -> C,
    D: Fn(f64) -> C,
{
    grid.iter()
        .map(|&t| ((f(t + h) - f(t - h)) / (2.0 * h) - df(t)).norm())
        .fold(0.0, f64::max)
}

/// Centered-difference check of `claimed` against `f` on `grid`, at steps
/// `h` and `h/2`.
pub fn finite_difference_check<F, D>(f: F, claimed: D, grid: &[f64], h: f64) -> FdReport
where
    F: Fn(f64) -> C,
    D: Fn(f64) -> C,
{
    let residual = max_fd_residual(&f, &claimed, grid, h);
    let residual_half = max_fd_residual(&f, &claimed, grid, h / 2.0);
    let ratio = residual / residual_half;
    FdReport {
        residual,
        residual_half,
        ratio,
        observed_order: ratio.log2(),
    }
}
