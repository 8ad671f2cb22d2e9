//! The six subcommands.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use solvable_plane::correspondence::Config;
use solvable_plane::generator::{
    builtin_spec, builtin_symbolic, check_condition, synthesize_xsystem,
};
use solvable_plane::pipeline::{
    integrate_xsystem, oracle_closure, solve, solve_oracle, verify_against_oracle, Event, Method,
    PipelineError, SolveRequest, SystemChoice, Trajectory, VerifyReport,
};
use solvable_plane::variants::{affine_transform_system, isochronize, solve_affine, VariantError};

use crate::config::{Format, MethodChoice, RunConfig, SystemSource};
use crate::format::{
    fmt_complex, fmt_f64, trajectories_csv, trajectories_json, vector_csv, vector_json, JsonEvent,
};
use crate::CliError;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
/// Minimum separation of random initial zeros, and their distance from the
/// origin for double-zero configurations.
const SEED_SEPARATION: f64 = 0.1;

pub fn execute(
    command: &str,
    rc: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        "solve" => run_solve(rc, out, err),
        "verify" => run_verify(rc, out, err),
        "generate" => run_generate(rc, out),
        "check-condition" => run_check_condition(rc, out),
        "isochrony" => run_isochrony(rc, out, err),
        "vectorize" => run_vectorize(rc, out, err),
        other => Err(CliError::config(
            "command",
            format!("unknown command `{other}`"),
        )),
    }
}

/// Writes to `--out -` (stdout) or a file, reporting the path on `err`.
fn emit(path: &Path, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        return out.write_all(text.as_bytes()).map_err(CliError::runtime);
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    let _ = writeln!(err, "wrote {}", path.display());
    Ok(())
}

fn system_choice(rc: &RunConfig) -> Result<SystemChoice, CliError> {
    Ok(match rc.require_system()? {
        SystemSource::Example(n) => SystemChoice::Example(*n),
        SystemSource::Custom(spec) => SystemChoice::Custom(spec.clone()),
    })
}

/// `a` and `b` are required for built-in examples and ignored otherwise.
fn parameters(rc: &RunConfig) -> Result<(C, C), CliError> {
    match rc.require_system()? {
        SystemSource::Example(_) => Ok((rc.require_complex("a")?, rc.require_complex("b")?)),
        SystemSource::Custom(_) => Ok((rc.a.unwrap_or(ZERO), rc.b.unwrap_or(ZERO))),
    }
}

fn request(rc: &RunConfig, x1: C, x2: C) -> Result<SolveRequest, CliError> {
    let (a, b) = parameters(rc)?;
    Ok(SolveRequest {
        system: system_choice(rc)?,
        a,
        b,
        x1_0: x1,
        x2_0: x2,
        t_max: rc.t_max,
        grid: rc.grid,
    })
}

fn algebraic(
    req: &SolveRequest,
    rc: &RunConfig,
    err: &mut dyn Write,
) -> Result<Trajectory, CliError> {
    let t = match &rc.affine {
        Some(m) => match solve_affine(req, m, req.x1_0, req.x2_0) {
            Err(VariantError::Pipeline(PipelineError::NoClosedForm(_))) => oracle(req, rc)?,
            r => r.map_err(variant_error)?,
        },
        None => solve(req, rc.oracle_tol)?,
    };
    if t.method == Method::Oracle {
        let _ = writeln!(
            err,
            "warning: no closed form for this system; using the oracle"
        );
    }
    Ok(t)
}

fn oracle(req: &SolveRequest, rc: &RunConfig) -> Result<Trajectory, CliError> {
    match &rc.affine {
        Some(m) => {
            let (_, xs) = req.systems()?;
            let xi = affine_transform_system(&xs, m).map_err(variant_error)?;
            Ok(integrate_xsystem(
                &xi,
                req.x1_0,
                req.x2_0,
                &req.times(),
                rc.oracle_tol,
            )?)
        }
        None => Ok(solve_oracle(req, rc.oracle_tol)?),
    }
}

fn variant_error(e: VariantError) -> CliError {
    match e {
        VariantError::Pipeline(p) => p.into(),
        VariantError::SingularMap(_) => CliError::config("affine", e.to_string()),
        VariantError::UnitDegree | VariantError::NotHomogeneous(_) => {
            CliError::config("p", e.to_string())
        }
        other => CliError::runtime(other),
    }
}

fn trajectories(rc: &RunConfig, err: &mut dyn Write) -> Result<Vec<Trajectory>, CliError> {
    let req = request(rc, rc.require_complex("x1")?, rc.require_complex("x2")?)?;
    Ok(match rc.method {
        MethodChoice::Algebraic => vec![algebraic(&req, rc, err)?],
        MethodChoice::Oracle => vec![oracle(&req, rc)?],
        MethodChoice::Both => vec![algebraic(&req, rc, err)?, oracle(&req, rc)?],
    })
}

fn run_solve(rc: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let ts = trajectories(rc, err)?;
    let text = match rc.format {
        Format::Csv => trajectories_csv(&ts),
        Format::Json => trajectories_json(&ts),
    };
    emit(&rc.output_path("solve", "csv"), &text, out, err)
}

fn run_vectorize(rc: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let n = match rc.require_system()? {
        SystemSource::Example(n) => *n,
        SystemSource::Custom(_) => {
            return Err(CliError::config(
                "example",
                "vector form is defined for examples 1 to 4",
            ))
        }
    };
    if rc.affine.is_some() {
        return Err(CliError::config("affine", "not supported by vectorize"));
    }
    let (a, b) = parameters(rc)?;
    // the vector form of examples 3 and 4 is written with b³ and b²
    let b_vec = match n {
        3 => b.cbrt(),
        4 => b.sqrt(),
        _ => b,
    };
    let ts = trajectories(rc, err)?;
    let text = match rc.format {
        Format::Csv => ts
            .iter()
            .map(|t| vector_csv(t, a, b_vec))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => ts
            .iter()
            .map(|t| vector_json(t, a, b_vec))
            .collect::<Vec<_>>()
            .join(""),
    };
    emit(&rc.output_path("vectorize", "csv"), &text, out, err)
}

fn run_generate(rc: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match rc.require_system()? {
        SystemSource::Example(n) => {
            let [p1, p2] = builtin_symbolic(*n).map_err(CliError::runtime)?;
            format!("x1' = {p1}\nx2' = {p2}")
        }
        SystemSource::Custom(spec) => synthesize_xsystem(spec)
            .map_err(CliError::runtime)?
            .to_string(),
    };
    writeln!(out, "{text}").map_err(CliError::runtime)
}

fn run_check_condition(rc: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = match rc.require_system()? {
        SystemSource::Example(n) => {
            let (a, b) = parameters(rc)?;
            builtin_spec(*n, a, b).map_err(CliError::runtime)?
        }
        SystemSource::Custom(spec) => spec.clone(),
    };
    let report = check_condition(&spec).map_err(CliError::runtime)?;
    writeln!(out, "{report}").map_err(CliError::runtime)
}

/// `n` random initial states with distinct zeros, drawn reproducibly.
fn random_states(rc: &RunConfig, n: usize) -> Result<Vec<(C, C)>, CliError> {
    let config = match rc.require_system()? {
        SystemSource::Example(1) => Config::Generic2,
        SystemSource::Example(_) => Config::DoubleZero3,
        SystemSource::Custom(spec) => spec.config,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rc.seed);
    let mut disc = move || loop {
        let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    };
    Ok((0..n)
        .map(|_| loop {
            let (x1, x2) = (disc(), disc());
            let apart = (x1 - x2).norm() >= SEED_SEPARATION;
            let off_origin = config == Config::Generic2 || x1.norm() >= SEED_SEPARATION;
            if apart && off_origin {
                return (x1, x2);
            }
        })
        .collect())
}

fn starts(rc: &RunConfig) -> Result<Vec<(C, C)>, CliError> {
    if rc.seeds > 0 {
        random_states(rc, rc.seeds)
    } else {
        Ok(vec![(rc.require_complex("x1")?, rc.require_complex("x2")?)])
    }
}

fn json_events(events: &[Event]) -> Vec<JsonEvent> {
    events
        .iter()
        .map(|e| JsonEvent {
            t: e.time,
            kind: e.kind.name().to_string(),
        })
        .collect()
}

#[derive(Serialize)]
struct VerifyCase {
    x1: String,
    x2: String,
    max_deviation: f64,
    mean_deviation: f64,
    compared: usize,
    excluded: Vec<[f64; 2]>,
    algebraic_events: Vec<JsonEvent>,
    oracle_events: Vec<JsonEvent>,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct VerifySummary {
    tolerance: f64,
    max_deviation: f64,
    mean_deviation: f64,
    within_tolerance: bool,
    cases: Vec<VerifyCase>,
}

impl VerifyCase {
    fn new(start: (C, C), r: &VerifyReport) -> VerifyCase {
        VerifyCase {
            x1: fmt_complex(start.0),
            x2: fmt_complex(start.1),
            max_deviation: r.max_deviation,
            mean_deviation: r.mean_deviation,
            compared: r.compared,
            excluded: r.excluded.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            algebraic_events: json_events(&r.algebraic_events),
            oracle_events: json_events(&r.oracle_events),
            within_tolerance: r.within_tolerance,
        }
    }
}

fn events_text(events: &[JsonEvent]) -> String {
    if events.is_empty() {
        return "none".into();
    }
    events
        .iter()
        .map(|e| format!("{}@{}", e.kind, fmt_f64(e.t)))
        .collect::<Vec<_>>()
        .join(";")
}

fn verify_text(s: &VerifySummary) -> String {
    let mut t = String::new();
    writeln!(t, "tolerance: {}", fmt_f64(s.tolerance)).unwrap();
    writeln!(t, "max_deviation: {}", fmt_f64(s.max_deviation)).unwrap();
    writeln!(t, "mean_deviation: {}", fmt_f64(s.mean_deviation)).unwrap();
    writeln!(t, "within_tolerance: {}", s.within_tolerance).unwrap();
    for (k, c) in s.cases.iter().enumerate() {
        let windows = if c.excluded.is_empty() {
            "none".to_string()
        } else {
            c.excluded
                .iter()
                .map(|w| format!("[{},{}]", fmt_f64(w[0]), fmt_f64(w[1])))
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(
            t,
            "case {k}: x1={} x2={} max={} mean={} compared={} excluded={windows} \
             algebraic_events={} oracle_events={} within_tolerance={}",
            c.x1,
            c.x2,
            fmt_f64(c.max_deviation),
            fmt_f64(c.mean_deviation),
            c.compared,
            events_text(&c.algebraic_events),
            events_text(&c.oracle_events),
            c.within_tolerance
        )
        .unwrap();
    }
    t
}

fn run_verify(rc: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if rc.affine.is_some() {
        return Err(CliError::config("affine", "not supported by verify"));
    }
    let starts = starts(rc)?;
    let requests = starts
        .iter()
        .map(|&(x1, x2)| request(rc, x1, x2))
        .collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<VerifyReport> = requests
        .par_iter()
        .map(|req| verify_against_oracle(req, rc.oracle_tol, rc.tol))
        .collect::<Result<_, _>>()?;
    let compared: usize = reports.iter().map(|r| r.compared).sum();
    let summary = VerifySummary {
        tolerance: rc.tol,
        max_deviation: reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max),
        mean_deviation: if compared > 0 {
            reports
                .iter()
                .map(|r| r.mean_deviation * r.compared as f64)
                .sum::<f64>()
                / compared as f64
        } else {
            0.0
        },
        within_tolerance: reports.iter().all(|r| r.within_tolerance),
        cases: starts
            .iter()
            .zip(&reports)
            .map(|(&s, r)| VerifyCase::new(s, r))
            .collect(),
    };
    let text = match rc.format {
        Format::Csv => verify_text(&summary),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary).map_err(CliError::runtime)?;
            s.push('\n');
            s
        }
    };
    emit(&rc.output_path("verify", "txt"), &text, out, err)?;
    if summary.within_tolerance {
        Ok(())
    } else {
        Err(CliError::OverTolerance(format!(
            "max deviation {:e} exceeds tolerance {:e}",
            summary.max_deviation, rc.tol
        )))
    }
}

#[derive(Serialize)]
struct ClosureOrbit {
    x1: String,
    x2: String,
    q: Option<u32>,
    errors: Vec<f64>,
}

#[derive(Serialize)]
struct IsochronyReport {
    alpha: String,
    p: String,
    period: f64,
    tolerance: f64,
    max_q: u32,
    orbits: Vec<ClosureOrbit>,
}

fn isochrony_text(r: &IsochronyReport) -> String {
    let mut t = String::new();
    writeln!(t, "alpha: {}", r.alpha).unwrap();
    writeln!(t, "p: {}", r.p).unwrap();
    writeln!(t, "period: {}", fmt_f64(r.period)).unwrap();
    writeln!(t, "tolerance: {}", fmt_f64(r.tolerance)).unwrap();
    writeln!(t, "max_q: {}", r.max_q).unwrap();
    for (k, o) in r.orbits.iter().enumerate() {
        let q = o.q.map_or("none".to_string(), |q| q.to_string());
        let errors: Vec<String> = o.errors.iter().map(|&e| fmt_f64(e)).collect();
        writeln!(
            t,
            "orbit {k}: x1={} x2={} closes_at_q={q} errors={}",
            o.x1,
            o.x2,
            errors.join(";")
        )
        .unwrap();
    }
    t
}

fn run_isochrony(rc: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let setup = rc.isochrony_setup()?;
    let period = setup.period().ok_or_else(|| {
        CliError::config("alpha", "must be purely imaginary and nonzero for a period")
    })?;
    if rc.affine.is_some() {
        return Err(CliError::config("affine", "not supported by isochrony"));
    }
    let starts = starts(rc)?;
    let (_, xs) = request(rc, ZERO, ZERO)?.systems()?;
    let w = isochronize(&xs, &setup).map_err(variant_error)?;
    let orbits: Vec<ClosureOrbit> = starts
        .par_iter()
        .map(|&(x1, x2)| {
            oracle_closure(&w, x1, x2, period, rc.max_q, rc.tol, rc.oracle_tol).map(|r| {
                ClosureOrbit {
                    x1: fmt_complex(x1),
                    x2: fmt_complex(x2),
                    q: r.q,
                    errors: r.errors,
                }
            })
        })
        .collect::<Result<_, _>>()?;
    let report = IsochronyReport {
        alpha: fmt_complex(setup.alpha),
        p: setup.p.to_string(),
        period,
        tolerance: rc.tol,
        max_q: rc.max_q,
        orbits,
    };
    let text = match rc.format {
        Format::Csv => isochrony_text(&report),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(CliError::runtime)?;
            s.push('\n');
            s
        }
    };
    emit(&rc.output_path("isochrony", "txt"), &text, out, err)
}
