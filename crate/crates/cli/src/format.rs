//! Decimal serialization of complex numbers and trajectories.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which reads
//! back bit-identically.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use solvable_plane::pipeline::{Event, EventKind, Method, Trajectory};
use solvable_plane::variants::{to_vector_form, Vec2};

type C = Complex64;

pub const CSV_HEADER: &str = "t,re(x1),im(x1),re(x2),im(x2),method";
pub const VECTOR_CSV_HEADER: &str = "t,r1x,r1y,r2x,r2y,method";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `<re><sign><im>i`, no spaces.
pub fn fmt_complex(z: C) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im)
}

/// Reads `<re><sign><im>i`, a bare real, or a bare imaginary `<im>i`.
pub fn parse_complex(s: &str) -> Option<C> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| C::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse().ok()?;
            let im_text = &body[k..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                t => t.parse().ok()?,
            };
            Some(C::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => t.parse().ok()?,
            };
            Some(C::new(0.0, im))
        }
    }
}

fn method_name(m: Method) -> String {
    m.to_string()
}

fn parse_method(s: &str) -> Option<Method> {
    match s {
        "algebraic" => Some(Method::Algebraic),
        "oracle" => Some(Method::Oracle),
        _ => None,
    }
}

/// One CSV block: comment lines, header, rows.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut s = String::new();
    let m = method_name(t.method);
    writeln!(s, "# method: {m}").unwrap();
    writeln!(s, "# labels_valid: {}", t.labels_valid).unwrap();
    for e in &t.events {
        writeln!(s, "# event: t={} kind={}", fmt_f64(e.time), e.kind.name()).unwrap();
    }
    writeln!(s, "{CSV_HEADER}").unwrap();
    for (time, (x1, x2)) in t.times.iter().zip(&t.states) {
        writeln!(
            s,
            "{},{},{},{},{},{m}",
            fmt_f64(*time),
            fmt_f64(x1.re),
            fmt_f64(x1.im),
            fmt_f64(x2.re),
            fmt_f64(x2.im)
        )
        .unwrap();
    }
    s
}

/// Blocks separated by one blank line.
pub fn trajectories_csv(ts: &[Trajectory]) -> String {
    ts.iter().map(trajectory_csv).collect::<Vec<_>>().join("\n")
}

/// Inverse of [`trajectories_csv`].
pub fn read_trajectories_csv(text: &str) -> Result<Vec<Trajectory>, String> {
    let mut out = Vec::new();
    for block in text.split("\n\n").filter(|b| !b.trim().is_empty()) {
        let mut t = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            labels_valid: true,
            method: Method::Algebraic,
            events: Vec::new(),
        };
        for line in block.lines() {
            if let Some(c) = line.strip_prefix("# ") {
                if let Some(m) = c.strip_prefix("method: ") {
                    t.method = parse_method(m).ok_or(format!("unknown method {m}"))?;
                } else if let Some(v) = c.strip_prefix("labels_valid: ") {
                    t.labels_valid = v == "true";
                } else if let Some(e) = c.strip_prefix("event: ") {
                    t.events
                        .push(parse_event(e).ok_or(format!("bad event line: {line}"))?);
                }
                continue;
            }
            if line == CSV_HEADER || line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(format!("expected 6 columns: {line}"));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|e| format!("{e}: {}", f[k]));
            t.times.push(num(0)?);
            t.states
                .push((C::new(num(1)?, num(2)?), C::new(num(3)?, num(4)?)));
        }
        out.push(t);
    }
    Ok(out)
}

fn parse_event(s: &str) -> Option<Event> {
    let mut time = None;
    let mut kind = None;
    for part in s.split_whitespace() {
        if let Some(v) = part.strip_prefix("t=") {
            time = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("kind=") {
            kind = EventKind::from_name(v);
        }
    }
    Some(Event {
        time: time?,
        kind: kind?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonEvent {
    pub t: f64,
    pub kind: String,
}

/// The JSON trajectory schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTrajectory {
    pub times: Vec<f64>,
    pub x1: Vec<[f64; 2]>,
    pub x2: Vec<[f64; 2]>,
    pub events: Vec<JsonEvent>,
    pub method: String,
    pub labels_valid: bool,
}

impl From<&Trajectory> for JsonTrajectory {
    fn from(t: &Trajectory) -> Self {
        JsonTrajectory {
            times: t.times.clone(),
            x1: t.states.iter().map(|s| [s.0.re, s.0.im]).collect(),
            x2: t.states.iter().map(|s| [s.1.re, s.1.im]).collect(),
            events: t
                .events
                .iter()
                .map(|e| JsonEvent {
                    t: e.time,
                    kind: e.kind.name().to_string(),
                })
                .collect(),
            method: method_name(t.method),
            labels_valid: t.labels_valid,
        }
    }
}

impl TryFrom<JsonTrajectory> for Trajectory {
    type Error = String;

    fn try_from(j: JsonTrajectory) -> Result<Self, String> {
        if j.x1.len() != j.times.len() || j.x2.len() != j.times.len() {
            return Err("times, x1 and x2 differ in length".into());
        }
        Ok(Trajectory {
            states: j
                .x1
                .iter()
                .zip(&j.x2)
                .map(|(a, b)| (C::new(a[0], a[1]), C::new(b[0], b[1])))
                .collect(),
            times: j.times,
            labels_valid: j.labels_valid,
            method: parse_method(&j.method).ok_or(format!("unknown method {}", j.method))?,
            events: j
                .events
                .iter()
                .map(|e| {
                    EventKind::from_name(&e.kind)
                        .map(|kind| Event { time: e.t, kind })
                        .ok_or(format!("unknown event kind {}", e.kind))
                })
                .collect::<Result<_, _>>()?,
        })
    }
}

/// A single trajectory as an object, several as an array.
pub fn trajectories_json(ts: &[Trajectory]) -> String {
    let js: Vec<JsonTrajectory> = ts.iter().map(JsonTrajectory::from).collect();
    let mut s = if js.len() == 1 {
        serde_json::to_string_pretty(&js[0])
    } else {
        serde_json::to_string_pretty(&js)
    }
    .expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_trajectories_json(text: &str) -> Result<Vec<Trajectory>, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let js: Vec<JsonTrajectory> = if v.is_array() {
        serde_json::from_value(v).map_err(|e| e.to_string())?
    } else {
        vec![serde_json::from_value(v).map_err(|e| e.to_string())?]
    };
    js.into_iter().map(Trajectory::try_from).collect()
}

/// Real-vector rows of a trajectory.
pub fn vector_csv(t: &Trajectory, a: C, b: C) -> String {
    let mut s = String::new();
    let v0 = to_vector_form(C::new(0.0, 0.0), C::new(0.0, 0.0), a, b);
    let m = method_name(t.method);
    writeln!(s, "# method: {m}").unwrap();
    writeln!(
        s,
        "# a_vec: {},{}",
        fmt_f64(v0.a_vec[0]),
        fmt_f64(v0.a_vec[1])
    )
    .unwrap();
    writeln!(
        s,
        "# b_vec: {},{}",
        fmt_f64(v0.b_vec[0]),
        fmt_f64(v0.b_vec[1])
    )
    .unwrap();
    for e in &t.events {
        writeln!(s, "# event: t={} kind={}", fmt_f64(e.time), e.kind.name()).unwrap();
    }
    writeln!(s, "{VECTOR_CSV_HEADER}").unwrap();
    for (time, (x1, x2)) in t.times.iter().zip(&t.states) {
        let v = to_vector_form(*x1, *x2, a, b);
        writeln!(
            s,
            "{},{},{},{},{},{m}",
            fmt_f64(*time),
            fmt_f64(v.r1[0]),
            fmt_f64(v.r1[1]),
            fmt_f64(v.r2[0]),
            fmt_f64(v.r2[1])
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsonVectorTrajectory {
    pub times: Vec<f64>,
    pub r1: Vec<Vec2>,
    pub r2: Vec<Vec2>,
    pub a_vec: Vec2,
    pub b_vec: Vec2,
    pub events: Vec<JsonEvent>,
    pub method: String,
}

pub fn vector_json(t: &Trajectory, a: C, b: C) -> String {
    let vs: Vec<_> = t
        .states
        .iter()
        .map(|s| to_vector_form(s.0, s.1, a, b))
        .collect();
    let v0 = to_vector_form(C::new(0.0, 0.0), C::new(0.0, 0.0), a, b);
    let j = JsonVectorTrajectory {
        times: t.times.clone(),
        r1: vs.iter().map(|v| v.r1).collect(),
        r2: vs.iter().map(|v| v.r2).collect(),
        a_vec: v0.a_vec,
        b_vec: v0.b_vec,
        events: JsonTrajectory::from(t).events,
        method: method_name(t.method),
    };
    let mut s = serde_json::to_string_pretty(&j).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        for z in [
            C::new(1.0, 0.0),
            C::new(-1.5e-300, 2.0),
            C::new(0.1, -0.2),
            C::new(-0.0, -0.0),
            C::new(std::f64::consts::PI, -1e300),
        ] {
            let s = fmt_complex(z);
            assert!(!s.contains(' '));
            let back = parse_complex(&s).unwrap();
            assert_eq!(back.re.to_bits(), z.re.to_bits(), "{s}");
            assert_eq!(back.im.to_bits(), z.im.to_bits(), "{s}");
        }
        assert_eq!(parse_complex("0+0i"), Some(C::new(0.0, 0.0)));
        assert_eq!(parse_complex("-1+0i"), Some(C::new(-1.0, 0.0)));
        assert_eq!(parse_complex("2.5"), Some(C::new(2.5, 0.0)));
        assert_eq!(parse_complex("i"), Some(C::new(0.0, 1.0)));
        assert_eq!(parse_complex("-3e-2i"), Some(C::new(0.0, -0.03)));
        assert_eq!(parse_complex("1e-3-2E+1i"), Some(C::new(1e-3, -20.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+xi"), None);
    }
}
