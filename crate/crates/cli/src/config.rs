//! Flags, the optional TOML config file, and their validated merge.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use solvable_plane::complexpoly::{parse_poly, MultiPoly};
use solvable_plane::correspondence::{Config, Pair};
use solvable_plane::generator::YSystemSpec;
use solvable_plane::oracle::Tolerances;
use solvable_plane::variants::{AffineMap, IsochronySetup};

use crate::format::parse_complex;
use crate::CliError;

type C = Complex64;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SOLVABLE_PLANE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Algebraic,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every subcommand. Each may come from a flag or from
/// the config file; the file wins on conflict.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of these settings (snake_case keys).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Subcommand named in a config file; must match the one invoked.
    #[arg(skip)]
    pub command: Option<String>,
    /// Built-in example 1 to 4.
    #[arg(long)]
    pub example: Option<u8>,
    /// Polynomial configuration of a custom spec: generic2 or double-zero3.
    #[arg(long)]
    pub polynomial: Option<String>,
    /// Coefficient pair of a custom spec: y12, y13 or y23.
    #[arg(long)]
    pub pair: Option<String>,
    /// Right-hand side of the first coefficient in the pair.
    #[arg(long, allow_hyphen_values = true)]
    pub f_first: Option<String>,
    /// Right-hand side of the second coefficient in the pair.
    #[arg(long, allow_hyphen_values = true)]
    pub f_second: Option<String>,
    /// Parameter values for a custom spec, as NAME=VALUE.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub params: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: Option<String>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of output times, including t = 0.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Oracle relative tolerance.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Oracle absolute tolerance.
    #[arg(long)]
    pub atol: Option<f64>,
    /// Acceptance tolerance for `verify` and closure.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of random initial states (`verify`, `isochrony`).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// RNG seed for `--seeds`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Affine map as six complex numbers u10,u20,u11,u12,u21,u22.
    #[arg(long, allow_hyphen_values = true)]
    pub affine: Option<String>,
    /// Isochrony rate α.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Homogeneity degree p, an integer or a fraction.
    #[arg(long)]
    pub p: Option<String>,
    /// Largest period multiple searched for closure.
    #[arg(long)]
    pub max_q: Option<u32>,
}

macro_rules! merge_fields {
    ($flags:ident, $file:ident, $warnings:ident; $($field:ident),*) => {
        $(
            if $file.$field.is_some() {
                if $flags.$field.is_some() && $flags.$field != $file.$field {
                    $warnings.push(format!(
                        "config file sets `{}`, overriding the flag",
                        stringify!($field)
                    ));
                }
                $flags.$field = $file.$field.clone();
            }
        )*
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Settings, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        Settings::from_toml(&text)
    }

    /// Overlays `file` onto `self`, returning one warning per overridden flag.
    pub fn merge(mut self, file: &Settings) -> (Settings, Vec<String>) {
        let mut warnings = Vec::new();
        let flags = &mut self;
        merge_fields!(flags, file, warnings;
            command, example, polynomial, pair, f_first, f_second, a, b, x1, x2, t_max,
            grid, method, out, format, rtol, atol, tol, seeds, seed, affine, alpha, p, max_q);
        if !file.params.is_empty() {
            if !flags.params.is_empty() && flags.params != file.params {
                warnings.push("config file sets `params`, overriding the flag".into());
            }
            flags.params = file.params.clone();
        }
        (self, warnings)
    }
}

/// Which x-system a run is about.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Example(u8),
    Custom(YSystemSpec),
}

/// Settings after merging, parsing and defaulting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: Option<SystemSource>,
    pub a: Option<C>,
    pub b: Option<C>,
    pub x1: Option<C>,
    pub x2: Option<C>,
    pub t_max: f64,
    pub grid: usize,
    pub method: MethodChoice,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub oracle_tol: Tolerances,
    pub tol: f64,
    pub seeds: usize,
    pub seed: u64,
    pub affine: Option<AffineMap>,
    pub alpha: Option<C>,
    pub p: Option<num_rational::Ratio<i64>>,
    pub max_q: u32,
    pub warnings: Vec<String>,
}

fn complex_field(field: &'static str, v: &Option<String>) -> Result<Option<C>, CliError> {
    v.as_deref()
        .map(|s| {
            parse_complex(s).ok_or_else(|| {
                CliError::config(field, format!("`{s}` is not a complex number like 1.5-2i"))
            })
        })
        .transpose()
}

fn parse_pair(s: &str) -> Result<Pair, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "y12" => Ok(Pair::Y12),
        "y13" => Ok(Pair::Y13),
        "y23" => Ok(Pair::Y23),
        _ => Err(CliError::config(
            "pair",
            format!("`{s}` is not y12, y13 or y23"),
        )),
    }
}

fn parse_polynomial(s: &str) -> Result<Config, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "generic2" => Ok(Config::Generic2),
        "double-zero3" | "doublezero3" => Ok(Config::DoubleZero3),
        _ => Err(CliError::config(
            "polynomial",
            format!("`{s}` is not generic2 or double-zero3"),
        )),
    }
}

/// Parses one right-hand side, binding named parameters to their values.
fn parse_rhs(
    field: &'static str,
    text: &str,
    pair: Pair,
    params: &[(String, C)],
) -> Result<MultiPoly, CliError> {
    let (ya, yb) = pair.names();
    let mut vars: Vec<String> = vec![ya.into(), yb.into()];
    vars.extend(params.iter().map(|(n, _)| n.clone()));
    let full = parse_poly(text, &vars).map_err(|e| CliError::config(field, e.to_string()))?;
    let target = vec![ya.to_string(), yb.to_string()];
    let consts: Vec<(String, MultiPoly)> = params
        .iter()
        .map(|(n, v)| (n.clone(), MultiPoly::constant(&target, *v)))
        .collect();
    let bind: Vec<(&str, &MultiPoly)> = consts.iter().map(|(n, p)| (n.as_str(), p)).collect();
    full.substitute(&bind, &target)
        .map_err(|e| CliError::config(field, e.to_string()))
}

fn parse_params(items: &[String]) -> Result<Vec<(String, C)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::config("param", format!("`{item}` is not NAME=VALUE")))?;
            let name = name.trim();
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(CliError::config(
                    "param",
                    format!("`{name}` is not a valid name"),
                ));
            }
            let v = parse_complex(value).ok_or_else(|| {
                CliError::config("param", format!("`{value}` is not a complex number"))
            })?;
            Ok((name.to_string(), v))
        })
        .collect()
}

fn parse_ratio(s: &str) -> Result<num_rational::Ratio<i64>, CliError> {
    let bad = || CliError::config("p", format!("`{s}` is not an integer or fraction"));
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (i64, i64) = (
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            );
            if d == 0 {
                return Err(bad());
            }
            num_rational::Ratio::new(n, d)
        }
        None => num_rational::Ratio::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    Ok(r)
}

fn parse_affine(s: &str) -> Result<AffineMap, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 6 {
        return Err(CliError::config(
            "affine",
            "expected six complex numbers u10,u20,u11,u12,u21,u22",
        ));
    }
    let mut u = [C::new(0.0, 0.0); 6];
    for (k, p) in parts.iter().enumerate() {
        u[k] = parse_complex(p)
            .ok_or_else(|| CliError::config("affine", format!("`{p}` is not a complex number")))?;
    }
    AffineMap::new(u[0], u[1], u[2], u[3], u[4], u[5])
        .map_err(|e| CliError::config("affine", e.to_string()))
}

fn positive(field: &'static str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl RunConfig {
    /// Merges the config file (if any) into the flags and parses every field.
    pub fn resolve(flags: Settings, command: &str) -> Result<RunConfig, CliError> {
        let (s, warnings) = match &flags.config {
            Some(path) => {
                let file = Settings::load(path)?;
                flags.clone().merge(&file)
            }
            None => (flags, Vec::new()),
        };
        if let Some(c) = &s.command {
            if c != command {
                return Err(CliError::config(
                    "command",
                    format!("config file is for `{c}`, not `{command}`"),
                ));
            }
        }
        let params = parse_params(&s.params)?;
        let custom = s.polynomial.is_some()
            || s.pair.is_some()
            || s.f_first.is_some()
            || s.f_second.is_some();
        let system = match (s.example, custom) {
            (Some(_), true) => {
                return Err(CliError::config(
                    "example",
                    "give either --example or a custom spec, not both",
                ))
            }
            (Some(n), false) if (1..=4).contains(&n) => Some(SystemSource::Example(n)),
            (Some(n), false) => {
                return Err(CliError::config(
                    "example",
                    format!("must be 1 to 4, got {n}"),
                ))
            }
            (None, true) => {
                let need = |field: &'static str, v: &Option<String>| {
                    v.clone()
                        .ok_or_else(|| CliError::config(field, "required for a custom spec"))
                };
                let config = parse_polynomial(&need("polynomial", &s.polynomial)?)?;
                let pair = parse_pair(&need("pair", &s.pair)?)?;
                let f1 = parse_rhs("f_first", &need("f_first", &s.f_first)?, pair, &params)?;
                let f2 = parse_rhs("f_second", &need("f_second", &s.f_second)?, pair, &params)?;
                let spec = YSystemSpec::new(config, pair, f1, f2)
                    .map_err(|e| CliError::config("pair", e.to_string()))?;
                let named: Vec<(&str, C)> = params.iter().map(|(n, v)| (n.as_str(), *v)).collect();
                Some(SystemSource::Custom(spec.with_params(&named)))
            }
            (None, false) => None,
        };
        let rtol = positive("rtol", s.rtol.unwrap_or(1e-10))?;
        let atol = positive("atol", s.atol.unwrap_or(1e-10))?;
        let t_max = positive("t_max", s.t_max.unwrap_or(1.0))?;
        let grid = s.grid.unwrap_or(101);
        if grid < 2 {
            return Err(CliError::config(
                "grid",
                format!("needs at least 2 points, got {grid}"),
            ));
        }
        Ok(RunConfig {
            system,
            a: complex_field("a", &s.a)?,
            b: complex_field("b", &s.b)?,
            x1: complex_field("x1", &s.x1)?,
            x2: complex_field("x2", &s.x2)?,
            t_max,
            grid,
            method: s.method.unwrap_or(MethodChoice::Algebraic),
            out: s.out,
            format: s.format.unwrap_or(Format::Csv),
            oracle_tol: Tolerances::new(rtol, atol),
            tol: positive("tol", s.tol.unwrap_or(1e-6))?,
            seeds: s.seeds.unwrap_or(0),
            seed: s.seed.unwrap_or(0),
            affine: s.affine.as_deref().map(parse_affine).transpose()?,
            alpha: complex_field("alpha", &s.alpha)?,
            p: s.p.as_deref().map(parse_ratio).transpose()?,
            max_q: s.max_q.unwrap_or(6),
            warnings,
        })
    }

    pub fn require_system(&self) -> Result<&SystemSource, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::config("example", "give --example or a custom spec"))
    }

    pub fn require_complex(&self, field: &'static str) -> Result<C, CliError> {
        let v = match field {
            "a" => self.a,
            "b" => self.b,
            "x1" => self.x1,
            "x2" => self.x2,
            "alpha" => self.alpha,
            _ => None,
        };
        v.ok_or_else(|| CliError::config(field, "required"))
    }

    pub fn isochrony_setup(&self) -> Result<IsochronySetup, CliError> {
        let alpha = self.require_complex("alpha")?;
        let p = self.p.ok_or_else(|| CliError::config("p", "required"))?;
        IsochronySetup::new(alpha, p).map_err(|e| CliError::config("p", e.to_string()))
    }

    /// `--out`, or `<dir>/<stem>.<ext>` under the default output directory,
    /// with `csv_ext` standing in for CSV output.
    pub fn output_path(&self, stem: &str, csv_ext: &str) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        let dir = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        let ext = match self.format {
            Format::Csv => csv_ext,
            Format::Json => "json",
        };
        dir.join(format!("{stem}.{ext}"))
    }
}
