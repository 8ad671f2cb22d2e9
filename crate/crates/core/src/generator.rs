//! From a coefficient flow to a polynomial flow of the zeros.
//!
//! A [`YSystemSpec`] declares how two coefficients of a monic polynomial
//! evolve. Substituting the zero/coefficient map into the velocity identities
//! of [`correspondence`](crate::correspondence) gives the zero velocities as
//! ratios whose denominators contain `x₁ − x₂` (and `x₁` or `x₁²` for the
//! double-zero pairs Y13 and Y23). The x-system is polynomial exactly when
//! those divisions leave no remainder. [`check_condition`] tests the
//! necessary diagonal identity on `x₁ = x₂ = x`, and [`synthesize_xsystem`]
//! performs the divisions.
//!
//! ```
//! use solvable_plane::generator::builtin_example;
//! use solvable_plane::Complex64;
//!
//! let (_, xs) = builtin_example(2, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
//! assert_eq!(xs.p1.to_string(), "x1^2 + 7*x1*x2 + x2^2");
//! assert_eq!(xs.p2.to_string(), "7*x1^2 + 4*x1*x2 - 2*x2^2");
//! ```

use std::fmt;

use num_complex::Complex64;

use crate::complexpoly::{parse_poly, MultiPoly, ParseError, PolyError};
use crate::correspondence::{Config, Pair};

type C = Complex64;

const X_VARS: [&str; 2] = ["x1", "x2"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("pair {pair:?} is not available for {config:?}")]
    UnsupportedPair { config: Config, pair: Pair },
    #[error("f uses variable {0}, which is not in the declared pair")]
    ForeignVariable(String),
    #[error("velocity of x{component} is not polynomial: division by {divisor} leaves remainder {remainder}")]
    NonPolynomial {
        component: usize,
        divisor: &'static str,
        remainder: String,
    },
    #[error("example must be 1, 2, 3 or 4, got {0}")]
    UnknownExample(u8),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A coefficient flow `ẏᵢ = f_first(yᵢ, yⱼ)`, `ẏⱼ = f_second(yᵢ, yⱼ)` for the
/// pair `(i, j)`. Parameters are already numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct YSystemSpec {
    pub config: Config,
    pub pair: Pair,
    pub f_first: MultiPoly,
    pub f_second: MultiPoly,
    /// Named parameter values the right-hand sides were built from.
    pub params: Vec<(String, C)>,
}

impl YSystemSpec {
    pub fn new(
        config: Config,
        pair: Pair,
        f_first: MultiPoly,
        f_second: MultiPoly,
    ) -> Result<Self, GeneratorError> {
        if config == Config::Generic2 && pair != Pair::Y12 {
            return Err(GeneratorError::UnsupportedPair { config, pair });
        }
        let (a, b) = pair.names();
        let lift = |f: &MultiPoly| {
            f.with_variables(&[a, b]).map_err(|e| match e {
                PolyError::UnknownVariable(v) => GeneratorError::ForeignVariable(v),
                other => other.into(),
            })
        };
        Ok(YSystemSpec {
            config,
            pair,
            f_first: lift(&f_first)?,
            f_second: lift(&f_second)?,
            params: Vec::new(),
        })
    }

    /// Parses both right-hand sides from the expression grammar over the
    /// pair's variable names.
    pub fn parse(
        config: Config,
        pair: Pair,
        f_first: &str,
        f_second: &str,
    ) -> Result<Self, GeneratorError> {
        let (a, b) = pair.names();
        let vars = [a, b];
        YSystemSpec::new(
            config,
            pair,
            parse_poly(f_first, &vars)?,
            parse_poly(f_second, &vars)?,
        )
    }

    pub fn with_params(mut self, params: &[(&str, C)]) -> Self {
        self.params = params.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        self
    }

    /// Which divisibility condition governs this configuration and pair.
    pub fn condition_number(&self) -> u8 {
        match (self.config, self.pair) {
            (Config::Generic2, _) => 1,
            (Config::DoubleZero3, Pair::Y12) => 2,
            (Config::DoubleZero3, Pair::Y13) => 3,
            (Config::DoubleZero3, Pair::Y23) => 4,
        }
    }
}

impl fmt::Display for YSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.pair.names();
        writeln!(f, "{a}' = {}", self.f_first)?;
        write!(f, "{b}' = {}", self.f_second)
    }
}

/// Outcome of a diagonal divisibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// 1 to 4.
    pub condition: u8,
    pub satisfied: bool,
    /// The diagonal residual, a polynomial in `x`.
    pub residual: MultiPoly,
    /// Conditions 3 and 4 divide by `x` first; a leftover constant term is
    /// reported here.
    pub non_divisible_constant: Option<C>,
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition: {}\nsatisfied: {}\nresidual: {}",
            self.condition, self.satisfied, self.residual
        )?;
        if let Some(c) = self.non_divisible_constant {
            write!(f, "\nnot divisible by x: constant term {c}")?;
        }
        Ok(())
    }
}

/// The residual of the diagonal identity for `spec`.
pub fn check_condition(spec: &YSystemSpec) -> Result<ConditionReport, GeneratorError> {
    let xv = ["x"];
    let target = vec!["x".to_string()];
    let x = MultiPoly::var(&xv, "x")?;
    let x2 = x.pow(2);
    let x3 = x.pow(3);
    let (na, nb) = spec.pair.names();
    let condition = spec.condition_number();
    // coefficient values on the diagonal x₁ = x₂ = x
    let (ya, yb) = match condition {
        1 => (x.scale(C::new(-2.0, 0.0)), x2.clone()),
        2 => (x.scale(C::new(-3.0, 0.0)), x2.scale(C::new(3.0, 0.0))),
        3 => (x.scale(C::new(-3.0, 0.0)), x3.neg()),
        _ => (x2.scale(C::new(3.0, 0.0)), x3.neg()),
    };
    let bind = [(na, &ya), (nb, &yb)];
    let fa = spec.f_first.substitute(&bind, &target)?;
    let fb = spec.f_second.substitute(&bind, &target)?;
    let raw = match condition {
        1 => x.mul(&fa)?.add(&fb)?,
        2 => x.scale(C::new(2.0, 0.0)).mul(&fa)?.add(&fb)?,
        3 => x2.mul(&fa)?.sub(&fb)?,
        _ => x.mul(&fa)?.add(&fb.scale(C::new(2.0, 0.0)))?,
    };
    let (residual, non_divisible_constant) = if condition >= 3 {
        let (q, r) = raw.exact_div(&x)?;
        let c = r.coeff(&[0]);
        (q, (!r.is_zero()).then_some(c))
    } else {
        (raw, None)
    };
    Ok(ConditionReport {
        condition,
        satisfied: residual.is_zero() && non_divisible_constant.is_none(),
        residual,
        non_divisible_constant,
    })
}

/// A polynomial flow `ẋ₁ = p1(x₁, x₂)`, `ẋ₂ = p2(x₁, x₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XSystem {
    pub p1: MultiPoly,
    pub p2: MultiPoly,
    /// The coefficient flow this system was synthesized from, if any.
    pub provenance: Option<YSystemSpec>,
}

impl XSystem {
    /// Wraps two polynomials, re-expressed over `(x1, x2)`.
    pub fn new(p1: &MultiPoly, p2: &MultiPoly) -> Result<Self, GeneratorError> {
        Ok(XSystem {
            p1: p1.with_variables(&X_VARS)?,
            p2: p2.with_variables(&X_VARS)?,
            provenance: None,
        })
    }

    /// Parses both right-hand sides over `(x1, x2)`.
    pub fn parse(p1: &str, p2: &str) -> Result<Self, GeneratorError> {
        Ok(XSystem {
            p1: parse_poly(p1, &X_VARS)?,
            p2: parse_poly(p2, &X_VARS)?,
            provenance: None,
        })
    }

    pub fn eval(&self, x1: C, x2: C) -> (C, C) {
        (self.p1.eval(&[x1, x2]), self.p2.eval(&[x1, x2]))
    }

    /// A right-hand side in the shape the [`oracle`](crate::oracle) expects.
    pub fn rhs(&self) -> impl Fn(f64, &[C], &mut [C]) + Clone {
        let (c1, c2) = (self.p1.compile(), self.p2.compile());
        move |_t, x: &[C], d: &mut [C]| {
            d[0] = c1.eval(x);
            d[1] = c2.eval(x);
        }
    }
}

impl fmt::Display for XSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x1' = {}", self.p1)?;
        write!(f, "x2' = {}", self.p2)
    }
}

/// Divides `num` by `(x1 − x2)·x1^k·c`, failing on any remainder.
fn divide(
    num: &MultiPoly,
    x1_power: u32,
    c: f64,
    component: usize,
) -> Result<MultiPoly, GeneratorError> {
    let diff = MultiPoly::var(&X_VARS, "x1")?.sub(&MultiPoly::var(&X_VARS, "x2")?)?;
    let (mut q, r) = num.exact_div(&diff)?;
    if !r.is_zero() {
        return Err(GeneratorError::NonPolynomial {
            component,
            divisor: "x1 - x2",
            remainder: r.to_string(),
        });
    }
    let x1 = MultiPoly::var(&X_VARS, "x1")?;
    for _ in 0..x1_power {
        let (q2, r2) = q.exact_div(&x1)?;
        if !r2.is_zero() {
            return Err(GeneratorError::NonPolynomial {
                component,
                divisor: "x1",
                remainder: r2.to_string(),
            });
        }
        q = q2;
    }
    Ok(q.scale(C::new(1.0 / c, 0.0)))
}

/// The x-system of a coefficient flow, by exact division.
pub fn synthesize_xsystem(spec: &YSystemSpec) -> Result<XSystem, GeneratorError> {
    let target: Vec<String> = X_VARS.iter().map(|s| s.to_string()).collect();
    let x1 = MultiPoly::var(&X_VARS, "x1")?;
    let x2 = MultiPoly::var(&X_VARS, "x2")?;
    let (y1, y2, y3) = match spec.config {
        Config::Generic2 => (x1.add(&x2)?.neg(), x1.mul(&x2)?, MultiPoly::zero(&X_VARS)),
        Config::DoubleZero3 => (
            x1.scale(C::new(2.0, 0.0)).add(&x2)?.neg(),
            x1.mul(&x1.add(&x2.scale(C::new(2.0, 0.0)))?)?,
            x1.pow(2).mul(&x2)?.neg(),
        ),
    };
    let bind = [("y1", &y1), ("y2", &y2), ("y3", &y3)];
    let fa = spec.f_first.substitute(&bind, &target)?;
    let fb = spec.f_second.substitute(&bind, &target)?;
    let two = C::new(2.0, 0.0);
    // numerators n1, n2 and the x1 powers / constants of their denominators
    let (n1, k1, c1, n2, k2, c2) = match (spec.config, spec.pair) {
        (Config::Generic2, _) => (
            x1.mul(&fa)?.add(&fb)?.neg(),
            0,
            1.0,
            x2.mul(&fa)?.add(&fb)?,
            0,
            1.0,
        ),
        (Config::DoubleZero3, Pair::Y12) => (
            x1.scale(two).mul(&fa)?.add(&fb)?.neg(),
            0,
            2.0,
            x1.add(&x2)?.mul(&fa)?.add(&fb)?,
            0,
            1.0,
        ),
        (Config::DoubleZero3, Pair::Y13) => (
            x1.pow(2).mul(&fa)?.sub(&fb)?.neg(),
            1,
            2.0,
            x1.mul(&x2)?.mul(&fa)?.sub(&fb)?,
            1,
            1.0,
        ),
        (Config::DoubleZero3, Pair::Y23) => (
            x1.mul(&fa)?.add(&fb.scale(two))?,
            1,
            2.0,
            x1.mul(&x2)?.mul(&fa)?.add(&x1.add(&x2)?.mul(&fb)?)?.neg(),
            2,
            1.0,
        ),
    };
    Ok(XSystem {
        p1: divide(&n1, k1, c1, 1)?,
        p2: divide(&n2, k2, c2, 2)?,
        provenance: Some(spec.clone()),
    })
}

/// The anharmonic family `ẏ₁ = α₀ + α₁y₂`, `ẏ₂ = β₀y₁ + β₁y₁³` on the pair Y12.
pub fn anharmonic_family(config: Config, alpha0: C, alpha1: C, beta0: C, beta1: C) -> YSystemSpec {
    let v = ["y1", "y2"];
    let y1 = MultiPoly::var(&v, "y1").unwrap();
    let y2 = MultiPoly::var(&v, "y2").unwrap();
    let f1 = MultiPoly::constant(&v, alpha0)
        .add(&y2.scale(alpha1))
        .unwrap();
    let f2 = y1.scale(beta0).add(&y1.pow(3).scale(beta1)).unwrap();
    YSystemSpec {
        config,
        pair: Pair::Y12,
        f_first: f1,
        f_second: f2,
        params: vec![
            ("alpha0".into(), alpha0),
            ("alpha1".into(), alpha1),
            ("beta0".into(), beta0),
            ("beta1".into(), beta1),
        ],
    }
}

/// The logistic family on a double-zero pair:
/// Y13 `ẏ₁ = y₁(α₁ + α₂y₃)`, `ẏ₃ = y₃(β₁ + β₂y₃)`;
/// Y23 `ẏ₂ = y₂(α₁ + α₂y₂)`, `ẏ₃ = y₃(β₁ + β₂y₂)`.
///
/// # Panics
///
/// If `pair` is Y12.
pub fn logistic_family(pair: Pair, alpha1: C, alpha2: C, beta1: C, beta2: C) -> YSystemSpec {
    let (na, nb) = pair.names();
    let v = [na, nb];
    let ya = MultiPoly::var(&v, na).unwrap();
    let yb = MultiPoly::var(&v, nb).unwrap();
    let driver = match pair {
        Pair::Y13 => &yb,
        Pair::Y23 => &ya,
        Pair::Y12 => panic!("the logistic family lives on Y13 or Y23"),
    };
    let lin = |c0: C, c1: C| MultiPoly::constant(&v, c0).add(&driver.scale(c1)).unwrap();
    YSystemSpec {
        config: Config::DoubleZero3,
        pair,
        f_first: ya.mul(&lin(alpha1, alpha2)).unwrap(),
        f_second: yb.mul(&lin(beta1, beta2)).unwrap(),
        params: vec![
            ("alpha1".into(), alpha1),
            ("alpha2".into(), alpha2),
            ("beta1".into(), beta1),
            ("beta2".into(), beta2),
        ],
    }
}

/// The coefficient flow of example `n` for the x-system parameters `(a, b)`.
pub fn builtin_spec(n: u8, a: C, b: C) -> Result<YSystemSpec, GeneratorError> {
    let spec = match n {
        1 => {
            let (b0, b1) = (-a, b);
            anharmonic_family(Config::Generic2, 2.0 * b0, 8.0 * b1, b0, b1)
        }
        2 => {
            let (b0, b1) = (-2.0 * a, -2.0 * b);
            anharmonic_family(Config::DoubleZero3, 1.5 * b0, 4.5 * b1, b0, b1)
        }
        3 => {
            // α₂ = +b: the choice that yields ẋₙ = xₙ(a − b x₁²x₂)
            let (a1, a2) = (a, b);
            logistic_family(Pair::Y13, a1, a2, 3.0 * a1, 3.0 * a2)
        }
        4 => {
            let (a1, a2) = (2.0 * a, 2.0 * b);
            logistic_family(Pair::Y23, a1, a2, 1.5 * a1, 1.5 * a2)
        }
        _ => return Err(GeneratorError::UnknownExample(n)),
    };
    Ok(spec)
}

/// Example `n` as a coefficient flow together with its synthesized x-system.
///
/// # Panics
///
/// If `n` is not 1 to 4.
pub fn builtin_example(n: u8, a: C, b: C) -> (YSystemSpec, XSystem) {
    let spec = builtin_spec(n, a, b).expect("example number 1..=4");
    let xs = synthesize_xsystem(&spec).expect("built-in examples satisfy their conditions");
    (spec, xs)
}

/// The x-system of example `n` written with symbolic `a` and `b`.
///
/// Every example is linear in `(a, b)`, so `P(a, b) = a·P(1, 0) + b·P(0, 1)`.
pub fn builtin_symbolic(n: u8) -> Result<[String; 2], GeneratorError> {
    if !(1..=4).contains(&n) {
        return Err(GeneratorError::UnknownExample(n));
    }
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let (_, pa) = builtin_example(n, one, zero);
    let (_, pb) = builtin_example(n, zero, one);
    Ok([symbolic_sum(&pa.p1, &pb.p1), symbolic_sum(&pa.p2, &pb.p2)])
}

/// `name·p` as text, and whether it was written with its sign pulled out.
fn symbolic_part(name: &str, p: &MultiPoly) -> Option<(bool, String)> {
    if p.is_zero() {
        return None;
    }
    if p.num_terms() == 1 {
        let c = *p.leading_term().unwrap().1;
        for (neg, unit) in [(false, C::new(1.0, 0.0)), (true, C::new(-1.0, 0.0))] {
            if c == unit {
                let mono = p.scale(unit);
                return Some(if p.total_degree() == Some(0) {
                    (neg, name.to_string())
                } else {
                    (neg, format!("{name}*{mono}"))
                });
            }
        }
    }
    Some((false, format!("{name}*({p})")))
}

fn symbolic_sum(pa: &MultiPoly, pb: &MultiPoly) -> String {
    let mut out = String::new();
    for part in [symbolic_part("a", pa), symbolic_part("b", pb)]
        .into_iter()
        .flatten()
    {
        match (out.is_empty(), part.0) {
            (true, true) => out.push('-'),
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
            (true, false) => {}
        }
        out.push_str(&part.1);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexpoly::parse_poly;

    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }
    fn xp(s: &str) -> MultiPoly {
        parse_poly(s, &X_VARS).unwrap()
    }

    #[test]
    fn cond1_satisfied_for_example_relations() {
        let (b0, b1) = (r(1.5), r(-0.25));
        let s = anharmonic_family(Config::Generic2, 2.0 * b0, 8.0 * b1, b0, b1);
        let rep = check_condition(&s).unwrap();
        assert_eq!(rep.condition, 1);
        assert!(rep.satisfied, "{}", rep.residual);
    }

    #[test]
    fn cond1_violation_residual() {
        // α₀ = β₀ = 1, α₁ = 8β₁: x(1 + α₁x²) − 2x − 8β₁x³ = −x
        let s = anharmonic_family(Config::Generic2, r(1.0), r(8.0), r(1.0), r(1.0));
        let rep = check_condition(&s).unwrap();
        assert!(!rep.satisfied);
        assert_eq!(rep.residual.to_string(), "-x");
    }

    #[test]
    fn cond3_satisfied_and_constant_reported() {
        let s = logistic_family(Pair::Y13, r(0.5), r(2.0), r(1.5), r(6.0));
        assert!(check_condition(&s).unwrap().satisfied);
        let bad = YSystemSpec::parse(Config::DoubleZero3, Pair::Y13, "y1", "y3 + 1").unwrap();
        let rep = check_condition(&bad).unwrap();
        assert!(!rep.satisfied);
        assert_eq!(rep.non_divisible_constant, Some(r(-1.0)));
    }

    #[test]
    fn cond4_report() {
        let s = logistic_family(Pair::Y23, r(2.0), r(4.0), r(3.0), r(6.0));
        assert_eq!(check_condition(&s).unwrap().condition, 4);
        assert!(check_condition(&s).unwrap().satisfied);
        let off = logistic_family(Pair::Y23, r(2.0), r(4.0), r(3.0), r(6.5));
        assert!(!check_condition(&off).unwrap().satisfied);
    }

    #[test]
    fn example_systems() {
        let (a, b) = (r(0.75), r(-1.25));
        let cases = [
            (
                1,
                "0.75 - 1.25*(x1^2 - 4*x1*x2 - x2^2)",
                "0.75 - 1.25*(x2^2 - 4*x1*x2 - x1^2)",
            ),
            (
                2,
                "0.75 - 1.25*(x1^2 + 7*x1*x2 + x2^2)",
                "0.75 - 1.25*(7*x1^2 + 4*x1*x2 - 2*x2^2)",
            ),
            (3, "x1*(0.75 + 1.25*x1^2*x2)", "x2*(0.75 + 1.25*x1^2*x2)"),
            (
                4,
                "x1*(0.75 - 1.25*x1*(x1 + 2*x2))",
                "x2*(0.75 - 1.25*x1*(x1 + 2*x2))",
            ),
        ];
        for (n, e1, e2) in cases {
            let (_, xs) = builtin_example(n, a, b);
            assert_eq!(xs.p1, xp(e1), "example {n}");
            assert_eq!(xs.p2, xp(e2), "example {n}");
        }
    }

    #[test]
    fn symbolic_rendering() {
        assert_eq!(
            builtin_symbolic(2).unwrap(),
            [
                "a + b*(x1^2 + 7*x1*x2 + x2^2)".to_string(),
                "a + b*(7*x1^2 + 4*x1*x2 - 2*x2^2)".to_string()
            ]
        );
        assert_eq!(
            builtin_symbolic(1).unwrap()[0],
            "a + b*(x1^2 - 4*x1*x2 - x2^2)"
        );
        assert_eq!(builtin_symbolic(3).unwrap()[1], "a*x2 - b*x1^2*x2^2");
        assert!(builtin_symbolic(5).is_err());
    }

    #[test]
    fn perturbed_relation_leaves_remainder() {
        let (b0, b1) = (r(1.0), r(1.0));
        let s = anharmonic_family(Config::Generic2, 2.0 * b0 + 1e-3, 8.0 * b1, b0, b1);
        assert!(matches!(
            synthesize_xsystem(&s),
            Err(GeneratorError::NonPolynomial {
                divisor: "x1 - x2",
                ..
            })
        ));
    }

    #[test]
    fn spec_validation() {
        let v = ["y1", "y3"];
        let f = MultiPoly::var(&v, "y3").unwrap();
        assert!(matches!(
            YSystemSpec::new(Config::Generic2, Pair::Y13, f.clone(), f.clone()),
            Err(GeneratorError::UnsupportedPair { .. })
        ));
        assert!(matches!(
            YSystemSpec::new(Config::DoubleZero3, Pair::Y12, f.clone(), f),
            Err(GeneratorError::ForeignVariable(v)) if v == "y3"
        ));
    }
}
