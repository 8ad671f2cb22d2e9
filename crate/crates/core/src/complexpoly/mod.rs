//! Sparse multivariate polynomials with complex floating-point coefficients.
//!
//! Terms are kept in graded lexicographic order with respect to the declared
//! variable order (the first declared variable is the largest). Every
//! operation normalizes its result by pruning coefficients whose modulus falls
//! below [`ZERO_THRESHOLD`] times the largest coefficient modulus seen in the
//! operands, so exact cancellations that happen in binary floating point
//! produce a genuinely empty term map.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

pub use parse::{parse_expr, parse_poly, ParseError, PolyExpr};

/// Relative modulus below which a coefficient is treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("no value supplied for variable `{0}`")]
    MissingValue(String),
    #[error("non-finite coefficient {0}")]
    NonFinite(Complex64),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Exponent vector of a single term, one entry per declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial over `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Complex64>,
}

fn max_modulus<'a>(coeffs: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    coeffs.into_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl MultiPoly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: Complex64) -> Self {
        let mut p = Self::zero(vars);
        let one = Monomial::one(p.vars.len());
        p.insert_checked(one, c);
        p
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn var<S: AsRef<str>>(vars: &[S], name: &str) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        let idx = p
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut e = vec![0; p.vars.len()];
        e[idx] = 1;
        p.terms.insert(Monomial(e), Complex64::new(1.0, 0.0));
        Ok(p)
    }

    /// Builds a polynomial from explicit terms; near-zero coefficients are pruned.
    pub fn from_terms<S: AsRef<str>>(
        vars: &[S],
        terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(PolyError::NonFinite(c));
            }
            assert_eq!(e.len(), p.vars.len(), "exponent vector length");
            *p.terms.entry(Monomial(e)).or_default() += c;
        }
        let scale = max_modulus(p.terms.values());
        p.prune(scale);
        Ok(p)
    }

    fn insert_checked(&mut self, m: Monomial, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.terms.insert(m, c);
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, exponents: &[u32]) -> Complex64 {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Complex64)> {
        self.terms.iter().next_back()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        max_modulus(self.terms.values())
    }

    fn prune(&mut self, scale: f64) {
        let cut = ZERO_THRESHOLD * scale;
        self.terms.retain(|_, c| c.norm() >= cut && c.norm() > 0.0);
    }

    fn check_vars(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::VariableMismatch {
                left: self.vars.clone(),
                right: other.vars.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_vars(other)?;
        let scale = self.max_coeff_modulus().max(other.max_coeff_modulus());
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_default() += c;
        }
        out.prune(scale);
        Ok(out)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> MultiPoly {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        };
        let scale = self.max_coeff_modulus() * s.norm();
        out.prune(scale);
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_vars(other)?;
        let mut out = MultiPoly::zero(&self.vars);
        let mut scale: f64 = 0.0;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let prod = ca * cb;
                scale = scale.max(prod.norm());
                *out.terms.entry(ma.mul(mb)).or_default() += prod;
            }
        }
        out.prune(scale);
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut result = MultiPoly::constant(&self.vars, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same variables");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same variables");
            }
        }
        result
    }

    /// Multiplies by a single monomial with unit coefficient.
    pub fn mul_monomial(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), *c)).collect(),
        }
    }

    /// Composes `self` with polynomial values for (some of) its variables.
    ///
    /// Every binding must live over the same target variable list; variables
    /// of `self` without a binding are looked up in that target list and
    /// passed through unchanged.
    pub fn substitute(
        &self,
        bindings: &[(&str, &MultiPoly)],
        target_vars: &[String],
    ) -> Result<MultiPoly, PolyError> {
        for (_, b) in bindings {
            if b.vars != target_vars {
                return Err(PolyError::VariableMismatch {
                    left: b.vars.clone(),
                    right: target_vars.to_vec(),
                });
            }
        }
        let used: Vec<bool> = (0..self.vars.len())
            .map(|i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        let images: Vec<MultiPoly> = self
            .vars
            .iter()
            .zip(&used)
            .map(
                |(v, &u)| match bindings.iter().find(|(name, _)| name == v) {
                    Some((_, b)) => Ok((*b).clone()),
                    None if u => MultiPoly::var(target_vars, v),
                    None => Ok(MultiPoly::zero(target_vars)),
                },
            )
            .collect::<Result<_, _>>()?;
        let mut out = MultiPoly::zero(target_vars);
        // powers[i][k] = images[i]^k, filled lazily
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|_| vec![MultiPoly::constant(target_vars, Complex64::new(1.0, 0.0))])
            .collect();
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(target_vars, *c);
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i])?;
                    powers[i].push(next);
                }
                if e > 0 {
                    term = term.mul(&powers[i][e as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Multivariate division by a single divisor under the graded
    /// lexicographic order: returns `(q, r)` with `self = q*d + r` and no
    /// term of `r` divisible by the leading monomial of `d`.
    pub fn exact_div(&self, d: &MultiPoly) -> Result<(MultiPoly, MultiPoly), PolyError> {
        self.check_vars(d)?;
        let (lm, lc) = match d.leading_term() {
            Some((m, c)) => (m.clone(), *c),
            None => return Err(PolyError::DivisionByZero),
        };
        let dmax = d.max_coeff_modulus();
        let mut scale = self.max_coeff_modulus();
        let mut rest = self.clone();
        let mut quot = MultiPoly::zero(&self.vars);
        let mut rem = MultiPoly::zero(&self.vars);
        while let Some((m, c)) = rest.terms.iter().next_back().map(|(m, c)| (m.clone(), *c)) {
            if lm.divides(&m) {
                let qm = m.div(&lm);
                let qc = c / lc;
                scale = scale.max(qc.norm() * dmax);
                *quot.terms.entry(qm.clone()).or_default() += qc;
                for (dm, dc) in &d.terms {
                    let key = dm.mul(&qm);
                    *rest.terms.entry(key).or_default() -= qc * dc;
                }
                // the leading term cancels exactly by construction
                rest.terms.remove(&m);
                rest.prune(scale);
            } else {
                rest.terms.remove(&m);
                rem.terms.insert(m, c);
            }
        }
        quot.prune(scale);
        rem.prune(scale);
        Ok((quot, rem))
    }

    /// Evaluates at a point given positionally (same order as the variables).
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.vars.len(), "point dimension");
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= x.powu(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluates at a point given by name.
    pub fn evaluate(&self, point: &[(&str, Complex64)]) -> Result<Complex64, PolyError> {
        let values = self
            .vars
            .iter()
            .map(|v| {
                point
                    .iter()
                    .find(|(n, _)| n == v)
                    .map(|(_, x)| *x)
                    .ok_or_else(|| PolyError::MissingValue(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.eval(&values))
    }

    /// Re-expresses the polynomial over a different variable list that
    /// contains every variable actually used.
    pub fn with_variables<S: AsRef<str>>(&self, vars: &[S]) -> Result<MultiPoly, PolyError> {
        let new_vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let mut out = MultiPoly::zero(&new_vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_vars.len()];
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = new_vars
                    .iter()
                    .position(|v| *v == self.vars[i])
                    .ok_or_else(|| PolyError::UnknownVariable(self.vars[i].clone()))?;
                e[j] = k;
            }
            out.terms.insert(Monomial(e), *c);
        }
        Ok(out)
    }

    /// Compiles into a flat term list for repeated numeric evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self.terms.iter().map(|(m, c)| (m.0.clone(), *c)).collect(),
            max_degree: self
                .terms
                .keys()
                .flat_map(|m| m.0.iter().copied())
                .max()
                .unwrap_or(0),
        }
    }
}

/// A polynomial flattened for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(Vec<u32>, Complex64)>,
    max_degree: u32,
}

impl CompiledPoly {
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        let d = self.max_degree as usize;
        let mut table = [[Complex64::new(0.0, 0.0); 16]; 4];
        if point.len() <= 4 && d < 16 {
            for (i, x) in point.iter().enumerate() {
                table[i][0] = Complex64::new(1.0, 0.0);
                for k in 1..=d {
                    table[i][k] = table[i][k - 1] * x;
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, c) in &self.terms {
                let mut t = *c;
                for (i, &k) in e.iter().enumerate() {
                    t *= table[i][k as usize];
                }
                acc += t;
            }
            acc
        } else {
            self.terms
                .iter()
                .map(|(e, c)| e.iter().zip(point).fold(*c, |t, (&k, x)| t * x.powu(k)))
                .sum()
        }
    }
}

/// Formats a complex coefficient so that the expression parser reads back
/// exactly the same value.
pub(crate) fn format_complex_literal(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for MultiPoly {
    /// Writes the polynomial in the textual expression grammar, highest
    /// monomial first; `parse_poly` inverts this exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            let mono: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            self.vars[i].clone()
                        } else {
                            format!("{}^{}", self.vars[i], e)
                        }
                    })
                    .collect();
            let negative = (c.im == 0.0 && c.re < 0.0) || (c.re == 0.0 && c.im < 0.0);
            let mag = if negative { -c } else { *c };
            let sep = match (first, negative) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let body = if mono.is_empty() {
                format_complex_literal(mag)
            } else if mag == Complex64::new(1.0, 0.0) {
                mono.join("*")
            } else {
                format!("{}*{}", format_complex_literal(mag), mono.join("*"))
            };
            write!(f, "{sep}{body}")?;
            first = false;
        }
        Ok(())
    }
}
