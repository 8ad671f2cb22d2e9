//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := ('-'|'+') factor | base ('^' uint)?
//! base   := symbol | literal | '(' expr ')'
//! ```
//!
//! Literals are decimal reals with an optional exponent; a trailing `i` makes
//! them imaginary, so `2+3i` parses as the sum of two literals. A bare `i`
//! that is not a declared variable is the imaginary unit.

use num_complex::Complex64;

use super::{MultiPoly, PolyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{name}` at byte {pos}")]
    UndeclaredSymbol { name: String, pos: usize },
    #[error("negative exponent at byte {pos}")]
    NegativeExponent { pos: usize },
    #[error("non-integer exponent `{text}` at byte {pos}")]
    NonIntegerExponent { text: String, pos: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyExpr {
    Literal(Complex64),
    Symbol(String),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Neg(Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

impl PolyExpr {
    pub fn expand<S: AsRef<str>>(&self, vars: &[S]) -> Result<MultiPoly, PolyError> {
        Ok(match self {
            PolyExpr::Literal(c) => MultiPoly::constant(vars, *c),
            PolyExpr::Symbol(s) => MultiPoly::var(vars, s)?,
            PolyExpr::Add(a, b) => a.expand(vars)?.add(&b.expand(vars)?)?,
            PolyExpr::Sub(a, b) => a.expand(vars)?.sub(&b.expand(vars)?)?,
            PolyExpr::Mul(a, b) => a.expand(vars)?.mul(&b.expand(vars)?)?,
            PolyExpr::Neg(a) => a.expand(vars)?.neg(),
            PolyExpr::Pow(a, n) => a.expand(vars)?.pow(*n),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { text: String, imag: bool },
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if "+-*^()".contains(ch) {
            out.push((Tok::Op(ch), i));
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = src[start..i].to_string();
            let imag = i < bytes.len()
                && bytes[i] == b'i'
                && !(i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_'));
            if imag {
                i += 1;
            }
            out.push((Tok::Num { text, imag }, start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            return Err(ParseError::Syntax {
                pos: i,
                msg: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: &'a [S],
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                PolyExpr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                PolyExpr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op('*')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = PolyExpr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<PolyExpr, ParseError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                return Ok(PolyExpr::Neg(Box::new(self.factor()?)));
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let n = self.exponent(at)?;
            return Ok(PolyExpr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self, at: usize) -> Result<u32, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Op('-')) => Err(ParseError::NegativeExponent { pos: at }),
            Some(Tok::Num { text, imag }) => {
                self.pos += 1;
                if imag || !text.bytes().all(|b| b.is_ascii_digit()) {
                    let shown = if imag { format!("{text}i") } else { text };
                    return Err(ParseError::NonIntegerExponent {
                        text: shown,
                        pos: at,
                    });
                }
                text.parse::<u32>().map_err(|_| ParseError::Syntax {
                    pos: at,
                    msg: "exponent out of range".into(),
                })
            }
            _ => Err(ParseError::Syntax {
                pos: at,
                msg: "expected a non-negative integer exponent".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<PolyExpr, ParseError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num { text, imag }) => {
                self.pos += 1;
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: at,
                    msg: format!("malformed number `{text}`"),
                })?;
                Ok(PolyExpr::Literal(if imag {
                    Complex64::new(0.0, v)
                } else {
                    Complex64::new(v, 0.0)
                }))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.vars.iter().any(|v| v.as_ref() == name) {
                    Ok(PolyExpr::Symbol(name))
                } else if name == "i" {
                    Ok(PolyExpr::Literal(Complex64::new(0.0, 1.0)))
                } else {
                    Err(ParseError::UndeclaredSymbol { name, pos: at })
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(ParseError::Syntax {
                        pos: self.here(),
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some(Tok::Op(c)) => Err(ParseError::Syntax {
                pos: at,
                msg: format!("unexpected `{c}`"),
            }),
            None => Err(ParseError::Syntax {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses an expression tree without expanding it.
pub fn parse_expr<S: AsRef<str>>(source: &str, vars: &[S]) -> Result<PolyExpr, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: source.len(),
        vars,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.here(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

/// Parses and expands `source` into a polynomial over `vars`.
pub fn parse_poly<S: AsRef<str>>(source: &str, vars: &[S]) -> Result<MultiPoly, ParseError> {
    Ok(parse_expr(source, vars)?.expand(vars)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expands_product() {
        let p = parse_poly("y1*(3 + 2*y3)", &["y1", "y3"]).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coeff(&[1, 0]), c(3.0, 0.0));
        assert_eq!(p.coeff(&[1, 1]), c(2.0, 0.0));
    }

    #[test]
    fn zero_literal() {
        assert!(parse_poly("0", &["x"]).unwrap().is_zero());
    }

    #[test]
    fn negated_binomial_cube_matches_term_oracle() {
        let p = parse_poly("(-x1-x2)^3", &["x1", "x2"]).unwrap();
        // binomial oracle: (-1)^3 * C(3,k) x1^(3-k) x2^k
        let binom = [1.0, 3.0, 3.0, 1.0];
        for (k, b) in binom.iter().enumerate() {
            assert_eq!(p.coeff(&[3 - k as u32, k as u32]), c(-b, 0.0));
        }
        assert_eq!(p.num_terms(), 4);
    }

    #[test]
    fn complex_literals() {
        let p = parse_poly("(2+3i)*x + 1.5i - 4.25", &["x"]).unwrap();
        assert_eq!(p.coeff(&[1]), c(2.0, 3.0));
        assert_eq!(p.coeff(&[0]), c(-4.25, 1.5));
        let q = parse_poly("2-3i", &["x"]).unwrap();
        assert_eq!(q.coeff(&[0]), c(2.0, -3.0));
        let r = parse_poly("i*x + 1e-3", &["x"]).unwrap();
        assert_eq!(r.coeff(&[1]), c(0.0, 1.0));
        assert_eq!(r.coeff(&[0]), c(1e-3, 0.0));
    }

    #[test]
    fn declared_i_is_a_variable() {
        let p = parse_poly("i^2", &["i"]).unwrap();
        assert_eq!(p.coeff(&[2]), c(1.0, 0.0));
    }

    #[test]
    fn error_positions() {
        assert_eq!(
            parse_poly("x1 + z", &["x1"]),
            Err(ParseError::UndeclaredSymbol {
                name: "z".into(),
                pos: 5
            })
        );
        assert_eq!(
            parse_poly("x^-2", &["x"]),
            Err(ParseError::NegativeExponent { pos: 2 })
        );
        assert!(matches!(
            parse_poly("x^1.5", &["x"]),
            Err(ParseError::NonIntegerExponent { pos: 2, .. })
        ));
        assert!(matches!(
            parse_poly("(x + 1", &["x"]),
            Err(ParseError::Syntax { pos: 6, .. })
        ));
        assert!(matches!(
            parse_poly("x $ 1", &["x"]),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_poly("x x", &["x"]),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
    }

    #[test]
    fn deterministic() {
        let a = parse_poly("(x1 - 2*x2 + 0.1i)^4", &["x1", "x2"]).unwrap();
        let b = parse_poly("(x1 - 2*x2 + 0.1i)^4", &["x1", "x2"]).unwrap();
        assert_eq!(a, b);
    }
}
