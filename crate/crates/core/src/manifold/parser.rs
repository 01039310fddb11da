//! Recursive-descent parser for polynomial maps.
//!
//! ```text
//! map    := expr (';' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'a' index | '(' expr ')'
//! ```
//!
//! Division is only allowed by a nonzero constant, so `3/4*a1` works but
//! `1/a1` does not. Error positions are byte offsets into the source.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

use super::poly::Poly;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

/// Parses `m` semicolon-separated polynomials in `a1..a{d}`.
pub fn parse_components(source: &str, d: usize, m: usize) -> Result<Vec<Poly>> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        nvars: d,
    };
    let mut out = vec![p.expr()?];
    loop {
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b';') => {
                p.pos += 1;
                out.push(p.expr()?);
            }
            Some(c) => return Err(p.syntax(format!("unexpected `{}`", c as char))),
        }
    }
    if out.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: out.len(),
        });
    }
    Ok(out)
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let divisor = self.unary()?;
                    match divisor.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&(BigRational::from_integer(1.into()) / c)),
                        Some(_) => return Err(Error::Syntax { pos: at, msg: "division by zero".into() }),
                        None => {
                            return Err(Error::Syntax {
                                pos: at,
                                msg: "division by a non-constant expression".into(),
                            })
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly> {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        if self.peek() == Some(b'-') {
            return Err(Error::NegativeExponent { pos: self.pos });
        }
        let at = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return Err(self.syntax("expected a nonnegative integer exponent"));
        }
        let k: u32 = digits.parse().map_err(|_| Error::Syntax {
            pos: at,
            msg: "exponent too large".into(),
        })?;
        Ok(base.pow(k))
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn atom(&mut self) -> Result<Poly> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n: BigInt = self.digits().parse().unwrap();
                Ok(Poly::constant(self.nvars, BigRational::from_integer(n)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let index = name
                    .strip_prefix('a')
                    .filter(|rest| !rest.is_empty() && !rest.starts_with('0'))
                    .and_then(|rest| rest.parse::<usize>().ok())
                    .filter(|&i| i >= 1 && i <= self.nvars);
                match index {
                    Some(i) => Ok(Poly::var(self.nvars, i - 1)),
                    None => Err(Error::UnknownVariable {
                        name: name.to_string(),
                        pos: start,
                    }),
                }
            }
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}
