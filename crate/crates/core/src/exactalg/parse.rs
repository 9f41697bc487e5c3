//! Recursive-descent parser for the polynomial text format.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | zetaK | '(' expr ')'
//! ```
//!
//! Division is only allowed by nonzero constants, which covers rational
//! literals `p/q`. Identifiers of the form `zeta<K>` denote ζ_K and are
//! reserved; K must divide the session order.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::cyclo::CycloNumber;
use super::poly::{Polynomial, Ring};
use super::ExactError;

/// Largest exponent accepted by `^`; keeps hostile input from exhausting memory.
pub const MAX_EXPONENT: u32 = 4096;
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExactError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1
            }
            b'^' => {
                out.push((i, Tok::Caret));
                i += 1
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Int(n)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ExactError::Syntax { pos: i, msg: format!("unexpected character {ch:?}") });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    ring: &'a Arc<Ring>,
    order: u32,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExactError> {
        Err(ExactError::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Polynomial, ExactError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, ExactError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.here();
                    let d = self.unary()?;
                    let c = d.as_constant().ok_or(ExactError::Syntax {
                        pos: at,
                        msg: "division by a non-constant".into(),
                    })?;
                    let inv = c
                        .inv()
                        .ok_or(ExactError::Syntax { pos: at, msg: "division by zero".into() })?;
                    acc = acc.scale(&inv);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, ExactError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        let r = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        };
        self.depth -= 1;
        r
    }

    fn power(&mut self) -> Result<Polynomial, ExactError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    let e: u32 = match u32::try_from(&n) {
                        Ok(e) if e <= MAX_EXPONENT => e,
                        _ => return self.err(format!("exponent exceeds {MAX_EXPONENT}")),
                    };
                    self.pos += 1;
                    let deg = base.total_degree().unwrap_or(0) as u64;
                    if deg * e as u64 > MAX_EXPONENT as u64 || (base.len() > 1 && e > 256) {
                        return self.err(format!("power exceeds degree {MAX_EXPONENT}"));
                    }
                    Ok(base.pow(e))
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial, ExactError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.ring, CycloNumber::from_rational(BigRational::from_integer(n))))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(k) = zeta_order(&name) {
                    if k == 0 {
                        return Err(ExactError::ZeroOrder);
                    }
                    if !self.order.is_multiple_of(k) {
                        return Err(ExactError::Syntax {
                            pos: at,
                            msg: format!("zeta{k} is not in the cyclotomic field of order {}", self.order),
                        });
                    }
                    return Ok(Polynomial::constant(self.ring, CycloNumber::zeta(k)));
                }
                match self.ring.index_of(&name) {
                    Some(i) => Ok(Polynomial::var_at(self.ring, i)),
                    None => Err(ExactError::UnknownVariable { pos: at, name }),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.err("expected a number, variable or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// `Some(K)` if `name` is the reserved root-of-unity token `zetaK`.
fn zeta_order(name: &str) -> Option<u32> {
    let digits = name.strip_prefix("zeta")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse().unwrap_or(u32::MAX))
}

/// Parses `text` into a polynomial on `ring` with coefficients in ℚ(ζ_order).
pub fn poly_parse(text: &str, ring: &Arc<Ring>, order: u32) -> Result<Polynomial, ExactError> {
    if order == 0 {
        return Err(ExactError::ZeroOrder);
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), ring, order, depth: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3() -> Arc<Ring> {
        Ring::new(&["x1", "x2", "x3"])
    }

    #[test]
    fn z13_potential() {
        let p = poly_parse("x1^6*x2 + x2^3 + x3^2", &ring3(), 1).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string(), "x1^6*x2 + x2^3 + x3^2");
    }

    #[test]
    fn zero_and_roots_of_unity() {
        let r = ring3();
        assert!(poly_parse("0", &r, 1).unwrap().is_zero());
        assert_eq!(poly_parse("zeta3^3", &r, 3).unwrap(), Polynomial::one(&r));
        assert_eq!(poly_parse("zeta3^3", &r, 6).unwrap(), Polynomial::one(&r));
    }

    #[test]
    fn precedence_and_rationals() {
        let r = ring3();
        let p = poly_parse("-x1^2 + 3/2*x2 - (x3 - 1)*2", &r, 1).unwrap();
        assert_eq!(p.to_string(), "-x1^2 + 3/2*x2 - 2*x3 + 2");
        assert_eq!(poly_parse("x1/2", &r, 1).unwrap().to_string(), "1/2*x1");
    }

    #[test]
    fn errors() {
        let r = ring3();
        assert!(matches!(poly_parse("x1 + ", &r, 1), Err(ExactError::Syntax { pos: 5, .. })));
        assert!(matches!(
            poly_parse("x1 + w", &r, 1),
            Err(ExactError::UnknownVariable { pos: 5, .. })
        ));
        assert!(matches!(poly_parse("x1", &r, 0), Err(ExactError::ZeroOrder)));
        assert!(matches!(poly_parse("zeta0", &r, 1), Err(ExactError::ZeroOrder)));
        assert!(poly_parse("zeta3", &r, 1).is_err());
        assert!(poly_parse("x1/x2", &r, 1).is_err());
        assert!(poly_parse("1/0", &r, 1).is_err());
        assert!(poly_parse("x1 $", &r, 1).is_err());
        assert!(poly_parse("(x1", &r, 1).is_err());
        assert!(poly_parse("x1^99999", &r, 1).is_err());
    }

    #[test]
    fn cyclotomic_round_trip() {
        let r = Ring::new(&["y1", "y2"]);
        let p = poly_parse("zeta3*y1^2 - (1 + zeta3)*y2 + zeta3^2", &r, 3).unwrap();
        let q = poly_parse(&p.to_string(), &r, 3).unwrap();
        assert_eq!(p, q);
    }
}
