//! Polynomial expressions over a finite ring, possibly non-commutative.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary ("*" unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" digits)?
//! atom   := digits | var | "(" expr ")"
//! var    := ("x" | "y") digits          // 1-based: x1, x2, ...
//! ```
//!
//! Multiplication keeps operand order. An integer literal acts as a scalar
//! when multiplied, and as `n·1` when added (which needs a unital ring).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{ElementId, FiniteRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("column {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("variable {0} has no value")]
    UnboundVariable(usize),
    #[error("ring {0} has no multiplicative identity for integer constants")]
    NoUnit(String),
    #[error("exponent must be at least 1")]
    ZeroExponent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Poly {
    /// 0-based variable index.
    Var(usize),
    Int(i64),
    Add(Box<Poly>, Box<Poly>),
    Sub(Box<Poly>, Box<Poly>),
    Mul(Box<Poly>, Box<Poly>),
    Neg(Box<Poly>),
    Pow(Box<Poly>, u32),
}

impl Poly {
    pub fn var(i: usize) -> Poly {
        Poly::Var(i)
    }

    pub fn parse(text: &str) -> Result<Poly, PolyError> {
        let mut p = Parser { chars: text.char_indices().collect(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected input"));
        }
        Ok(e)
    }

    /// One more than the largest variable index used.
    pub fn arity(&self) -> usize {
        match self {
            Poly::Var(i) => i + 1,
            Poly::Int(_) => 0,
            Poly::Add(a, b) | Poly::Sub(a, b) | Poly::Mul(a, b) => a.arity().max(b.arity()),
            Poly::Neg(a) | Poly::Pow(a, _) => a.arity(),
        }
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Poly::Var(i) => {
                out.insert(*i);
            }
            Poly::Int(_) => {}
            Poly::Add(a, b) | Poly::Sub(a, b) | Poly::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Poly::Neg(a) | Poly::Pow(a, _) => a.collect_vars(out),
        }
    }

    /// Left-to-right product of the given factors.
    pub fn product(factors: &[Poly]) -> Option<Poly> {
        let (first, rest) = factors.split_first()?;
        Some(rest.iter().fold(first.clone(), |acc, p| Poly::Mul(acc.into(), p.clone().into())))
    }

    /// Evaluates with `env[i]` bound to variable `i`.
    pub fn eval(&self, ring: &FiniteRing, env: &[ElementId]) -> Result<ElementId, PolyError> {
        match self.eval_inner(ring, env)? {
            Scalar::Elem(e) => Ok(e),
            Scalar::Int(n) => lift(ring, n),
        }
    }

    fn eval_inner(&self, ring: &FiniteRing, env: &[ElementId]) -> Result<Scalar, PolyError> {
        Ok(match self {
            Poly::Var(i) => Scalar::Elem(*env.get(*i).ok_or(PolyError::UnboundVariable(*i))?),
            Poly::Int(n) => Scalar::Int(*n),
            Poly::Add(a, b) => combine(ring, a.eval_inner(ring, env)?, b.eval_inner(ring, env)?, false)?,
            Poly::Sub(a, b) => {
                let nb = negate(ring, b.eval_inner(ring, env)?);
                combine(ring, a.eval_inner(ring, env)?, nb, false)?
            }
            Poly::Mul(a, b) => combine(ring, a.eval_inner(ring, env)?, b.eval_inner(ring, env)?, true)?,
            Poly::Neg(a) => negate(ring, a.eval_inner(ring, env)?),
            Poly::Pow(a, n) => {
                let base = a.eval_inner(ring, env)?;
                let mut acc = base.clone();
                for _ in 1..*n {
                    acc = combine(ring, acc, base.clone(), true)?;
                }
                acc
            }
        })
    }
}

#[derive(Clone)]
enum Scalar {
    Int(i64),
    Elem(ElementId),
}

fn negate(ring: &FiniteRing, v: Scalar) -> Scalar {
    match v {
        Scalar::Int(n) => Scalar::Int(-n),
        Scalar::Elem(e) => Scalar::Elem(ring.neg(e)),
    }
}

fn combine(ring: &FiniteRing, a: Scalar, b: Scalar, mul: bool) -> Result<Scalar, PolyError> {
    Ok(match (a, b, mul) {
        (Scalar::Int(x), Scalar::Int(y), false) => Scalar::Int(x.wrapping_add(y)),
        (Scalar::Int(x), Scalar::Int(y), true) => Scalar::Int(x.wrapping_mul(y)),
        (Scalar::Int(n), Scalar::Elem(e), true) | (Scalar::Elem(e), Scalar::Int(n), true) => {
            Scalar::Elem(ring.scale(e, n))
        }
        (Scalar::Elem(x), Scalar::Elem(y), true) => Scalar::Elem(ring.mul(x, y)),
        (Scalar::Elem(x), Scalar::Elem(y), false) => Scalar::Elem(ring.add(x, y)),
        (Scalar::Int(n), Scalar::Elem(e), false) | (Scalar::Elem(e), Scalar::Int(n), false) => {
            Scalar::Elem(ring.add(lift(ring, n)?, e))
        }
    })
}

/// `n·1`.
fn lift(ring: &FiniteRing, n: i64) -> Result<ElementId, PolyError> {
    let unit = ring_unit(ring).ok_or_else(|| PolyError::NoUnit(ring.name().to_string()))?;
    Ok(ring.scale(unit, n))
}

/// Two-sided multiplicative identity, if any.
pub fn ring_unit(ring: &FiniteRing) -> Option<ElementId> {
    ring.elements()
        .find(|&u| ring.elements().all(|x| ring.mul(u, x) == x && ring.mul(x, u) == x))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Poly::Var(i) => write!(f, "x{}", i + 1),
            Poly::Int(n) => write!(f, "{n}"),
            Poly::Add(a, b) => write!(f, "({a} + {b})"),
            Poly::Sub(a, b) => write!(f, "({a} - {b})"),
            Poly::Mul(a, b) => write!(f, "{a}*{b}"),
            Poly::Neg(a) => write!(f, "-{a}"),
            Poly::Pow(a, n) => write!(f, "{a}^{n}"),
        }
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> PolyError {
        let col = self.chars.get(self.pos).map_or_else(|| self.chars.len(), |(i, _)| *i) + 1;
        PolyError::Syntax { pos: col, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn digits(&mut self) -> Option<u64> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        s.parse().ok()
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut left = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let right = self.term()?;
            left = if c == '+' { Poly::Add(left.into(), right.into()) } else { Poly::Sub(left.into(), right.into()) };
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut left = self.unary()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            left = Poly::Mul(left.into(), self.unary()?.into());
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Poly, PolyError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Poly::Neg(self.unary()?.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let n = self.digits().ok_or_else(|| self.error("expected exponent"))?;
            if n == 0 {
                return Err(PolyError::ZeroExponent);
            }
            let n = u32::try_from(n).map_err(|_| self.error("exponent too large"))?;
            return Ok(Poly::Pow(base.into(), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('x' | 'y') => {
                self.pos += 1;
                match self.digits() {
                    Some(i) if i >= 1 => Ok(Poly::Var(i as usize - 1)),
                    _ => Err(self.error("variables are numbered from 1")),
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.digits().ok_or_else(|| self.error("bad integer"))?;
                i64::try_from(n).map(Poly::Int).map_err(|_| self.error("integer too large"))
            }
            _ => Err(self.error("expected a variable, integer or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{matrix_ring_2x2, ring_mod};

    fn e(i: usize) -> ElementId {
        ElementId(i)
    }

    #[test]
    fn parses_and_evaluates_in_zn() {
        let z13 = ring_mod(13).unwrap();
        let p = Poly::parse("x1^2 + x2^2").unwrap();
        assert_eq!(p.arity(), 2);
        assert_eq!(p.eval(&z13, &[e(3), e(5)]).unwrap(), e((9 + 25) % 13));
        let q = Poly::parse("(x1 + x2)^2 - x1*x2 - x2*x1").unwrap();
        for a in 0..13 {
            for b in 0..13 {
                assert_eq!(p.eval(&z13, &[e(a), e(b)]), q.eval(&z13, &[e(a), e(b)]));
            }
        }
        assert_eq!(Poly::parse("3*x1 + 1").unwrap().eval(&z13, &[e(4)]).unwrap(), e(0));
        assert_eq!(Poly::parse("-x1").unwrap().eval(&z13, &[e(4)]).unwrap(), e(9));
    }

    #[test]
    fn order_matters_in_matrix_ring() {
        let m = matrix_ring_2x2(2).unwrap();
        let xy = Poly::parse("x1*x2").unwrap();
        let yx = Poly::parse("x2*x1").unwrap();
        let differs = m
            .elements()
            .any(|a| m.elements().any(|b| xy.eval(&m, &[a, b]).unwrap() != yx.eval(&m, &[a, b]).unwrap()));
        assert!(differs);
        // The identity matrix [[1,0],[0,1]] has index 1 + 8 = 9.
        assert_eq!(ring_unit(&m), Some(e(9)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(Poly::parse("x1 + "), Err(PolyError::Syntax { .. })));
        assert!(matches!(Poly::parse("x0"), Err(PolyError::Syntax { .. })));
        assert!(matches!(Poly::parse("x1 ^ 0"), Err(PolyError::ZeroExponent)));
        assert!(matches!(Poly::parse("(x1"), Err(PolyError::Syntax { .. })));
        assert!(matches!(Poly::parse("x1 x2"), Err(PolyError::Syntax { pos: 4, .. })));
        assert!(matches!(Poly::parse("x3").unwrap().eval(&ring_mod(5).unwrap(), &[e(1)]), Err(PolyError::UnboundVariable(2))));
    }
}
