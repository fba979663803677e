//! Text grammar shared by the command line and tests: rational function
//! expressions in `t`, diagonal forms, closed points, curve literals, and
//! sign sections. Errors carry line and column positions.
//!
//! Point literals: a constant denotes the rational point at that value, a
//! degree-one polynomial denotes its root, `root(p, lo, hi)` the unique real
//! root of p in [lo, hi], a higher-degree polynomial its complex bucket, and
//! `infinity` (or `inf`) the point at infinity.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::exactnum::{sturm_isolate, IntPoly, RatFunc, Rational, RealAlg};
use crate::gersten::CurveSpec;
use crate::quadform::{ClosedPoint, DiagonalForm, TwistBasis};
use crate::realspec::SignSection;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: {}",
            self.line, self.col, self.message
        )
    }
}

impl std::error::Error for ParseError {}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Parser {
    fn new(input: &str) -> Self {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.error(format!("expected '{c}', found '{got}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    /// Consume an identifier-like keyword if it is next, respecting word
    /// boundaries.
    fn eat_keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let mut probe = self.pos;
        for w in word.chars() {
            if self.chars.get(probe).copied() != Some(w) {
                return false;
            }
            probe += 1;
        }
        if matches!(self.chars.get(probe), Some(c) if c.is_alphanumeric() || *c == '_') {
            return false;
        }
        for _ in word.chars() {
            self.bump();
        }
        true
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn parse_digits(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        if digits.is_empty() {
            return Err(self.error("expected a number"));
        }
        Ok(digits.parse().expect("digit string"))
    }

    fn parse_uint(&mut self) -> Result<usize, ParseError> {
        let n = self.parse_digits()?;
        usize::try_from(&n).map_err(|_| self.error("exponent out of range"))
    }

    // expression grammar: sums of products of signed powers of atoms
    fn parse_expr(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = acc.add(&rhs);
                }
                Some('-') => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = acc.add(&rhs.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    acc = acc.mul(&rhs);
                }
                Some('/') => {
                    self.bump();
                    let at = (self.line, self.col);
                    let rhs = self.parse_unary()?;
                    if rhs.is_zero() {
                        return Err(ParseError {
                            line: at.0,
                            col: at.1,
                            message: "division by zero".into(),
                        });
                    }
                    acc = acc.mul(&rhs.recip().expect("nonzero divisor"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RatFunc, ParseError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            return Ok(self.parse_unary()?.neg());
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<RatFunc, ParseError> {
        let base = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.bump();
            let e = self.parse_uint()?;
            let mut acc = RatFunc::from_rational(Rational::from_integer(1.into()));
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<RatFunc, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some('t') => {
                // reject identifiers that merely start with t
                if matches!(self.chars.get(self.pos + 1), Some(c) if c.is_alphanumeric() || *c == '_')
                {
                    return Err(self.error("unknown identifier, the variable is 't'"));
                }
                self.bump();
                Ok(RatFunc::var())
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.parse_digits()?;
                Ok(RatFunc::from_rational(Rational::from_integer(n)))
            }
            Some(c) => Err(self.error(format!("unexpected character '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// Constant expression, used for interval endpoints.
    fn parse_rational(&mut self) -> Result<Rational, ParseError> {
        self.skip_ws();
        let at = (self.line, self.col);
        let e = self.parse_expr()?;
        if !e.is_constant() {
            return Err(ParseError {
                line: at.0,
                col: at.1,
                message: "expected a constant".into(),
            });
        }
        Ok(e.eval(&Rational::zero()).expect("constant has no pole"))
    }

    fn parse_i64(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let neg = if self.peek() == Some('-') {
            self.bump();
            true
        } else {
            false
        };
        let n = self.parse_digits()?;
        let v = i64::try_from(&n).map_err(|_| self.error("value out of range"))?;
        Ok(if neg { -v } else { v })
    }

    /// `root(p, lo, hi)`: the unique real root of p in [lo, hi].
    fn parse_root(&mut self) -> Result<RealAlg, ParseError> {
        self.expect('(')?;
        let at = (self.line, self.col);
        let body = self.parse_expr()?;
        let poly = ratfunc_to_poly(&body).ok_or(ParseError {
            line: at.0,
            col: at.1,
            message: "root takes a polynomial".into(),
        })?;
        self.expect(',')?;
        let lo = self.parse_rational()?;
        self.expect(',')?;
        let hi = self.parse_rational()?;
        self.expect(')')?;
        let err = |message: String| ParseError {
            line: at.0,
            col: at.1,
            message,
        };
        if poly.is_zero() {
            return Err(err("root of the zero polynomial".into()));
        }
        let roots = sturm_isolate(&poly).map_err(|e| err(e.to_string()))?;
        let lo = RealAlg::from_rational(lo);
        let hi = RealAlg::from_rational(hi);
        let mut hits: Vec<RealAlg> = roots
            .into_iter()
            .filter(|r| *r >= lo && *r <= hi)
            .collect();
        match hits.len() {
            0 => Err(err("no real root in the interval".into())),
            1 => Ok(hits.pop().unwrap()),
            n => Err(err(format!("{n} real roots in the interval"))),
        }
    }

    fn parse_real_alg(&mut self) -> Result<RealAlg, ParseError> {
        self.skip_ws();
        if self.eat_keyword("root") {
            return self.parse_root();
        }
        Ok(RealAlg::from_rational(self.parse_rational()?))
    }

    fn parse_point(&mut self) -> Result<ClosedPoint, ParseError> {
        self.skip_ws();
        if self.eat_keyword("infinity") || self.eat_keyword("inf") {
            return Ok(ClosedPoint::Infinity);
        }
        if self.eat_keyword("root") {
            return Ok(ClosedPoint::real(self.parse_root()?));
        }
        let at = (self.line, self.col);
        let e = self.parse_expr()?;
        let err = |message: String| ParseError {
            line: at.0,
            col: at.1,
            message,
        };
        if e.is_constant() {
            let c = e.eval(&Rational::zero()).expect("constant has no pole");
            return Ok(ClosedPoint::rational(c));
        }
        let poly =
            ratfunc_to_poly(&e).ok_or_else(|| err("a point literal must be a polynomial".into()))?;
        match poly.degree() {
            Some(1) => {
                // the rational root of a linear polynomial
                let root = -(poly.coeff(0) / poly.coeff(1));
                Ok(ClosedPoint::rational(root))
            }
            _ => ClosedPoint::complex(poly).map_err(|e| err(e.to_string())),
        }
    }

    /// Balanced-parenthesis scan after `@twist(`, returning the raw name.
    fn parse_twist_suffix(&mut self) -> Result<Option<TwistBasis>, ParseError> {
        self.skip_ws();
        if self.peek() != Some('@') {
            return Ok(None);
        }
        self.bump();
        if !self.eat_keyword("twist") {
            return Err(self.error("expected 'twist' after '@'"));
        }
        self.expect('(')?;
        let mut depth = 1usize;
        let mut name = String::new();
        loop {
            match self.bump() {
                Some('(') => {
                    depth += 1;
                    name.push('(');
                }
                Some(')') => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                    name.push(')');
                }
                Some(c) => name.push(c),
                None => return Err(self.error("unterminated twist name")),
            }
        }
        Ok(Some(TwistBasis::new(name.trim())))
    }

    fn parse_form(&mut self) -> Result<DiagonalForm, ParseError> {
        self.expect('<')?;
        let mut entries = Vec::new();
        self.skip_ws();
        if self.peek() != Some('>') {
            loop {
                entries.push(self.parse_expr()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        let at = (self.line, self.col);
        self.expect('>')?;
        let form = DiagonalForm::ratfunc(entries).map_err(|e| ParseError {
            line: at.0,
            col: at.1,
            message: e.to_string(),
        })?;
        let twist = self.parse_twist_suffix()?;
        Ok(form.with_twist(twist))
    }

    fn parse_curve(&mut self) -> Result<CurveSpec, ParseError> {
        self.skip_ws();
        if self.eat_keyword("P1") {
            return Ok(CurveSpec::P1);
        }
        if !self.eat_keyword("A1") {
            return Err(self.error("expected a curve: P1, A1, or A1 minus {...}"));
        }
        if !self.eat_keyword("minus") {
            return Ok(CurveSpec::A1);
        }
        let at = (self.line, self.col);
        self.expect('{')?;
        let mut points = Vec::new();
        self.skip_ws();
        if self.peek() != Some('}') {
            loop {
                points.push(self.parse_point()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect('}')?;
        CurveSpec::a1_minus(points).map_err(|e| ParseError {
            line: at.0,
            col: at.1,
            message: e.to_string(),
        })
    }

    fn parse_section(&mut self) -> Result<SignSection, ParseError> {
        if !self.eat_keyword("section") {
            return Err(self.error("expected 'section'"));
        }
        self.expect('{')?;
        if !self.eat_keyword("bps") {
            return Err(self.error("expected 'bps'"));
        }
        self.expect('=')?;
        self.expect('[')?;
        let mut bps = Vec::new();
        self.skip_ws();
        if self.peek() != Some(']') {
            loop {
                bps.push(self.parse_real_alg()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect(']')?;
        self.expect(',')?;
        if !self.eat_keyword("vals") {
            return Err(self.error("expected 'vals'"));
        }
        self.expect('=')?;
        self.expect('[')?;
        let mut vals = Vec::new();
        self.skip_ws();
        if self.peek() != Some(']') {
            loop {
                vals.push(self.parse_i64()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
        }
        self.expect(']')?;
        let at = (self.line, self.col);
        self.expect('}')?;
        let twist = self.parse_twist_suffix()?;
        SignSection::new(bps, vals, twist).map_err(|e| ParseError {
            line: at.0,
            col: at.1,
            message: e.to_string(),
        })
    }
}

/// A rational function with constant denominator, cleared to a polynomial.
fn ratfunc_to_poly(e: &RatFunc) -> Option<IntPoly> {
    if e.den().degree() != Some(0) {
        return None;
    }
    let scale = e.den().leading().recip();
    Some(e.num().scale(&scale))
}

pub fn parse_ratfunc(input: &str) -> Result<RatFunc, ParseError> {
    let mut p = Parser::new(input);
    let e = p.parse_expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_form(input: &str) -> Result<DiagonalForm, ParseError> {
    let mut p = Parser::new(input);
    let f = p.parse_form()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_point(input: &str) -> Result<ClosedPoint, ParseError> {
    let mut p = Parser::new(input);
    let x = p.parse_point()?;
    p.finish()?;
    Ok(x)
}

pub fn parse_real_alg(input: &str) -> Result<RealAlg, ParseError> {
    let mut p = Parser::new(input);
    let a = p.parse_real_alg()?;
    p.finish()?;
    Ok(a)
}

pub fn parse_curve(input: &str) -> Result<CurveSpec, ParseError> {
    let mut p = Parser::new(input);
    let c = p.parse_curve()?;
    p.finish()?;
    Ok(c)
}

pub fn parse_section(input: &str) -> Result<SignSection, ParseError> {
    let mut p = Parser::new(input);
    let s = p.parse_section()?;
    p.finish()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::Ordering;

    #[test]
    fn expressions_evaluate() {
        let e = parse_ratfunc("(t^2 - 2) / (3*t + 1)").unwrap();
        let v = e.eval(&Rational::from_integer(2.into())).unwrap();
        assert_eq!(v, Rational::new(2.into(), 7.into()));
        let c = parse_ratfunc("-3/4 + 1").unwrap();
        assert_eq!(
            c.eval(&Rational::zero()).unwrap(),
            Rational::new(1.into(), 4.into())
        );
    }

    #[test]
    fn expression_errors_have_positions() {
        let err = parse_ratfunc("t +\n* 2").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 1);
        let err = parse_ratfunc("1 / (t - t)").unwrap_err();
        assert!(err.message.contains("division by zero"));
    }

    #[test]
    fn forms_round_trip() {
        for text in ["<1, -1>", "<>", "<t, t^2 - 2, 1/2>", "<1, t>@twist((1/t)^*)"] {
            let f = parse_form(text).unwrap();
            let again = parse_form(&f.to_string()).unwrap();
            assert_eq!(f, again);
        }
    }

    #[test]
    fn forms_reject_zero_entries() {
        let err = parse_form("<1, 0>").unwrap_err();
        assert!(err.message.contains("zero"));
    }

    #[test]
    fn points_parse_every_kind() {
        assert_eq!(parse_point("infinity").unwrap(), ClosedPoint::Infinity);
        assert_eq!(
            parse_point("-1/2").unwrap(),
            ClosedPoint::rational(Rational::new((-1).into(), 2.into()))
        );
        assert_eq!(
            parse_point("t - 2").unwrap(),
            ClosedPoint::rational(Rational::from_integer(2.into()))
        );
        let sqrt2 = parse_point("root(t^2 - 2, 1, 2)").unwrap();
        match &sqrt2 {
            ClosedPoint::Real(a) => assert!(a.as_rational().is_none()),
            _ => panic!("expected a real point"),
        }
        let i = parse_point("t^2 + 1").unwrap();
        assert!(matches!(i, ClosedPoint::Complex(_)));
        // a complex literal must have no real roots
        assert!(parse_point("t^2 - 3").is_err());
    }

    #[test]
    fn root_literals_select_uniquely() {
        assert!(parse_real_alg("root(t^2 - 2, -2, 2)").is_err());
        assert!(parse_real_alg("root(t^2 + 1, -2, 2)").is_err());
        let r = parse_real_alg("root(t^3 - 2, 0, 2)").unwrap();
        assert!(r.as_rational().is_none());
        assert!(r > RealAlg::from_rational(Rational::from_integer(1.into())));
        assert!(r < RealAlg::from_rational(Rational::from_integer(2.into())));
        assert_eq!(parse_real_alg(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn curves_parse_and_round_trip() {
        assert_eq!(parse_curve("P1").unwrap(), CurveSpec::P1);
        assert_eq!(parse_curve("A1").unwrap(), CurveSpec::A1);
        let c = parse_curve("A1 minus {0, 1, root(t^2-2,1,2)}").unwrap();
        match &c {
            CurveSpec::A1minus(pts) => assert_eq!(pts.len(), 3),
            _ => panic!("expected a punctured line"),
        }
        let again = parse_curve(&c.to_string()).unwrap();
        assert_eq!(c, again);
        // infinity is not an affine point
        assert!(parse_curve("A1 minus {inf}").is_err());
    }

    #[test]
    fn sections_round_trip() {
        let s = parse_section("section{ bps=[-1, root(t^2-2,1,2)], vals=[2, 0, 2] }").unwrap();
        assert_eq!(s.values().len(), 3);
        let again = parse_section(&s.to_string()).unwrap();
        assert_eq!(s, again);
        assert_eq!(
            s.value_at(&Ordering::FinitePlus(RealAlg::from_rational(Rational::zero()))),
            0
        );
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        assert!(parse_ratfunc("t + 1 junk").is_err());
        assert!(parse_form("<1> <1>").is_err());
        assert!(parse_curve("P1 extra").is_err());
    }
}
