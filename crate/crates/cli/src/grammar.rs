//! Recursive-descent parser for polynomial generators, complex literals and
//! Blaschke product specs.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*')? unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number 'i'? | 'i' | 'z' | 'w' | '(' expr ')'
//! ```
//!
//! Whitespace is ignored everywhere. Juxtaposition multiplies, so `2zw` and
//! `(0.5+0i)*z` are both accepted.

use std::collections::BTreeMap;

use bdk_core::{BiPoint, BlaschkeProduct, Complex64, Series2D};

use crate::error::CliError;

/// Sparse polynomial in z, w keyed by exponents (i, j).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<(usize, usize), Complex64>,
}

impl Polynomial {
    fn constant(c: Complex64) -> Self {
        let mut p = Self::default();
        p.add_term((0, 0), c);
        p
    }

    fn monomial(i: usize, j: usize) -> Self {
        let mut p = Self::default();
        p.add_term((i, j), Complex64::new(1.0, 0.0));
        p
    }

    fn add_term(&mut self, exps: (usize, usize), c: Complex64) {
        let entry = self.terms.entry(exps).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&exps);
        }
    }

    fn add(mut self, other: &Polynomial, sign: f64) -> Self {
        for (&e, &c) in &other.terms {
            self.add_term(e, c * sign);
        }
        self
    }

    fn mul(&self, other: &Polynomial) -> Self {
        let mut out = Self::default();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }

    fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has no z or w terms.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.len() {
            0 => Some(Complex64::new(0.0, 0.0)),
            1 => self.terms.get(&(0, 0)).copied(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn to_series(&self) -> Series2D {
        let t: Vec<(Complex64, usize, usize)> =
            self.terms.iter().map(|(&(i, j), &c)| (c, i, j)).collect();
        Series2D::from_terms(&t)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn new(source: &'a str) -> Self {
        Self {
            chars: source.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            source,
        }
    }

    fn error(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::Parse(format!(
            "{msg} in {:?} (at character {})",
            self.source, self.pos
        ))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(self, p: Polynomial) -> Result<Polynomial, CliError> {
        match self.peek() {
            None => Ok(p),
            Some(c) => Err(self.error(format!("unexpected {c:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Polynomial, CliError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?, 1.0);
            } else if self.eat('-') {
                acc = acc.add(&self.term()?, -1.0);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || matches!(c, '.' | '(' | 'z' | 'w' | 'i'))
    }

    fn term(&mut self) -> Result<Polynomial, CliError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') || self.starts_atom() {
                acc = acc.mul(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, CliError> {
        if self.eat('-') {
            return Ok(Polynomial::default().add(&self.unary()?, -1.0));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, CliError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: u32 = digits
            .parse()
            .map_err(|_| self.error("expected a non-negative integer exponent"))?;
        if n > 1000 {
            return Err(self.error("exponent too large"));
        }
        Ok(base.pow(n))
    }

    fn atom(&mut self) -> Result<Polynomial, CliError> {
        match self.peek() {
            Some('z') => {
                self.pos += 1;
                Ok(Polynomial::monomial(1, 0))
            }
            Some('w') => {
                self.pos += 1;
                Ok(Polynomial::monomial(0, 1))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Polynomial::constant(Complex64::new(0.0, 1.0)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.number()?;
                if self.eat('i') {
                    Ok(Polynomial::constant(Complex64::new(0.0, value)))
                } else {
                    Ok(Polynomial::constant(Complex64::new(value, 0.0)))
                }
            }
            Some(c) => Err(self.error(format!("unexpected {c:?}"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64, CliError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(format!("malformed number {text:?}")))?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.error("non-finite number"))
        }
    }
}

/// Parses one polynomial expression in z and w.
pub fn parse_polynomial(source: &str) -> Result<Polynomial, CliError> {
    let mut p = Parser::new(source);
    if p.peek().is_none() {
        return Err(CliError::Parse("empty expression".into()));
    }
    let poly = p.expr()?;
    p.finish(poly)
}

/// Splits on commas or semicolons outside parentheses.
fn split_top_level(source: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (idx, c) in source.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                parts.push(&source[start..idx]);
                start = idx + 1;
            }
            _ => {}
        }
    }
    parts.push(&source[start..]);
    parts
}

/// Parses a comma-separated generator list such as `"z-w, z^2"`.
pub fn parse_generators(source: &str) -> Result<Vec<Polynomial>, CliError> {
    if source.trim().is_empty() {
        return Err(CliError::Parse("empty generator list".into()));
    }
    let mut out = Vec::new();
    for part in split_top_level(source) {
        let p = parse_polynomial(part)?;
        if p.is_zero() {
            return Err(CliError::Parse(format!(
                "generator {:?} is identically zero",
                part.trim()
            )));
        }
        out.push(p);
    }
    Ok(out)
}

/// Parses a complex literal such as `0.3`, `-0.4i` or `(0.5+0.2i)`.
pub fn parse_complex(source: &str) -> Result<Complex64, CliError> {
    parse_polynomial(source)?
        .as_constant()
        .ok_or_else(|| CliError::Parse(format!("{source:?} is not a constant")))
}

/// Parses a point `a,b` of the bidisk.
pub fn parse_point(source: &str) -> Result<BiPoint, CliError> {
    match split_top_level(source).as_slice() {
        [a, b] => Ok(BiPoint::new(parse_complex(a)?, parse_complex(b)?)),
        _ => Err(CliError::Parse(format!(
            "point {source:?} must have the form a,b"
        ))),
    }
}

/// Parses an order list `0,1,2`.
pub fn parse_orders(source: &str) -> Result<Vec<usize>, CliError> {
    let orders: Result<Vec<usize>, _> = source
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect();
    match orders {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Parse(format!(
            "orders {source:?} must be a list of non-negative integers"
        ))),
    }
}

/// Parses `zeros=0.5,0.3i;gamma=1`. `gamma` defaults to 1; the shorthands
/// `z`/`w` (identity) and `z^d`/`w^d` (powers) are accepted.
pub fn parse_blaschke(source: &str) -> Result<BlaschkeProduct, CliError> {
    let compact: String = source.chars().filter(|c| !c.is_whitespace()).collect();
    let shorthand = if compact.contains('=') {
        None
    } else {
        compact
            .strip_prefix('z')
            .or_else(|| compact.strip_prefix('w'))
    };
    if let Some(rest) = shorthand {
        let degree = match rest {
            "" => 1,
            _ => rest
                .strip_prefix('^')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|d| *d >= 1)
                .ok_or_else(|| {
                    CliError::Parse(format!("malformed Blaschke shorthand {source:?}"))
                })?,
        };
        return BlaschkeProduct::power(degree).map_err(|e| CliError::Parse(e.to_string()));
    }
    let mut zeros = None;
    let mut gamma = Complex64::new(1.0, 0.0);
    for field in compact.split(';').filter(|f| !f.is_empty()) {
        let (key, value) = field.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("Blaschke field {field:?} must be key=value"))
        })?;
        match key {
            "zeros" => {
                let list: Result<Vec<Complex64>, CliError> = split_top_level(value)
                    .into_iter()
                    .map(parse_complex)
                    .collect();
                zeros = Some(list?);
            }
            "gamma" => gamma = parse_complex(value)?,
            other => return Err(CliError::Parse(format!("unknown Blaschke field {other:?}"))),
        }
    }
    let zeros =
        zeros.ok_or_else(|| CliError::Parse(format!("Blaschke spec {source:?} has no zeros")))?;
    BlaschkeProduct::new(zeros, gamma).map_err(|e| CliError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn binomial_expansion() {
        let p = parse_polynomial("(z+w)^2").unwrap();
        let terms: Vec<_> = p.terms().collect();
        assert_eq!(
            terms,
            vec![
                ((0, 2), c(1.0, 0.0)),
                ((1, 1), c(2.0, 0.0)),
                ((2, 0), c(1.0, 0.0))
            ]
        );
    }

    #[test]
    fn complex_literals_and_juxtaposition() {
        let p = parse_polynomial("(0.5+0i)*z - w").unwrap();
        assert_eq!(
            p.terms().collect::<Vec<_>>(),
            vec![((0, 1), c(-1.0, 0.0)), ((1, 0), c(0.5, 0.0))]
        );
        assert_eq!(
            parse_polynomial("2zw").unwrap(),
            parse_polynomial("2 * z * w").unwrap()
        );
        assert_eq!(parse_complex("-0.4i").unwrap(), c(0.0, -0.4));
        assert_eq!(parse_complex("1e-1+2i").unwrap(), c(0.1, 2.0));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "z^", "z+", "(z", "z)", "x", "z^-1", "1..2"] {
            assert!(parse_polynomial(bad).is_err(), "{bad}");
        }
        assert!(parse_generators("  ").is_err());
        assert!(parse_generators("z-z").is_err());
    }

    #[test]
    fn generator_lists_respect_parentheses() {
        assert_eq!(parse_generators("z-w, z^2").unwrap().len(), 2);
        assert_eq!(parse_generators("(0.5+0i)*z - w").unwrap().len(), 1);
        let p = parse_point("0.3,(0-0.4i)").unwrap();
        assert_eq!(p, BiPoint::new(c(0.3, 0.0), c(0.0, -0.4)));
    }

    #[test]
    fn blaschke_specs() {
        let b = parse_blaschke("zeros=0.5,0.3i;gamma=1").unwrap();
        assert_eq!(b.zeros(), &[c(0.5, 0.0), c(0.0, 0.3)]);
        assert_eq!(parse_blaschke("z^3").unwrap().degree(), 3);
        assert_eq!(parse_blaschke("w").unwrap(), BlaschkeProduct::identity());
        assert!(parse_blaschke("zeros=1.5").is_err());
        assert!(parse_blaschke("gamma=1").is_err());
        assert!(parse_blaschke("zeros=0.1;gamma=2").is_err());
    }
}
