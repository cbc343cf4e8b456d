//! Plain-text operators for orders up to 3:
//!
//! ```text
//! points: 0, 1
//! apparent: 2
//! w'' = (2*z - 1)/psi w' + (-1/4)/psi^2 w
//! ```
//!
//! Each term pairs a polynomial in `z` with `psi^k` and the derivative
//! `w^{(m−k)}`; `(H/psi^k) w` is accepted as well. Missing terms are zero.

use super::FuchsianOperator;
use crate::algebra::{Poly, Scalar};
use crate::error::{Error, Result};

const MAX_TEXT_ORDER: usize = 3;

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_points(s: &str) -> Result<Vec<Scalar>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

pub fn parse_text(src: &str) -> Result<FuchsianOperator> {
    let mut real = Vec::new();
    let mut apparent = Vec::new();
    let mut equation = None;
    for line in src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("points:") {
            real = parse_points(rest)?;
        } else if let Some(rest) = line.strip_prefix("apparent:") {
            apparent = parse_points(rest)?;
        } else if line.starts_with('w') {
            if equation.is_some() {
                return Err(err("more than one equation line"));
            }
            equation = Some(line);
        } else {
            return Err(err(format!("unrecognised line: {line}")));
        }
    }
    let equation = equation.ok_or_else(|| err("missing equation line"))?;
    let (lhs, rhs) = equation.split_once('=').ok_or_else(|| err("equation needs '='"))?;
    let lhs = lhs.trim();
    let m = lhs
        .strip_prefix('w')
        .filter(|p| p.chars().all(|c| c == '\''))
        .map(str::len)
        .ok_or_else(|| err("left side must be w followed by primes"))?;
    if m == 0 || m > MAX_TEXT_ORDER {
        return Err(err(format!("text form supports orders 1..={MAX_TEXT_ORDER}, got {m}")));
    }
    let mut p = Parser { s: rhs.as_bytes(), pos: 0 };
    let coeffs = p.equation_rhs(m)?;
    FuchsianOperator::new(m, real, apparent, coeffs)
}

pub fn to_text(op: &FuchsianOperator) -> Result<String> {
    let m = op.order();
    if m > MAX_TEXT_ORDER {
        return Err(err(format!("text form supports orders 1..={MAX_TEXT_ORDER}")));
    }
    let join = |v: &[Scalar]| v.iter().map(Scalar::to_string).collect::<Vec<_>>().join(", ");
    let terms: Vec<String> = (1..=m)
        .map(|k| {
            let psi = if k == 1 { "psi".to_string() } else { format!("psi^{k}") };
            format!("({})/{psi} w{}", op.h(k), "'".repeat(m - k))
        })
        .collect();
    Ok(format!(
        "points: {}\napparent: {}\nw{} = {}\n",
        join(op.real_points()),
        join(op.apparent_points()),
        "'".repeat(m),
        terms.join(" + ")
    ))
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(format!("expected '{}' at offset {}", c as char, self.pos)))
        }
    }

    fn starts_with(&mut self, word: &str) -> bool {
        self.skip_ws();
        self.s[self.pos..].starts_with(word.as_bytes())
    }

    fn uint(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| err(format!("expected integer at offset {start}")))
    }

    /// `/psi` or `/psi^k`, returning k (0 when absent).
    fn psi_power(&mut self) -> Result<usize> {
        let save = self.pos;
        if self.eat(b'/') {
            if self.starts_with("psi") {
                self.pos += 3;
                return if self.eat(b'^') { self.uint() } else { Ok(1) };
            }
            self.pos = save;
        }
        Ok(0)
    }

    fn equation_rhs(&mut self, m: usize) -> Result<Vec<Poly>> {
        let mut coeffs = vec![Poly::zero(); m];
        let mut first = true;
        while self.peek().is_some() {
            let negate = if self.eat(b'-') {
                true
            } else {
                if !self.eat(b'+') && !first {
                    return Err(err(format!("expected '+' or '-' at offset {}", self.pos)));
                }
                false
            };
            first = false;
            self.expect(b'(')?;
            let mut h = self.expr()?;
            let mut k = self.psi_power()?;
            self.expect(b')')?;
            k += self.psi_power()?;
            if !self.eat(b'w') {
                return Err(err(format!("expected w at offset {}", self.pos)));
            }
            let mut primes = 0;
            while self.s.get(self.pos) == Some(&b'\'') {
                self.pos += 1;
                primes += 1;
            }
            if primes >= m {
                return Err(err(format!("term w{} has order ≥ {m}", "'".repeat(primes))));
            }
            if k != m - primes {
                return Err(err(format!(
                    "coefficient of w{} must be over psi^{}, got psi^{k}",
                    "'".repeat(primes),
                    m - primes
                )));
            }
            if negate {
                h = -h;
            }
            coeffs[k - 1] = &coeffs[k - 1] + &h;
        }
        Ok(coeffs)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    let save = self.pos;
                    self.pos += 1;
                    if self.starts_with("psi") {
                        self.pos = save;
                        return Ok(acc);
                    }
                    let d = self.factor()?;
                    let c = d
                        .as_constant()
                        .filter(|c| !c.is_zero())
                        .ok_or_else(|| err("division only by nonzero constants"))?;
                    acc = acc.scale(&c.inv());
                }
                Some(c) if c.is_ascii_digit() || c == b'z' || c == b'i' || c == b'(' || c == b'.' => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.base()?;
        if self.eat(b'^') {
            let e = self.uint()?;
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Poly::x())
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Poly::constant(Scalar::i()))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                Ok(Poly::constant(t.parse()?))
            }
            _ => Err(err(format!("unexpected input at offset {}", self.pos))),
        }
    }
}
