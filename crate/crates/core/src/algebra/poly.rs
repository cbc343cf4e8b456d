//! Dense univariate polynomials over ℚ(i), lowest degree first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Scalar;
use crate::error::{Error, Result};

/// A polynomial with trailing zero coefficients trimmed, so the stored
/// vector is empty exactly for the zero polynomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::new(vec![c])
    }

    /// The variable itself.
    pub fn x() -> Self {
        Poly::new(vec![Scalar::zero(), Scalar::one()])
    }

    pub fn monomial(c: Scalar, degree: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); degree + 1];
        coeffs[degree] = c;
        Poly::new(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Scalar::from_int(c)).collect())
    }

    /// `x − root`.
    pub fn linear(root: &Scalar) -> Self {
        Poly::new(vec![-root, Scalar::one()])
    }

    /// Monic polynomial with the given roots (with repetition).
    pub fn from_roots(roots: &[Scalar]) -> Self {
        roots.iter().fold(Poly::one(), |acc, r| &acc * &Poly::linear(r))
    }

    /// The falling factorial `x(x−1)···(x−l+1)`; `l = 0` gives 1.
    pub fn falling_factorial(l: usize) -> Self {
        (0..l).fold(Poly::one(), |acc, j| &acc * &Poly::linear(&Scalar::from_int(j as i64)))
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The value of a constant polynomial (including zero).
    pub fn as_constant(&self) -> Option<Scalar> {
        self.is_constant().then(|| self.coeff(0))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the convention `deg 0 = −1`.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * &Scalar::from_int(i as i64)).collect())
    }

    pub fn nth_derivative(&self, k: usize) -> Poly {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| &acc * self)
    }

    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.inv()),
        }
    }

    /// Euclidean division. Errors on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let inv_lead = d.lead().inv();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Scalar::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &inv_lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    let t = &c * dc;
                    rem[i + j] -= &t;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Quotient when `d` divides `self` exactly.
    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.div_rem(d)?;
        if !r.is_zero() {
            return Err(Error::Precondition(format!("{d} does not divide {self}")));
        }
        Ok(q)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p(x + c)`.
    pub fn shift(&self, c: &Scalar) -> Poly {
        // Horner in the shifted basis
        let lin = Poly::new(vec![c.clone(), Scalar::one()]);
        let mut acc = Poly::zero();
        for a in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(a.clone());
        }
        acc
    }

    /// `p(q(x))`.
    pub fn compose(&self, q: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for a in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &Poly::constant(a.clone());
        }
        acc
    }

    /// Coefficients reversed against a nominal degree `d ≥ deg p`, i.e.
    /// `x^d · p(1/x)`.
    pub fn reversed(&self, d: usize) -> Poly {
        let mut c = self.coeffs.clone();
        c.resize(d + 1, Scalar::zero());
        c.reverse();
        Poly::new(c)
    }

    /// Order of vanishing at `c` (`None` for the zero polynomial).
    pub fn valuation_at(&self, c: &Scalar) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let shifted = self.shift(c);
        shifted.coeffs.iter().position(|a| !a.is_zero())
    }

    /// Coefficients of `p` in the falling-factorial basis: returns `b` with
    /// `p = Σ b_j [x]_j`.
    pub fn to_falling_basis(&self) -> Vec<Scalar> {
        let Some(d) = self.degree() else { return Vec::new() };
        let mut rem = self.clone();
        let mut out = vec![Scalar::zero(); d + 1];
        for j in (0..=d).rev() {
            let c = rem.coeff(j);
            if !c.is_zero() {
                rem = &rem - &Poly::falling_factorial(j).scale(&c);
            }
            out[j] = c;
        }
        out
    }

    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> Poly {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = if c.is_real() { c.to_string() } else { format!("({c})") };
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            parts.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => mono,
                (_, "-1") => format!("-{mono}"),
                _ => format!("{cs}*{mono}"),
            });
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    s.push_str(" - ");
                    s.push_str(rest);
                }
                None => {
                    s.push_str(" + ");
                    s.push_str(p);
                }
            }
        }
        s
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("z"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl From<Scalar> for Poly {
    fn from(c: Scalar) -> Self {
        Poly::constant(c)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = a * b;
                out[i + j] += &t;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<Scalar>::deserialize(d).map(Poly::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(Poly::falling_factorial(2).eval(&s(5)), s(20));
        assert_eq!(Poly::falling_factorial(0), Poly::one());
        assert_eq!(Poly::falling_factorial(2), Poly::from_ints(&[0, -1, 1]));
    }

    #[test]
    fn division_and_gcd() {
        let a = Poly::from_roots(&[s(1), s(2), s(3)]);
        let b = Poly::from_roots(&[s(2), s(5)]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(&(&q * &b) + &r, a);
        assert_eq!(a.gcd(&b), Poly::linear(&s(2)));
        assert!(a.div_rem(&Poly::zero()).is_err());
        assert_eq!(Poly::zero().gcd(&Poly::zero()), Poly::zero());
    }

    #[test]
    fn shift_and_reverse() {
        let p = Poly::from_ints(&[1, 2, 3]);
        let c = Scalar::ratio(-1, 3);
        let q = p.shift(&c);
        for x in [-2i64, 0, 1, 7] {
            assert_eq!(q.eval(&s(x)), p.eval(&(s(x) + c.clone())));
        }
        assert_eq!(p.reversed(3), Poly::from_ints(&[0, 3, 2, 1]));
    }

    #[test]
    fn falling_basis_round_trip() {
        let p = Poly::from_ints(&[4, -1, 0, 2, 5]);
        let b = p.to_falling_basis();
        let back = b.iter().enumerate().fold(Poly::zero(), |acc, (j, c)| &acc + &Poly::falling_factorial(j).scale(c));
        assert_eq!(back, p);
    }

    #[test]
    fn valuation_and_display() {
        let p = &Poly::linear(&s(2)).pow(3) * &Poly::from_ints(&[1, 1]);
        assert_eq!(p.valuation_at(&s(2)), Some(3));
        assert_eq!(p.valuation_at(&s(0)), Some(0));
        assert_eq!(Poly::from_ints(&[0, -1, 1]).to_string(), "z^2 - z");
        assert_eq!(Poly::zero().to_string(), "0");
    }
}
