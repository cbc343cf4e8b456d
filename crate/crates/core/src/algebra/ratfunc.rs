use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Poly, Scalar};
use crate::error::{Error, Result};

/// A reduced quotient of polynomials with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

#[derive(Deserialize)]
struct RawRatFunc {
    num: Poly,
    #[serde(default = "Poly::one")]
    den: Poly,
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRatFunc::deserialize(d)?;
        RatFunc::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_constant() { (num, den) } else { (num.div_exact(&g)?, den.div_exact(&g)?) };
        let lead = den.lead();
        if !lead.is_one() {
            let inv = lead.inv();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: Scalar) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        RatFunc::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_poly(&self) -> Option<Poly> {
        self.is_polynomial().then(|| self.num.scale(&self.den.lead().inv()))
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::PoleAtCentre(x.to_string()));
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn checked_inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        RatFunc::new(self.den.clone(), self.num.clone()).ok()
    }

    pub fn derivative(&self) -> RatFunc {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        RatFunc::new(n, &self.den * &self.den).expect("nonzero denominator")
    }

    pub fn scale(&self, c: &Scalar) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    /// `f(1/x)`.
    pub fn invert_variable(&self) -> RatFunc {
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        let mut num = self.num.reversed(dn);
        let mut den = self.den.reversed(dd);
        // f(1/x) = x^{dd-dn} rev(num) / rev(den)
        if dd >= dn {
            num = &num * &Poly::monomial(Scalar::one(), dd - dn);
        } else {
            den = &den * &Poly::monomial(Scalar::one(), dn - dd);
        }
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    /// Order of the pole at `c` (0 when regular there).
    pub fn pole_order_at(&self, c: &Scalar) -> usize {
        self.den.valuation_at(c).unwrap_or(0)
    }

    /// Residue at a point where the pole is at most simple.
    pub fn residue_simple(&self, c: &Scalar) -> Result<Scalar> {
        match self.pole_order_at(c) {
            0 => Ok(Scalar::zero()),
            1 => Ok(self.num.eval(c) / self.den.derivative().eval(c)),
            _ => Err(Error::NotLogarithmic(c.to_string())),
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero");
        }
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::new(n, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl Div<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self * &rhs.checked_inv().expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn normalises_to_lowest_terms() {
        let f = RatFunc::new(p(&[-2, 2]), p(&[-3, 0, 3])).unwrap(); // 2(z-1)/(3(z-1)(z+1))
        assert_eq!(f.num(), &Poly::constant(Scalar::ratio(2, 3)));
        assert_eq!(f.den(), &p(&[1, 1]));
        assert!(RatFunc::new(p(&[1]), Poly::zero()).is_err());
    }

    #[test]
    fn arithmetic_and_derivative() {
        let f = RatFunc::new(p(&[1]), p(&[0, 1])).unwrap(); // 1/z
        let g = RatFunc::new(p(&[1]), p(&[-1, 1])).unwrap(); // 1/(z-1)
        let h = &f - &g; // -1/(z(z-1))
        assert_eq!(h, RatFunc::new(p(&[-1]), p(&[0, -1, 1])).unwrap());
        assert_eq!(&(&h / &f) * &f, h);
        assert_eq!(f.derivative(), RatFunc::new(p(&[-1]), p(&[0, 0, 1])).unwrap());
    }

    #[test]
    fn residues_and_inversion() {
        let f = RatFunc::new(p(&[3]), p(&[0, -1, 1])).unwrap(); // 3/(z(z-1))
        assert_eq!(f.residue_simple(&Scalar::zero()).unwrap(), Scalar::from_int(-3));
        assert_eq!(f.residue_simple(&Scalar::one()).unwrap(), Scalar::from_int(3));
        assert_eq!(f.residue_simple(&Scalar::from_int(5)).unwrap(), Scalar::zero());
        let g = RatFunc::new(p(&[1]), p(&[0, 0, 1])).unwrap();
        assert!(g.residue_simple(&Scalar::zero()).is_err());
        // f(1/x) = 3x^2/(1-x)
        let fi = f.invert_variable();
        assert_eq!(fi, RatFunc::new(p(&[0, 0, -3]), p(&[-1, 1])).unwrap());
        assert_eq!(fi.invert_variable(), f);
    }
}
