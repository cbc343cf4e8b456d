use serde::{Deserialize, Serialize};

use super::{Poly, RatFunc, Scalar};
use crate::error::{Error, Result};

/// Power series `Σ c_l (z − centre)^l` known to `order` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    pub center: Scalar,
    pub coeffs: Vec<Scalar>,
}

impl TruncatedSeries {
    pub fn new(center: Scalar, mut coeffs: Vec<Scalar>, order: usize) -> Self {
        coeffs.resize(order, Scalar::zero());
        TruncatedSeries { center, coeffs }
    }

    /// Taylor expansion of a polynomial.
    pub fn from_poly(p: &Poly, center: &Scalar, order: usize) -> Self {
        let shifted = p.shift(center);
        TruncatedSeries::new(center.clone(), shifted.coeffs().iter().take(order).cloned().collect(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, l: usize) -> &Scalar {
        &self.coeffs[l]
    }

    /// Index of the first nonzero coefficient, `None` if all known terms vanish.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check_centre(&self, other: &Self) {
        assert_eq!(self.center, other.center, "series about different centres");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_centre(other);
        let n = self.order().min(other.order());
        let c = (0..n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        TruncatedSeries::new(self.center.clone(), c, n)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_centre(other);
        let n = self.order().min(other.order());
        let mut out = vec![Scalar::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                let t = &self.coeffs[i] * &other.coeffs[j];
                out[i + j] += &t;
            }
        }
        TruncatedSeries::new(self.center.clone(), out, n)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.order();
        let c0 = self.coeffs.first().filter(|c| !c.is_zero()).ok_or(Error::DivisionByZero)?;
        let inv0 = c0.inv();
        let mut out: Vec<Scalar> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for l in 1..n {
            let mut acc = Scalar::zero();
            for j in 1..=l {
                acc += &(&self.coeffs[j] * &out[l - j]);
            }
            out.push(-(&acc * &inv0));
        }
        Ok(TruncatedSeries::new(self.center.clone(), out, n))
    }
}

/// Taylor coefficients of `f` about `center` to `order` terms.
pub fn series_of_rational(f: &RatFunc, center: &Scalar, order: usize) -> Result<TruncatedSeries> {
    if f.den().eval(center).is_zero() {
        return Err(Error::PoleAtCentre(center.to_string()));
    }
    let num = TruncatedSeries::from_poly(f.num(), center, order);
    let den = TruncatedSeries::from_poly(f.den(), center, order);
    Ok(num.mul(&den.inverse()?))
}
