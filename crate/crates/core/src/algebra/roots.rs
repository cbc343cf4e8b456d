//! Root extraction over ℚ(i).
//!
//! Roots are isolated numerically and then confirmed exactly: after clearing
//! denominators a root `r` of an integral polynomial with leading coefficient
//! `a` satisfies `a·r ∈ ℤ[i]`, so rounding `a·r` to the lattice and testing
//! the candidate exactly never accepts a false root.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{Poly, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootMult {
    pub root: Scalar,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSearch {
    pub roots: Vec<RootMult>,
    /// Factor left after dividing out every extracted root.
    pub remainder: Poly,
    /// True when the remainder has positive degree, i.e. some roots lie outside ℚ(i).
    pub unfactored: bool,
}

impl RootSearch {
    /// Roots repeated by multiplicity, when the factorisation is complete.
    pub fn all_roots(&self) -> Option<Vec<Scalar>> {
        if self.unfactored {
            return None;
        }
        Some(self.roots.iter().flat_map(|r| std::iter::repeat_n(r.root.clone(), r.multiplicity)).collect())
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// All ℚ(i) roots of `p` with multiplicity; anything else is left in `remainder`.
pub fn poly_root_search(p: &Poly) -> Result<RootSearch> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut rest = p.monic();
    let mut found: Vec<RootMult> = Vec::new();
    // A second pass on the deflated factor picks up roots the first numeric
    // sweep resolved poorly.
    for _ in 0..3 {
        if rest.is_constant() {
            break;
        }
        let sqfree = square_free_part(&rest);
        let candidates = lattice_candidates(&sqfree);
        if candidates.is_empty() {
            break;
        }
        for root in candidates {
            let mut mult = 0;
            let lin = Poly::linear(&root);
            while !rest.is_constant() && rest.eval(&root).is_zero() {
                rest = rest.div_exact(&lin)?;
                mult += 1;
            }
            if mult > 0 {
                found.push(RootMult { root, multiplicity: mult });
            }
        }
    }
    found.sort_by(|a, b| (a.root.re(), a.root.im()).cmp(&(b.root.re(), b.root.im())));
    let unfactored = !rest.is_constant();
    Ok(RootSearch { roots: found, remainder: rest, unfactored })
}

fn square_free_part(p: &Poly) -> Poly {
    let g = p.gcd(&p.derivative());
    if g.is_constant() {
        p.clone()
    } else {
        p.div_exact(&g).expect("gcd divides").monic()
    }
}

/// Clears denominators, returning Gaussian-integer coefficients as (re, im) pairs.
fn integral_coeffs(p: &Poly) -> Vec<(BigInt, BigInt)> {
    let l = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.denom_lcm()));
    let lr = BigRational::from_integer(l);
    p.coeffs()
        .iter()
        .map(|c| {
            let re = c.re() * &lr;
            let im = c.im() * &lr;
            (re.to_integer(), im.to_integer())
        })
        .collect()
}

fn big_to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or(f64::NAN)
}

fn lattice_candidates(sqfree: &Poly) -> Vec<Scalar> {
    let ints = integral_coeffs(sqfree);
    let (lre, lim) = ints.last().cloned().expect("nonconstant");
    let lead = Scalar::new(BigRational::from_integer(lre.clone()), BigRational::from_integer(lim.clone()));
    let lead_f = Complex64::new(big_to_f64(&lre), big_to_f64(&lim));
    let cf: Vec<Complex64> = ints.iter().map(|(a, b)| Complex64::new(big_to_f64(a), big_to_f64(b))).collect();
    if cf.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Vec::new();
    }
    let mut out: Vec<Scalar> = Vec::new();
    for r in complex_roots(&cf) {
        let t = r * lead_f;
        if !t.re.is_finite() || !t.im.is_finite() {
            continue;
        }
        let (br, bi) = (t.re.round(), t.im.round());
        'grid: for dr in [0.0, -1.0, 1.0] {
            for di in [0.0, -1.0, 1.0] {
                let g = Scalar::new(
                    BigRational::from_integer(BigInt::from((br + dr) as i128)),
                    BigRational::from_integer(BigInt::from((bi + di) as i128)),
                );
                let cand = &g / &lead;
                if sqfree.eval(&cand).is_zero() {
                    if !out.contains(&cand) {
                        out.push(cand);
                    }
                    break 'grid;
                }
            }
        }
    }
    out
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Numeric roots of a complex polynomial (coefficients lowest degree first)
/// by Aberth–Ehrlich iteration followed by Newton polishing.
pub fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let mut zeros = 0;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zeros += 1;
    }
    let n = c.len().saturating_sub(1);
    let mut roots = vec![Complex64::zero(); zeros];
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    if n == 1 {
        roots.push(-c[0]);
        return roots;
    }
    // Fujiwara bound for the initial circle.
    let radius = (0..n).map(|k| c[k].norm().powf(1.0 / (n - k) as f64)).fold(0.0_f64, f64::max).max(1e-3);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4)).collect();
    for _ in 0..1000 {
        let mut moved = 0.0_f64;
        for k in 0..n {
            let (p, dp) = horner(&c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&c, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots.extend(z);
    roots
}
