//! Exact arithmetic over ℚ(i): scalars, polynomials, rational functions,
//! truncated series and dense matrices.

mod matrix;
mod poly;
mod ratfunc;
mod roots;
mod scalar;
mod series;

pub use matrix::{char_poly, Field, Matrix, Ring};
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use roots::{complex_roots, poly_root_search, RootMult, RootSearch};
pub use scalar::Scalar;
pub use series::{series_of_rational, TruncatedSeries};

/// `ρ(ρ−1)···(ρ−l+1)` at a concrete value.
pub fn falling_factorial(rho: &Scalar, l: usize) -> Scalar {
    (0..l).fold(Scalar::one(), |acc, j| &acc * &(rho - &Scalar::from_int(j as i64)))
}

/// Exact determinant of a square matrix over ℚ(i).
pub fn det_exact(m: &Matrix<Scalar>) -> crate::Result<Scalar> {
    m.det()
}

pub fn rank_exact(m: &Matrix<Scalar>) -> usize {
    m.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falling_factorial_values() {
        assert_eq!(falling_factorial(&Scalar::from_int(5), 2), Scalar::from_int(20));
        assert_eq!(Poly::falling_factorial(0), Poly::one());
        assert_eq!(Poly::falling_factorial(2), Poly::from_ints(&[0, -1, 1]));
        for l in 1..6 {
            for j in 0..l {
                assert!(falling_factorial(&Scalar::from_int(j as i64), l).is_zero());
            }
        }
    }
}
