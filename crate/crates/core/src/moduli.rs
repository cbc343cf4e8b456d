//! Parameter and condition counts, the linear constraint systems on the
//! coefficients `H_k^l`, generalized Vandermonde determinants and the
//! parabolic weight maps.

use serde::{Deserialize, Serialize};

use crate::algebra::{Matrix, Poly, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub m: i64,
    pub n: i64,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub e: i64,
    pub c: i64,
    pub parameter_count: i64,
    pub condition_count: i64,
    pub difference: i64,
}

/// `e = 1 − m² + m(m−1)(n+1)/2`, with `n+1` real singular points counting infinity.
pub fn dimensions(m: usize, n: usize, big_n: usize) -> Result<DimensionReport> {
    if m < 1 {
        return Err(Error::Precondition("m must be ≥ 1".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("n must be ≥ 2".into()));
    }
    let (m, n, nn) = (m as i64, n as i64, big_n as i64);
    let e = 1 - m * m + m * (m - 1) * (n + 1) / 2;
    let parameter_count = m + m * (m + 1) * (n + nn - 1) / 2;
    let condition_count = (n + 1) * m - 1 + nn * m * (m + 1) / 2;
    Ok(DimensionReport {
        m,
        n,
        big_n: nn,
        e,
        c: 2 * e,
        parameter_count,
        condition_count,
        difference: parameter_count - condition_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum RowOrigin {
    /// `H_k(p_j)` fixed by the exponents at a real point.
    ExponentReal { j: usize },
    /// Top coefficient fixed by the exponents at infinity.
    TopCoefficient,
    /// `H_k(a_i)` fixed by the special exponents at an apparent point.
    ExponentApparent { i: usize },
    /// `H_k^{(l)}(a_i)` fixed by the apparent-point conditions.
    DerivativeApparent { i: usize, order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub k: usize,
    #[serde(flatten)]
    pub origin: RowOrigin,
    /// Coefficients on the unknowns of block `k` only.
    pub coeffs: Vec<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintBlock {
    pub k: usize,
    /// Unknowns `H_k^0, ..., H_k^{k(N+n−1)}`.
    pub columns: usize,
    pub rows: Vec<ConstraintRow>,
    pub expected_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub unknowns: Vec<String>,
    pub blocks: Vec<ConstraintBlock>,
    pub expected_rank: usize,
}

/// Exponents used to fill right-hand sides: one list per real point and one at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentTargets {
    pub real: Vec<Vec<Scalar>>,
    pub infinity: Vec<Scalar>,
}

/// Row `d^l/db^l (1, b, b², ..., b^{cols−1})` at `b = x`.
pub fn derivative_row(x: &Scalar, order: usize, cols: usize) -> Vec<Scalar> {
    (0..cols)
        .map(|s| {
            if s < order {
                Scalar::zero()
            } else {
                let c = ((s - order + 1)..=s).fold(1i64, |acc, t| acc * t as i64);
                &Scalar::from_int(c) * &x.pow((s - order) as u32)
            }
        })
        .collect()
}

/// `h_k` with `Σ_k h_k [ρ]_{m−k} = [ρ]_m − Π(ρ − μ)`.
fn falling_targets(m: usize, roots: &[Scalar]) -> Vec<Scalar> {
    let q = &Poly::falling_factorial(m) - &Poly::from_roots(roots);
    let b = q.to_falling_basis();
    (1..=m).map(|k| b.get(m - k).cloned().unwrap_or_default()).collect()
}

pub fn build_constraints(
    m: usize,
    points: &[Scalar],
    apparent: &[Scalar],
    targets: Option<&ExponentTargets>,
) -> Result<ConstraintSystem> {
    let all: Vec<&Scalar> = points.iter().chain(apparent).collect();
    for (i, p) in all.iter().enumerate() {
        if all[..i].contains(p) {
            return Err(Error::PointsNotDistinct(p.to_string()));
        }
    }
    build_constraints_unchecked(m, points, apparent, targets)
}

/// As [`build_constraints`] without the distinctness check, so degenerate
/// configurations can be inspected.
pub fn build_constraints_unchecked(
    m: usize,
    points: &[Scalar],
    apparent: &[Scalar],
    targets: Option<&ExponentTargets>,
) -> Result<ConstraintSystem> {
    let (n, big_n) = (points.len(), apparent.len());
    if m < 1 || n + big_n < 1 {
        return Err(Error::Precondition("need m ≥ 1 and at least one finite point".into()));
    }
    if let Some(t) = targets {
        if t.real.len() != n || t.real.iter().any(|e| e.len() != m) || t.infinity.len() != m {
            return Err(Error::DimensionMismatch("targets need m exponents per real point and at infinity".into()));
        }
    }
    let psi = Poly::from_roots(&all_points(points, apparent));
    let dpsi = psi.derivative();
    let real_h: Option<Vec<Vec<Scalar>>> = targets.map(|t| t.real.iter().map(|e| falling_targets(m, e)).collect());
    let inf_h: Option<Vec<Scalar>> = targets.map(|t| {
        let neg: Vec<Scalar> = t.infinity.iter().map(|x| -x).collect();
        falling_targets(m, &neg)
    });
    let special_h = falling_targets(m, &crate::frobenius::special_exponents(m));

    let width = n + big_n - 1;
    let mut unknowns = Vec::new();
    let mut blocks = Vec::new();
    for k in 1..=m {
        let cols = k * width + 1;
        unknowns.extend((0..cols).map(|l| format!("H_{k}^{l}")));
        let mut rows = Vec::new();
        for (j, p) in points.iter().enumerate() {
            let rhs = real_h.as_ref().map(|h| &h[j][k - 1] * &dpsi.eval(p).pow(k as u32));
            rows.push(ConstraintRow {
                k,
                origin: RowOrigin::ExponentReal { j },
                coeffs: derivative_row(p, 0, cols),
                rhs,
            });
        }
        let mut top = vec![Scalar::zero(); cols];
        top[cols - 1] = Scalar::one();
        rows.push(ConstraintRow {
            k,
            origin: RowOrigin::TopCoefficient,
            coeffs: top,
            rhs: inf_h.as_ref().map(|h| h[k - 1].clone()),
        });
        for (i, a) in apparent.iter().enumerate() {
            let rhs = targets.map(|_| &special_h[k - 1] * &dpsi.eval(a).pow(k as u32));
            rows.push(ConstraintRow {
                k,
                origin: RowOrigin::ExponentApparent { i },
                coeffs: derivative_row(a, 0, cols),
                rhs,
            });
        }
        for order in 1..k {
            for (i, a) in apparent.iter().enumerate() {
                rows.push(ConstraintRow {
                    k,
                    origin: RowOrigin::DerivativeApparent { i, order },
                    coeffs: derivative_row(a, order, cols),
                    rhs: None,
                });
            }
        }
        let expected_rank = if k == 1 { n + big_n } else { n + 1 + k * big_n };
        blocks.push(ConstraintBlock { k, columns: cols, rows, expected_rank });
    }
    let expected_rank = (n + 1) * m - 1 + big_n * m * (m + 1) / 2;
    debug_assert_eq!(expected_rank, blocks.iter().map(|b| b.expected_rank).sum::<usize>());
    Ok(ConstraintSystem { m, n, big_n, unknowns, blocks, expected_rank })
}

fn all_points(points: &[Scalar], apparent: &[Scalar]) -> Vec<Scalar> {
    points.iter().chain(apparent).cloned().collect()
}

impl ConstraintBlock {
    pub fn matrix(&self) -> Matrix<Scalar> {
        Matrix::from_fn(self.rows.len(), self.columns, |i, j| self.rows[i].coeffs[j].clone())
    }
}

impl ConstraintSystem {
    /// The full block-diagonal matrix over all unknowns.
    pub fn matrix(&self) -> Matrix<Scalar> {
        let total_rows: usize = self.blocks.iter().map(|b| b.rows.len()).sum();
        let mut out = Matrix::zeros(total_rows, self.unknowns.len());
        let (mut r0, mut c0) = (0, 0);
        for b in &self.blocks {
            for (i, row) in b.rows.iter().enumerate() {
                for (j, v) in row.coeffs.iter().enumerate() {
                    out[(r0 + i, c0 + j)] = v.clone();
                }
            }
            r0 += b.rows.len();
            c0 += b.columns;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRank {
    pub k: usize,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub expected_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub pass: bool,
    pub rank: usize,
    pub expected_rank: usize,
    pub blocks: Vec<BlockRank>,
}

pub fn verify_rank(system: &ConstraintSystem) -> RankReport {
    let blocks: Vec<BlockRank> = system
        .blocks
        .iter()
        .map(|b| BlockRank {
            k: b.k,
            rows: b.rows.len(),
            columns: b.columns,
            rank: b.matrix().rank(),
            expected_rank: b.expected_rank,
        })
        .collect();
    let rank = system.matrix().rank();
    RankReport { pass: rank == system.expected_rank, rank, expected_rank: system.expected_rank, blocks }
}

/// Rows of a generalized Vandermonde matrix: `(point index, derivative order)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativePlan {
    pub points: usize,
    pub columns: usize,
    pub rows: Vec<(usize, usize)>,
}

impl DerivativePlan {
    /// Value rows at all `r+2` points, first-derivative rows at `b_1..b_r`.
    pub fn quadratic(r: usize) -> Self {
        let mut rows: Vec<(usize, usize)> = (0..r + 2).map(|i| (i, 0)).collect();
        rows.extend((0..r).map(|i| (i, 1)));
        DerivativePlan { points: r + 2, columns: 2 * r + 2, rows }
    }

    /// Adds second-derivative rows: values at all points, first derivatives
    /// at `b_1..b_{r+1}`, second derivatives at `b_1..b_r`.
    pub fn cubic(r: usize) -> Self {
        let mut rows: Vec<(usize, usize)> = (0..r + 2).map(|i| (i, 0)).collect();
        rows.extend((0..r + 1).map(|i| (i, 1)));
        rows.extend((0..r).map(|i| (i, 2)));
        DerivativePlan { points: r + 2, columns: 3 * r + 3, rows }
    }
}

pub fn gen_vandermonde(b: &[Scalar], plan: &DerivativePlan) -> Result<Matrix<Scalar>> {
    if b.len() != plan.points || plan.rows.iter().any(|&(i, _)| i >= b.len()) {
        return Err(Error::DimensionMismatch(format!("plan expects {} points, got {}", plan.points, b.len())));
    }
    let rows = plan.rows.iter().map(|&(i, d)| derivative_row(&b[i], d, plan.columns)).collect();
    Matrix::from_rows(rows)
}

/// `(b_{r+1}−b_{r+2})·Π_{i≤r<j}(b_i−b_j)²·Π_{i<j≤r}(b_i−b_j)⁴`.
pub fn vdm_closed_form(b: &[Scalar]) -> Result<Scalar> {
    if b.len() < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    let r = b.len() - 2;
    let mut v = &b[r] - &b[r + 1];
    for i in 0..r {
        for j in [r, r + 1] {
            v = &v * &(&b[i] - &b[j]).pow(2);
        }
        for j in i + 1..r {
            v = &v * &(&b[i] - &b[j]).pow(4);
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeParameters {
    pub beta: Scalar,
    pub lambdas: Vec<Vec<Scalar>>,
    pub alphas: Vec<Vec<Scalar>>,
}

/// `β = (n−1)(m−1)/(2(n+1))`, `λ = (μ−β)/2`, `α = Re μ − ⌊Re μ⌋`.
pub fn hodge_parameters(mu: &[Vec<Scalar>], m: usize, n: usize) -> HodgeParameters {
    let (m, n) = (m as i64, n as i64);
    let beta = Scalar::ratio((n - 1) * (m - 1), 2 * (n + 1));
    let half = Scalar::ratio(1, 2);
    let lambdas = mu.iter().map(|pt| pt.iter().map(|x| &(x - &beta) * &half).collect()).collect();
    let alphas = mu.iter().map(|pt| pt.iter().map(|x| Scalar::real(x.real_fract())).collect()).collect();
    HodgeParameters { beta, lambdas, alphas }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn dimension_examples() {
        let d = dimensions(2, 2, 0).unwrap();
        assert_eq!((d.e, d.c), (0, 0));
        let d = dimensions(2, 3, 1).unwrap();
        assert_eq!((d.parameter_count, d.condition_count, d.difference, d.e), (11, 10, 1, 1));
        let d = dimensions(3, 3, 0).unwrap();
        assert_eq!((d.e, d.c), (4, 8));
        assert!(dimensions(2, 1, 0).is_err());
    }

    #[test]
    fn first_order_systems() {
        let sys = build_constraints(1, &[s(0), s(1)], &[], None).unwrap();
        assert_eq!(sys.blocks[0].rows.len(), 3);
        assert_eq!(sys.blocks[0].columns, 2);
        let r = verify_rank(&sys);
        assert!(r.pass);
        assert_eq!(r.rank, 2);

        let sys = build_constraints(1, &[s(0), s(1)], &[s(2)], None).unwrap();
        assert_eq!(sys.blocks[0].rows.len(), 4);
        assert_eq!(verify_rank(&sys).rank, 3);
    }

    #[test]
    fn rank_with_apparent_point() {
        let sys = build_constraints(2, &[s(0), s(1), s(-3)], &[Scalar::ratio(1, 2)], None).unwrap();
        let r = verify_rank(&sys);
        assert_eq!(r.expected_rank, 10);
        assert!(r.pass, "{r:?}");
        assert!(matches!(build_constraints(2, &[s(0), s(1)], &[s(1)], None), Err(Error::PointsNotDistinct(_))));
        let merged = build_constraints_unchecked(2, &[s(0), s(1), s(2)], &[s(5), s(5)], None).unwrap();
        let r = verify_rank(&merged);
        assert!(r.rank < r.expected_rank);
        let empty = ConstraintSystem { m: 0, n: 0, big_n: 0, unknowns: vec![], blocks: vec![], expected_rank: 0 };
        assert!(verify_rank(&empty).pass);
    }

    #[test]
    fn targets_match_operator_data() {
        // w'' = 0 on {0, 1}: exponents {0, 1} at both points and {0, −1} at infinity
        let t = ExponentTargets { real: vec![vec![s(0), s(1)], vec![s(0), s(1)]], infinity: vec![s(0), s(-1)] };
        let sys = build_constraints(2, &[s(0), s(1)], &[], Some(&t)).unwrap();
        for b in &sys.blocks {
            for row in &b.rows {
                assert!(row.rhs.as_ref().unwrap().is_zero(), "{row:?}");
            }
        }
    }

    #[test]
    fn vandermonde_examples() {
        let b = vec![s(3), s(7)];
        let v = gen_vandermonde(&b, &DerivativePlan::quadratic(0)).unwrap();
        assert_eq!(v, Matrix::from_rows(vec![vec![s(1), s(3)], vec![s(1), s(7)]]).unwrap());
        assert_eq!(vdm_closed_form(&b).unwrap(), s(-4));

        let b = vec![s(0), s(1), s(2)];
        let v = gen_vandermonde(&b, &DerivativePlan::quadratic(1)).unwrap();
        assert_eq!(v.rows(), 4);
        assert_eq!(v.row(3), &[s(0), s(1), s(0), s(0)]);
        assert_eq!(vdm_closed_form(&b).unwrap(), s(-4));
        assert_eq!(v.det().unwrap(), s(4));
        assert!(vdm_closed_form(&[s(1), s(2), s(1)]).unwrap().is_zero());

        let c = gen_vandermonde(&[s(0), s(1), s(2)], &DerivativePlan::cubic(1)).unwrap();
        assert_eq!(c.rows(), 6);
        assert_eq!(c.row(5), &[s(0), s(0), s(2), s(0), s(0), s(0)]);
        assert!(!c.det().unwrap().is_zero());
        assert!(gen_vandermonde(&[s(0)], &DerivativePlan::quadratic(1)).is_err());
    }

    #[test]
    fn hodge_examples() {
        let h = hodge_parameters(&[vec![Scalar::ratio(1, 4), Scalar::ratio(-3, 2)]], 2, 3);
        assert_eq!(h.beta, Scalar::ratio(1, 4));
        assert_eq!(h.lambdas[0][0], s(0));
        assert_eq!(h.alphas[0][1], Scalar::ratio(1, 2));
    }
}
