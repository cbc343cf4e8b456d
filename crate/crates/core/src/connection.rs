//! Logarithmic connections attached to scalar operators.
//!
//! Horizontal sections are row vectors: `u' = u·B` with `B = A/ψ` and
//! `u = (w, ψw', ψ²w'', ...)`. A gauge `g` acts by `u ↦ u·g`, giving
//! `B ↦ g⁻¹Bg + g⁻¹g'`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::algebra::{char_poly, poly_root_search, Matrix, Poly, RatFunc, Scalar};
use crate::error::{Error, Result};
use crate::operator::FuchsianOperator;

/// A point of the projective line.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Finite(Scalar),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(p) => write!(f, "{p}"),
            Point::Infinity => f.write_str("infinity"),
        }
    }
}

impl FromStr for Point {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Point::Infinity),
            other => other.parse().map(Point::Finite),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Finite(p) => p.serialize(s),
            Point::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        if v.as_str().is_some_and(|s| matches!(s, "inf" | "infinity" | "oo")) {
            return Ok(Point::Infinity);
        }
        Scalar::deserialize(v).map(Point::Finite).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Affine,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogConnection {
    pub size: usize,
    pub matrix: Matrix<RatFunc>,
    pub pole_points: Vec<Scalar>,
    pub chart: Chart,
}

/// The polynomial matrix `A` with sub-diagonal ones, diagonal `kψ'`, last
/// column `H_m, ..., H_2` and `H_1 + (m−1)ψ'` in the corner.
pub fn companion_matrix(op: &FuchsianOperator) -> Matrix<Poly> {
    let m = op.order();
    let dpsi = op.psi_all().derivative();
    Matrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            if i == m - 1 {
                op.h(1) + &dpsi.scale(&Scalar::from_int(i as i64))
            } else {
                op.h(m - i).clone()
            }
        } else if i == j {
            dpsi.scale(&Scalar::from_int(i as i64))
        } else if i == j + 1 {
            Poly::one()
        } else {
            Poly::zero()
        }
    })
}

pub fn build_companion(op: &FuchsianOperator) -> Result<LogConnection> {
    op.ensure_valid()?;
    let psi = RatFunc::from_poly(op.psi_all());
    let a = companion_matrix(op);
    Ok(LogConnection {
        size: op.order(),
        matrix: a.map(|p| &RatFunc::from_poly(p.clone()) / &psi),
        pole_points: op.all_points(),
        chart: Chart::Affine,
    })
}

/// `diag(1, −z^{n−1}, z^{2(n−1)}, ...)`, relating the affine frame to a
/// frame regular at infinity. `n` counts all finite singular points.
pub fn infinity_gauge(m: usize, n: usize) -> Matrix<Poly> {
    let step = n.saturating_sub(1);
    Matrix::from_fn(m, m, |i, j| {
        if i != j {
            return Poly::zero();
        }
        let sign = if i % 2 == 0 { 1 } else { -1 };
        Poly::monomial(Scalar::from_int(sign), i * step)
    })
}

fn to_rat(m: &Matrix<Poly>) -> Matrix<RatFunc> {
    m.map(|p| RatFunc::from_poly(p.clone()))
}

/// `B ↦ g⁻¹Bg + g⁻¹g'`.
pub fn apply_gauge(conn: &LogConnection, g: &Matrix<RatFunc>) -> Result<LogConnection> {
    if g.rows() != conn.size || !g.is_square() {
        return Err(Error::DimensionMismatch("gauge size differs from connection".into()));
    }
    let ginv = g.inverse()?;
    let dg = g.map(RatFunc::derivative);
    let b = ginv.mul(&conn.matrix)?.mul(g)?.add(&ginv.mul(&dg)?)?;
    Ok(LogConnection { matrix: b, ..conn.clone() })
}

pub fn apply_poly_gauge(conn: &LogConnection, g: &Matrix<Poly>) -> Result<LogConnection> {
    apply_gauge(conn, &to_rat(g))
}

impl LogConnection {
    /// `ψ·B` when it is polynomial, with `ψ` the product over the pole points.
    pub fn numerator_matrix(&self) -> Option<Matrix<Poly>> {
        let psi = RatFunc::from_poly(Poly::from_roots(&self.pole_points));
        let rows: Option<Vec<Vec<Poly>>> =
            (0..self.size).map(|i| (0..self.size).map(|j| (&self.matrix[(i, j)] * &psi).as_poly()).collect()).collect();
        rows.and_then(|r| Matrix::from_rows(r).ok())
    }

    /// The connection in the coordinate `ζ = 1/z`, after the infinity gauge.
    pub fn infinity_chart(&self) -> Result<LogConnection> {
        if self.chart != Chart::Affine {
            return Err(Error::Precondition("connection is already in the infinity chart".into()));
        }
        let g = to_rat(&infinity_gauge(self.size, self.pole_points.len()));
        let gauged = apply_gauge(self, &g.inverse()?)?;
        let minus_zeta2 = RatFunc::from_poly(Poly::monomial(Scalar::from_int(-1), 2));
        let matrix = gauged.matrix.map(|f| &f.invert_variable() / &minus_zeta2);
        let pole_points = std::iter::once(Scalar::zero())
            .chain(self.pole_points.iter().filter(|p| !p.is_zero()).map(Scalar::inv))
            .collect();
        Ok(LogConnection { size: self.size, matrix, pole_points, chart: Chart::Infinity })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentData {
    pub point: Point,
    pub exponent_matrix: Matrix<Scalar>,
    pub char_poly: Poly,
    /// Roots in ℚ(i), repeated by multiplicity.
    pub eigenvalues: Vec<Scalar>,
    /// Factor of the characteristic polynomial with no ℚ(i) roots, if any.
    pub unfactored: Option<Poly>,
    /// True when the connection is holomorphic at the point.
    pub ordinary: bool,
}

fn residue_matrix(b: &Matrix<RatFunc>, p: &Scalar) -> Result<(Matrix<Scalar>, bool)> {
    let n = b.rows();
    let mut ordinary = true;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let f = &b[(i, j)];
            if f.pole_order_at(p) > 0 {
                ordinary = false;
            }
            out[(i, j)] = f.residue_simple(p)?;
        }
    }
    Ok((out, ordinary))
}

pub fn exponent_data(conn: &LogConnection, point: &Point) -> Result<ExponentData> {
    let (m, ordinary) = match (point, conn.chart) {
        (Point::Finite(p), _) => residue_matrix(&conn.matrix, p)?,
        (Point::Infinity, Chart::Affine) => residue_matrix(&conn.infinity_chart()?.matrix, &Scalar::zero())?,
        (Point::Infinity, Chart::Infinity) => {
            return Err(Error::Precondition("use the affine chart for the point at infinity".into()))
        }
    };
    let cp = char_poly(&m)?;
    let roots = poly_root_search(&cp)?;
    let eigenvalues = roots.roots.iter().flat_map(|r| std::iter::repeat_n(r.root.clone(), r.multiplicity)).collect();
    Ok(ExponentData {
        point: point.clone(),
        exponent_matrix: m,
        char_poly: cp,
        eigenvalues,
        unfactored: roots.unfactored.then_some(roots.remainder),
        ordinary,
    })
}

/// Exponent data at every finite singular point followed by infinity.
pub fn all_exponent_data(op: &FuchsianOperator) -> Result<Vec<ExponentData>> {
    let conn = build_companion(op)?;
    op.all_points()
        .into_iter()
        .map(Point::Finite)
        .chain(std::iter::once(Point::Infinity))
        .map(|p| exponent_data(&conn, &p))
        .collect()
}

fn trace(m: &Matrix<Scalar>) -> Scalar {
    (0..m.rows()).map(|i| m[(i, i)].clone()).sum()
}

/// Sum of the traces of all exponent matrices, infinity included.
pub fn trace_sum(op: &FuchsianOperator) -> Result<Scalar> {
    Ok(all_exponent_data(op)?.iter().map(|d| trace(&d.exponent_matrix)).sum())
}

/// `(n−1)m(m−1)/2` with `n` the number of finite singular points.
pub fn fuchs_relation_value(op: &FuchsianOperator) -> Scalar {
    let n = op.finite_count() as i64;
    let m = op.order() as i64;
    Scalar::from_int((n - 1) * m * (m - 1) / 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleType {
    pub degrees: Vec<i64>,
    pub total: i64,
}

pub fn bundle_type(op: &FuchsianOperator) -> Result<BundleType> {
    if op.big_n() != 0 {
        return Err(Error::Precondition("bundle type is defined for operators without apparent points".into()));
    }
    let n = op.n() as i64;
    let degrees: Vec<i64> = (0..op.order() as i64).map(|k| k * (1 - n)).collect();
    let total = degrees.iter().sum();
    Ok(BundleType { degrees, total })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub unknowns: usize,
    /// Dimension of all (possibly singular) polynomial solutions `g`.
    pub linear_solution_dim: usize,
    /// Whether some solution is invertible, i.e. the connections are gauge equivalent.
    pub gauge_exists: bool,
    /// Dimension of the solution space when a gauge exists; `None` means empty.
    pub dimension: Option<usize>,
    pub is_scalars: bool,
}

pub const RIGIDITY_MAX_ORDER: usize = 3;

/// Solves `g·A₂ − A₁·g − ψ·g' = 0` for lower-triangular `g` with constant
/// diagonal and `deg g_{kl} ≤ (k−l)(n−1)`.
pub fn companion_rigidity_check(op1: &FuchsianOperator, op2: &FuchsianOperator) -> Result<RigidityReport> {
    let m = op1.order();
    if m > RIGIDITY_MAX_ORDER {
        return Err(Error::Precondition(format!("rigidity check supports m ≤ {RIGIDITY_MAX_ORDER}, got {m}")));
    }
    if op2.order() != m {
        return Err(Error::Precondition("operators have different orders".into()));
    }
    if op1.big_n() + op2.big_n() > 0 {
        return Err(Error::Precondition("rigidity check requires N = 0".into()));
    }
    let mut p1 = op1.real_points().to_vec();
    let mut p2 = op2.real_points().to_vec();
    p1.sort_by(|a, b| (a.re(), a.im()).cmp(&(b.re(), b.im())));
    p2.sort_by(|a, b| (a.re(), a.im()).cmp(&(b.re(), b.im())));
    if p1 != p2 {
        return Err(Error::Precondition("operators must share their singular points".into()));
    }
    op1.ensure_valid()?;
    op2.ensure_valid()?;
    let a1 = companion_matrix(op1);
    let a2 = companion_matrix(op2);
    let psi = op1.psi_all();
    let step = op1.n().saturating_sub(1);

    // unknown u ↦ (k, l, power)
    let mut unknowns = Vec::new();
    for k in 0..m {
        for l in 0..=k {
            for s in 0..=(k - l) * step {
                unknowns.push((k, l, s));
            }
        }
    }
    let residuals: Vec<Vec<Poly>> = unknowns
        .iter()
        .map(|&(k, l, s)| {
            let mut g = Matrix::<Poly>::zeros(m, m);
            g[(k, l)] = Poly::monomial(Scalar::one(), s);
            let dg = g.map(|p| &p.derivative() * &psi);
            let r = g.mul(&a2).and_then(|x| x.sub(&a1.mul(&g)?)).and_then(|x| x.sub(&dg)).expect("square shapes");
            r.to_rows().into_iter().flatten().collect()
        })
        .collect();
    let width = residuals.iter().flatten().map(|p| p.coeffs().len()).max().unwrap_or(0);
    let system = Matrix::from_fn(m * m * width, unknowns.len(), |r, c| residuals[c][r / width].coeff(r % width));
    let null = system.nullspace();
    let diag_idx: Vec<usize> = unknowns.iter().enumerate().filter(|(_, &(k, l, _))| k == l).map(|(i, _)| i).collect();
    let gauge_exists = !null.is_empty() && diag_idx.iter().all(|&i| null.iter().any(|v| !v[i].is_zero()));
    let is_scalars = null.len() == 1 && {
        let v = &null[0];
        let d0 = &v[diag_idx[0]];
        unknowns.iter().enumerate().all(|(i, &(k, l, _))| if k == l { &v[i] == d0 } else { v[i].is_zero() })
    };
    Ok(RigidityReport {
        unknowns: unknowns.len(),
        linear_solution_dim: null.len(),
        gauge_exists,
        dimension: gauge_exists.then_some(null.len()),
        is_scalars,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenericityWitness {
    /// Two exponents at one point differ by an integer.
    Difference { point: usize, i: usize, j: usize, difference: Scalar },
    /// Choosing `k` exponents at every point gives an integral sum.
    Selection { k: usize, indices: Vec<Vec<usize>>, sum: Scalar },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub generic: bool,
    pub witness: Option<GenericityWitness>,
}

pub const SELECTION_LIMIT: u128 = 10_000_000;

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Non-resonance and the k-tuple sum condition on per-point exponents.
pub fn genericity_check(exponents: &[Vec<Scalar>]) -> Result<GenericityReport> {
    let m = exponents.first().map(Vec::len).ok_or_else(|| Error::Precondition("no points given".into()))?;
    if m == 0 || exponents.iter().any(|e| e.len() != m) {
        return Err(Error::DimensionMismatch("every point needs the same positive number of exponents".into()));
    }
    for k in 1..m {
        let c = binomial(BigInt::from(m), BigInt::from(k));
        let total = num_traits::pow(c, exponents.len());
        if total > BigInt::from(SELECTION_LIMIT) {
            return Err(Error::TooManySelections {
                selections: total.to_u128().unwrap_or(u128::MAX),
                limit: SELECTION_LIMIT,
            });
        }
    }
    for (pi, e) in exponents.iter().enumerate() {
        for i in 0..m {
            for j in i + 1..m {
                let d = &e[i] - &e[j];
                if d.is_integer() {
                    return Ok(GenericityReport {
                        generic: false,
                        witness: Some(GenericityWitness::Difference { point: pi, i, j, difference: d }),
                    });
                }
            }
        }
    }
    for k in 1..m {
        let combos = combinations(m, k);
        // Partial sums keyed by their class modulo ℤ, one witness per class.
        let mut states: Vec<(Scalar, Vec<Vec<usize>>)> = vec![(Scalar::zero(), Vec::new())];
        for e in exponents {
            let mut next: Vec<(Scalar, Vec<Vec<usize>>)> = Vec::new();
            let mut seen: std::collections::HashSet<(BigRational, BigRational)> = Default::default();
            for (sum, idx) in &states {
                for c in &combos {
                    let s = c.iter().fold(sum.clone(), |acc, &i| acc + e[i].clone());
                    let key = (s.real_fract(), s.im().clone());
                    if seen.insert(key) {
                        let mut idx = idx.clone();
                        idx.push(c.clone());
                        next.push((s, idx));
                    }
                }
            }
            states = next;
        }
        if let Some((sum, indices)) = states.into_iter().find(|(s, _)| s.is_integer()) {
            return Ok(GenericityReport {
                generic: false,
                witness: Some(GenericityWitness::Selection { k, indices, sum }),
            });
        }
    }
    Ok(GenericityReport { generic: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn op(m: usize, pts: &[i64], h: Vec<Poly>) -> FuchsianOperator {
        FuchsianOperator::new(m, pts.iter().map(|&p| s(p)).collect(), vec![], h).unwrap()
    }

    #[test]
    fn companion_layout() {
        let o = op(2, &[0, 1], vec![Poly::zero(), Poly::zero()]);
        let a = companion_matrix(&o);
        assert_eq!(
            a,
            Matrix::from_rows(vec![vec![Poly::zero(), Poly::zero()], vec![Poly::one(), Poly::from_ints(&[-1, 2])]])
                .unwrap()
        );
        let c = op(1, &[0], vec![Poly::constant(s(3))]);
        assert_eq!(companion_matrix(&c), Matrix::from_rows(vec![vec![Poly::constant(s(3))]]).unwrap());
        let h = vec![Poly::from_ints(&[1, 2]), Poly::from_ints(&[3, 0, 1]), Poly::from_ints(&[5])];
        let a = companion_matrix(&op(3, &[0, 1], h.clone()));
        let dpsi = Poly::from_ints(&[-1, 2]);
        assert_eq!(a[(0, 2)], h[2]);
        assert_eq!(a[(1, 2)], h[1]);
        assert_eq!(a[(2, 2)], &h[0] + &dpsi.scale(&s(2)));
        assert_eq!(a[(1, 1)], dpsi);
        assert_eq!(a[(0, 0)], Poly::zero());
        assert_eq!(a[(1, 0)], Poly::one());
        assert_eq!(a[(2, 1)], Poly::one());
        assert_eq!(a[(2, 0)], Poly::zero());
    }

    #[test]
    fn gauge_matrices() {
        let g = infinity_gauge(2, 3);
        assert_eq!(g[(1, 1)], Poly::monomial(s(-1), 2));
        let g = infinity_gauge(3, 2);
        assert_eq!(g[(1, 1)], Poly::from_ints(&[0, -1]));
        assert_eq!(g[(2, 2)], Poly::from_ints(&[0, 0, 1]));
        assert_eq!(infinity_gauge(1, 7), Matrix::identity(1));
    }

    #[test]
    fn exponents_of_simple_operators() {
        let o = op(2, &[0, 1], vec![Poly::zero(), Poly::zero()]);
        let conn = build_companion(&o).unwrap();
        let e = exponent_data(&conn, &Point::Finite(s(0))).unwrap();
        assert_eq!(e.eigenvalues, vec![s(0), s(1)]);
        let inf = exponent_data(&conn, &Point::Infinity).unwrap();
        assert_eq!(inf.eigenvalues, vec![s(-1), s(0)]);
        let ord = exponent_data(&conn, &Point::Finite(s(5))).unwrap();
        assert!(ord.ordinary);

        // w' = (1/2)(z-1)/(z(z-1)) w
        let half = op(1, &[0, 1], vec![Poly::from_ints(&[-1, 1]).scale(&Scalar::ratio(1, 2))]);
        let e = exponent_data(&build_companion(&half).unwrap(), &Point::Finite(s(0))).unwrap();
        assert_eq!(e.eigenvalues, vec![Scalar::ratio(1, 2)]);
    }

    #[test]
    fn trace_identity_examples() {
        let o = op(
            3,
            &[0, 1, -2],
            vec![Poly::from_ints(&[1, 2, 3]), Poly::from_ints(&[0, 1, 0, 2]), Poly::from_ints(&[7])],
        );
        assert_eq!(trace_sum(&o).unwrap(), fuchs_relation_value(&o));
        assert_eq!(fuchs_relation_value(&o), s(6));
    }

    #[test]
    fn bundle_types() {
        let bt = bundle_type(&op(2, &[0, 1, 2], vec![Poly::zero(); 2])).unwrap();
        assert_eq!(bt, BundleType { degrees: vec![0, -2], total: -2 });
        let bt = bundle_type(&op(3, &[0, 1, 2], vec![Poly::zero(); 3])).unwrap();
        assert_eq!(bt, BundleType { degrees: vec![0, -2, -4], total: -6 });
        assert_eq!(bundle_type(&op(1, &[0], vec![Poly::zero()])).unwrap().total, 0);
    }

    #[test]
    fn gauge_identity_and_scalars() {
        let o = op(2, &[0, 1], vec![Poly::from_ints(&[1]), Poly::from_ints(&[2, 1])]);
        let conn = build_companion(&o).unwrap();
        assert_eq!(apply_poly_gauge(&conn, &Matrix::identity(2)).unwrap(), conn);
        let c = Matrix::from_fn(2, 2, |i, j| if i == j { Poly::constant(s(5)) } else { Poly::zero() });
        assert_eq!(apply_poly_gauge(&conn, &c).unwrap(), conn);
        let singular = Matrix::from_fn(2, 2, |_, _| Poly::one());
        assert!(apply_poly_gauge(&conn, &singular).is_err());
    }

    #[test]
    fn rigidity_examples() {
        let o = op(2, &[0, 1], vec![Poly::zero(), Poly::zero()]);
        let r = companion_rigidity_check(&o, &o).unwrap();
        assert!(r.is_scalars);
        assert_eq!(r.dimension, Some(1));
        let o2 = op(2, &[0, 1], vec![Poly::zero(), Poly::constant(s(1))]);
        let r = companion_rigidity_check(&o, &o2).unwrap();
        assert_eq!(r.dimension, None);
        let a = op(1, &[0, 1], vec![Poly::constant(s(1))]);
        let b = op(1, &[0, 1], vec![Poly::constant(s(2))]);
        assert!(companion_rigidity_check(&a, &a).unwrap().is_scalars);
        assert!(!companion_rigidity_check(&a, &b).unwrap().gauge_exists);
    }

    #[test]
    fn genericity_examples() {
        let h = Scalar::ratio(1, 2);
        let bad = vec![vec![s(0), h.clone()]; 3];
        let r = genericity_check(&bad).unwrap();
        assert!(!r.generic);
        assert!(matches!(r.witness, Some(GenericityWitness::Selection { k: 1, .. })));
        let good = vec![vec![Scalar::ratio(1, 5), Scalar::ratio(1, 7)]; 3];
        assert!(genericity_check(&good).unwrap().generic);
        assert!(genericity_check(&[vec![s(3)], vec![s(4)]]).unwrap().generic);
        let resonant = vec![vec![s(0), s(2)]];
        assert!(matches!(genericity_check(&resonant).unwrap().witness, Some(GenericityWitness::Difference { .. })));
        assert!(genericity_check(&[]).is_err());
        let huge = vec![vec![Scalar::ratio(1, 3); 10]; 10];
        assert!(matches!(genericity_check(&huge), Err(Error::TooManySelections { .. })));
    }
}
