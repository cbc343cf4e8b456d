//! From a connection back to a scalar equation through a cyclic vector.
//!
//! Sections are rows, `u' = u·B`. Pairing with a column `v` gives the scalar
//! `w = u·v`, and `w^{(k)} = u·∂^k v` with `∂v = B·v + v'`.

use serde::{Deserialize, Serialize};

use crate::algebra::{poly_root_search, Matrix, Poly, RatFunc, RootMult, Scalar};
use crate::connection::{build_companion, Chart, LogConnection};
use crate::error::{Error, Result};
use crate::operator::FuchsianOperator;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicResult {
    pub vector: Vec<RatFunc>,
    /// Position of `vector` in the search list.
    pub candidate: usize,
    /// `R_1, ..., R_m` in `w^{(m)} = Σ R_k w^{(m−k)}`.
    pub operator: Vec<RatFunc>,
    pub cyclic_determinant: RatFunc,
    pub pole_points: Vec<Scalar>,
    pub apparent_locus: Vec<RootMult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unfactored: Option<Poly>,
}

/// `e_1, ..., e_m`, then `Σ_{t<L} z^t e_{s+t}` (indices mod m) for `L = 2..m`.
pub fn search_list(m: usize) -> Vec<Vec<Poly>> {
    let mut out = Vec::with_capacity(m * m);
    for s in 0..m {
        let mut v = vec![Poly::zero(); m];
        v[s] = Poly::one();
        out.push(v);
    }
    for len in 2..=m {
        for s in 0..m {
            let mut v = vec![Poly::zero(); m];
            for t in 0..len {
                v[(s + t) % m] = Poly::monomial(Scalar::one(), t);
            }
            out.push(v);
        }
    }
    out
}

fn derive(b: &Matrix<RatFunc>, v: &[RatFunc]) -> Vec<RatFunc> {
    (0..v.len())
        .map(|i| {
            let mut acc = v[i].derivative();
            for (j, vj) in v.iter().enumerate() {
                if !b[(i, j)].is_zero() && !vj.is_zero() {
                    acc = &acc + &(&b[(i, j)] * vj);
                }
            }
            acc
        })
        .collect()
}

/// The columns `v, ∂v, ..., ∂^m v`.
pub fn derivation_tower(conn: &LogConnection, v: &[RatFunc]) -> Vec<Vec<RatFunc>> {
    let mut tower = vec![v.to_vec()];
    for _ in 0..conn.size {
        let next = derive(&conn.matrix, tower.last().expect("nonempty"));
        tower.push(next);
    }
    tower
}

pub fn find_cyclic(conn: &LogConnection) -> Result<CyclicResult> {
    if conn.chart != Chart::Affine {
        return Err(Error::Precondition("cyclic vectors are searched in the affine chart".into()));
    }
    let m = conn.size;
    for (candidate, v) in search_list(m).into_iter().enumerate() {
        let v: Vec<RatFunc> = v.into_iter().map(RatFunc::from_poly).collect();
        let tower = derivation_tower(conn, &v);
        let c = Matrix::from_fn(m, m, |i, j| tower[j][i].clone());
        let det = c.det()?;
        if det.is_zero() {
            continue;
        }
        let x = c.solve(&tower[m])?;
        let operator = (1..=m).map(|k| x[m - k].clone()).collect();

        let search = poly_root_search(det.num())?;
        let apparent_locus = search.roots.into_iter().filter(|r| !conn.pole_points.contains(&r.root)).collect();
        let unfactored = search.unfactored.then_some(search.remainder);
        return Ok(CyclicResult {
            vector: v,
            candidate,
            operator,
            cyclic_determinant: det,
            pole_points: conn.pole_points.clone(),
            apparent_locus,
            unfactored,
        });
    }
    Err(Error::NoCyclicVector(m * m))
}

impl CyclicResult {
    /// The scalar equation as a [`FuchsianOperator`], the connection's poles
    /// as real points and the extracted locus as apparent points.
    pub fn to_operator(&self) -> Result<FuchsianOperator> {
        if self.unfactored.is_some() {
            return Err(Error::Precondition("cyclic determinant has zeros outside Q(i)".into()));
        }
        let apparent: Vec<Scalar> = self.apparent_locus.iter().map(|r| r.root.clone()).collect();
        let psi = &Poly::from_roots(&self.pole_points) * &Poly::from_roots(&apparent);
        let mut coeffs = Vec::with_capacity(self.operator.len());
        for (i, r) in self.operator.iter().enumerate() {
            let scaled = r * &RatFunc::from_poly(psi.pow(i as u32 + 1));
            let h = scaled
                .as_poly()
                .ok_or_else(|| Error::InvalidOperator(format!("R_{} has poles off the singular set", i + 1)))?;
            coeffs.push(h);
        }
        FuchsianOperator::new(self.operator.len(), self.pole_points.clone(), apparent, coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub pass: bool,
    pub candidate: usize,
    /// Indices `k` where `R_k ≠ H_k/ψ^k`.
    pub mismatches: Vec<usize>,
    pub apparent_locus_empty: bool,
}

pub fn roundtrip_check(op: &FuchsianOperator) -> Result<RoundtripReport> {
    let conn = build_companion(op)?;
    let res = find_cyclic(&conn)?;
    let mismatches: Vec<usize> = (1..=op.order()).filter(|&k| res.operator[k - 1] != op.coefficient(k)).collect();
    let apparent_locus_empty = res.apparent_locus.is_empty() && res.unfactored.is_none();
    Ok(RoundtripReport {
        pass: mismatches.is_empty() && apparent_locus_empty && res.candidate == 0,
        candidate: res.candidate,
        mismatches,
        apparent_locus_empty,
    })
}
