//! Local analysis at a finite point: Taylor data of the coefficients, the
//! indicial polynomial `f_0` and its companions `f_l`, determinant tests for
//! apparent singularities, and a direct Frobenius recursion.
//!
//! A formal solution `Σ c_s (z−a)^{ρ+s}` satisfies
//! `f_0(ρ+s)·c_s = Σ_{l=1}^{s} f_l(ρ+s−l)·c_{s−l}`.

use serde::{Deserialize, Serialize};

use crate::algebra::{falling_factorial, poly_root_search, series_of_rational, Matrix, Poly, RatFunc, Scalar};
use crate::error::{Error, Result};
use crate::operator::FuchsianOperator;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalAnalysis {
    pub point: Scalar,
    pub order: usize,
    /// `table[k−1][l] = H_{k}^l`, the Taylor coefficients of `(z−a)^k H_k/ψ^k`.
    pub table: Vec<Vec<Scalar>>,
    /// `f[0]` is the indicial polynomial, `f[l]` the l-th companion.
    pub f: Vec<Poly>,
    /// Roots of `f_0` in decreasing order of real part, when all lie in ℚ(i).
    pub exponents: Option<Vec<Scalar>>,
    pub truncation: usize,
    /// True when the point is not one of the operator's listed points.
    pub ordinary: bool,
}

fn sort_desc(v: &mut [Scalar]) {
    v.sort_by(|a, b| (b.re(), b.im()).cmp(&(a.re(), a.im())));
}

/// Taylor data at `point` to depth `truncation` (terms `l = 0..=L`).
pub fn local_expansion(op: &FuchsianOperator, point: &Scalar, truncation: usize) -> Result<LocalAnalysis> {
    if truncation < 1 {
        return Err(Error::Precondition("truncation must be at least 1".into()));
    }
    let m = op.order();
    let psi = op.psi_all();
    let lin = Poly::linear(point);
    let table: Vec<Vec<Scalar>> = (1..=m)
        .map(|k| {
            let f = RatFunc::new(&lin.pow(k as u32) * op.h(k), psi.pow(k as u32))?;
            Ok(series_of_rational(&f, point, truncation + 1)?.coeffs)
        })
        .collect::<Result<_>>()?;
    let ff: Vec<Poly> = (0..=m).map(Poly::falling_factorial).collect();
    let f: Vec<Poly> = (0..=truncation)
        .map(|l| {
            let s = (1..=m).fold(Poly::zero(), |acc, k| &acc + &ff[m - k].scale(&table[k - 1][l]));
            if l == 0 {
                &ff[m] - &s
            } else {
                s
            }
        })
        .collect();
    let roots = poly_root_search(&f[0])?;
    let exponents = roots.all_roots().map(|mut v| {
        sort_desc(&mut v);
        v
    });
    Ok(LocalAnalysis {
        point: point.clone(),
        order: m,
        table,
        f,
        exponents,
        truncation,
        ordinary: !op.is_listed_point(point),
    })
}

impl LocalAnalysis {
    /// `H_1^0`, the constant term of the index-1 coefficient.
    pub fn index1_value(&self) -> &Scalar {
        &self.table[0][0]
    }

    fn f_at(&self, l: usize, shift: &Scalar) -> Poly {
        self.f[l].shift(shift)
    }
}

/// The ν×ν matrix in `ρ` with entries `F[t][j] = f_{j−t+1}(ρ+ν−j)` on and
/// above the diagonal and `−f_0(ρ+ν−j)` on the sub-diagonal. Its
/// determinant is, up to sign, the obstruction at offset ν times
/// `Π_{s<ν} f_0(ρ+s)`.
pub fn f_matrix(analysis: &LocalAnalysis, nu: usize) -> Result<Matrix<Poly>> {
    if nu < 1 {
        return Err(Error::Precondition("ν must be at least 1".into()));
    }
    if analysis.truncation < nu {
        return Err(Error::Precondition(format!("truncation {} is below ν = {nu}", analysis.truncation)));
    }
    Ok(Matrix::from_fn(nu, nu, |t, j| {
        // 1-based t, j as in the display
        let (t, j) = (t + 1, j + 1);
        let shift = Scalar::from_int((nu - j) as i64);
        if j >= t {
            analysis.f_at(j - t + 1, &shift)
        } else if j + 1 == t {
            -analysis.f_at(0, &shift)
        } else {
            Poly::zero()
        }
    }))
}

pub fn f_matrix_at(analysis: &LocalAnalysis, nu: usize, rho: &Scalar) -> Result<Matrix<Scalar>> {
    let m = f_matrix(analysis, nu)?;
    Ok(m.map(|p| p.eval(rho)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Linear,
    Quadratic,
    DetOrder,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub mu: usize,
    pub kind: ResidualKind,
    pub value: Scalar,
    pub required_order: usize,
    /// Order of vanishing actually attained; `None` when identically zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
}

impl Residual {
    pub fn satisfied(&self) -> bool {
        match self.kind {
            ResidualKind::DetOrder => self.achieved_order.is_none_or(|o| o >= self.required_order),
            _ => self.value.is_zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApparentVerdict {
    pub point: Scalar,
    pub is_apparent: bool,
    pub is_special_apparent: bool,
    pub exponents: Vec<Scalar>,
    pub condition_residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub truncation: usize,
}

/// Exponents `m, m−2, m−3, ..., 1, 0`.
pub fn special_exponents(m: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::from_int(m as i64)];
    v.extend((0..m.saturating_sub(1)).rev().map(|k| Scalar::from_int(k as i64)));
    v
}

/// Distinct non-negative integers in decreasing order, or a reason why not.
fn integral_exponents(a: &LocalAnalysis) -> std::result::Result<Vec<i64>, String> {
    let ex = a.exponents.as_ref().ok_or("exponents outside ℚ(i)")?;
    let ints: Option<Vec<i64>> = ex.iter().map(Scalar::as_i64).collect();
    let ints = ints.ok_or("non-integral exponents")?;
    if ints.iter().any(|&r| r < 0) {
        return Err("negative exponent".into());
    }
    if ints.windows(2).any(|w| w[0] == w[1]) {
        return Err("repeated exponent".into());
    }
    Ok(ints)
}

fn default_truncation(ints: &[i64]) -> usize {
    (ints[0] - ints[ints.len() - 1]) as usize + 4
}

fn prepared(
    op: &FuchsianOperator,
    point: &Scalar,
    truncation: Option<usize>,
) -> Result<(LocalAnalysis, std::result::Result<Vec<i64>, String>)> {
    let probe = local_expansion(op, point, 1)?;
    match integral_exponents(&probe) {
        Ok(ints) => {
            let need = default_truncation(&ints);
            let l = truncation.map_or(need, |t| t.max(need - 2));
            Ok((local_expansion(op, point, l)?, Ok(ints)))
        }
        Err(e) => Ok((probe, Err(e))),
    }
}

fn rejected(a: LocalAnalysis, reason: String) -> ApparentVerdict {
    ApparentVerdict {
        point: a.point,
        is_apparent: false,
        is_special_apparent: false,
        exponents: a.exponents.unwrap_or_default(),
        condition_residuals: Vec::new(),
        oracle_agrees: None,
        reason: Some(reason),
        truncation: a.truncation,
    }
}

/// Determinant route: for `μ = 2..m` and `j = 1..μ−1`, `det F_ν(ρ)` with
/// `ν = ρ_{μ−j} − ρ_μ` must vanish to order `j` at `ρ = ρ_μ`.
pub fn apparent_check(op: &FuchsianOperator, point: &Scalar) -> Result<ApparentVerdict> {
    apparent_check_with(op, point, None)
}

pub fn apparent_check_with(
    op: &FuchsianOperator,
    point: &Scalar,
    truncation: Option<usize>,
) -> Result<ApparentVerdict> {
    let (a, ints) = prepared(op, point, truncation)?;
    let ints = match ints {
        Ok(i) => i,
        Err(reason) => return Ok(rejected(a, reason)),
    };
    let m = ints.len();
    let mut residuals = Vec::new();
    for mu in 2..=m {
        let rho = Scalar::from_int(ints[mu - 1]);
        for j in 1..mu {
            let nu = (ints[mu - 1 - j] - ints[mu - 1]) as usize;
            let det = f_matrix(&a, nu)?.det()?;
            residuals.push(Residual {
                mu,
                kind: ResidualKind::DetOrder,
                value: det.eval(&rho),
                required_order: j,
                achieved_order: if det.is_zero() { None } else { det.valuation_at(&rho) },
                nu: Some(nu),
            });
        }
    }
    let is_apparent = residuals.iter().all(Residual::satisfied);
    let exponents = a.exponents.clone().unwrap_or_default();
    Ok(ApparentVerdict {
        point: a.point.clone(),
        is_apparent,
        is_special_apparent: is_apparent && exponents == special_exponents(m),
        exponents,
        condition_residuals: residuals,
        oracle_agrees: None,
        reason: None,
        truncation: a.truncation,
    })
}

/// Reduced conditions for special exponents: `f_l(m−μ) = 0` for
/// `l = 1..μ−2` and `f_1(m−1)f_{μ−1}(m−μ) + f_0(m−1)f_μ(m−μ) = 0`.
pub fn special_apparent_check(op: &FuchsianOperator, point: &Scalar) -> Result<ApparentVerdict> {
    let m = op.order();
    let probe = local_expansion(op, point, 1)?;
    let special = special_exponents(m);
    if probe.exponents.as_ref() != Some(&special) {
        let got = probe.exponents.map_or("not all in ℚ(i)".to_string(), |e| format!("{e:?}"));
        return Err(Error::NotSpecial(got));
    }
    let a = local_expansion(op, point, m.max(1))?;
    let ev = |l: usize, x: i64| a.f[l].eval(&Scalar::from_int(x));
    let mut residuals = Vec::new();
    let mi = m as i64;
    for mu in 2..=m {
        let base = mi - mu as i64;
        for l in 1..mu.saturating_sub(1) {
            residuals.push(Residual {
                mu,
                kind: ResidualKind::Linear,
                value: ev(l, base),
                required_order: 1,
                achieved_order: None,
                nu: None,
            });
        }
        let q = &ev(1, mi - 1) * &ev(mu - 1, base) + &ev(0, mi - 1) * &ev(mu, base);
        residuals.push(Residual {
            mu,
            kind: ResidualKind::Quadratic,
            value: q,
            required_order: 1,
            achieved_order: None,
            nu: None,
        });
    }
    let ok = residuals.iter().all(Residual::satisfied);
    Ok(ApparentVerdict {
        point: point.clone(),
        is_apparent: ok,
        is_special_apparent: ok,
        exponents: special,
        condition_residuals: residuals,
        oracle_agrees: None,
        reason: None,
        truncation: a.truncation,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub exponent: Scalar,
    /// `c_0, c_1, ...` of `Σ c_s (z−a)^{ρ+s}`.
    pub coeffs: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstruction {
    pub exponent: Scalar,
    pub offset: usize,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub point: Scalar,
    pub is_apparent: bool,
    pub exponents: Vec<Scalar>,
    pub series: Vec<SeriesSolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub truncation: usize,
}

/// Runs the Frobenius recursion straight from the Taylor data of the
/// coefficients, at every exponent. A vanishing obstruction leaves the
/// resonant coefficient free; it is set to zero.
pub fn frobenius_oracle(op: &FuchsianOperator, point: &Scalar, truncation: Option<usize>) -> Result<OracleVerdict> {
    let m = op.order();
    let (a, ints) = prepared(op, point, truncation)?;
    let ints = match ints {
        Ok(i) => i,
        Err(reason) => {
            return Ok(OracleVerdict {
                point: point.clone(),
                is_apparent: false,
                exponents: a.exponents.unwrap_or_default(),
                series: Vec::new(),
                obstruction: None,
                reason: Some(reason),
                truncation: a.truncation,
            })
        }
    };
    let depth = a.truncation;
    let table = &a.table;
    // indicial value [x]_m − Σ_k P_k^0 [x]_{m−k} evaluated directly
    let lhs = |x: &Scalar| -> Scalar {
        let mut v = falling_factorial(x, m);
        for k in 1..=m {
            v -= &(&table[k - 1][0] * &falling_factorial(x, m - k));
        }
        v
    };
    let mut series = Vec::new();
    for &rho_i in &ints {
        let rho = Scalar::from_int(rho_i);
        let mut c = vec![Scalar::one()];
        for s in 1..=depth {
            let x = &rho + &Scalar::from_int(s as i64);
            let mut rhs = Scalar::zero();
            for l in 1..=s {
                let y = &rho + &Scalar::from_int((s - l) as i64);
                for k in 1..=m {
                    let t = &table[k - 1][l];
                    if !t.is_zero() {
                        rhs += &(&(t * &falling_factorial(&y, m - k)) * &c[s - l]);
                    }
                }
            }
            let d = lhs(&x);
            if d.is_zero() {
                if !rhs.is_zero() {
                    return Ok(OracleVerdict {
                        point: point.clone(),
                        is_apparent: false,
                        exponents: a.exponents.clone().unwrap_or_default(),
                        series,
                        obstruction: Some(Obstruction { exponent: rho, offset: s, value: rhs }),
                        reason: None,
                        truncation: depth,
                    });
                }
                c.push(Scalar::zero());
            } else {
                c.push(&rhs / &d);
            }
        }
        series.push(SeriesSolution { exponent: rho, coeffs: c });
    }
    Ok(OracleVerdict {
        point: point.clone(),
        is_apparent: true,
        exponents: a.exponents.clone().unwrap_or_default(),
        series,
        obstruction: None,
        reason: None,
        truncation: depth,
    })
}

/// The monic operator with the given polynomial solution basis. Its finite
/// singular points are the Wronskian zeros, recorded as apparent points.
pub fn annihilator_from_solutions(basis: &[Poly]) -> Result<FuchsianOperator> {
    let m = basis.len();
    if m == 0 {
        return Err(Error::Precondition("empty basis".into()));
    }
    let derivs: Vec<Vec<Poly>> = basis.iter().map(|f| (0..=m).map(|i| f.nth_derivative(i)).collect()).collect();
    let wronskian = Matrix::from_fn(m, m, |i, j| derivs[j][i].clone()).det()?;
    if wronskian.is_zero() {
        return Err(Error::DependentBasis);
    }
    let roots = poly_root_search(&wronskian)?;
    if roots.unfactored {
        return Err(Error::Precondition(format!("Wronskian factor {} has roots outside ℚ(i)", roots.remainder)));
    }
    let points: Vec<Scalar> = roots.roots.iter().map(|r| r.root.clone()).collect();
    // rows: basis elements; columns k = 1..m hold f^{(m−k)}
    let sys = Matrix::from_fn(m, m, |i, k| RatFunc::from_poly(derivs[i][m - k - 1].clone()));
    let rhs: Vec<RatFunc> = derivs.iter().map(|d| RatFunc::from_poly(d[m].clone())).collect();
    let r = sys.solve(&rhs)?;
    let psi = RatFunc::from_poly(Poly::from_roots(&points));
    let coeffs = r
        .iter()
        .enumerate()
        .map(|(i, rk)| {
            let h = rk * &psi_pow(&psi, i + 1);
            h.as_poly().ok_or_else(|| Error::InvalidOperator(format!("coefficient {} is not logarithmic", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    FuchsianOperator::new(m, Vec::new(), points, coeffs)
}

fn psi_pow(psi: &RatFunc, k: usize) -> RatFunc {
    (0..k).fold(RatFunc::one(), |acc, _| &acc * psi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Index1Report {
    pub point: Scalar,
    pub value: Scalar,
    pub sign: i8,
}

/// `H_1^0` at an apparent point; it must be an integer.
pub fn index1_integrality(op: &FuchsianOperator, point: &Scalar) -> Result<Index1Report> {
    let v = apparent_check(op, point)?;
    if !v.is_apparent {
        return Err(Error::Precondition(format!("{point} is not an apparent singularity")));
    }
    let a = local_expansion(op, point, 1)?;
    let value = a.index1_value().clone();
    let n = value.as_integer().ok_or_else(|| Error::NonInteger(value.to_string()))?;
    let sign = match n.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    };
    Ok(Index1Report { point: point.clone(), value, sign })
}
