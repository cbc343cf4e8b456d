//! Scalar Fuchsian operators
//! `w^{(m)} = Σ_k H_k/ψ^k · w^{(m−k)}` with `ψ = Π(z − p_j)·Π(z − a_i)`.

mod text;

use serde::{Deserialize, Serialize};

use crate::algebra::{Poly, RatFunc, Scalar};
use crate::error::{Error, Result};

pub use text::{parse_text, to_text};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuchsianOperator {
    order: usize,
    real_points: Vec<Scalar>,
    apparent_points: Vec<Scalar>,
    coeffs: Vec<Poly>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    order: usize,
    #[serde(default)]
    real_points: Vec<Scalar>,
    #[serde(default)]
    apparent_points: Vec<Scalar>,
    coeffs: Vec<Poly>,
}

impl<'de> Deserialize<'de> for FuchsianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawOperator::deserialize(d)?;
        FuchsianOperator::new(raw.order, raw.real_points, raw.apparent_points, raw.coeffs)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub k: usize,
    /// `None` for the zero polynomial.
    pub degree: Option<usize>,
    pub allowed: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub fuchs_degree_ok: Vec<DegreeCheck>,
    pub infinity_regular: bool,
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessoryDegrees {
    pub degrees: Vec<i64>,
    pub total: i64,
}

impl FuchsianOperator {
    pub fn new(
        order: usize,
        real_points: Vec<Scalar>,
        apparent_points: Vec<Scalar>,
        coeffs: Vec<Poly>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOperator("order must be at least 1".into()));
        }
        if coeffs.len() != order {
            return Err(Error::OrderMismatch { order, coeffs: coeffs.len() });
        }
        let all: Vec<&Scalar> = real_points.iter().chain(&apparent_points).collect();
        for (i, p) in all.iter().enumerate() {
            if all[..i].contains(p) {
                return Err(Error::PointsNotDistinct(p.to_string()));
            }
        }
        Ok(FuchsianOperator { order, real_points, apparent_points, coeffs })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| {
            let msg = e.to_string();
            if msg.starts_with("points not distinct") {
                Error::PointsNotDistinct(msg)
            } else {
                Error::Parse(msg)
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator serialises")
    }

    /// Parses either the JSON document or the plain-text form.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            FuchsianOperator::from_json(s)
        } else {
            parse_text(s)
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn real_points(&self) -> &[Scalar] {
        &self.real_points
    }

    pub fn apparent_points(&self) -> &[Scalar] {
        &self.apparent_points
    }

    /// Real points followed by apparent points.
    pub fn all_points(&self) -> Vec<Scalar> {
        self.real_points.iter().chain(&self.apparent_points).cloned().collect()
    }

    pub fn is_listed_point(&self, p: &Scalar) -> bool {
        self.real_points.contains(p) || self.apparent_points.contains(p)
    }

    /// `H_1, ..., H_m`.
    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    /// `H_k`, 1-based.
    pub fn h(&self, k: usize) -> &Poly {
        &self.coeffs[k - 1]
    }

    pub fn n(&self) -> usize {
        self.real_points.len()
    }

    pub fn big_n(&self) -> usize {
        self.apparent_points.len()
    }

    /// Total number of finite singular points.
    pub fn finite_count(&self) -> usize {
        self.n() + self.big_n()
    }

    pub fn psi_all(&self) -> Poly {
        Poly::from_roots(&self.all_points())
    }

    pub fn psi_real(&self) -> Poly {
        Poly::from_roots(&self.real_points)
    }

    /// `H_k / ψ^k` as a rational function.
    pub fn coefficient(&self, k: usize) -> RatFunc {
        RatFunc::new(self.h(k).clone(), self.psi_all().pow(k as u32)).expect("ψ is nonzero")
    }

    pub fn validate(&self) -> ValidationReport {
        let width = self.finite_count() as i64 - 1;
        let mut messages = Vec::new();
        let checks: Vec<DegreeCheck> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let k = i + 1;
                let allowed = k as i64 * width;
                let ok = h.degree_i64() <= allowed;
                if !ok {
                    messages.push(format!("deg H_{k} = {} exceeds {allowed}", h.degree_i64()));
                }
                DegreeCheck { k, degree: h.degree(), allowed, ok }
            })
            .collect();
        let infinity_regular = checks.iter().all(|c| c.ok);
        ValidationReport { fuchs_degree_ok: checks, infinity_regular, messages }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.infinity_regular {
            Ok(())
        } else {
            Err(Error::InvalidOperator(report.messages.join("; ")))
        }
    }

    pub fn accessory_degrees(&self) -> AccessoryDegrees {
        accessory_degrees(self.order, self.n(), self.big_n())
    }

    pub fn with_coeffs(&self, coeffs: Vec<Poly>) -> Result<Self> {
        FuchsianOperator::new(self.order, self.real_points.clone(), self.apparent_points.clone(), coeffs)
    }
}

/// Degree bounds `k(n+N−1)` and the parameter count `m + m(m+1)(n+N−1)/2`.
pub fn accessory_degrees(m: usize, n: usize, big_n: usize) -> AccessoryDegrees {
    let w = (n + big_n) as i64 - 1;
    let m = m as i64;
    let degrees = (1..=m).map(|k| k * w).collect();
    AccessoryDegrees { degrees, total: m + m * (m + 1) * w / 2 }
}
