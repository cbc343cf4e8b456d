use std::io::Write;

use fuchskit::algebra::{det_exact, falling_factorial, poly_root_search, rank_exact, series_of_rational};
use fuchskit::connection::{
    all_exponent_data, apply_gauge, build_companion, bundle_type, companion_matrix, companion_rigidity_check,
    exponent_data, fuchs_relation_value, genericity_check, infinity_gauge, trace_sum, ExponentData, LogConnection,
    Point,
};
use fuchskit::cyclic::{find_cyclic, roundtrip_check, CyclicResult};
use fuchskit::frobenius::{
    annihilator_from_solutions, apparent_check_with, frobenius_oracle, index1_integrality, local_expansion,
    special_apparent_check, ApparentVerdict, Index1Report,
};
use fuchskit::moduli::{
    build_constraints, dimensions, gen_vandermonde, hodge_parameters, vdm_closed_form, verify_rank, ConstraintSystem,
    DerivativePlan, ExponentTargets, RankReport,
};
use fuchskit::monodromy::{global_relation, is_apparent_numeric, isomonodromy_sweep, monodromy_at, Family, SweepRow};
use fuchskit::operator::{AccessoryDegrees, ValidationReport};
use fuchskit::{sample, Error, FuchsianOperator, Matrix, Poly, RatFunc, Scalar};
use serde::{Deserialize, Serialize};

use crate::args::{AlgebraCommand, ChartArg, Command, Format, PlanArg};
use crate::input;
use crate::CliError;

pub const SCHEMA: &str = "fuchskit/1";

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Sink<'a> {
    pub command: &'a str,
    pub out: &'a mut dyn Write,
}

impl Sink<'_> {
    fn json<T: Serialize>(&mut self, body: &T) -> Result<(), CliError> {
        let env = Envelope { schema: SCHEMA, command: self.command, body };
        let text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(self.out, "{text}").map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Serialize)]
struct Validation {
    #[serde(flatten)]
    report: ValidationReport,
    valid: bool,
    order: usize,
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    psi: Poly,
    accessory_degrees: AccessoryDegrees,
}

#[derive(Serialize)]
struct Exponents {
    points: Vec<ExponentData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_sum: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fuchs_relation: Option<Scalar>,
}

#[derive(Serialize)]
struct Companion {
    companion_matrix: Matrix<Poly>,
    psi: Poly,
    #[serde(flatten)]
    connection: LogConnection,
}

#[derive(Serialize)]
struct Gauge {
    gauge: Matrix<Poly>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Falling {
    Value { value: Scalar },
    Polynomial { polynomial: Poly },
}

#[derive(Serialize)]
struct Det {
    determinant: Scalar,
}

#[derive(Serialize)]
struct Rank {
    rank: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenericityInput {
    exponents: Vec<Vec<Scalar>>,
}

#[derive(Serialize)]
struct SpecialReport {
    #[serde(flatten)]
    verdict: ApparentVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    index1: Option<Index1Report>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisInput {
    basis: Vec<Poly>,
}

#[derive(Serialize)]
struct CyclicReport {
    #[serde(flatten)]
    result: CyclicResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered: Option<FuchsianOperator>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsInput {
    m: usize,
    points: Vec<Scalar>,
    #[serde(default)]
    apparent: Vec<Scalar>,
    #[serde(default)]
    targets: Option<ExponentTargets>,
}

#[derive(Serialize)]
struct ConstraintsReport {
    system: ConstraintSystem,
    rank: RankReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Matrix<Scalar>>,
}

#[derive(Serialize)]
struct VandermondeReport {
    points: Vec<Scalar>,
    plan: DerivativePlan,
    matrix: Matrix<Scalar>,
    determinant: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<Scalar>,
    /// `|det| = |closed form|`, exactly.
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_equal: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HodgeInput {
    mu: Vec<Vec<Scalar>>,
    m: usize,
    n: usize,
}

#[derive(Serialize)]
struct Disagreement {
    index: usize,
    point: Scalar,
    determinant: bool,
    oracle: bool,
}

#[derive(Serialize)]
struct CheckReport {
    seed: u64,
    instances: usize,
    apparent: usize,
    disagreements: Vec<Disagreement>,
    roundtrips: usize,
    roundtrip_failures: usize,
    pass: bool,
}

#[derive(Serialize)]
struct CsvRow {
    parameter: String,
    point: String,
    char_poly: String,
    error_estimate: Option<f64>,
    deviation: Option<f64>,
    failure: Option<String>,
}

fn csv_row(r: &SweepRow) -> CsvRow {
    let char_poly = r
        .char_poly
        .as_ref()
        .map_or(String::new(), |c| c.iter().map(|z| format!("{:e}{:+e}i", z.re, z.im)).collect::<Vec<_>>().join(";"));
    CsvRow {
        parameter: r.parameter.to_string(),
        point: r.point.to_string(),
        char_poly,
        error_estimate: r.error_estimate,
        deviation: r.deviation,
        failure: r.failure.clone(),
    }
}

fn finite(p: &Option<Point>) -> Result<Point, CliError> {
    p.clone().ok_or_else(|| CliError::Domain(Error::Precondition("--point is required".into())))
}

pub fn run(command: &Command, sink: &mut Sink<'_>) -> Result<(), CliError> {
    match command {
        Command::Validate(i) => {
            let op = input::operator(&i.input)?;
            let report = op.validate();
            let valid = report.infinity_regular && report.fuchs_degree_ok.iter().all(|d| d.ok);
            sink.json(&Validation {
                report,
                valid,
                order: op.order(),
                n: op.n(),
                big_n: op.big_n(),
                psi: op.psi_all(),
                accessory_degrees: op.accessory_degrees(),
            })
        }
        Command::Companion { input: i, chart } => {
            let op = input::operator(&i.input)?;
            let conn = build_companion(&op)?;
            let connection = match chart {
                ChartArg::Affine => conn,
                ChartArg::Infinity => conn.infinity_chart()?,
            };
            sink.json(&Companion { companion_matrix: companion_matrix(&op), psi: op.psi_all(), connection })
        }
        Command::Exponents { input: i, point } => {
            let op = input::operator(&i.input)?;
            let report = match point {
                Some(p) => Exponents {
                    points: vec![exponent_data(&build_companion(&op)?, p)?],
                    trace_sum: None,
                    fuchs_relation: None,
                },
                None => Exponents {
                    points: all_exponent_data(&op)?,
                    trace_sum: Some(trace_sum(&op)?),
                    fuchs_relation: Some(fuchs_relation_value(&op)),
                },
            };
            sink.json(&report)
        }
        Command::Genericity(i) => {
            let doc: GenericityInput = input::document(&i.input)?;
            sink.json(&genericity_check(&doc.exponents)?)
        }
        Command::Apparent { input: i, point, truncation, cross_check } => {
            let op = input::operator(&i.input)?;
            let mut verdict = apparent_check_with(&op, &point.point, truncation.truncation)?;
            if *cross_check && verdict.reason.is_none() {
                let oracle = frobenius_oracle(&op, &point.point, truncation.truncation)?;
                verdict.oracle_agrees = Some(oracle.is_apparent == verdict.is_apparent);
            }
            sink.json(&verdict)
        }
        Command::SpecialApparent { input: i, point } => {
            let op = input::operator(&i.input)?;
            let verdict = special_apparent_check(&op, &point.point)?;
            let index1 = if verdict.is_apparent { index1_integrality(&op, &point.point).ok() } else { None };
            sink.json(&SpecialReport { verdict, index1 })
        }
        Command::Oracle { input: i, point, truncation } => {
            let op = input::operator(&i.input)?;
            sink.json(&frobenius_oracle(&op, &point.point, truncation.truncation)?)
        }
        Command::Annihilate(i) => {
            let doc: BasisInput = input::document(&i.input)?;
            sink.json(&annihilator_from_solutions(&doc.basis)?)
        }
        Command::Cyclic { input: i, gauge } => {
            let mut conn = input::connection(&i.input)?;
            if let Some(g) = gauge {
                let g: Matrix<RatFunc> = input::document(g)?;
                conn = apply_gauge(&conn, &g)?;
            }
            let result = find_cyclic(&conn)?;
            let recovered = result.to_operator().ok();
            sink.json(&CyclicReport { result, recovered })
        }
        Command::Dimensions { m, n, big_n } => sink.json(&dimensions(*m, *n, *big_n)?),
        Command::Constraints { input: i, matrix } => {
            let doc: ConstraintsInput = input::document(&i.input)?;
            let system = build_constraints(doc.m, &doc.points, &doc.apparent, doc.targets.as_ref())?;
            let rank = verify_rank(&system);
            let matrix = matrix.then(|| system.matrix());
            sink.json(&ConstraintsReport { system, rank, matrix })
        }
        Command::Vandermonde { points, plan } => {
            if points.len() < 2 {
                return Err(Error::Precondition("need at least two points".into()).into());
            }
            let r = points.len() - 2;
            let derivative_plan = match plan {
                PlanArg::Quadratic => DerivativePlan::quadratic(r),
                PlanArg::Cubic => DerivativePlan::cubic(r),
            };
            let matrix = gen_vandermonde(points, &derivative_plan)?;
            let determinant = matrix.det()?;
            let closed_form = match plan {
                PlanArg::Quadratic => Some(vdm_closed_form(points)?),
                PlanArg::Cubic => None,
            };
            let abs_equal = closed_form.as_ref().map(|c| c.norm_sqr() == determinant.norm_sqr());
            sink.json(&VandermondeReport {
                points: points.clone(),
                plan: derivative_plan,
                matrix,
                determinant,
                closed_form,
                abs_equal,
            })
        }
        Command::HodgeParams(i) => {
            let doc: HodgeInput = input::document(&i.input)?;
            if doc.mu.iter().any(|pt| pt.len() != doc.m) {
                return Err(Error::DimensionMismatch(format!("every point needs {} exponents", doc.m)).into());
            }
            sink.json(&hodge_parameters(&doc.mu, doc.m, doc.n))
        }
        Command::Monodromy { input: i, point, tolerance, apparent, global } => {
            let conn = input::connection(&i.input)?;
            let tol = tolerance.tolerance;
            if *global {
                return sink.json(&global_relation(&conn, tol)?);
            }
            let p = finite(point)?;
            if *apparent {
                sink.json(&is_apparent_numeric(&conn, &p, tol)?)
            } else {
                sink.json(&monodromy_at(&conn, &p, tol)?)
            }
        }
        Command::Sweep { input: i, point, tolerance, format } => {
            let family: Family = input::document(&i.input)?;
            let report = isomonodromy_sweep(&family, point, tolerance.tolerance)?;
            match format {
                Format::Json => sink.json(&report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *sink.out);
                    for r in &report.rows {
                        w.serialize(csv_row(r)).map_err(|e| CliError::Io(e.to_string()))?;
                    }
                    w.flush().map_err(|e| CliError::Io(e.to_string()))
                }
            }
        }
        Command::Local { input: i, point, truncation } => {
            let op = input::operator(&i.input)?;
            sink.json(&local_expansion(&op, &point.point, *truncation)?)
        }
        Command::Rigidity { input: i, other } => {
            let a = input::operator(&i.input)?;
            let b = input::operator(other)?;
            sink.json(&companion_rigidity_check(&a, &b)?)
        }
        Command::Roundtrip(i) => {
            let op = input::operator(&i.input)?;
            sink.json(&roundtrip_check(&op)?)
        }
        Command::BundleType(i) => {
            let op = input::operator(&i.input)?;
            sink.json(&bundle_type(&op)?)
        }
        Command::Gauge { input: i, matrix } => {
            let conn = input::connection(&i.input)?;
            let g: Matrix<RatFunc> = input::document(matrix)?;
            sink.json(&apply_gauge(&conn, &g)?)
        }
        Command::InfinityGauge { m, n } => sink.json(&Gauge { gauge: infinity_gauge(*m, *n) }),
        Command::Algebra(a) => algebra(a, sink),
        Command::Check { seed, count } => sink.json(&self_check(*seed, *count)?),
    }
}

fn algebra(command: &AlgebraCommand, sink: &mut Sink<'_>) -> Result<(), CliError> {
    match command {
        AlgebraCommand::Det(i) => {
            let m: Matrix<Scalar> = input::document(&i.input)?;
            sink.json(&Det { determinant: det_exact(&m)? })
        }
        AlgebraCommand::Rank(i) => {
            let m: Matrix<Scalar> = input::document(&i.input)?;
            sink.json(&Rank { rank: rank_exact(&m) })
        }
        AlgebraCommand::Roots { coeffs } => sink.json(&poly_root_search(&Poly::new(coeffs.clone()))?),
        AlgebraCommand::Series { num, den, at, order } => {
            let f = RatFunc::new(Poly::new(num.clone()), Poly::new(den.clone()))?;
            sink.json(&series_of_rational(&f, at, *order)?)
        }
        AlgebraCommand::Falling { rho, l } => sink.json(&match rho {
            Some(r) => Falling::Value { value: falling_factorial(r, *l) },
            None => Falling::Polynomial { polynomial: Poly::falling_factorial(*l) },
        }),
    }
}

/// Exponents `(m−1)s, ..., s, 0` for a step `s` that varies with the index.
fn spread_exponents(m: usize, step: usize) -> Vec<Scalar> {
    (0..m).rev().map(|j| Scalar::from_int((j * step) as i64)).collect()
}

fn self_check(seed: u64, count: usize) -> Result<CheckReport, CliError> {
    let mut rng = sample::rng(seed);
    let mut disagreements = Vec::new();
    let mut apparent = 0;
    for index in 0..count {
        let m = 2 + index % 2;
        let (op, point) = if index % 3 == 0 {
            let factors = sample::random_factors(&mut rng, 2, 1);
            let op = sample::apparent_instance(&mut rng, m, &factors)?;
            let p = op.apparent_points()[0].clone();
            (op, p)
        } else {
            let exps = spread_exponents(m, 1 + index % 3);
            let (op, a) = sample::operator_with_exponents(&mut rng, &exps, 3);
            let op = if index % 3 == 2 { sample::perturb_at(&mut rng, &op, &a).unwrap_or(op) } else { op };
            (op, a)
        };
        let det = apparent_check_with(&op, &point, None)?.is_apparent;
        let oracle = frobenius_oracle(&op, &point, None)?.is_apparent;
        apparent += usize::from(det);
        if det != oracle {
            disagreements.push(Disagreement { index, point, determinant: det, oracle });
        }
    }
    let roundtrips = count.div_ceil(2);
    let mut roundtrip_failures = 0;
    for index in 0..roundtrips {
        let op = sample::random_operator(&mut rng, 1 + index % 3, 2 + index % 2, 0);
        if !roundtrip_check(&op)?.pass {
            roundtrip_failures += 1;
        }
    }
    Ok(CheckReport {
        seed,
        instances: count,
        apparent,
        pass: disagreements.is_empty() && roundtrip_failures == 0,
        disagreements,
        roundtrips,
        roundtrip_failures,
    })
}
