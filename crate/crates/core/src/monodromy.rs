//! Numeric monodromy: integrate `Φ' = Φ·B` around loops with an adaptive
//! Dormand–Prince pair and compare conjugacy invariants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{complex_roots, Poly, Scalar};
use crate::connection::{build_companion, Chart, LogConnection, Point};
use crate::error::{Error, Result};
use crate::operator::FuchsianOperator;

type C = Complex64;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
const MAX_STEPS: usize = 200_000;
const MIN_STEP: f64 = 1e-13;

#[derive(Clone, Debug)]
struct NumericConnection {
    m: usize,
    entries: Vec<Option<(Vec<C>, Vec<C>)>>,
}

fn horner(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn poly_c64(p: &Poly) -> Vec<C> {
    p.coeffs().iter().map(Scalar::to_c64).collect()
}

impl NumericConnection {
    fn new(conn: &LogConnection) -> Self {
        let m = conn.size;
        let entries = (0..m * m)
            .map(|i| {
                let f = &conn.matrix[(i / m, i % m)];
                (!f.is_zero()).then(|| (poly_c64(f.num()), poly_c64(f.den())))
            })
            .collect();
        NumericConnection { m, entries }
    }

    fn eval(&self, z: C) -> Vec<C> {
        self.entries
            .iter()
            .map(|e| match e {
                Some((n, d)) => horner(n, z) / horner(d, z),
                None => C::new(0.0, 0.0),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        from: C,
        to: C,
    },
    /// Circle arc starting at angle `start`, sweeping `sweep` radians.
    Arc {
        center: C,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    fn at(&self, t: f64) -> (C, C) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * t, to - from),
            Segment::Arc { center, radius, start, sweep } => {
                let e = C::from_polar(radius, start + sweep * t);
                (center + e, e * C::new(0.0, sweep))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub base: C,
    pub center: C,
    pub radius: f64,
    /// Positive for counterclockwise.
    pub sweep: f64,
    /// Initial step count; the integrator adapts from there.
    pub segments: usize,
}

impl LoopSpec {
    fn segment(&self) -> Segment {
        let start = (self.base - self.center).arg();
        Segment::Arc { center: self.center, radius: self.radius, start, sweep: self.sweep }
    }
}

struct Integration {
    phi: Vec<C>,
    log_det: C,
    steps: usize,
}

fn rhs(conn: &NumericConnection, seg: &Segment, t: f64, y: &[C]) -> Vec<C> {
    let m = conn.m;
    let (z, dz) = seg.at(t);
    let b = conn.eval(z);
    let mut out = vec![C::new(0.0, 0.0); m * m + 1];
    for i in 0..m {
        for j in 0..m {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..m {
                acc += y[i * m + k] * b[k * m + j];
            }
            out[i * m + j] = acc * dz;
        }
    }
    out[m * m] = (0..m).map(|i| b[i * m + i]).sum::<C>() * dz;
    out
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const NODES: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn integrate_segment(
    conn: &NumericConnection,
    seg: &Segment,
    state: &mut Integration,
    h0: f64,
    step_tol: f64,
) -> Result<()> {
    let n = state.phi.len() + 1;
    let mut y: Vec<C> = state.phi.iter().copied().chain(std::iter::once(state.log_det)).collect();
    let (mut t, mut h) = (0.0f64, h0);
    let mut k: Vec<Vec<C>> = Vec::with_capacity(7);
    while t < 1.0 {
        if state.steps > MAX_STEPS {
            return Err(Error::Integration("step budget exhausted".into()));
        }
        h = h.min(1.0 - t);
        k.clear();
        k.push(rhs(conn, seg, t, &y));
        for s in 1..7 {
            let ys: Vec<C> = (0..n).map(|i| y[i] + (0..s).map(|j| k[j][i] * (A[s - 1][j] * h)).sum::<C>()).collect();
            k.push(rhs(conn, seg, t + NODES[s] * h, &ys));
        }
        let y5: Vec<C> = (0..n).map(|i| y[i] + (0..6).map(|j| k[j][i] * (A[5][j] * h)).sum::<C>()).collect();
        let mut err = 0.0f64;
        for i in 0..n {
            let b5 = |j: usize| if j < 6 { A[5][j] } else { 0.0 };
            let e: C = (0..7).map(|j| k[j][i] * ((b5(j) - B4[j]) * h)).sum();
            let scale = step_tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            state.steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < MIN_STEP {
            let (z, _) = seg.at(t);
            return Err(Error::Integration(format!("step size underflow near z = {z}")));
        }
    }
    state.log_det = y.pop().expect("trace slot");
    state.phi = y;
    Ok(())
}

fn integrate_path(conn: &NumericConnection, path: &[Segment], segments: usize, step_tol: f64) -> Result<Integration> {
    let m = conn.m;
    let mut state = Integration {
        phi: (0..m * m).map(|i| if i / m == i % m { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect(),
        log_det: C::new(0.0, 0.0),
        steps: 0,
    };
    for seg in path {
        integrate_segment(conn, seg, &mut state, 1.0 / segments.max(1) as f64, step_tol)?;
    }
    Ok(state)
}

/// Per-step tolerance for an end-to-end target.
fn step_tolerance(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-13, 1e-9)
}

/// Integrates at successively tighter step tolerances until two consecutive
/// results agree to `tol`; the error estimate is their distance, relative to
/// their size.
fn integrate_checked(
    conn: &NumericConnection,
    path: &[Segment],
    segments: usize,
    tol: f64,
) -> Result<(Integration, f64)> {
    let mut step_tol = step_tolerance(tol);
    let mut prev = integrate_path(conn, path, segments, step_tol)?;
    loop {
        step_tol /= 100.0;
        let next = integrate_path(conn, path, segments, step_tol)?;
        let size = next.phi.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let diff = prev.phi.iter().zip(&next.phi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / size;
        if diff <= tol || step_tol < 1e-14 {
            return Ok((next, diff));
        }
        prev = next;
    }
}

fn det(a: &[C], m: usize) -> C {
    let mut a = a.to_vec();
    let mut d = C::new(1.0, 0.0);
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i * m + c].norm().total_cmp(&a[j * m + c].norm())).expect("nonempty");
        if a[p * m + c].norm() == 0.0 {
            return C::new(0.0, 0.0);
        }
        if p != c {
            for j in 0..m {
                a.swap(p * m + j, c * m + j);
            }
            d = -d;
        }
        let piv = a[c * m + c];
        d *= piv;
        for i in c + 1..m {
            let f = a[i * m + c] / piv;
            for j in c..m {
                let v = a[c * m + j];
                a[i * m + j] -= f * v;
            }
        }
    }
    d
}

/// Coefficients of `det(λI − M)`, lowest degree first, by Faddeev–LeVerrier.
pub fn char_poly_c64(mat: &[Vec<C>]) -> Vec<C> {
    let m = mat.len();
    let mut c = vec![C::new(0.0, 0.0); m + 1];
    c[m] = C::new(1.0, 0.0);
    let mut mk = vec![vec![C::new(0.0, 0.0); m]; m];
    for k in 1..=m {
        let mut next = vec![vec![C::new(0.0, 0.0); m]; m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = (0..m).map(|l| mat[i][l] * mk[l][j]).sum::<C>();
            }
            next[i][i] += c[m - k + 1];
        }
        mk = next;
        let tr: C = (0..m).map(|i| (0..m).map(|l| mat[i][l] * mk[l][i]).sum::<C>()).sum();
        c[m - k] = -tr / k as f64;
    }
    c
}

fn sort_complex(v: &mut [C]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub point: Point,
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub matrix: Vec<Vec<C>>,
    pub char_poly: Vec<C>,
    pub eigenvalues: Vec<C>,
    pub estimated_error: f64,
    /// `|det M − exp ∮ tr B|`, relative to the larger of `|exp ∮ tr B|` and
    /// the product of the row norms of `M`.
    pub det_discrepancy: f64,
    pub steps: usize,
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition("tolerance must be positive".into()))
    }
}

fn affine(conn: &LogConnection) -> Result<()> {
    match conn.chart {
        Chart::Affine => Ok(()),
        Chart::Infinity => Err(Error::Precondition("monodromy needs the affine chart".into())),
    }
}

/// Counterclockwise loop around `point` (clockwise in the `z` plane for infinity).
pub fn loop_for(conn: &LogConnection, point: &Point) -> Result<LoopSpec> {
    let poles: Vec<C> = conn.pole_points.iter().map(Scalar::to_c64).collect();
    match point {
        Point::Finite(p) => {
            if !conn.pole_points.contains(p) {
                return Err(Error::Precondition(format!("{p} is not a singular point")));
            }
            let c = p.to_c64();
            let nearest = poles.iter().filter(|q| **q != c).map(|q| (q - c).norm()).fold(f64::INFINITY, f64::min);
            let radius = if nearest.is_finite() { nearest / 2.0 } else { 1.0 };
            Ok(LoopSpec { base: c + radius, center: c, radius, sweep: 2.0 * PI, segments: 64 })
        }
        Point::Infinity => {
            let radius = 2.0 * poles.iter().map(|q| q.norm()).fold(0.0, f64::max) + 2.0;
            Ok(LoopSpec { base: C::new(radius, 0.0), center: C::new(0.0, 0.0), radius, sweep: -2.0 * PI, segments: 64 })
        }
    }
}

fn to_rows(flat: &[C], m: usize) -> Vec<Vec<C>> {
    flat.chunks(m).map(<[C]>::to_vec).collect()
}

fn finish(
    point: Point,
    loop_spec: LoopSpec,
    run: Integration,
    diff: f64,
    m: usize,
    tol: f64,
) -> Result<MonodromyResult> {
    let expected = run.log_det.exp();
    // det cancels badly when entries are large; measure against Hadamard's bound
    let hadamard: f64 = run.phi.chunks(m).map(|row| row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).product();
    let det_discrepancy = (det(&run.phi, m) - expected).norm() / expected.norm().max(hadamard).max(f64::MIN_POSITIVE);
    let estimated_error = diff.max(det_discrepancy);
    if estimated_error.is_nan() || estimated_error > tol {
        return Err(Error::Integration(format!("tolerance {tol:e} unachievable, estimate {estimated_error:e}")));
    }
    let matrix = to_rows(&run.phi, m);
    let char_poly = char_poly_c64(&matrix);
    let mut eigenvalues = complex_roots(&char_poly);
    sort_complex(&mut eigenvalues);
    Ok(MonodromyResult {
        point,
        loop_spec,
        matrix,
        char_poly,
        eigenvalues,
        estimated_error,
        det_discrepancy,
        steps: run.steps,
    })
}

pub fn monodromy_at(conn: &LogConnection, point: &Point, tol: f64) -> Result<MonodromyResult> {
    check_tolerance(tol)?;
    affine(conn)?;
    let spec = loop_for(conn, point)?;
    let num = NumericConnection::new(conn);
    let (run, diff) = integrate_checked(&num, &[spec.segment()], spec.segments, tol)?;
    finish(point.clone(), spec, run, diff, conn.size, tol)
}

pub fn operator_monodromy(op: &FuchsianOperator, point: &Point, tol: f64) -> Result<MonodromyResult> {
    monodromy_at(&build_companion(op)?, point, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericApparentReport {
    pub apparent: bool,
    /// Largest coefficient distance from `(λ−1)^m`.
    pub char_poly_deviation: f64,
    /// Largest entry of `M − I`.
    pub identity_distance: f64,
    pub monodromy: MonodromyResult,
}

fn unipotent_char_poly(m: usize) -> Vec<C> {
    // (λ − 1)^m
    let mut c = vec![C::new(1.0, 0.0)];
    for _ in 0..m {
        let mut next = vec![C::new(0.0, 0.0); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a;
        }
        c = next;
    }
    c
}

pub fn is_apparent_numeric(conn: &LogConnection, point: &Point, tol: f64) -> Result<NumericApparentReport> {
    let mono = monodromy_at(conn, point, tol.min(DEFAULT_TOLERANCE))?;
    let m = conn.size;
    let target = unipotent_char_poly(m);
    let char_poly_deviation = mono.char_poly.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let identity_distance = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (mono.matrix[i][j] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    Ok(NumericApparentReport {
        apparent: char_poly_deviation <= tol && identity_distance <= tol,
        char_poly_deviation,
        identity_distance,
        monodromy: mono,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalRelation {
    pub base: C,
    /// Finite points in the order their loops are traversed; the loop
    /// around infinity closes the path.
    pub order: Vec<Point>,
    pub deviation: f64,
    pub pass: bool,
}

fn segment_distance(a: C, b: C, p: C) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
    (a + d * t - p).norm()
}

/// Keyhole loops around every finite point from a common base point,
/// followed by a loop around infinity; the product should be the identity.
pub fn global_relation(conn: &LogConnection, tol: f64) -> Result<GlobalRelation> {
    check_tolerance(tol)?;
    affine(conn)?;
    let poles: Vec<C> = conn.pole_points.iter().map(Scalar::to_c64).collect();
    let radii: Vec<f64> = conn
        .pole_points
        .iter()
        .map(|p| loop_for(conn, &Point::Finite(p.clone())).map(|l| l.radius))
        .collect::<Result<_>>()?;
    let centre = if poles.is_empty() { C::new(0.0, 0.0) } else { poles.iter().sum::<C>() / poles.len() as f64 };
    // just wide enough to clear every small loop; solutions grow towards infinity
    let big = poles.iter().zip(&radii).map(|(q, r)| (q - centre).norm() + 2.0 * r).fold(1.0, f64::max);

    // generic angles so that no keyhole line grazes another point
    // not quite π/4, so repeats never land on the same line
    #[allow(clippy::approx_constant)]
    const STEP: f64 = 0.7853;
    for k in 0..16 {
        let angle = -PI / 2.0 + 0.3719 + STEP * k as f64;
        let base = centre + C::from_polar(big, angle);
        let mut order: Vec<usize> = (0..poles.len()).collect();
        order.sort_by(|&i, &j| {
            let ai = ((poles[i] - base) / (centre - base)).arg();
            let aj = ((poles[j] - base) / (centre - base)).arg();
            ai.total_cmp(&aj)
        });
        let mut path = Vec::new();
        let mut clear = true;
        for &i in &order {
            let p = poles[i];
            let q = p + (base - p) / (base - p).norm() * radii[i];
            for (j, &o) in poles.iter().enumerate() {
                if j != i && segment_distance(base, q, o) < radii[j] {
                    clear = false;
                }
            }
            path.push(Segment::Line { from: base, to: q });
            path.push(Segment::Arc { center: p, radius: radii[i], start: (q - p).arg(), sweep: 2.0 * PI });
            path.push(Segment::Line { from: q, to: base });
        }
        if !clear {
            continue;
        }
        path.push(Segment::Arc { center: centre, radius: big, start: angle, sweep: -2.0 * PI });
        let num = NumericConnection::new(conn);
        let m = conn.size;
        // the relation is exact, so tighten until it shows or precision runs out
        let mut step_tol = step_tolerance(tol);
        let deviation = loop {
            let run = integrate_path(&num, &path, 64, step_tol)?;
            let dev =
                (0..m * m).map(|i| (run.phi[i] - if i / m == i % m { 1.0 } else { 0.0 }).norm()).fold(0.0, f64::max);
            if dev <= tol / 10.0 || step_tol < 1e-13 {
                break dev;
            }
            step_tol /= 10.0;
        };
        return Ok(GlobalRelation {
            base,
            order: order.into_iter().map(|i| Point::Finite(conn.pole_points[i].clone())).collect(),
            deviation,
            pass: deviation <= tol,
        });
    }
    Err(Error::Integration("no base point with clear keyhole paths".into()))
}

/// `base + t·delta` for each `t` in the grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub base: FuchsianOperator,
    pub delta: Vec<Poly>,
    pub grid: Vec<Scalar>,
}

impl Family {
    pub fn instances(&self) -> Result<Vec<(Scalar, FuchsianOperator)>> {
        if self.delta.len() != self.base.order() {
            return Err(Error::OrderMismatch { order: self.base.order(), coeffs: self.delta.len() });
        }
        self.grid
            .iter()
            .map(|t| {
                let coeffs = self.base.coeffs().iter().zip(&self.delta).map(|(h, d)| h + &d.scale(t)).collect();
                Ok((t.clone(), self.base.with_coeffs(coeffs)?))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: Scalar,
    pub point: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub char_poly: Option<Vec<C>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub point: Point,
    pub rows: Vec<SweepRow>,
    /// Largest char-poly coefficient distance from the first successful row.
    pub max_deviation: f64,
    pub failures: usize,
}

pub fn isomonodromy_sweep(family: &Family, point: &Point, tol: f64) -> Result<SweepReport> {
    let instances = family.instances()?;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(instances.len().max(1));
    let chunk = instances.len().div_ceil(threads).max(1);
    let results: Vec<Result<MonodromyResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = instances
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || part.iter().map(|(_, op)| operator_monodromy(op, point, tol)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let reference = results.iter().find_map(|r| r.as_ref().ok()).map(|r| r.char_poly.clone());
    let mut rows = Vec::with_capacity(results.len());
    let (mut max_deviation, mut failures) = (0.0f64, 0);
    for ((t, _), r) in instances.into_iter().zip(results) {
        match r {
            Ok(res) => {
                let dev = reference
                    .as_ref()
                    .map(|c| c.iter().zip(&res.char_poly).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
                    .unwrap_or(0.0);
                max_deviation = max_deviation.max(dev);
                rows.push(SweepRow {
                    parameter: t,
                    point: point.clone(),
                    char_poly: Some(res.char_poly),
                    error_estimate: Some(res.estimated_error),
                    deviation: Some(dev),
                    failure: None,
                });
            }
            Err(e) => {
                failures += 1;
                rows.push(SweepRow {
                    parameter: t,
                    point: point.clone(),
                    char_poly: None,
                    error_estimate: None,
                    deviation: None,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    Ok(SweepReport { point: point.clone(), rows, max_deviation, failures })
}
