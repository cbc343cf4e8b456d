use std::process::ExitCode;
use std::time::{Duration, Instant};

use fuchskit::algebra::{complex_roots, det_exact};
use fuchskit::connection::{
    all_exponent_data, build_companion, companion_rigidity_check, fuchs_relation_value, trace_sum, Point,
};
use fuchskit::cyclic::roundtrip_check;
use fuchskit::frobenius::{apparent_check, frobenius_oracle, special_apparent_check, special_exponents};
use fuchskit::moduli::{build_constraints, dimensions, gen_vandermonde, vdm_closed_form, verify_rank, DerivativePlan};
use fuchskit::monodromy::{global_relation, is_apparent_numeric, operator_monodromy};
use fuchskit::sample::{
    apparent_instance, operator_with_exponents, perturb_at, random_factors, random_operator, random_points, rng,
    SampleRng,
};
use fuchskit::{FuchsianOperator, Poly, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

// Riemann scheme count: coefficient unknowns minus exponent conditions, one
// of them implied by the exponent sum relation.
fn accessory_by_counting(m: i64, n: i64) -> i64 {
    let unknowns: i64 = (1..=m).map(|k| k * (n - 1) + 1).sum();
    let conditions = (n + 1) * m - 1;
    unknowns - conditions
}

fn dimension_grid() -> Outcome {
    let start = Instant::now();
    let mut cells = 0;
    for m in 1..=5i64 {
        for n in 2..=6i64 {
            let d = dimensions(m as usize, n as usize, 0).map_err(|e| e.to_string())?;
            let e = 1 - m * m + m * (m - 1) * (n + 1) / 2;
            ensure(d.e == e && d.c == 2 * e, || format!("m={m} n={n}: {d:?}"))?;
            ensure(accessory_by_counting(m, n) == e, || format!("count m={m} n={n}"))?;
            cells += 1;
        }
    }
    for (m, n, e) in [(2, 2, 0), (2, 3, 1), (3, 3, 4)] {
        let d = dimensions(m, n, 0).map_err(|e| e.to_string())?;
        ensure(d.e == e, || format!("e({m},{n}) = {}", d.e))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{cells} cells"))
}

fn n_independence() -> Outcome {
    let mut cells = 0;
    for m in 1..=5usize {
        for n in 2..=6usize {
            let e = dimensions(m, n, 0).map_err(|e| e.to_string())?.e;
            for big_n in 0..=4usize {
                let d = dimensions(m, n, big_n).map_err(|e| e.to_string())?;
                // unknowns and rows counted from the assembled system
                let pts: Vec<Scalar> = (0..n as i64).map(s).collect();
                let app: Vec<Scalar> = (0..big_n as i64).map(|i| s(100 + i)).collect();
                let sys = build_constraints(m, &pts, &app, None).map_err(|e| e.to_string())?;
                let params = sys.unknowns.len() as i64;
                ensure(params == d.parameter_count, || format!("params m={m} n={n} N={big_n}"))?;
                ensure(sys.expected_rank as i64 == d.condition_count, || format!("conditions m={m} n={n} N={big_n}"))?;
                ensure(d.difference == e, || format!("m={m} n={n} N={big_n}: {} vs {e}", d.difference))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells"))
}

/// Integer-exponent instances at a marked point: Wronskian annihilators,
/// their perturbations, and operators with prescribed exponents.
fn integer_instances(r: &mut SampleRng, m: usize, count: usize, special_only: bool) -> Vec<(FuchsianOperator, Scalar)> {
    let mut out = Vec::new();
    while out.len() < count {
        match r.gen_range(0..3) {
            0 | 1 => {
                let count = r.gen_range(2..=3);
                let f = random_factors(r, count, if special_only { 1 } else { 2 });
                let Ok(op) = apparent_instance(r, m, &f) else { continue };
                let a = op.apparent_points().choose(r).expect("nonempty").clone();
                if special_only && f.iter().any(|(p, e)| p == &a && *e != 1) {
                    continue;
                }
                if out.len() % 2 == 0 {
                    out.push((op, a));
                } else if let Some(p) = perturb_at(r, &op, &a) {
                    out.push((p, a));
                }
            }
            _ => {
                let exps = if special_only {
                    special_exponents(m)
                } else {
                    let mut pool: Vec<i64> = (0..=m as i64 + 2).collect();
                    pool.shuffle(r);
                    let mut e: Vec<i64> = pool[..m].to_vec();
                    e.sort_unstable_by(|a, b| b.cmp(a));
                    e.into_iter().map(s).collect()
                };
                let n = r.gen_range(2..=3);
                out.push(operator_with_exponents(r, &exps, n));
            }
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(301);
    let (mut total, mut apparent) = (0, 0);
    for m in [2, 3] {
        for (op, a) in integer_instances(&mut r, m, 60, false) {
            let det = apparent_check(&op, &a).map_err(|e| e.to_string())?;
            let orc = frobenius_oracle(&op, &a, None).map_err(|e| e.to_string())?;
            ensure(det.is_apparent == orc.is_apparent, || format!("disagreement at {a} for {}", op.to_json()))?;
            total += 1;
            apparent += usize::from(det.is_apparent);
        }
    }
    ensure(apparent > 10 && total - apparent > 10, || format!("unbalanced sample: {apparent}/{total} apparent"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("{total} instances, {apparent} apparent, 0 disagreements"))
}

fn reduced_conditions() -> Outcome {
    let mut r = rng(402);
    let (mut total, mut apparent) = (0, 0);
    for m in [3, 4] {
        for (op, a) in integer_instances(&mut r, m, 30, true) {
            let full = apparent_check(&op, &a).map_err(|e| e.to_string())?;
            let reduced = special_apparent_check(&op, &a).map_err(|e| e.to_string())?;
            ensure(full.is_apparent == reduced.is_special_apparent, || {
                format!("disagreement at {a} for {}", op.to_json())
            })?;
            total += 1;
            apparent += usize::from(full.is_apparent);
        }
    }
    ensure(apparent > 5 && total - apparent > 5, || format!("unbalanced sample: {apparent}/{total} apparent"))?;
    Ok(format!("{total} instances, {apparent} apparent, 0 disagreements"))
}

fn abs_sq(x: &Scalar) -> Scalar {
    x * &x.conj()
}

fn vandermonde() -> Outcome {
    let mut r = rng(505);
    let mut total = 0;
    for i in 0..60 {
        let rr = i % 5;
        let b = random_points(&mut r, rr + 2);
        let v = gen_vandermonde(&b, &DerivativePlan::quadratic(rr)).map_err(|e| e.to_string())?;
        let d = det_exact(&v).map_err(|e| e.to_string())?;
        let c = vdm_closed_form(&b).map_err(|e| e.to_string())?;
        ensure(abs_sq(&d) == abs_sq(&c) && !d.is_zero(), || format!("r={rr} b={b:?}: {d} vs {c}"))?;

        let mut coincide = b.clone();
        let (x, y) = (r.gen_range(0..coincide.len()), r.gen_range(0..coincide.len()));
        if x != y {
            coincide[x] = coincide[y].clone();
            let v = gen_vandermonde(&coincide, &DerivativePlan::quadratic(rr)).map_err(|e| e.to_string())?;
            ensure(det_exact(&v).map_err(|e| e.to_string())?.is_zero(), || "coincident det nonzero".into())?;
            ensure(vdm_closed_form(&coincide).map_err(|e| e.to_string())?.is_zero(), || {
                "coincident closed form".into()
            })?;
        }
        total += 1;
    }
    Ok(format!("{total} instances"))
}

fn constraint_ranks() -> Outcome {
    let mut r = rng(606);
    let mut total = 0;
    for m in 1..=3 {
        for n in 2..=4 {
            for big_n in 0..=3 {
                let pts = random_points(&mut r, n + big_n);
                let sys = build_constraints(m, &pts[..n], &pts[n..], None).map_err(|e| e.to_string())?;
                let rep = verify_rank(&sys);
                ensure(rep.pass, || format!("m={m} n={n} N={big_n}: rank {} vs {}", rep.rank, rep.expected_rank))?;
                let b1 = &rep.blocks[0];
                ensure(b1.rows == b1.rank + 1, || format!("k=1 block: {} rows, rank {}", b1.rows, b1.rank))?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} systems"))
}

fn round_trip() -> Outcome {
    let mut r = rng(707);
    for i in 0..100 {
        let m = 1 + i % 4;
        let (n, big_n) = (r.gen_range(1..=4), r.gen_range(0..=1));
        let op = random_operator(&mut r, m, n, big_n);
        let rep = roundtrip_check(&op).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("{}: {rep:?}", op.to_json()))?;
    }
    Ok("100 operators".into())
}

fn rigidity() -> Outcome {
    let mut r = rng(808);
    for _ in 0..20 {
        let n = r.gen_range(2..=4);
        let op = random_operator(&mut r, 2, n, 0);
        let same = companion_rigidity_check(&op, &op).map_err(|e| e.to_string())?;
        ensure(same.dimension == Some(1) && same.is_scalars, || format!("self: {same:?}"))?;
        let mut coeffs = op.coeffs().to_vec();
        coeffs[1] = &coeffs[1] + &Poly::constant(s(r.gen_range(1..=3)));
        let other = op.with_coeffs(coeffs).map_err(|e| e.to_string())?;
        let diff = companion_rigidity_check(&op, &other).map_err(|e| e.to_string())?;
        ensure(diff.dimension.is_none() && !diff.gauge_exists, || format!("distinct: {diff:?}"))?;
    }
    Ok("20 operators".into())
}

// Exponent sums from the indicial polynomials: m(m−1)/2 + Res_p(H_1/ψ) at a
// finite point and −m(m−1)/2 − lim z·H_1/ψ at infinity.
fn exponent_sum_oracle(op: &FuchsianOperator) -> Scalar {
    let m = op.order() as i64;
    let half = s(m * (m - 1) / 2);
    let psi = op.psi_all();
    let dpsi = psi.derivative();
    let h1 = op.h(1);
    let mut total = Scalar::zero();
    for p in op.all_points() {
        total = &(&total + &half) + &(&h1.eval(&p) / &dpsi.eval(&p));
    }
    let at_inf = h1.coeff(psi.degree().unwrap_or(0).wrapping_sub(1));
    &(&total - &half) - &at_inf
}

fn trace_identity() -> Outcome {
    let mut r = rng(909);
    for i in 0..60 {
        let m = 1 + i % 4;
        let (n, big_n) = (r.gen_range(1..=4), r.gen_range(0..=1));
        let op = random_operator(&mut r, m, n, big_n);
        let t = trace_sum(&op).map_err(|e| e.to_string())?;
        let n = op.finite_count() as i64;
        let mm = m as i64;
        let expected = s((n - 1) * mm * (mm - 1) / 2);
        ensure(t == expected && fuchs_relation_value(&op) == expected, || format!("{}: {t}", op.to_json()))?;
        ensure(exponent_sum_oracle(&op) == expected, || format!("oracle on {}", op.to_json()))?;
    }
    Ok("60 operators".into())
}

// Monodromy eigenvalues are e^{2πiρ}: spread in Re ρ skews the local basis,
// spread in Im ρ separates eigenvalue magnitudes by e^{2π·ΔIm ρ}.
fn well_conditioned(op: &FuchsianOperator) -> bool {
    all_exponent_data(op).expect("valid operator").iter().all(|d| {
        let c: Vec<_> = d.char_poly.coeffs().iter().map(Scalar::to_c64).collect();
        let roots = complex_roots(&c);
        roots.iter().all(|a| roots.iter().all(|b| (a.re - b.re).abs() <= 6.0 && (a.im - b.im).abs() <= 0.5))
    })
}

fn numeric_monodromy() -> Outcome {
    let start = Instant::now();
    let half = FuchsianOperator::new(1, vec![s(0)], vec![], vec![Poly::constant(Scalar::ratio(1, 2))])
        .map_err(|e| e.to_string())?;
    let mono = operator_monodromy(&half, &Point::Finite(s(0)), 1e-8).map_err(|e| e.to_string())?;
    let dev = (mono.matrix[0][0] + 1.0).norm();
    ensure(dev < 1e-8, || format!("m=1 monodromy off by {dev:e}"))?;

    let mut r = rng(1010);
    let (mut total, mut apparent) = (0, 0);
    for (op, a) in integer_instances(&mut r, 2, 24, false) {
        let exact = apparent_check(&op, &a).map_err(|e| e.to_string())?.is_apparent;
        let conn = build_companion(&op).map_err(|e| e.to_string())?;
        let num = is_apparent_numeric(&conn, &Point::Finite(a.clone()), 1e-6)
            .map_err(|e| format!("{e} at {a} for {}", op.to_json()))?;
        ensure(num.apparent == exact, || format!("at {a}: exact {exact}, numeric {num:?}, op {}", op.to_json()))?;
        total += 1;
        apparent += usize::from(exact);
    }

    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 5 {
        let op = random_operator(&mut r, 2, 3, 0);
        // 53-bit continuation cannot resolve badly conditioned monodromy
        if !well_conditioned(&op) {
            continue;
        }
        checked += 1;
        let g = global_relation(&build_companion(&op).map_err(|e| e.to_string())?, 1e-5).map_err(|e| e.to_string())?;
        ensure(g.pass, || format!("global relation deviation {:e}", g.deviation))?;
        worst = worst.max(g.deviation);
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{total} instances ({apparent} apparent), {checked} global relations, deviation ≤ {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("dimension grid", dimension_grid),
        ("N-independence", n_independence),
        ("oracle equivalence", oracle_equivalence),
        ("reduced-condition equivalence", reduced_conditions),
        ("vandermonde closed form", vandermonde),
        ("constraint ranks", constraint_ranks),
        ("round trip", round_trip),
        ("rigidity", rigidity),
        ("trace identity", trace_identity),
        ("numeric monodromy", numeric_monodromy),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let t = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} {name}: pass ({detail}; {t:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}; {t:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
