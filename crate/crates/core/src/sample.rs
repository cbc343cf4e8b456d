//! Seeded instance generators used by the tests, the benches and `check`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Poly, Scalar};
use crate::error::Result;
use crate::frobenius::annihilator_from_solutions;
use crate::operator::FuchsianOperator;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(rng: &mut impl Rng, bound: i64) -> i64 {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return v;
        }
    }
}

/// Distinct rationals `p/q` with `|p| ≤ 6`, `q ≤ 3`.
pub fn random_points(rng: &mut impl Rng, count: usize) -> Vec<Scalar> {
    let mut out: Vec<Scalar> = Vec::with_capacity(count);
    while out.len() < count {
        let p = Scalar::ratio(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Integer coefficients in `[-bound, bound]`, degree at most `deg`.
pub fn random_poly(rng: &mut impl Rng, deg: i64, bound: i64) -> Poly {
    if deg < 0 {
        return Poly::zero();
    }
    Poly::new((0..=deg).map(|_| Scalar::from_int(rng.gen_range(-bound..=bound))).collect())
}

/// A valid operator of order `m` with `n` real points, `big_n` listed apparent
/// points and random coefficients within the degree bounds.
pub fn random_operator(rng: &mut impl Rng, m: usize, n: usize, big_n: usize) -> FuchsianOperator {
    let pts = random_points(rng, n + big_n);
    let width = (n + big_n) as i64 - 1;
    let coeffs = (1..=m).map(|k| random_poly(rng, k as i64 * width, 4)).collect();
    let (real, app) = pts.split_at(n);
    FuchsianOperator::new(m, real.to_vec(), app.to_vec(), coeffs).expect("points are distinct")
}

fn falling_targets(m: usize, exps: &[Scalar]) -> Vec<Scalar> {
    let q = &Poly::falling_factorial(m) - &Poly::from_roots(exps);
    let b = q.to_falling_basis();
    (1..=m).map(|k| b.get(m - k).cloned().unwrap_or_default()).collect()
}

/// An operator on `n` real points whose exponents at the first point are
/// `exps`; the higher Taylor data there is random.
pub fn operator_with_exponents(rng: &mut impl Rng, exps: &[Scalar], n: usize) -> (FuchsianOperator, Scalar) {
    let m = exps.len();
    let pts = random_points(rng, n.max(2));
    let a = pts[0].clone();
    let psi = Poly::from_roots(&pts);
    let d = psi.derivative().eval(&a);
    let h0 = falling_targets(m, exps);
    let width = pts.len() as i64 - 1;
    let shift = Poly::linear(&a);
    let coeffs = (1..=m)
        .map(|k| {
            let lead = Poly::constant(&h0[k - 1] * &d.pow(k as u32));
            let rest = random_poly(rng, k as i64 * width - 1, 3);
            &lead + &(&shift * &rest)
        })
        .collect();
    (FuchsianOperator::new(m, pts, vec![], coeffs).expect("distinct points"), a)
}

fn integral(p: &Poly, c: Scalar) -> Poly {
    let mut out = vec![c];
    out.extend(p.coeffs().iter().enumerate().map(|(j, a)| a * &Scalar::ratio(1, j as i64 + 1)));
    Poly::new(out)
}

/// Polynomials whose Wronskian is a constant multiple of `Π (z − r)^e`,
/// built as `u·{1, ∫b_1, ..., ∫b_{m−1}}` with `b` a basis of one size less.
pub fn wronskian_basis(rng: &mut impl Rng, m: usize, factors: &[(Scalar, usize)]) -> Vec<Poly> {
    let target = factors.iter().fold(Poly::one(), |acc, (r, e)| &acc * &Poly::linear(r).pow(*e as u32));
    if m == 1 {
        return vec![target.scale(&Scalar::from_int(nonzero(rng, 3)))];
    }
    let mut u = Poly::one();
    let mut rest = Vec::new();
    for (r, e) in factors {
        let k = if *e >= m { rng.gen_range(0..=e / m) } else { 0 };
        u = &u * &Poly::linear(r).pow(k as u32);
        if e - k * m > 0 {
            rest.push((r.clone(), e - k * m));
        }
    }
    let b = wronskian_basis(rng, m - 1, &rest);
    let mut basis = vec![u.clone()];
    basis.extend(b.iter().map(|bi| &u * &integral(bi, Scalar::from_int(rng.gen_range(-2..=2)))));
    basis
}

/// Annihilator of a Wronskian basis: every listed point is apparent.
/// Simple zeros carry the special exponents.
pub fn apparent_instance(rng: &mut impl Rng, m: usize, factors: &[(Scalar, usize)]) -> Result<FuchsianOperator> {
    annihilator_from_solutions(&wronskian_basis(rng, m, factors))
}

/// Random Wronskian zeros: `count` distinct points, multiplicities up to `max_mult`.
pub fn random_factors(rng: &mut impl Rng, count: usize, max_mult: usize) -> Vec<(Scalar, usize)> {
    random_points(rng, count).into_iter().map(|p| (p, rng.gen_range(1..=max_mult.max(1)))).collect()
}

/// Adds `δ(z − a)^q` with `q ≥ 1` to one coefficient, keeping the exponents
/// at `a` and the degree bounds. `None` when no coefficient has room.
pub fn perturb_at(rng: &mut impl Rng, op: &FuchsianOperator, a: &Scalar) -> Option<FuchsianOperator> {
    let width = op.finite_count() as i64 - 1;
    let mut ks: Vec<usize> = (1..=op.order()).filter(|&k| k as i64 * width >= 1).collect();
    ks.shuffle(rng);
    let k = *ks.first()?;
    let q = rng.gen_range(1..=k as i64 * width) as u32;
    let delta = Poly::linear(a).pow(q).scale(&Scalar::from_int(nonzero(rng, 3)));
    let mut coeffs = op.coeffs().to_vec();
    coeffs[k - 1] = &coeffs[k - 1] + &delta;
    op.with_coeffs(coeffs).ok()
}
