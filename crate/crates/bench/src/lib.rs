//! Fixed inputs for the kernel benchmarks, built from seeded generators so
//! runs compare like with like.

use fuchskit::connection::{build_companion, LogConnection};
use fuchskit::moduli::{build_constraints, ConstraintSystem};
use fuchskit::sample::{self, SampleRng};
use fuchskit::{FuchsianOperator, Scalar};

pub const SEED: u64 = 2024;

pub fn rng() -> SampleRng {
    sample::rng(SEED)
}

/// A constraint system with `n` real and `big_n` apparent points.
pub fn constraint_system(m: usize, n: usize, big_n: usize) -> ConstraintSystem {
    let pts = sample::random_points(&mut rng(), n + big_n);
    let (real, app) = pts.split_at(n);
    build_constraints(m, real, app, None).expect("distinct points")
}

/// An operator of order `m` with an apparent point, and that point.
pub fn apparent_operator(m: usize) -> (FuchsianOperator, Scalar) {
    let mut r = rng();
    let factors = sample::random_factors(&mut r, 2, 1);
    let op = sample::apparent_instance(&mut r, m, &factors).expect("Wronskian basis is independent");
    let a = op.apparent_points()[0].clone();
    (op, a)
}

/// `r + 2` distinct rational points.
pub fn vandermonde_points(r: usize) -> Vec<Scalar> {
    sample::random_points(&mut rng(), r + 2)
}

pub fn random_operator(m: usize, n: usize) -> FuchsianOperator {
    sample::random_operator(&mut rng(), m, n, 0)
}

pub fn companion(op: &FuchsianOperator) -> LogConnection {
    build_companion(op).expect("valid operator")
}
