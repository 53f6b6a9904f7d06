//! Seeded random instances for self-tests and benchmarks.

use rand::Rng;

use crate::linalg::{dot, int, Rational, RationalMatrix, RationalVector};
use crate::model::{Inequality, MipInstance};

/// Shape of generated instances: pure integer, box `[0, upper]^n`,
/// integer coefficients in `[-coef, coef]`.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub min_vars: usize,
    pub max_vars: usize,
    pub coef: i64,
    pub upper: i64,
    pub max_rows: usize,
    /// Probability that a row is turned into an equation pair.
    pub equation_probability: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            min_vars: 2,
            max_vars: 6,
            coef: 5,
            upper: 3,
            max_rows: 4,
            equation_probability: 0.25,
        }
    }
}

fn random_vector<R: Rng>(rng: &mut R, n: usize, coef: i64) -> RationalVector {
    (0..n).map(|_| int(rng.gen_range(-coef..=coef))).collect()
}

/// A non-empty instance: every row is built to hold at a hidden lattice
/// point, with random slack. Some rows become equations `a^T x = a^T x0`.
pub fn random_instance<R: Rng>(rng: &mut R, spec: &GeneratorSpec, name: impl Into<String>) -> MipInstance {
    let n = rng.gen_range(spec.min_vars..=spec.max_vars);
    let x0: RationalVector = (0..n).map(|_| int(rng.gen_range(0..=spec.upper))).collect();
    let m = rng.gen_range(0..=spec.max_rows);
    let mut matrix = RationalMatrix::new(n);
    let mut rhs = Vec::new();
    for _ in 0..m {
        let a = random_vector(rng, n, spec.coef);
        let at = dot(&a, &x0);
        if rng.gen_bool(spec.equation_probability) {
            matrix.push_row(a.iter().map(|v| -v).collect());
            rhs.push(-&at);
            matrix.push_row(a);
            rhs.push(at);
        } else {
            matrix.push_row(a);
            rhs.push(at + int(rng.gen_range(0..=spec.coef)));
        }
    }
    let objective = random_vector(rng, n, spec.coef);
    MipInstance::new(name, matrix, rhs, objective)
        .with_all_integer()
        .with_box(int(0), int(spec.upper))
}

/// A random cut `a^T x <= beta_true + offset` for a nonzero random `a`.
/// `beta_true` comes from the caller's own optimization.
pub fn random_cut_direction<R: Rng>(rng: &mut R, n: usize, coef: i64) -> RationalVector {
    loop {
        let a = random_vector(rng, n, coef);
        if a.iter().any(|v| *v != int(0)) {
            return a;
        }
    }
}

pub fn offset_cut(label: impl Into<String>, a: RationalVector, beta_true: &Rational, offset: i64) -> Inequality {
    Inequality::new(label, a, beta_true + int(offset))
}
