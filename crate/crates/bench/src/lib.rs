//! Fixture instances shared by the benchmarks.

use facedim::linalg::{int, int_vector, RationalMatrix};
use facedim::MipInstance;

/// `{0,1}^n` with a zero objective.
pub fn cube(n: usize) -> MipInstance {
    MipInstance::new(
        format!("cube{n}"),
        RationalMatrix::new(n),
        vec![],
        int_vector(&vec![0; n]),
    )
    .with_all_integer()
    .with_box(int(0), int(1))
}

/// Binary knapsack `max sum (i+2) x_i  s.t.  sum (i+1) x_i <= n`.
pub fn knapsack(n: usize) -> MipInstance {
    let weights: Vec<i64> = (1..=n as i64).collect();
    let profits: Vec<i64> = (2..=n as i64 + 1).collect();
    MipInstance::new(
        format!("knap{n}"),
        RationalMatrix::from_i64(&[&weights], n),
        int_vector(&[n as i64]),
        int_vector(&profits),
    )
    .with_all_integer()
    .with_box(int(0), int(1))
}
