//! The mixed-integer program `max c^T x  s.t.  Ax <= b,  x_i integer for i in I`
//! and cutting-plane inequalities over it.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::{dot, Rational, RationalMatrix, RationalVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// A mixed-integer program in maximization form. Variable bounds are kept
/// apart from `A` but are constraints all the same.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MipInstance {
    pub name: String,
    pub num_vars: usize,
    pub constraint_matrix: RationalMatrix,
    pub rhs: RationalVector,
    pub objective: RationalVector,
    pub integer_vars: BTreeSet<usize>,
    pub lower_bounds: Vec<Option<Rational>>,
    pub upper_bounds: Vec<Option<Rational>>,
}

impl MipInstance {
    /// A continuous, unbounded instance with the given rows.
    pub fn new(
        name: impl Into<String>,
        constraint_matrix: RationalMatrix,
        rhs: RationalVector,
        objective: RationalVector,
    ) -> Self {
        let n = objective.len();
        Self {
            name: name.into(),
            num_vars: n,
            constraint_matrix,
            rhs,
            objective,
            integer_vars: BTreeSet::new(),
            lower_bounds: vec![None; n],
            upper_bounds: vec![None; n],
        }
    }

    pub fn with_integers(mut self, vars: impl IntoIterator<Item = usize>) -> Self {
        self.integer_vars.extend(vars);
        self
    }

    pub fn with_all_integer(mut self) -> Self {
        self.integer_vars = (0..self.num_vars).collect();
        self
    }

    pub fn with_box(mut self, lower: Rational, upper: Rational) -> Self {
        self.lower_bounds = vec![Some(lower); self.num_vars];
        self.upper_bounds = vec![Some(upper); self.num_vars];
        self
    }

    pub fn num_rows(&self) -> usize {
        self.constraint_matrix.nrows()
    }

    pub fn is_integer_var(&self, j: usize) -> bool {
        self.integer_vars.contains(&j)
    }

    /// True iff `x` satisfies `Ax <= b` and the variable bounds.
    pub fn satisfies_linear(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let rows_ok = self
            .constraint_matrix
            .rows()
            .iter()
            .zip(&self.rhs)
            .all(|(row, b)| dot(row, x) <= *b);
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower_bounds[j].as_ref().is_none_or(|l| v >= l) && self.upper_bounds[j].as_ref().is_none_or(|u| v <= u)
        });
        rows_ok && bounds_ok
    }

    /// True iff `x` is a feasible solution of the mixed-integer program.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.satisfies_linear(x) && self.integer_vars.iter().all(|&j| x[j].is_integer())
    }
}

/// A violated structural invariant of a [`MipInstance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RhsLengthMismatch { rows: usize, rhs: usize },
    ColumnCountMismatch { columns: usize, num_vars: usize },
    ObjectiveLengthMismatch { objective: usize, num_vars: usize },
    BoundsLengthMismatch,
    IntegerIndexOutOfRange(usize),
    CrossedBounds(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RhsLengthMismatch { rows, rhs } => {
                write!(f, "rhs length mismatch ({rhs} entries for {rows} rows)")
            }
            Violation::ColumnCountMismatch { columns, num_vars } => {
                write!(f, "constraint matrix has {columns} columns, expected {num_vars}")
            }
            Violation::ObjectiveLengthMismatch { objective, num_vars } => {
                write!(f, "objective has {objective} entries, expected {num_vars}")
            }
            Violation::BoundsLengthMismatch => write!(f, "bound vectors do not match num_vars"),
            Violation::IntegerIndexOutOfRange(j) => write!(f, "integer index out of range ({j})"),
            Violation::CrossedBounds(j) => write!(f, "lower bound exceeds upper bound for variable {j}"),
        }
    }
}

/// Lists every broken invariant; an empty list means the instance is valid.
pub fn validate_instance(inst: &MipInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.num_vars;
    if inst.constraint_matrix.nrows() != inst.rhs.len() {
        out.push(Violation::RhsLengthMismatch {
            rows: inst.constraint_matrix.nrows(),
            rhs: inst.rhs.len(),
        });
    }
    if inst.constraint_matrix.ncols() != n {
        out.push(Violation::ColumnCountMismatch {
            columns: inst.constraint_matrix.ncols(),
            num_vars: n,
        });
    }
    if inst.objective.len() != n {
        out.push(Violation::ObjectiveLengthMismatch {
            objective: inst.objective.len(),
            num_vars: n,
        });
    }
    if inst.lower_bounds.len() != n || inst.upper_bounds.len() != n {
        out.push(Violation::BoundsLengthMismatch);
    } else {
        for j in 0..n {
            if let (Some(l), Some(u)) = (&inst.lower_bounds[j], &inst.upper_bounds[j]) {
                if l > u {
                    out.push(Violation::CrossedBounds(j));
                }
            }
        }
    }
    out.extend(
        inst.integer_vars
            .iter()
            .filter(|&&j| j >= n)
            .map(|&j| Violation::IntegerIndexOutOfRange(j)),
    );
    out
}

/// A cutting plane `a^T x <= beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub coefficients: RationalVector,
    pub rhs: Rational,
    pub label: String,
    /// Originating cut class, when known (for example `cmir` or `zerohalf`).
    pub class: Option<String>,
    pub normalized: bool,
}

impl Inequality {
    pub fn new(label: impl Into<String>, coefficients: RationalVector, rhs: Rational) -> Self {
        Self {
            coefficients,
            rhs,
            label: label.into(),
            class: None,
            normalized: false,
        }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.coefficients
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Scales the cut so its largest absolute coefficient is 1.
///
/// A zero coefficient vector is returned unchanged with `normalized = false`.
pub fn normalize_cut(cut: &Inequality) -> Inequality {
    let mut out = cut.clone();
    let max = cut.max_abs_coefficient();
    if max.is_zero() {
        out.normalized = false;
        return out;
    }
    let inv = max.recip();
    for c in out.coefficients.iter_mut() {
        *c *= &inv;
    }
    out.rhs *= &inv;
    out.normalized = true;
    out
}

/// Exact slack `a^T x - beta`: negative inside, zero on the face, positive
/// when violated.
pub fn evaluate(ineq: &Inequality, x: &[Rational]) -> Result<Rational, ModelError> {
    if ineq.coefficients.len() != x.len() {
        return Err(ModelError::DimensionMismatch {
            expected: ineq.coefficients.len(),
            actual: x.len(),
        });
    }
    Ok(dot(&ineq.coefficients, x) - &ineq.rhs)
}

/// The face `{x in P : a^T x = beta}` of the instance's mixed-integer hull.
/// Never materialized; it only pairs the instance with the inequality.
#[derive(Clone, Copy, Debug)]
pub struct Face<'a> {
    pub base: &'a MipInstance,
    pub inequality: &'a Inequality,
}
