//! Cut classification (invalid / non-supporting / supporting), the cut impact
//! protocol and relative-dimension histograms.

pub mod histogram;
pub mod impact;

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::hull::{face_hull, AffineHullResult, HullConfig, HullError};
use crate::linalg::{add, dot, ratio, scale, Rational, RationalVector};
use crate::model::{normalize_cut, Inequality};
use crate::oracle::{oracle_maximize, Bound, Oracle, OracleError, OracleResponse, PointCache};

pub use histogram::{build_histogram, relative_dimension_bin, BinError, DimensionBin};
pub use impact::{
    closed_gap, gap_trajectory, impact_protocol, GapError, ImpactError, ImpactOptions, ImpactReport, ImpactRun,
};

/// Default classification tolerance, `1/10000`.
pub fn default_tolerance() -> Rational {
    ratio(1, 10_000)
}

/// `max a^T x over P`, with the point or ray that attains it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BetaTrue {
    Finite {
        value: Rational,
        argmax: RationalVector,
    },
    Unbounded {
        witness: RationalVector,
        ray: RationalVector,
    },
    EmptyPolytope,
}

impl BetaTrue {
    pub fn as_bound(&self) -> Bound {
        match self {
            BetaTrue::Finite { value, .. } => Bound::Finite(value.clone()),
            BetaTrue::Unbounded { .. } => Bound::PosInfinity,
            BetaTrue::EmptyPolytope => Bound::NegInfinity,
        }
    }
}

/// One oracle query for the largest value of `a^T x` over the polyhedron.
/// `hints` are known feasible points the oracle may start from.
pub fn compute_beta_true<O: Oracle>(
    oracle: &O,
    coefficients: &[Rational],
    cache: Option<&PointCache>,
    hints: &[RationalVector],
) -> Result<BetaTrue, OracleError> {
    Ok(match oracle_maximize(oracle, coefficients, cache, hints)? {
        OracleResponse::Optimal { point, value } => BetaTrue::Finite { value, argmax: point },
        OracleResponse::Infeasible => BetaTrue::EmptyPolytope,
        OracleResponse::Unbounded { ray, witness: Some(w) } => BetaTrue::Unbounded { witness: w, ray },
        OracleResponse::Unbounded { witness: None, .. } => {
            return Err(OracleError::Precondition(
                "unbounded answer without a witness point".into(),
            ))
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Invalid,
    NonSupporting,
    Supporting,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Invalid => "invalid",
            Verdict::NonSupporting => "non_supporting",
            Verdict::Supporting => "supporting",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutClassification {
    /// The cut after max-norm scaling; verdicts refer to this form.
    pub normalized: Inequality,
    pub verdict: Verdict,
    pub beta_true: Bound,
    /// Exact `beta - beta_true`, when `beta_true` is finite.
    pub rhs_excess: Option<Rational>,
    /// Dimension of the induced face; set for supporting cuts.
    pub face_dimension: Option<isize>,
    /// The cut with `beta` replaced by `beta_true`; set for supporting cuts.
    pub tightened_cut: Option<Inequality>,
    /// A feasible point violating the cut by more than the tolerance; set for
    /// invalid cuts.
    pub certificate: Option<RationalVector>,
    /// The coefficient vector is zero; classified without the oracle.
    pub degenerate: bool,
}

impl CutClassification {
    /// Face dimension as used by histograms: `-1` for non-supporting cuts,
    /// `None` for invalid ones.
    pub fn histogram_dimension(&self) -> Option<isize> {
        match self.verdict {
            Verdict::Invalid => None,
            Verdict::NonSupporting => Some(-1),
            Verdict::Supporting => self.face_dimension,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Hull(#[from] HullError),
}

impl AnalysisError {
    /// Time, node or query budget exhausted.
    pub fn is_timeout(&self) -> bool {
        matches!(
            self,
            AnalysisError::Oracle(OracleError::Inconclusive(_)) | AnalysisError::Hull(HullError::Inconclusive { .. })
        )
    }
}

/// Classifies a cut against the polyhedron described by `base`, the hull
/// result already computed for it.
///
/// The cut is scaled to max-norm 1 first. With `beta_true = max a^T x`:
/// `beta < beta_true - tol` is invalid, `beta > beta_true + tol` is
/// non-supporting, and anything in between is supporting after replacing
/// `beta` by `beta_true`. The face of a supporting cut is then measured.
pub fn classify_cut<O: Oracle>(
    oracle: &O,
    base: &AffineHullResult,
    cut: &Inequality,
    tolerance: &Rational,
    cache: Option<&PointCache>,
    config: &HullConfig,
) -> Result<CutClassification, AnalysisError> {
    let normalized = normalize_cut(cut);
    let degenerate = normalized.is_zero();
    let mut out = CutClassification {
        normalized: normalized.clone(),
        verdict: Verdict::NonSupporting,
        beta_true: Bound::NegInfinity,
        rhs_excess: None,
        face_dimension: None,
        tightened_cut: None,
        certificate: None,
        degenerate,
    };
    if base.dimension < 0 {
        // every inequality is valid on the empty set
        return Ok(out);
    }

    let beta_true = if degenerate {
        BetaTrue::Finite {
            value: Rational::zero(),
            argmax: base.basis[0].clone(),
        }
    } else {
        compute_beta_true(oracle, &normalized.coefficients, cache, &base.basis)?
    };
    out.beta_true = beta_true.as_bound();
    let beta = &normalized.rhs;
    match beta_true {
        BetaTrue::EmptyPolytope => Ok(out),
        BetaTrue::Unbounded { witness, ray } => {
            // Walk far enough along the ray to cut through beta + tol.
            let slope = dot(&normalized.coefficients, &ray);
            let gap = beta + tolerance - dot(&normalized.coefficients, &witness);
            let steps = if gap.is_positive() {
                (gap / slope).floor() + Rational::from_integer(1.into())
            } else {
                Rational::from_integer(1.into())
            };
            out.verdict = Verdict::Invalid;
            out.certificate = Some(add(&witness, &scale(&ray, &steps)));
            Ok(out)
        }
        BetaTrue::Finite { value, argmax } => {
            out.rhs_excess = Some(beta - &value);
            if *beta < &value - tolerance {
                out.verdict = Verdict::Invalid;
                out.certificate = Some(argmax);
            } else if *beta > &value + tolerance {
                out.verdict = Verdict::NonSupporting;
            } else {
                let mut tightened = normalized.clone();
                tightened.rhs = value;
                out.verdict = Verdict::Supporting;
                out.face_dimension = Some(if degenerate {
                    base.dimension
                } else {
                    face_hull(oracle, base, &tightened, cache, config)?.dimension
                });
                out.tightened_cut = Some(tightened);
            }
            Ok(out)
        }
    }
}
