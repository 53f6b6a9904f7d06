//! Optimization oracles over the mixed-integer hull of an instance.
//!
//! An oracle answers `max w^T x over P` with an optimal point, an improving
//! ray or "infeasible". Two providers exist: [`MipOracle`] runs the exact
//! branch-and-bound solver, [`BruteForceOracle`] enumerates a small lattice.

pub mod branch;
pub mod lp;

use std::sync::{Arc, RwLock};
use std::time::Duration;

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub use branch::{solve_mip, solve_relaxation, Bound, SolveError, SolveOptions, SolveResult, SolveStatus};
pub use lp::{resolve_lp, solve_lp, solve_lp_with_state, LpOutcome, LpProblem, LpRow, LpState, RowKind};

use crate::linalg::{add, dot, Rational, RationalVector};
use crate::model::{evaluate, Inequality, MipInstance};

/// Largest lattice the brute-force oracle agrees to enumerate.
pub const MAX_LATTICE_POINTS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResponse {
    Optimal {
        point: RationalVector,
        value: Rational,
    },
    Unbounded {
        ray: RationalVector,
        witness: Option<RationalVector>,
    },
    Infeasible,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// The solver stopped on a node or time limit before deciding.
    #[error("oracle inconclusive: solver stopped with status {0}")]
    Inconclusive(SolveStatus),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("objective has length {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("brute-force precondition violated: {0}")]
    Precondition(String),
    #[error("oracle returned a point that is not feasible for the instance")]
    UnsoundPoint,
}

/// An optimization oracle for the mixed-integer hull of `instance()`,
/// possibly restricted by equations.
pub trait Oracle: Sync {
    /// The unrestricted base instance.
    fn instance(&self) -> &MipInstance;

    fn maximize(&self, objective: &[Rational]) -> Result<OracleResponse, OracleError>;

    /// [`maximize`](Self::maximize), given points believed to be feasible.
    /// An oracle may start from the best of them; infeasible hints must be
    /// ignored.
    fn maximize_with_hints(
        &self,
        objective: &[Rational],
        hints: &[RationalVector],
    ) -> Result<OracleResponse, OracleError> {
        let _ = hints;
        self.maximize(objective)
    }

    /// The same oracle restricted to `a^T x = beta`.
    fn restricted(&self, coefficients: &[Rational], rhs: &Rational) -> Self
    where
        Self: Sized;

    fn dimension(&self) -> usize {
        self.instance().num_vars
    }
}

/// Oracle backed by [`solve_mip`].
#[derive(Clone, Debug)]
pub struct MipOracle {
    instance: Arc<MipInstance>,
    equations: Vec<(RationalVector, Rational)>,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl MipOracle {
    pub fn new(instance: MipInstance) -> Self {
        Self::shared(Arc::new(instance))
    }

    pub fn shared(instance: Arc<MipInstance>) -> Self {
        Self {
            instance,
            equations: Vec::new(),
            node_limit: None,
            time_limit: Some(branch::DEFAULT_TIME_LIMIT),
        }
    }

    pub fn with_limits(mut self, node_limit: Option<u64>, time_limit: Option<Duration>) -> Self {
        self.node_limit = node_limit;
        self.time_limit = time_limit;
        self
    }

    pub fn equations(&self) -> &[(RationalVector, Rational)] {
        &self.equations
    }
}

impl Oracle for MipOracle {
    fn instance(&self) -> &MipInstance {
        &self.instance
    }

    fn maximize(&self, objective: &[Rational]) -> Result<OracleResponse, OracleError> {
        self.maximize_with_hints(objective, &[])
    }

    /// The best feasible hint becomes the starting incumbent of the solve.
    fn maximize_with_hints(
        &self,
        objective: &[Rational],
        hints: &[RationalVector],
    ) -> Result<OracleResponse, OracleError> {
        let incumbent = hints
            .iter()
            .filter(|h| {
                h.len() == self.instance.num_vars
                    && self.instance.is_feasible(h)
                    && self.equations.iter().all(|(a, b)| dot(a, h) == *b)
            })
            .max_by(|a, b| dot(objective, a).cmp(&dot(objective, b)))
            .cloned();
        let opts = SolveOptions {
            incumbent,
            extra_equations: self.equations.clone(),
            node_limit: self.node_limit,
            time_limit: self.time_limit,
            ..Default::default()
        };
        let result = solve_mip(&self.instance, objective, &opts)?;
        match result.status {
            SolveStatus::Optimal => Ok(OracleResponse::Optimal {
                point: result.best_point.expect("optimal status carries a point"),
                value: result.primal_value.expect("optimal status carries a value"),
            }),
            SolveStatus::Infeasible => Ok(OracleResponse::Infeasible),
            SolveStatus::Unbounded => Ok(OracleResponse::Unbounded {
                ray: result.ray.expect("unbounded status carries a ray"),
                witness: result.best_point,
            }),
            status @ (SolveStatus::NodeLimit | SolveStatus::TimeLimit) => Err(OracleError::Inconclusive(status)),
        }
    }

    fn restricted(&self, coefficients: &[Rational], rhs: &Rational) -> Self {
        let mut out = self.clone();
        out.equations.push((coefficients.to_vec(), rhs.clone()));
        out
    }
}

/// Oracle that enumerates every lattice point of a bounded pure-integer
/// instance once and answers queries by scanning them.
#[derive(Clone, Debug)]
pub struct BruteForceOracle {
    instance: Arc<MipInstance>,
    points: Arc<Vec<RationalVector>>,
}

impl BruteForceOracle {
    pub fn new(instance: MipInstance) -> Result<Self, OracleError> {
        let points = enumerate_feasible_points(&instance)?;
        Ok(Self {
            instance: Arc::new(instance),
            points: Arc::new(points),
        })
    }

    /// All feasible points, in lexicographic order.
    pub fn points(&self) -> &[RationalVector] {
        &self.points
    }
}

impl Oracle for BruteForceOracle {
    fn instance(&self) -> &MipInstance {
        &self.instance
    }

    fn maximize(&self, objective: &[Rational]) -> Result<OracleResponse, OracleError> {
        if objective.len() != self.instance.num_vars {
            return Err(OracleError::DimensionMismatch {
                expected: self.instance.num_vars,
                actual: objective.len(),
            });
        }
        let mut best: Option<(&RationalVector, Rational)> = None;
        for p in self.points.iter() {
            let v = dot(objective, p);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((p, v));
            }
        }
        Ok(match best {
            Some((p, v)) => OracleResponse::Optimal {
                point: p.clone(),
                value: v,
            },
            None => OracleResponse::Infeasible,
        })
    }

    fn restricted(&self, coefficients: &[Rational], rhs: &Rational) -> Self {
        let points = self
            .points
            .iter()
            .filter(|p| dot(coefficients, p) == *rhs)
            .cloned()
            .collect();
        Self {
            instance: Arc::clone(&self.instance),
            points: Arc::new(points),
        }
    }
}

/// Every feasible point of a pure-integer instance with finite bounds.
pub fn enumerate_feasible_points(inst: &MipInstance) -> Result<Vec<RationalVector>, OracleError> {
    let n = inst.num_vars;
    if inst.integer_vars.len() != n {
        return Err(OracleError::Precondition("all variables must be integer".into()));
    }
    let mut ranges = Vec::with_capacity(n);
    let mut size: u64 = 1;
    for j in 0..n {
        let (Some(l), Some(u)) = (&inst.lower_bounds[j], &inst.upper_bounds[j]) else {
            return Err(OracleError::Precondition(format!("variable {j} has an infinite bound")));
        };
        let lo: BigInt = l.ceil().to_integer();
        let hi: BigInt = u.floor().to_integer();
        if hi < lo {
            return Ok(Vec::new());
        }
        let width = (&hi - &lo + 1u32).to_u64().unwrap_or(u64::MAX);
        size = size.saturating_mul(width);
        if size > MAX_LATTICE_POINTS {
            return Err(OracleError::Precondition(format!(
                "lattice has more than {MAX_LATTICE_POINTS} points"
            )));
        }
        ranges.push((lo, hi));
    }
    let mut out = Vec::new();
    let mut current: Vec<BigInt> = ranges.iter().map(|(lo, _)| lo.clone()).collect();
    loop {
        let x: RationalVector = current.iter().map(|v| Rational::from_integer(v.clone())).collect();
        if inst.is_feasible(&x) {
            out.push(x);
        }
        // odometer, last coordinate fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if current[k] < ranges[k].1 {
                current[k] += 1u32;
                break;
            }
            current[k] = ranges[k].0.clone();
        }
    }
}

/// One-shot brute-force query: enumerate and maximize.
pub fn brute_force_oracle(inst: &MipInstance, objective: &[Rational]) -> Result<OracleResponse, OracleError> {
    BruteForceOracle::new(inst.clone())?.maximize(objective)
}

/// Append-only set of points of `P` returned by oracle queries.
#[derive(Debug, Default)]
pub struct PointCache {
    points: RwLock<IndexSet<RationalVector>>,
}

impl PointCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `point` after checking it is feasible for `inst`. Returns whether
    /// it was new.
    pub fn insert(&self, inst: &MipInstance, point: RationalVector) -> Result<bool, OracleError> {
        if !inst.is_feasible(&point) {
            return Err(OracleError::UnsoundPoint);
        }
        Ok(self.points.write().expect("point cache poisoned").insert(point))
    }

    pub fn snapshot(&self) -> Vec<RationalVector> {
        self.points
            .read()
            .expect("point cache poisoned")
            .iter()
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.read().expect("point cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Looks for a cached point that saves an oracle round.
///
/// With `gamma`, returns a point `p` on the face with `d^T p != gamma`.
/// Without it, returns a point `p` on the face such that another cached face
/// point has a different `d` value; the caller re-probes with
/// `gamma = d^T p` to get the second one.
pub fn cache_probe(
    cache: &PointCache,
    face: Option<&Inequality>,
    d: &[Rational],
    gamma: Option<&Rational>,
) -> Option<RationalVector> {
    let points = cache.points.read().expect("point cache poisoned");
    let mut on_face = points
        .iter()
        .filter(|p| face.is_none_or(|f| evaluate(f, p).map(|s| s.is_zero()).unwrap_or(false)));
    match gamma {
        Some(g) => on_face.find(|p| dot(d, p) != *g).cloned(),
        None => {
            let first = on_face.next()?;
            let value = dot(d, first);
            on_face.any(|p| dot(d, p) != value).then(|| first.clone())
        }
    }
}

/// Queries `oracle` (passing `hints` on) and records optimal points and
/// unbounded witnesses in `cache`. In debug builds every returned point is
/// checked for exact feasibility.
pub fn oracle_maximize<O: Oracle>(
    oracle: &O,
    objective: &[Rational],
    cache: Option<&PointCache>,
    hints: &[RationalVector],
) -> Result<OracleResponse, OracleError> {
    let response = oracle.maximize_with_hints(objective, hints)?;
    record_response(oracle, objective, cache, &response)?;
    Ok(response)
}

/// The bookkeeping half of [`oracle_maximize`], for answers obtained
/// directly from the oracle.
pub fn record_response<O: Oracle>(
    oracle: &O,
    objective: &[Rational],
    cache: Option<&PointCache>,
    response: &OracleResponse,
) -> Result<(), OracleError> {
    let inst = oracle.instance();
    match response {
        OracleResponse::Optimal { point, value } => {
            debug_assert!(inst.is_feasible(point), "oracle returned an infeasible point");
            debug_assert_eq!(dot(objective, point), *value);
            if let Some(c) = cache {
                c.insert(inst, point.clone())?;
            }
        }
        OracleResponse::Unbounded { ray, witness } => {
            debug_assert!(dot(objective, ray) > Rational::zero());
            if let Some(w) = witness {
                debug_assert!(inst.is_feasible(w));
                debug_assert!(inst.is_feasible(&add(w, ray)));
                if let Some(c) = cache {
                    c.insert(inst, w.clone())?;
                }
            }
        }
        OracleResponse::Infeasible => {}
    }
    Ok(())
}
