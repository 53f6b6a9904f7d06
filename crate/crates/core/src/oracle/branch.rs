//! Exact LP-based branch-and-bound.
//!
//! Node contract: a node is a subproblem whose LP relaxation gets solved, the
//! root is node 1, and the global dual bound is recorded once after every
//! node. Selection is best bound first, then smaller depth, then smaller
//! creation index. The branching variable is the most fractional one (lowest
//! index on ties) and the down child is created first. Children re-solve
//! from the parent's tableau by dual simplex. There is no presolve, no cut
//! generation and no primal heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::lp::{resolve_lp, solve_lp, solve_lp_with_state, LpOutcome, LpProblem, LpRow, LpState, RowKind};
use crate::linalg::{dot, primitive_integer_vector, ratio, Rational, RationalVector};
use crate::model::{Inequality, MipInstance};

/// Default wall-clock limit for one solve.
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

/// A value on the extended real line; dual bounds of maximization problems.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInfinity,
    Finite(Rational),
    PosInfinity,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInfinity => write!(f, "-inf"),
            Bound::Finite(q) => write!(f, "{q}"),
            Bound::PosInfinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub extra_constraints: Vec<Inequality>,
    /// Equations `a^T x = beta` appended to the model.
    pub extra_equations: Vec<(RationalVector, Rational)>,
    /// A feasible point that seeds the primal bound before node 1.
    pub incumbent: Option<RationalVector>,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            extra_constraints: Vec::new(),
            extra_equations: Vec::new(),
            incumbent: None,
            node_limit: None,
            time_limit: Some(DEFAULT_TIME_LIMIT),
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Incumbent; for `Unbounded` a feasible witness point.
    pub best_point: Option<RationalVector>,
    pub primal_value: Option<Rational>,
    pub dual_bound: Bound,
    /// Improving ray when `status == Unbounded`, scaled to a primitive
    /// integer vector.
    pub ray: Option<RationalVector>,
    pub node_count: u64,
    /// `(node index, global dual bound after that node)`.
    pub dual_bound_trace: Vec<(u64, Bound)>,
}

impl SolveResult {
    /// Dual bound recorded after node `node`, or the last one recorded before it.
    pub fn dual_bound_at(&self, node: u64) -> Option<&Bound> {
        self.dual_bound_trace
            .iter()
            .take_while(|(t, _)| *t <= node)
            .last()
            .map(|(_, b)| b)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("{what} has length {actual}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("incumbent is not feasible for the model")]
    InfeasibleIncumbent,
    #[error("LP relaxation of a subproblem is unbounded although the root is bounded")]
    UnboundedSubproblem,
}

struct Node {
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    bound: Bound,
    depth: u32,
    index: u64,
    /// Optimal tableau of the parent, shared by both children.
    warm: Option<Arc<LpState>>,
}

/// Upper limit on tableau entries kept for warm starts across open nodes.
const WARM_START_CELLS: usize = 4_000_000;

/// Forgets a node's warm start, updating the count of stored entries when
/// this was the last reference.
fn release(warm: Option<Arc<LpState>>, live_cells: &mut usize) {
    if let Some(state) = warm {
        if Arc::strong_count(&state) == 1 {
            *live_cells -= state.cells();
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: larger bound first, then smaller depth, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then_with(|| other.depth.cmp(&self.depth))
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// The fixed part of the LP relaxation shared by all nodes.
fn relaxation(inst: &MipInstance, objective: &[Rational], opts: &SolveOptions) -> LpProblem {
    let mut rows: Vec<LpRow> = inst
        .constraint_matrix
        .rows()
        .iter()
        .zip(&inst.rhs)
        .map(|(a, b)| LpRow {
            coefficients: a.clone(),
            rhs: b.clone(),
            kind: RowKind::LessEqual,
        })
        .collect();
    rows.extend(opts.extra_constraints.iter().map(|c| LpRow {
        coefficients: c.coefficients.clone(),
        rhs: c.rhs.clone(),
        kind: RowKind::LessEqual,
    }));
    rows.extend(opts.extra_equations.iter().map(|(a, b)| LpRow {
        coefficients: a.clone(),
        rhs: b.clone(),
        kind: RowKind::Equal,
    }));
    LpProblem {
        objective: objective.to_vec(),
        rows,
        lower: inst.lower_bounds.clone(),
        upper: inst.upper_bounds.clone(),
    }
}

/// Root LP relaxation of the instance plus the option's extra rows, with
/// integrality dropped.
pub fn solve_relaxation(inst: &MipInstance, objective: &[Rational], opts: &SolveOptions) -> LpOutcome {
    solve_lp(&relaxation(inst, objective, opts))
}

fn satisfies_options(opts: &SolveOptions, x: &[Rational]) -> bool {
    opts.extra_constraints.iter().all(|c| dot(&c.coefficients, x) <= c.rhs)
        && opts.extra_equations.iter().all(|(a, b)| dot(a, x) == *b)
}

fn check_dimensions(inst: &MipInstance, objective: &[Rational], opts: &SolveOptions) -> Result<(), SolveError> {
    let n = inst.num_vars;
    let mismatch = |what, actual| SolveError::DimensionMismatch {
        what,
        expected: n,
        actual,
    };
    if objective.len() != n {
        return Err(mismatch("objective", objective.len()));
    }
    for c in &opts.extra_constraints {
        if c.coefficients.len() != n {
            return Err(mismatch("extra constraint", c.coefficients.len()));
        }
    }
    for (a, _) in &opts.extra_equations {
        if a.len() != n {
            return Err(mismatch("extra equation", a.len()));
        }
    }
    if let Some(x) = &opts.incumbent {
        if x.len() != n {
            return Err(mismatch("incumbent", x.len()));
        }
    }
    Ok(())
}

/// Most fractional integer variable; ties go to the smallest index.
fn branching_variable(inst: &MipInstance, x: &[Rational]) -> Option<usize> {
    let half = ratio(1, 2);
    inst.integer_vars
        .iter()
        .filter(|&&j| !x[j].is_integer())
        .map(|&j| (j, (x[j].fract().abs() - &half).abs()))
        .min_by(|(i, a), (j, b)| a.cmp(b).then(i.cmp(j)))
        .map(|(j, _)| j)
}

/// Scales `ray` so that `witness + ray` is again integral on the integer
/// variables: a primitive integer vector.
fn integral_ray(ray: &[Rational]) -> RationalVector {
    primitive_integer_vector(ray)
}

/// Maximizes `objective` over the instance plus the option's extra rows by
/// branch-and-bound over exact LP relaxations.
pub fn solve_mip(inst: &MipInstance, objective: &[Rational], opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    check_dimensions(inst, objective, opts)?;
    let start = Instant::now();
    let base = relaxation(inst, objective, opts);

    let mut incumbent: Option<(RationalVector, Rational)> = None;
    if let Some(x) = &opts.incumbent {
        if !inst.is_feasible(x) || !satisfies_options(opts, x) {
            return Err(SolveError::InfeasibleIncumbent);
        }
        incumbent = Some((x.clone(), dot(objective, x)));
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        lower: inst.lower_bounds.clone(),
        upper: inst.upper_bounds.clone(),
        bound: Bound::PosInfinity,
        depth: 0,
        index: 0,
        warm: None,
    });
    let mut live_cells = 0usize;
    let mut created: u64 = 1;
    let mut nodes: u64 = 0;
    let mut trace = Vec::new();
    let mut stopped: Option<SolveStatus> = None;

    let beats_incumbent = |bound: &Bound, inc: &Option<(RationalVector, Rational)>| match inc {
        None => true,
        Some((_, v)) => *bound > Bound::Finite(v.clone()),
    };

    while let Some(mut node) = heap.pop() {
        if !beats_incumbent(&node.bound, &incumbent) {
            release(node.warm.take(), &mut live_cells);
            continue;
        }
        if opts.node_limit.is_some_and(|limit| nodes >= limit) {
            heap.push(node);
            stopped = Some(SolveStatus::NodeLimit);
            break;
        }
        if opts.time_limit.is_some_and(|limit| start.elapsed() >= limit) {
            heap.push(node);
            stopped = Some(SolveStatus::TimeLimit);
            break;
        }
        nodes += 1;
        let warm = node.warm.take();
        let resolved = warm.as_deref().and_then(|s| resolve_lp(s, &node.lower, &node.upper));
        release(warm, &mut live_cells);
        let (outcome, state) = resolved.unwrap_or_else(|| {
            solve_lp_with_state(&LpProblem {
                lower: node.lower.clone(),
                upper: node.upper.clone(),
                ..base.clone()
            })
        });
        match outcome {
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded { ray, .. } => {
                if nodes != 1 {
                    return Err(SolveError::UnboundedSubproblem);
                }
                return unbounded_result(inst, opts, ray, start);
            }
            LpOutcome::Optimal { x, value } => {
                let bound = Bound::Finite(value.clone());
                if beats_incumbent(&bound, &incumbent) {
                    match branching_variable(inst, &x) {
                        None => incumbent = Some((x, value)),
                        Some(j) => {
                            let floor = x[j].floor();
                            let ceil = &floor + Rational::one();
                            let mut down_upper = node.upper.clone();
                            down_upper[j] = Some(match &node.upper[j] {
                                Some(u) if *u < floor => u.clone(),
                                _ => floor,
                            });
                            let warm = state.filter(|s| live_cells + s.cells() <= WARM_START_CELLS).map(|s| {
                                live_cells += s.cells();
                                Arc::new(s)
                            });
                            let mut up_lower = node.lower.clone();
                            up_lower[j] = Some(match &node.lower[j] {
                                Some(l) if *l > ceil => l.clone(),
                                _ => ceil,
                            });
                            heap.push(Node {
                                lower: node.lower.clone(),
                                upper: down_upper,
                                bound: bound.clone(),
                                depth: node.depth + 1,
                                index: created,
                                warm: warm.clone(),
                            });
                            heap.push(Node {
                                lower: up_lower,
                                upper: node.upper,
                                bound,
                                depth: node.depth + 1,
                                index: created + 1,
                                warm,
                            });
                            created += 2;
                        }
                    }
                }
            }
        }
        if opts.record_trace {
            trace.push((nodes, global_dual_bound(&heap, &incumbent)));
        }
    }

    let dual_bound = global_dual_bound(&heap, &incumbent);
    let status = stopped.unwrap_or(if incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    });
    let (best_point, primal_value) = match incumbent {
        Some((x, v)) => (Some(x), Some(v)),
        None => (None, None),
    };
    Ok(SolveResult {
        status,
        best_point,
        primal_value,
        dual_bound,
        ray: None,
        node_count: nodes,
        dual_bound_trace: trace,
    })
}

fn global_dual_bound(heap: &BinaryHeap<Node>, incumbent: &Option<(RationalVector, Rational)>) -> Bound {
    let open = heap.peek().map(|n| n.bound.clone());
    let primal = incumbent.as_ref().map(|(_, v)| Bound::Finite(v.clone()));
    match (open, primal) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => Bound::NegInfinity,
    }
}

/// The root relaxation is unbounded. For rational data the mixed-integer
/// program is then unbounded as soon as it is feasible, so one zero-objective
/// solve decides between `Unbounded` (with a feasible witness) and
/// `Infeasible`.
fn unbounded_result(
    inst: &MipInstance,
    opts: &SolveOptions,
    ray: RationalVector,
    start: Instant,
) -> Result<SolveResult, SolveError> {
    let remaining = opts.time_limit.map(|l| l.saturating_sub(start.elapsed()));
    let witness_opts = SolveOptions {
        incumbent: None,
        record_trace: false,
        time_limit: remaining,
        node_limit: opts.node_limit.map(|l| l.saturating_sub(1).max(1)),
        ..opts.clone()
    };
    let zero = vec![Rational::zero(); inst.num_vars];
    let witness = solve_mip(inst, &zero, &witness_opts)?;
    let node_count = 1 + witness.node_count;
    let trace_entry = |b: Bound| if opts.record_trace { vec![(1, b)] } else { Vec::new() };
    Ok(match witness.status {
        SolveStatus::Optimal => SolveResult {
            status: SolveStatus::Unbounded,
            best_point: witness.best_point,
            primal_value: None,
            dual_bound: Bound::PosInfinity,
            ray: Some(integral_ray(&ray)),
            node_count,
            dual_bound_trace: trace_entry(Bound::PosInfinity),
        },
        SolveStatus::Infeasible => SolveResult {
            status: SolveStatus::Infeasible,
            best_point: None,
            primal_value: None,
            dual_bound: Bound::NegInfinity,
            ray: None,
            node_count,
            dual_bound_trace: trace_entry(Bound::NegInfinity),
        },
        limit => SolveResult {
            status: limit,
            best_point: None,
            primal_value: None,
            dual_bound: Bound::PosInfinity,
            ray: None,
            node_count,
            dual_bound_trace: trace_entry(Bound::PosInfinity),
        },
    })
}
