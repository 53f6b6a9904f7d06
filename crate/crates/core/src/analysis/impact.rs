//! Cut impact measured as closed gap after a common node budget.
//!
//! For cuts `1..=k` the protocol solves the instance once to optimality
//! (`z*`, `x*`), solves the root LP (`z_LP`), then runs branch-and-bound
//! `k + 1` times (run 0 without a cut, run `i` with cut `i` appended), each
//! seeded with `x*` and recording its dual-bound trace. The node budget `N`
//! is the smallest node count over all runs, and every run's dual bound
//! after `N` nodes is turned into `(z_i - z_LP) / (z* - z_LP)`.

use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{dot, Rational, RationalVector};
use crate::model::{Inequality, MipInstance};
use crate::oracle::{
    solve_mip, solve_relaxation, Bound, LpOutcome, SolveError, SolveOptions, SolveResult, SolveStatus,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GapError {
    #[error("dual bound {z_i} lies outside [{z_star}, {z_lp}]")]
    OutOfRange {
        z_i: Rational,
        z_lp: Rational,
        z_star: Rational,
    },
}

/// `(z_i - z_lp) / (z_star - z_lp)` for a maximization problem.
///
/// Requires `z_star <= z_i <= z_lp`; anything else means some dual bound is
/// not valid. When the LP bound is already optimal every gap is 1.
#[allow(clippy::result_large_err)]
pub fn closed_gap(z_i: &Rational, z_lp: &Rational, z_star: &Rational) -> Result<Rational, GapError> {
    if z_i < z_star || z_i > z_lp {
        return Err(GapError::OutOfRange {
            z_i: z_i.clone(),
            z_lp: z_lp.clone(),
            z_star: z_star.clone(),
        });
    }
    if z_lp == z_star {
        return Ok(Rational::from_integer(1.into()));
    }
    Ok((z_i - z_lp) / (z_star - z_lp))
}

/// Closed gap after every node of a dual-bound trace. Entries whose bound
/// is infinite or out of range are `None`.
pub fn gap_trajectory(trace: &[(u64, Bound)], z_lp: &Rational, z_star: &Rational) -> Vec<(u64, Option<Rational>)> {
    trace
        .iter()
        .map(|(t, b)| (*t, b.finite().and_then(|z| closed_gap(z, z_lp, z_star).ok())))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ImpactOptions {
    pub node_limit: Option<u64>,
    /// Per-run wall-clock limit.
    pub time_limit: Option<Duration>,
    /// Limit for the initial optimality solve; `None` runs to completion.
    pub optimum_time_limit: Option<Duration>,
}

impl Default for ImpactOptions {
    fn default() -> Self {
        Self {
            node_limit: None,
            time_limit: Some(crate::oracle::branch::DEFAULT_TIME_LIMIT),
            optimum_time_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpactRun {
    pub label: String,
    pub class: Option<String>,
    /// Dual bound after `N` nodes.
    pub dual_bound: Bound,
    pub closed_gap: Option<Rational>,
    pub nodes_used: u64,
    pub status: SolveStatus,
    /// False when the cut removes `x*`; such a run starts without incumbent
    /// and does not take part in choosing `N`.
    pub incumbent_injected: bool,
    /// The run stopped on its time limit before `N` nodes; its bound was
    /// read at its last node.
    pub short_trace: bool,
    pub trace: Vec<(u64, Bound)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpactReport {
    pub z_star: Rational,
    pub x_star: RationalVector,
    pub z_lp: Rational,
    pub node_budget: u64,
    pub baseline: ImpactRun,
    pub per_cut: Vec<ImpactRun>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImpactError {
    #[error("instance has no optimal solution (solver status {0})")]
    NoOptimum(SolveStatus),
    #[error("LP relaxation has no optimal solution")]
    RelaxationNotOptimal,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Runs the full protocol for `cuts`.
pub fn impact_protocol(
    inst: &MipInstance,
    cuts: &[Inequality],
    opts: &ImpactOptions,
) -> Result<ImpactReport, ImpactError> {
    let optimum = solve_mip(
        inst,
        &inst.objective,
        &SolveOptions {
            time_limit: opts.optimum_time_limit,
            ..Default::default()
        },
    )?;
    if optimum.status != SolveStatus::Optimal {
        return Err(ImpactError::NoOptimum(optimum.status));
    }
    let x_star = optimum.best_point.expect("optimal status carries a point");
    let z_star = optimum.primal_value.expect("optimal status carries a value");
    let z_lp = match solve_relaxation(inst, &inst.objective, &SolveOptions::default()) {
        LpOutcome::Optimal { value, .. } => value,
        _ => return Err(ImpactError::RelaxationNotOptimal),
    };

    let runs: Vec<(Option<&Inequality>, bool, SolveResult)> = std::iter::once(None)
        .chain(cuts.iter().map(Some))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|cut| {
            let keeps_optimum = cut.is_none_or(|c| dot(&c.coefficients, &x_star) <= c.rhs);
            let solve_opts = SolveOptions {
                extra_constraints: cut.into_iter().cloned().collect(),
                incumbent: keeps_optimum.then(|| x_star.clone()),
                node_limit: opts.node_limit,
                time_limit: opts.time_limit,
                record_trace: true,
                ..Default::default()
            };
            solve_mip(inst, &inst.objective, &solve_opts).map(|r| (cut, keeps_optimum, r))
        })
        .collect::<Result<_, _>>()?;

    let eligible =
        |(_, injected, r): &&(Option<&Inequality>, bool, SolveResult)| *injected && r.status != SolveStatus::TimeLimit;
    let node_budget = runs
        .iter()
        .filter(eligible)
        .map(|(_, _, r)| r.node_count)
        .min()
        .or_else(|| runs.iter().map(|(_, _, r)| r.node_count).min())
        .unwrap_or(0);

    let mut reports = runs.into_iter().map(|(cut, injected, r)| {
        let last = r.dual_bound_trace.last().map(|(t, _)| *t).unwrap_or(0);
        let dual_bound = r.dual_bound_at(node_budget).cloned().unwrap_or(Bound::PosInfinity);
        let closed_gap = dual_bound.finite().and_then(|z| closed_gap(z, &z_lp, &z_star).ok());
        ImpactRun {
            label: cut.map_or_else(|| "<no cut>".to_string(), |c| c.label.clone()),
            class: cut.and_then(|c| c.class.clone()),
            dual_bound,
            closed_gap,
            nodes_used: r.node_count,
            status: r.status,
            incumbent_injected: injected,
            short_trace: last < node_budget,
            trace: r.dual_bound_trace,
        }
    });
    let baseline = reports.next().expect("run 0 always exists");
    let per_cut = reports.collect();
    Ok(ImpactReport {
        z_star,
        x_star,
        z_lp,
        node_budget,
        baseline,
        per_cut,
    })
}
