//! Exact bounded-variable primal simplex.
//!
//! Dense tableau over `BigRational`, two phases, Bland's rule for both the
//! entering and the leaving variable. Every row gets a slack with bounds
//! `[0, inf)` for `<=` rows and `[0, 0]` for equations; artificials are only
//! added for rows whose slack cannot absorb the initial residual.

use num_traits::{One, Signed, Zero};

use crate::linalg::{dot, Rational, RationalVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    LessEqual,
    Equal,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coefficients: RationalVector,
    pub rhs: Rational,
    pub kind: RowKind,
}

/// `max objective^T x` subject to the rows and `lower <= x <= upper`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub objective: RationalVector,
    pub rows: Vec<LpRow>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        x: RationalVector,
        value: Rational,
    },
    Infeasible,
    /// `point` is feasible; `point + t * ray` stays feasible for all `t >= 0`
    /// and the objective grows along `ray`.
    Unbounded {
        point: RationalVector,
        ray: RationalVector,
    },
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

/// Solves the LP exactly.
pub fn solve_lp(problem: &LpProblem) -> LpOutcome {
    solve_lp_with_state(problem).0
}

/// An optimal tableau, kept so that the same LP with changed variable bounds
/// can be re-solved by dual simplex pivots.
#[derive(Clone)]
pub struct LpState {
    tab: Tableau,
    objective: RationalVector,
}

impl LpState {
    /// Number of stored tableau entries.
    pub fn cells(&self) -> usize {
        self.tab.rows.len() * self.tab.ncols
    }
}

fn has_crossed_bounds(lower: &[Option<Rational>], upper: &[Option<Rational>]) -> bool {
    lower
        .iter()
        .zip(upper)
        .any(|b| matches!(b, (Some(l), Some(u)) if l > u))
}

/// [`solve_lp`], also returning the final tableau when the LP is optimal.
pub fn solve_lp_with_state(problem: &LpProblem) -> (LpOutcome, Option<LpState>) {
    let n = problem.num_vars();
    if has_crossed_bounds(&problem.lower, &problem.upper) {
        return (LpOutcome::Infeasible, None);
    }
    let mut tab = Tableau::new(problem);
    if tab.num_artificials > 0 {
        let phase_one: Vec<Rational> = (0..tab.ncols)
            .map(|j| {
                if tab.is_artificial(j) {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        tab.set_objective(&phase_one);
        match tab.run() {
            Step::Unbounded(_) => unreachable!("phase one objective is bounded by zero"),
            Step::Optimal => {}
        }
        if tab.objective_value(&phase_one).is_negative() {
            return (LpOutcome::Infeasible, None);
        }
        for j in 0..tab.ncols {
            if tab.is_artificial(j) {
                tab.upper[j] = Some(Rational::zero());
            }
        }
    }
    let mut costs = problem.objective.clone();
    costs.resize(tab.ncols, Rational::zero());
    tab.set_objective(&costs);
    match tab.run() {
        Step::Optimal => {
            let x = tab.x[..n].to_vec();
            let value = dot(&problem.objective, &x);
            let state = LpState {
                tab,
                objective: problem.objective.clone(),
            };
            (LpOutcome::Optimal { x, value }, Some(state))
        }
        Step::Unbounded(direction) => (
            LpOutcome::Unbounded {
                point: tab.x[..n].to_vec(),
                ray: direction[..n].to_vec(),
            },
            None,
        ),
    }
}

/// Re-solves the LP of `state` with new bounds on the structural variables.
/// Returns `None` if the dual simplex gives up; the caller then solves from
/// scratch.
pub fn resolve_lp(
    state: &LpState,
    lower: &[Option<Rational>],
    upper: &[Option<Rational>],
) -> Option<(LpOutcome, Option<LpState>)> {
    let n = state.objective.len();
    if has_crossed_bounds(lower, upper) {
        return Some((LpOutcome::Infeasible, None));
    }
    let mut tab = state.tab.clone();
    for j in 0..n {
        tab.lower[j] = lower[j].clone();
        tab.upper[j] = upper[j].clone();
        if tab.is_basic[j] {
            continue;
        }
        let target = match (&tab.lower[j], &tab.upper[j]) {
            (Some(l), _) if tab.x[j] < *l => l.clone(),
            (_, Some(u)) if tab.x[j] > *u => u.clone(),
            _ => continue,
        };
        let shift = &target - &tab.x[j];
        tab.shift_nonbasic(j, &shift);
    }
    match tab.dual_run(50 * (tab.ncols + tab.rows.len()))? {
        DualStep::Infeasible => return Some((LpOutcome::Infeasible, None)),
        DualStep::Feasible => {}
    }
    match tab.run() {
        Step::Optimal => {
            let x = tab.x[..n].to_vec();
            let value = dot(&state.objective, &x);
            let next = LpState {
                tab,
                objective: state.objective.clone(),
            };
            Some((LpOutcome::Optimal { x, value }, Some(next)))
        }
        Step::Unbounded(_) => None,
    }
}

enum DualStep {
    Feasible,
    Infeasible,
}

enum Step {
    Optimal,
    Unbounded(RationalVector),
}

#[derive(Clone)]
struct Tableau {
    /// `rows[i]` is row `i` of `B^{-1} [A | I | art]`.
    rows: Vec<RationalVector>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Current value of every column, basic or not.
    x: RationalVector,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    /// Reduced costs for the current objective.
    reduced: RationalVector,
    ncols: usize,
    first_artificial: usize,
    num_artificials: usize,
}

impl Tableau {
    fn new(problem: &LpProblem) -> Self {
        let n = problem.num_vars();
        let m = problem.rows.len();
        let mut x: RationalVector = (0..n)
            .map(|j| match (&problem.lower[j], &problem.upper[j]) {
                (Some(l), _) => l.clone(),
                (None, Some(u)) => u.clone(),
                (None, None) => Rational::zero(),
            })
            .collect();
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        for row in &problem.rows {
            lower.push(Some(Rational::zero()));
            upper.push(match row.kind {
                RowKind::LessEqual => None,
                RowKind::Equal => Some(Rational::zero()),
            });
        }

        let residuals: Vec<Rational> = problem
            .rows
            .iter()
            .map(|r| &r.rhs - dot(&r.coefficients, &x[..n]))
            .collect();
        let needs_artificial: Vec<bool> = problem
            .rows
            .iter()
            .zip(&residuals)
            .map(|(row, r)| match row.kind {
                RowKind::LessEqual => r.is_negative(),
                RowKind::Equal => !r.is_zero(),
            })
            .collect();
        let num_artificials = needs_artificial.iter().filter(|&&b| b).count();
        let first_artificial = n + m;
        let ncols = n + m + num_artificials;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack_values = Vec::with_capacity(m);
        let mut art_values = Vec::new();
        let mut next_art = first_artificial;
        for (i, row) in problem.rows.iter().enumerate() {
            let mut t = vec![Rational::zero(); ncols];
            t[..n].clone_from_slice(&row.coefficients);
            t[n + i] = Rational::one();
            if needs_artificial[i] {
                // sign * (a x + s) + art = sign * b, art = |residual|
                if residuals[i].is_negative() {
                    for v in t.iter_mut() {
                        *v = -v.clone();
                    }
                }
                t[next_art] = Rational::one();
                basis.push(next_art);
                slack_values.push(Rational::zero());
                art_values.push(residuals[i].abs());
                lower.push(Some(Rational::zero()));
                upper.push(None);
                next_art += 1;
            } else {
                basis.push(n + i);
                slack_values.push(residuals[i].clone());
            }
            rows.push(t);
        }
        x.extend(slack_values);
        x.extend(art_values);
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Self {
            rows,
            basis,
            is_basic,
            x,
            lower,
            upper,
            reduced: vec![Rational::zero(); ncols],
            ncols,
            first_artificial,
            num_artificials,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn objective_value(&self, costs: &[Rational]) -> Rational {
        dot(costs, &self.x)
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let mut reduced = costs.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (r, t) in reduced.iter_mut().zip(row) {
                if !t.is_zero() {
                    *r -= cb * t;
                }
            }
        }
        self.reduced = reduced;
    }

    fn can_increase(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_none_or(|u| self.x[j] < *u)
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_none_or(|l| self.x[j] > *l)
    }

    /// Smallest-index improving nonbasic column and its direction (+1 / -1).
    fn entering(&self) -> Option<(usize, bool)> {
        (0..self.ncols).filter(|&j| !self.is_basic[j]).find_map(|j| {
            let d = &self.reduced[j];
            if d.is_positive() && self.can_increase(j) {
                Some((j, true))
            } else if d.is_negative() && self.can_decrease(j) {
                Some((j, false))
            } else {
                None
            }
        })
    }

    fn run(&mut self) -> Step {
        loop {
            let Some((enter, increase)) = self.entering() else {
                return Step::Optimal;
            };
            // Each basic variable moves by -delta * t * rows[i][enter].
            let delta = if increase { Rational::one() } else { -Rational::one() };
            // (step length, variable index, row or None for a bound flip, hits upper)
            let mut best: Option<(Rational, usize, Option<usize>, bool)> = None;
            let mut consider = |step: Rational, var: usize, row: Option<usize>, at_upper: bool| {
                let better = match &best {
                    None => true,
                    Some((s, v, _, _)) => step < *s || (step == *s && var < *v),
                };
                if better {
                    best = Some((step, var, row, at_upper));
                }
            };
            let own_bound = if increase {
                &self.upper[enter]
            } else {
                &self.lower[enter]
            };
            if let Some(limit) = own_bound {
                consider((limit - &self.x[enter]).abs(), enter, None, increase);
            }
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[enter];
                if a.is_zero() {
                    continue;
                }
                let b = self.basis[i];
                let rate = -(&delta * a);
                if rate.is_negative() {
                    if let Some(l) = &self.lower[b] {
                        consider((&self.x[b] - l) / -&rate, b, Some(i), false);
                    }
                } else if let Some(u) = &self.upper[b] {
                    consider((u - &self.x[b]) / &rate, b, Some(i), true);
                }
            }
            let Some((step, _, leave_row, at_upper)) = best else {
                let mut direction = vec![Rational::zero(); self.ncols];
                direction[enter] = delta.clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    direction[b] = -(&delta * &row[enter]);
                }
                return Step::Unbounded(direction);
            };

            if !step.is_zero() {
                let move_by = &delta * &step;
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[enter].is_zero() {
                        self.x[b] -= &move_by * &row[enter];
                    }
                }
                self.x[enter] += &move_by;
            }
            let Some(r) = leave_row else {
                continue;
            };
            let leaving = self.basis[r];
            // Snap exactly onto the bound the leaving variable hit.
            self.x[leaving] = if at_upper {
                self.upper[leaving].clone().expect("upper bound")
            } else {
                self.lower[leaving].clone().expect("lower bound")
            };
            self.pivot(r, enter);
        }
    }

    /// Moves nonbasic column `j` by `shift`, keeping the rows satisfied.
    fn shift_nonbasic(&mut self, j: usize, shift: &Rational) {
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !row[j].is_zero() {
                self.x[b] -= shift * &row[j];
            }
        }
        self.x[j] += shift;
    }

    /// Dual simplex from a dual feasible basis, Bland's rule on both sides:
    /// the infeasible basic variable of smallest index leaves, and among the
    /// entering columns with minimal ratio the smallest index wins. `None`
    /// when `max_pivots` is exceeded.
    fn dual_run(&mut self, max_pivots: usize) -> Option<DualStep> {
        for _ in 0..=max_pivots {
            let leaving = self
                .basis
                .iter()
                .enumerate()
                .filter_map(|(r, &b)| {
                    let x = &self.x[b];
                    if self.lower[b].as_ref().is_some_and(|l| x < l) {
                        Some((b, r, self.lower[b].clone().expect("checked")))
                    } else if self.upper[b].as_ref().is_some_and(|u| x > u) {
                        Some((b, r, self.upper[b].clone().expect("checked")))
                    } else {
                        None
                    }
                })
                .min_by_key(|(b, _, _)| *b);
            let Some((b, r, target)) = leaving else {
                return Some(DualStep::Feasible);
            };
            // x_b moves by -row[j] * (change of x_j); it has to move towards
            // `target`.
            let raise = target > self.x[b];
            let mut best: Option<(Rational, usize)> = None;
            for (j, a) in self.rows[r].iter().enumerate() {
                if self.is_basic[j] || a.is_zero() {
                    continue;
                }
                let increase = a.is_negative() == raise;
                let movable = if increase {
                    self.can_increase(j)
                } else {
                    self.can_decrease(j)
                };
                if !movable {
                    continue;
                }
                let ratio = (&self.reduced[j] / a).abs();
                if best.as_ref().is_none_or(|(q, _)| ratio < *q) {
                    best = Some((ratio, j));
                }
            }
            let Some((_, enter)) = best else {
                return Some(DualStep::Infeasible);
            };
            let shift = (&self.x[b] - &target) / &self.rows[r][enter];
            self.shift_nonbasic(enter, &shift);
            self.x[b] = target;
            self.pivot(r, enter);
        }
        None
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let inv = self.rows[r][enter].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nonzero: Vec<usize> = (0..self.ncols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for &j in &nonzero {
                row[j] -= &factor * &pivot_row[j];
            }
        }
        if !self.reduced[enter].is_zero() {
            let factor = self.reduced[enter].clone();
            for &j in &nonzero {
                self.reduced[j] -= &factor * &pivot_row[j];
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[enter] = true;
        self.basis[r] = enter;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector, ratio};

    fn le(coefs: &[i64], rhs: i64) -> LpRow {
        LpRow {
            coefficients: int_vector(coefs),
            rhs: int(rhs),
            kind: RowKind::LessEqual,
        }
    }

    fn eq(coefs: &[i64], rhs: i64) -> LpRow {
        LpRow {
            kind: RowKind::Equal,
            ..le(coefs, rhs)
        }
    }

    fn problem(obj: &[i64], rows: Vec<LpRow>, lo: Option<i64>, up: Option<i64>) -> LpProblem {
        let n = obj.len();
        LpProblem {
            objective: int_vector(obj),
            rows,
            lower: vec![lo.map(int); n],
            upper: vec![up.map(int); n],
        }
    }

    #[test]
    fn knapsack_relaxation() {
        // max 5x + 4y, 2x + 3y <= 4, 0 <= x, y <= 1  ->  x = 1, y = 2/3, value 23/3
        let p = problem(&[5, 4], vec![le(&[2, 3], 4)], Some(0), Some(1));
        match solve_lp(&p) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![int(1), ratio(2, 3)]);
                assert_eq!(value, ratio(23, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y, x + y >= 3, x - y = 1, x, y >= 0  ->  (2, 1)
        let p = problem(&[-1, -1], vec![le(&[-1, -1], -3), eq(&[1, -1], 1)], Some(0), None);
        match solve_lp(&p) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, int_vector(&[2, 1]));
                assert_eq!(value, int(-3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let p = problem(&[1], vec![le(&[1], 0), le(&[-1], -1)], None, None);
        assert_eq!(solve_lp(&p), LpOutcome::Infeasible);
        let p = problem(&[1], vec![], Some(2), Some(1));
        assert_eq!(solve_lp(&p), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        // max x + y, x - y <= 1, y >= 0 free x
        let mut p = problem(&[1, 1], vec![le(&[1, -1], 1)], None, None);
        p.lower[1] = Some(int(0));
        match solve_lp(&p) {
            LpOutcome::Unbounded { point, ray } => {
                assert!(dot(&[int(1), int(-1)], &point) <= int(1));
                assert!(dot(&[int(1), int(-1)], &ray) <= int(0));
                assert!(ray[1] >= int(0));
                assert!(dot(&p.objective, &ray) > int(0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_variables_and_upper_only_bounds() {
        // max -x s.t. x >= -5 expressed as a row, x free -> x = -5
        let p = problem(&[-1], vec![le(&[-1], 5)], None, None);
        assert_eq!(
            solve_lp(&p),
            LpOutcome::Optimal {
                x: int_vector(&[-5]),
                value: int(5)
            }
        );
        // max x, x <= 7 only as bound
        let p = problem(&[1], vec![], None, Some(7));
        assert_eq!(
            solve_lp(&p),
            LpOutcome::Optimal {
                x: int_vector(&[7]),
                value: int(7)
            }
        );
    }

    #[test]
    fn degenerate_problem_terminates() {
        // A classic cycling example for the textbook largest-coefficient rule.
        let p = LpProblem {
            objective: vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)],
            rows: vec![
                LpRow {
                    coefficients: vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
                    rhs: int(0),
                    kind: RowKind::LessEqual,
                },
                LpRow {
                    coefficients: vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
                    rhs: int(0),
                    kind: RowKind::LessEqual,
                },
                le(&[0, 0, 1, 0], 1),
            ],
            lower: vec![Some(int(0)); 4],
            upper: vec![None; 4],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_start_matches_cold_solve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(1..5);
            let row = |rng: &mut rand::rngs::StdRng| -> Vec<i64> { (0..n).map(|_| rng.gen_range(-4..=4)).collect() };
            let mut rows: Vec<LpRow> = (0..m).map(|_| le(&row(&mut rng), rng.gen_range(-2..=8))).collect();
            if rng.gen_bool(0.3) {
                rows.push(eq(&row(&mut rng), rng.gen_range(-2..=2)));
            }
            let p = problem(&row(&mut rng), rows, Some(-3), Some(3));
            let (_, Some(mut state)) = solve_lp_with_state(&p) else {
                continue;
            };
            let (mut lower, mut upper) = (p.lower.clone(), p.upper.clone());
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                let v = int(rng.gen_range(-3..=3));
                if rng.gen_bool(0.5) {
                    upper[j] = Some(v);
                } else {
                    lower[j] = Some(v);
                }
                let cold = solve_lp(&LpProblem {
                    lower: lower.clone(),
                    upper: upper.clone(),
                    ..p.clone()
                });
                let (warm, next) = resolve_lp(&state, &lower, &upper).expect("no pivot limit on small problems");
                match (&cold, &warm) {
                    (LpOutcome::Optimal { value: a, .. }, LpOutcome::Optimal { value: b, x }) => {
                        assert_eq!(a, b);
                        let q = LpProblem {
                            lower: lower.clone(),
                            upper: upper.clone(),
                            ..p.clone()
                        };
                        assert!(q.rows.iter().all(|r| match r.kind {
                            RowKind::LessEqual => dot(&r.coefficients, x) <= r.rhs,
                            RowKind::Equal => dot(&r.coefficients, x) == r.rhs,
                        }));
                        assert!((0..n).all(|j| lower[j].as_ref().is_none_or(|l| &x[j] >= l)
                            && upper[j].as_ref().is_none_or(|u| &x[j] <= u)));
                    }
                    (LpOutcome::Infeasible, LpOutcome::Infeasible) => {}
                    other => panic!("{other:?}"),
                }
                match next {
                    Some(s) => state = s,
                    None => break,
                }
            }
        }
    }
}
