//! Affine hull and dimension of a mixed-integer hull (or of one of its faces)
//! from an optimization oracle alone.
//!
//! The loop keeps an affinely independent point set `X` inside `P` and an
//! irredundant equation system `Dx = e` valid on `P`. Every round picks a
//! direction `d` orthogonal to `aff(X)` and outside the row space of `D`,
//! then either finds a point with a new `d` value or proves `d^T x` constant
//! on `P`. It stops once `|X| + rows(D) = n + 1`; with an empty cache and no
//! initial equations that takes exactly `2n` queries on a bounded polytope.

use std::time::{Duration, Instant};

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{
    add, dot, is_in_span, nonzero_count, orthogonal_complement_basis, rank, scale, sub, Rational, RationalMatrix,
    RationalVector,
};
use crate::model::{evaluate, Inequality};
use crate::oracle::{cache_probe, oracle_maximize, record_response, Oracle, OracleError, OracleResponse, PointCache};

/// Default wall-clock budget for one hull computation.
pub const DEFAULT_HULL_TIME_BUDGET: Duration = Duration::from_secs(600);

/// `Dx = e` with linearly independent rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    pub lhs: RationalMatrix,
    pub rhs: RationalVector,
}

impl EquationSystem {
    pub fn empty(n: usize) -> Self {
        Self {
            lhs: RationalMatrix::new(n),
            rhs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn push(&mut self, coefficients: RationalVector, rhs: Rational) {
        self.lhs.push_row(coefficients);
        self.rhs.push(rhs);
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.lhs.rows().iter().zip(&self.rhs).all(|(d, e)| dot(d, x) == *e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineHullResult {
    /// Affinely independent points spanning the affine hull.
    pub basis: Vec<RationalVector>,
    pub equations: EquationSystem,
    /// `|basis| - 1`; `-1` for an empty polyhedron.
    pub dimension: isize,
    pub oracle_queries: usize,
    pub cache_hits: usize,
}

#[derive(Clone, Debug)]
pub struct HullConfig {
    pub use_cache: bool,
    /// Query budget; `None` means `2n`.
    pub max_queries: Option<usize>,
    pub time_budget: Option<Duration>,
}

impl Default for HullConfig {
    fn default() -> Self {
        Self {
            use_cache: true,
            max_queries: None,
            time_budget: Some(DEFAULT_HULL_TIME_BUDGET),
        }
    }
}

impl HullConfig {
    pub fn without_cache() -> Self {
        Self {
            use_cache: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    /// Budget exhausted or a solver limit hit; the dimension is only known
    /// to lie in `[lower, upper]`.
    #[error("dimension computation inconclusive after {queries} queries: dimension in [{lower}, {upper}]")]
    Inconclusive { lower: isize, upper: isize, queries: usize },
    #[error("a point of the polyhedron violates the initial equations")]
    InvalidInitialEquations,
    #[error("initial equations are linearly dependent")]
    DependentInitialEquations,
    #[error("oracle answers are inconsistent: {0}")]
    InconsistentOracle(&'static str),
    #[error(transparent)]
    Oracle(OracleError),
}

/// A direction orthogonal to `aff(X)` whose span escapes the rows of `D`.
///
/// Among eligible complement-basis vectors the sparsest wins, ties broken by
/// the lexicographically smallest support. Returns `None` only when no such
/// vector exists (the loop would already have stopped).
pub fn select_direction(basis: &[RationalVector], equations: &EquationSystem, n: usize) -> Option<RationalVector> {
    let diffs: Vec<RationalVector> = match basis.split_first() {
        Some((first, rest)) => rest.iter().map(|x| sub(x, first)).collect(),
        None => Vec::new(),
    };
    let candidates = orthogonal_complement_basis(&diffs, n);
    candidates
        .into_iter()
        .filter(|d| !is_in_span(d, equations.lhs.rows()))
        .min_by(|a, b| {
            nonzero_count(a)
                .cmp(&nonzero_count(b))
                .then_with(|| support(a).cmp(&support(b)))
        })
}

fn support(v: &[Rational]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Where cached points may be drawn from: the cache, optionally filtered to
/// the face of an inequality.
#[derive(Clone, Copy)]
pub struct CacheView<'a> {
    pub cache: &'a PointCache,
    pub face: Option<&'a Inequality>,
}

struct State<'a, O: Oracle> {
    oracle: &'a O,
    cache: Option<CacheView<'a>>,
    n: usize,
    basis: Vec<RationalVector>,
    /// Known points of the polyhedron handed to the oracle as warm starts.
    seeds: Vec<RationalVector>,
    equations: EquationSystem,
    queries: usize,
    cache_hits: usize,
    max_queries: usize,
    deadline: Option<Instant>,
}

/// Candidate points obtained from one oracle answer.
enum Side {
    Finite(RationalVector),
    Ray {
        witness: RationalVector,
        ray: RationalVector,
    },
}

impl<O: Oracle> State<'_, O> {
    fn inconclusive(&self) -> HullError {
        HullError::Inconclusive {
            lower: self.basis.len() as isize - 1,
            upper: self.n as isize - self.equations.len() as isize,
            queries: self.queries,
        }
    }

    fn query(&mut self, objective: &[Rational], extra: &[RationalVector]) -> Result<OracleResponse, HullError> {
        if self.queries >= self.max_queries || self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(self.inconclusive());
        }
        self.queries += 1;
        let cache = self.cache.map(|c| c.cache);
        let hints: Vec<RationalVector> = self.basis.iter().chain(&self.seeds).chain(extra).cloned().collect();
        match oracle_maximize(self.oracle, objective, cache, &hints) {
            Ok(r) => Ok(r),
            Err(OracleError::Inconclusive(_)) => Err(self.inconclusive()),
            Err(e) => Err(HullError::Oracle(e)),
        }
    }

    /// Both queries of one direction at once; only used once `P` is known to
    /// be non-empty, when both answers are always needed. Answers enter the
    /// cache in a fixed order.
    fn query_pair(
        &mut self,
        objective: &[Rational],
        opposite: &[Rational],
    ) -> Result<(OracleResponse, OracleResponse), HullError> {
        if self.queries + 2 > self.max_queries || self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(self.inconclusive());
        }
        self.queries += 2;
        let hints: Vec<RationalVector> = self.basis.iter().chain(&self.seeds).cloned().collect();
        let oracle = self.oracle;
        let (plus, minus) = rayon::join(
            || oracle.maximize_with_hints(objective, &hints),
            || oracle.maximize_with_hints(opposite, &hints),
        );
        let cache = self.cache.map(|c| c.cache);
        let answer = |objective: &[Rational], r: Result<OracleResponse, OracleError>| {
            r.and_then(|r| record_response(oracle, objective, cache, &r).map(|_| r))
        };
        let plus = answer(objective, plus);
        let minus = answer(opposite, minus);
        match (plus, minus) {
            (Ok(p), Ok(m)) => Ok((p, m)),
            (Err(OracleError::Inconclusive(_)), _) | (_, Err(OracleError::Inconclusive(_))) => Err(self.inconclusive()),
            (Err(e), _) | (_, Err(e)) => Err(HullError::Oracle(e)),
        }
    }

    fn add_point(&mut self, x: RationalVector) -> Result<(), HullError> {
        if !self.equations.is_satisfied_by(&x) {
            return Err(HullError::InvalidInitialEquations);
        }
        self.basis.push(x);
        Ok(())
    }

    fn done(&self) -> bool {
        self.basis.len() + self.equations.len() > self.n
    }

    /// Any point known to lie in the polyhedron, used as the base of a ray.
    fn anchor(&mut self) -> Result<Option<RationalVector>, HullError> {
        if let Some(x) = self.basis.first() {
            return Ok(Some(x.clone()));
        }
        if let Some(view) = self.cache {
            let on_face = |p: &RationalVector| view.face.is_none_or(|f| evaluate(f, p).is_ok_and(|s| s.is_zero()));
            if let Some(p) = view.cache.snapshot().into_iter().find(|p| on_face(p)) {
                return Ok(Some(p));
            }
        }
        match self.query(&vec![Rational::zero(); self.n], &[])? {
            OracleResponse::Optimal { point, .. } => Ok(Some(point)),
            _ => Ok(None),
        }
    }

    fn side(&mut self, response: OracleResponse) -> Result<Option<Side>, HullError> {
        Ok(match response {
            OracleResponse::Optimal { point, .. } => Some(Side::Finite(point)),
            OracleResponse::Infeasible => None,
            OracleResponse::Unbounded { ray, witness } => {
                let witness = match witness {
                    Some(w) => w,
                    None => self.anchor()?.ok_or(HullError::InconsistentOracle(
                        "unbounded direction without a feasible point",
                    ))?,
                };
                Some(Side::Ray { witness, ray })
            }
        })
    }

    fn try_cache(&mut self, d: &[Rational]) -> Result<bool, HullError> {
        let Some(view) = self.cache else {
            return Ok(false);
        };
        if self.basis.is_empty() {
            let Some(p1) = cache_probe(view.cache, view.face, d, None) else {
                return Ok(false);
            };
            let gamma = dot(d, &p1);
            let p2 =
                cache_probe(view.cache, view.face, d, Some(&gamma)).expect("first probe guarantees a second point");
            self.add_point(p1)?;
            self.add_point(p2)?;
        } else {
            let gamma = dot(d, &self.basis[0]);
            let Some(p) = cache_probe(view.cache, view.face, d, Some(&gamma)) else {
                return Ok(false);
            };
            self.add_point(p)?;
        }
        self.cache_hits += 1;
        Ok(true)
    }

    fn step(&mut self) -> Result<bool, HullError> {
        let Some(d) = select_direction(&self.basis, &self.equations, self.n) else {
            // Only possible with X empty and rank(D) = n: P is at most a point.
            return match self.query(&vec![Rational::zero(); self.n], &[])? {
                OracleResponse::Optimal { point, .. } => {
                    self.add_point(point)?;
                    Ok(true)
                }
                OracleResponse::Infeasible => Ok(false),
                OracleResponse::Unbounded { .. } => Err(HullError::InconsistentOracle("zero objective unbounded")),
            };
        };
        if self.try_cache(&d)? {
            return Ok(true);
        }

        let neg: RationalVector = d.iter().map(|v| -v).collect();
        let (plus, minus) = if self.basis.is_empty() {
            // The first answer may show that P is empty.
            let plus = self.query(&d, &[])?;
            let Some(plus) = self.side(plus)? else {
                return Ok(false);
            };
            let extra = match &plus {
                Side::Finite(x) => vec![x.clone()],
                Side::Ray { witness, .. } => vec![witness.clone()],
            };
            let minus = self.query(&neg, &extra)?;
            (Some(plus), self.side(minus)?)
        } else {
            let (plus, minus) = self.query_pair(&d, &neg)?;
            (self.side(plus)?, self.side(minus)?)
        };
        let (Some(plus), Some(minus)) = (plus, minus) else {
            return Err(HullError::InconsistentOracle("infeasible after returning points"));
        };

        if let (Side::Finite(xp), Side::Finite(xm)) = (&plus, &minus) {
            let top = dot(&d, xp);
            if top == dot(&d, xm) {
                self.equations.push(d, top);
                if self.basis.is_empty() {
                    let xp = xp.clone();
                    self.add_point(xp)?;
                }
                return Ok(true);
            }
        }

        // Points of P reachable from each answer, best first.
        let expand = |side: &Side| -> Vec<RationalVector> {
            match side {
                Side::Finite(x) => vec![x.clone()],
                Side::Ray { witness, ray } => vec![
                    add(witness, ray),
                    add(witness, &scale(ray, &Rational::from_integer(2.into()))),
                    witness.clone(),
                ],
            }
        };
        if self.basis.is_empty() {
            let (a, b) = match (&plus, &minus) {
                (Side::Finite(xp), Side::Finite(xm)) => (xp.clone(), xm.clone()),
                (Side::Ray { witness, ray }, _) | (_, Side::Ray { witness, ray }) => {
                    (witness.clone(), add(witness, ray))
                }
            };
            self.add_point(a)?;
            self.add_point(b)?;
            return Ok(true);
        }
        let gamma = dot(&d, &self.basis[0]);
        let chosen = expand(&plus)
            .into_iter()
            .chain(expand(&minus))
            .find(|x| dot(&d, x) != gamma)
            .ok_or(HullError::InconsistentOracle(
                "no point escapes the current affine hull",
            ))?;
        self.add_point(chosen)?;
        Ok(true)
    }

    #[cfg(debug_assertions)]
    fn check_invariants(&self) {
        assert_eq!(
            crate::linalg::affine_rank(&self.basis),
            self.basis.len() as isize - 1,
            "basis lost affine independence"
        );
        assert_eq!(
            rank(&self.equations.lhs),
            self.equations.len(),
            "equations became dependent"
        );
        for x in &self.basis {
            assert!(self.equations.is_satisfied_by(x), "basis point violates the equations");
        }
    }

    fn finish(self) -> AffineHullResult {
        AffineHullResult {
            dimension: self.basis.len() as isize - 1,
            basis: self.basis,
            equations: self.equations,
            oracle_queries: self.queries,
            cache_hits: self.cache_hits,
        }
    }
}

/// Computes the affine hull of the oracle's polyhedron.
///
/// `initial` must hold independent equations valid on the polyhedron; a
/// point violating them aborts with [`HullError::InvalidInitialEquations`].
pub fn affine_hull<O: Oracle>(
    oracle: &O,
    initial: EquationSystem,
    cache: Option<CacheView<'_>>,
    config: &HullConfig,
) -> Result<AffineHullResult, HullError> {
    seeded_hull(oracle, initial, cache, config, Vec::new())
}

/// [`affine_hull`] with points of the polyhedron the oracle may start from.
/// Seeds only speed up solves; they never enter the basis directly.
pub fn seeded_hull<O: Oracle>(
    oracle: &O,
    initial: EquationSystem,
    cache: Option<CacheView<'_>>,
    config: &HullConfig,
    seeds: Vec<RationalVector>,
) -> Result<AffineHullResult, HullError> {
    let n = oracle.dimension();
    if rank(&initial.lhs) != initial.len() {
        return Err(HullError::DependentInitialEquations);
    }
    let mut state = State {
        oracle,
        cache: if config.use_cache { cache } else { None },
        n,
        basis: Vec::new(),
        seeds,
        equations: initial,
        queries: 0,
        cache_hits: 0,
        max_queries: config.max_queries.unwrap_or(2 * n),
        deadline: config.time_budget.map(|b| Instant::now() + b),
    };
    while !state.done() {
        let before = state.basis.len() + state.equations.len();
        if !state.step()? {
            // empty polyhedron
            state.basis.clear();
            return Ok(state.finish());
        }
        debug_assert!(state.basis.len() + state.equations.len() > before);
        #[cfg(debug_assertions)]
        state.check_invariants();
    }
    Ok(state.finish())
}

/// Affine hull of the face `{x in P : a^T x = beta}` of a supporting cut,
/// starting from the equations already known for `P`.
pub fn face_hull<O: Oracle>(
    oracle: &O,
    base: &AffineHullResult,
    cut: &Inequality,
    cache: Option<&PointCache>,
    config: &HullConfig,
) -> Result<AffineHullResult, HullError> {
    let restricted = oracle.restricted(&cut.coefficients, &cut.rhs);
    let mut initial = base.equations.clone();
    if !is_in_span(&cut.coefficients, initial.lhs.rows()) {
        initial.push(cut.coefficients.clone(), cut.rhs.clone());
    }
    let view = cache.map(|c| CacheView {
        cache: c,
        face: Some(cut),
    });
    // Points of P on the cut's hyperplane are points of the face.
    let seeds = base
        .basis
        .iter()
        .filter(|x| dot(&cut.coefficients, x) == cut.rhs)
        .cloned()
        .collect();
    seeded_hull(&restricted, initial, view, config, seeds)
}

/// Affine hull of the instance's mixed-integer hull with no prior knowledge.
pub fn polytope_hull<O: Oracle>(
    oracle: &O,
    cache: Option<&PointCache>,
    config: &HullConfig,
) -> Result<AffineHullResult, HullError> {
    let view = cache.map(|c| CacheView { cache: c, face: None });
    affine_hull(oracle, EquationSystem::empty(oracle.dimension()), view, config)
}

/// Convenience for one-off use on an instance.
pub fn instance_dimension<O: Oracle>(oracle: &O) -> Result<isize, HullError> {
    polytope_hull(oracle, None, &HullConfig::without_cache()).map(|r| r.dimension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector};
    use crate::model::MipInstance;
    use crate::oracle::{BruteForceOracle, MipOracle};

    fn cube(n: usize) -> MipInstance {
        MipInstance::new("cube", RationalMatrix::new(n), vec![], vec![int(0); n])
            .with_all_integer()
            .with_box(int(0), int(1))
    }

    fn diagonal() -> MipInstance {
        // x1 - x2 <= 0 and x2 - x1 <= 0 over {0,1}^2
        MipInstance::new(
            "diag",
            RationalMatrix::from_i64(&[&[1, -1], &[-1, 1]], 2),
            int_vector(&[0, 0]),
            int_vector(&[0, 0]),
        )
        .with_all_integer()
        .with_box(int(0), int(1))
    }

    #[test]
    fn cube_is_full_dimensional() {
        let o = MipOracle::new(cube(3));
        let r = polytope_hull(&o, None, &HullConfig::without_cache()).unwrap();
        assert_eq!(r.dimension, 3);
        assert_eq!(r.basis.len(), 4);
        assert!(r.equations.is_empty());
        assert_eq!(r.oracle_queries, 6);
    }

    #[test]
    fn diagonal_segment() {
        let o = MipOracle::new(diagonal());
        let r = polytope_hull(&o, None, &HullConfig::without_cache()).unwrap();
        assert_eq!(r.dimension, 1);
        assert_eq!(r.equations.len(), 1);
        let d = r.equations.lhs.row(0);
        assert!(is_in_span(d, &[int_vector(&[1, -1])]));
        assert_eq!(r.equations.rhs[0], int(0));
        assert_eq!(r.oracle_queries, 4);
    }

    #[test]
    fn infeasible_instance() {
        let inst = MipInstance::new(
            "inf",
            RationalMatrix::from_i64(&[&[1, 1]], 2),
            int_vector(&[-1]),
            int_vector(&[0, 0]),
        )
        .with_all_integer()
        .with_box(int(0), int(1));
        let r = polytope_hull(&MipOracle::new(inst), None, &HullConfig::without_cache()).unwrap();
        assert_eq!(r.dimension, -1);
        assert!(r.basis.is_empty());
        assert_eq!(r.oracle_queries, 1);
    }

    #[test]
    fn direction_examples() {
        let none = EquationSystem::empty(2);
        assert_eq!(select_direction(&[], &none, 2), Some(int_vector(&[1, 0])));
        let d = select_direction(&[int_vector(&[0, 0]), int_vector(&[1, 0])], &none, 2).unwrap();
        assert!(d[0].is_zero() && !d[1].is_zero());
        let mut eqs = EquationSystem::empty(2);
        eqs.push(int_vector(&[0, 1]), int(0));
        let d = select_direction(&[int_vector(&[0, 0])], &eqs, 2).unwrap();
        assert!(!d[0].is_zero() && d[1].is_zero());
    }

    #[test]
    fn cube_faces() {
        let o = MipOracle::new(cube(3));
        let cache = PointCache::new();
        let base = polytope_hull(&o, Some(&cache), &HullConfig::default()).unwrap();
        let facet = Inequality::new("x1<=1", int_vector(&[1, 0, 0]), int(1));
        let f = face_hull(&o, &base, &facet, Some(&cache), &HullConfig::default()).unwrap();
        assert_eq!(f.dimension, 2);
        let vertex = Inequality::new("sum<=3", int_vector(&[1, 1, 1]), int(3));
        let f = face_hull(&o, &base, &vertex, Some(&cache), &HullConfig::default()).unwrap();
        assert_eq!(f.dimension, 0);
        assert_eq!(f.basis, vec![int_vector(&[1, 1, 1])]);
    }

    #[test]
    fn implied_equation_face_is_whole_polytope() {
        let o = MipOracle::new(diagonal());
        let base = polytope_hull(&o, None, &HullConfig::without_cache()).unwrap();
        let implied = Inequality::new("x1-x2<=0", int_vector(&[1, -1]), int(0));
        let f = face_hull(&o, &base, &implied, None, &HullConfig::without_cache()).unwrap();
        assert_eq!(f.dimension, base.dimension);

        // a single point: the face of its implied equation is that point
        let mut pt = diagonal();
        pt.upper_bounds = vec![Some(int(0)); 2];
        let o = MipOracle::new(pt);
        let base = polytope_hull(&o, None, &HullConfig::without_cache()).unwrap();
        assert_eq!(base.dimension, 0);
        let f = face_hull(&o, &base, &implied, None, &HullConfig::without_cache()).unwrap();
        assert_eq!(f.dimension, 0);
    }

    #[test]
    fn cache_saves_queries() {
        let o = BruteForceOracle::new(cube(3)).unwrap();
        let cache = PointCache::new();
        let first = polytope_hull(&o, Some(&cache), &HullConfig::default()).unwrap();
        assert_eq!(first.oracle_queries, 6);
        let again = polytope_hull(&o, Some(&cache), &HullConfig::default()).unwrap();
        assert_eq!(again.dimension, 3);
        assert!(again.oracle_queries < 6);
        assert!(again.cache_hits > 0);
    }

    #[test]
    fn query_budget_reports_partial_interval() {
        let o = MipOracle::new(cube(3));
        let cfg = HullConfig {
            use_cache: false,
            max_queries: Some(2),
            time_budget: None,
        };
        match polytope_hull(&o, None, &cfg) {
            Err(HullError::Inconclusive { lower, upper, queries }) => {
                assert_eq!((lower, upper, queries), (1, 3, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_initial_equations() {
        let o = MipOracle::new(cube(2));
        let mut eqs = EquationSystem::empty(2);
        eqs.push(int_vector(&[1, 0]), int(5));
        assert_eq!(
            affine_hull(&o, eqs, None, &HullConfig::without_cache()),
            Err(HullError::InvalidInitialEquations)
        );
        let mut eqs = EquationSystem::empty(2);
        eqs.push(int_vector(&[1, 1]), int(0));
        eqs.push(int_vector(&[2, 2]), int(0));
        assert_eq!(
            affine_hull(&o, eqs, None, &HullConfig::without_cache()),
            Err(HullError::DependentInitialEquations)
        );
    }

    #[test]
    fn unbounded_polyhedron() {
        // x >= 0, y in {0, 1}, x integer, no upper bound on x: dim 2
        let mut inst = cube(2);
        inst.upper_bounds[0] = None;
        let r = polytope_hull(&MipOracle::new(inst.clone()), None, &HullConfig::without_cache()).unwrap();
        assert_eq!(r.dimension, 2);

        // y = 0 fixed, x unbounded: a ray, dim 1
        inst.upper_bounds[1] = Some(int(0));
        let r = polytope_hull(&MipOracle::new(inst), None, &HullConfig::without_cache()).unwrap();
        assert_eq!(r.dimension, 1);
        assert_eq!(r.equations.len(), 1);
    }
}
