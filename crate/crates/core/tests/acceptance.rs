//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test --release -p facedim --test acceptance`.
//! Extra MIPLIB files (`p0033.mps`, `stein27.mps`) are looked up in
//! `FACEDIM_MIPLIB_DIR`; missing files are skipped.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use facedim::analysis::{
    build_histogram, classify_cut, closed_gap, default_tolerance, gap_trajectory, impact_protocol,
    relative_dimension_bin, ImpactOptions, Verdict,
};
use facedim::generate::{random_cut_direction, random_instance, GeneratorSpec};
use facedim::io::read_instance;
use facedim::linalg::{int, Rational, RationalMatrix, RationalVector};
use facedim::model::{Inequality, MipInstance};
use facedim::oracle::branch::Bound;
use facedim::oracle::{solve_mip, solve_relaxation, LpOutcome, SolveOptions, SolveStatus};
use facedim::{polytope_hull, BruteForceOracle, HullConfig, HullError, MipOracle, PointCache};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Reference computations, kept apart from the library on purpose.

/// All feasible points of a pure-integer instance with a finite box.
fn enumerate(inst: &MipInstance) -> Vec<RationalVector> {
    let n = inst.num_vars;
    let lo: Vec<i64> = inst.lower_bounds.iter().map(|b| to_i64(b.as_ref().unwrap())).collect();
    let hi: Vec<i64> = inst.upper_bounds.iter().map(|b| to_i64(b.as_ref().unwrap())).collect();
    let rows: Vec<Vec<i64>> = inst
        .constraint_matrix
        .rows()
        .iter()
        .map(|r| r.iter().map(to_i64).collect())
        .collect();
    let rhs: Vec<i64> = inst.rhs.iter().map(to_i64).collect();
    let mut out = Vec::new();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return out;
    }
    let mut x = lo.clone();
    loop {
        if rows
            .iter()
            .zip(&rhs)
            .all(|(r, b)| r.iter().zip(&x).map(|(a, v)| a * v).sum::<i64>() <= *b)
        {
            out.push(x.iter().map(|&v| int(v)).collect());
        }
        let mut j = 0;
        while j < n && x[j] == hi[j] {
            x[j] = lo[j];
            j += 1;
        }
        if j == n {
            return out;
        }
        x[j] += 1;
    }
}

fn to_i64(q: &Rational) -> i64 {
    assert!(q.is_integer());
    i64::try_from(q.numer()).unwrap()
}

fn inner(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matrix_rank(mut rows: Vec<RationalVector>) -> usize {
    let mut r = 0;
    let cols = rows.first().map_or(0, |v| v.len());
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

fn reference_affine_rank(points: &[RationalVector]) -> isize {
    let Some(first) = points.first() else {
        return -1;
    };
    let diffs = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    matrix_rank(diffs) as isize
}

/// Verdict and face dimension by enumeration, after scaling to max-norm 1.
fn reference_classification(points: &[RationalVector], cut: &Inequality, tol: &Rational) -> (Verdict, Option<isize>) {
    let scale = cut.coefficients.iter().map(|v| v.abs()).max().unwrap();
    let a: RationalVector = cut.coefficients.iter().map(|v| v / &scale).collect();
    let beta = &cut.rhs / &scale;
    let values: Vec<Rational> = points.iter().map(|p| inner(&a, p)).collect();
    let max = values.iter().max().unwrap().clone();
    if values.iter().any(|v| *v > &beta + tol) {
        (Verdict::Invalid, None)
    } else if beta > &max + tol {
        (Verdict::NonSupporting, None)
    } else {
        let face: Vec<RationalVector> = points
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v == max)
            .map(|(p, _)| p.clone())
            .collect();
        (Verdict::Supporting, Some(reference_affine_rank(&face)))
    }
}

fn random_instances(count: usize, seed: u64) -> Vec<(MipInstance, Vec<RationalVector>, u64)> {
    (0..count)
        .map(|i| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let inst = random_instance(&mut rng, &GeneratorSpec::default(), format!("r{i}"));
            let points = enumerate(&inst);
            assert!(!points.is_empty(), "generator promised a non-empty instance");
            (inst, points, s)
        })
        .collect()
}

fn cube(n: usize) -> MipInstance {
    MipInstance::new("cube", RationalMatrix::new(n), vec![], vec![int(0); n])
        .with_all_integer()
        .with_box(int(0), int(1))
}

// ---------------------------------------------------------------------------
// Criteria.

enum Outcome {
    Pass(String),
    Fail(String),
    Inconclusive(String),
}

fn first_of<T: std::fmt::Display>(bad: &[T]) -> String {
    match bad.first() {
        Some(b) => format!(", first: {b}"),
        None => String::new(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn query_count() -> Outcome {
    let start = Instant::now();
    let failures: Vec<String> = random_instances(100, 1)
        .par_iter()
        .filter_map(|(inst, _, seed)| {
            let n = inst.num_vars;
            let oracle = BruteForceOracle::new(inst.clone()).unwrap();
            match polytope_hull(&oracle, None, &HullConfig::without_cache()) {
                Ok(h) if h.oracle_queries == 2 * n && h.basis.len() + h.equations.len() == n + 1 => None,
                Ok(h) => Some(format!(
                    "seed {seed}: {} queries, |X| = {}, rows(D) = {}",
                    h.oracle_queries,
                    h.basis.len(),
                    h.equations.len()
                )),
                Err(e) => Some(format!("seed {seed}: {e}")),
            }
        })
        .collect();
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "100 instances, {} mismatches{}, {:.1?}",
            failures.len(),
            first_of(&failures),
            elapsed
        ),
    )
}

fn dimension_equivalence() -> Outcome {
    let start = Instant::now();
    let tol = default_tolerance();
    let results: Vec<(usize, usize, Vec<String>)> = random_instances(100, 1)
        .par_iter()
        .map(|(inst, points, seed)| {
            let mut bad = Vec::new();
            let oracle = MipOracle::new(inst.clone());
            let base = match polytope_hull(&oracle, None, &HullConfig::without_cache()) {
                Ok(h) => h,
                Err(e) => return (0, 0, vec![format!("seed {seed}: {e}")]),
            };
            if base.dimension != reference_affine_rank(points) {
                bad.push(format!(
                    "seed {seed}: dim {} vs {}",
                    base.dimension,
                    reference_affine_rank(points)
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut cuts = 0;
            for k in 0..5 {
                let a = random_cut_direction(&mut rng, inst.num_vars, 5);
                let top = points.iter().map(|p| inner(&a, p)).max().unwrap();
                let offset = rng.gen_range(-1i64..=1);
                let cut = Inequality::new(format!("c{k}"), a, top + int(offset));
                let expected = reference_classification(points, &cut, &tol);
                let got = classify_cut(&oracle, &base, &cut, &tol, None, &HullConfig::without_cache())
                    .map(|c| (c.verdict, c.face_dimension));
                if got != Ok(expected) {
                    bad.push(format!("seed {seed} cut {k}: {got:?} vs {expected:?}"));
                }
                cuts += 1;
            }
            (1, cuts, bad)
        })
        .collect();
    let elapsed = start.elapsed();
    let cuts: usize = results.iter().map(|r| r.1).sum();
    let bad: Vec<&String> = results.iter().flat_map(|r| &r.2).collect();
    check(
        bad.is_empty() && cuts == 500 && elapsed < Duration::from_secs(600),
        format!(
            "100 instances, {cuts} cuts, {} mismatches{}, {:.1?}",
            bad.len(),
            first_of(&bad),
            elapsed
        ),
    )
}

fn fixtures() -> Outcome {
    let mut bad = Vec::new();
    let tol = default_tolerance();
    let cfg = HullConfig::without_cache();
    for n in 1..=4usize {
        let oracle = MipOracle::new(cube(n));
        let h = polytope_hull(&oracle, None, &cfg).unwrap();
        if h.dimension != n as isize || !h.equations.is_empty() {
            bad.push(format!(
                "cube {n}: dim {} with {} equations",
                h.dimension,
                h.equations.len()
            ));
        }
        let mut e1 = vec![int(0); n];
        e1[0] = int(1);
        let facet = classify_cut(&oracle, &h, &Inequality::new("facet", e1, int(1)), &tol, None, &cfg).unwrap();
        if facet.face_dimension != Some(n as isize - 1) {
            bad.push(format!("cube {n} facet: {:?}", facet.face_dimension));
        }
        let vertex = classify_cut(
            &oracle,
            &h,
            &Inequality::new("vertex", vec![int(1); n], int(n as i64)),
            &tol,
            None,
            &cfg,
        )
        .unwrap();
        if vertex.face_dimension != Some(0) {
            bad.push(format!("cube {n} vertex: {:?}", vertex.face_dimension));
        }
    }
    let diagonal = MipInstance::new(
        "diagonal",
        RationalMatrix::from_i64(&[&[1, -1], &[-1, 1]], 2),
        vec![int(0), int(0)],
        vec![int(0), int(0)],
    )
    .with_all_integer()
    .with_box(int(0), int(1));
    let h = polytope_hull(&MipOracle::new(diagonal), None, &cfg).unwrap();
    if h.dimension != 1 || h.equations.len() != 1 {
        bad.push(format!(
            "diagonal: dim {} with {} equations",
            h.dimension,
            h.equations.len()
        ));
    }
    let infeasible = MipInstance::new(
        "infeasible",
        RationalMatrix::from_i64(&[&[1, 1], &[-1, -1]], 2),
        vec![int(1), int(-2)],
        vec![int(0), int(0)],
    )
    .with_all_integer()
    .with_box(int(0), int(1));
    let h = polytope_hull(&MipOracle::new(infeasible), None, &cfg).unwrap();
    if h.dimension != -1 {
        bad.push(format!("infeasible: dim {}", h.dimension));
    }
    check(
        bad.is_empty(),
        format!(
            "cube n=1..4 with facet and vertex, diagonal, infeasible{}",
            first_of(&bad)
        ),
    )
}

fn miplib_file(name: &str) -> Option<PathBuf> {
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/miplib")
        .join(name);
    if bundled.exists() {
        return Some(bundled);
    }
    let dir = std::env::var_os("FACEDIM_MIPLIB_DIR")?;
    let path = Path::new(&dir).join(name);
    path.exists().then_some(path)
}

fn miplib_dimensions() -> Outcome {
    let budget = Duration::from_secs(30 * 60);
    let mut parts = Vec::new();
    let mut failed = false;
    let mut inconclusive = false;
    for (name, expected) in [("flugpl.mps", 9), ("p0033.mps", 27), ("stein27.mps", 27)] {
        let Some(path) = miplib_file(name) else {
            parts.push(format!("{name} skipped (not found)"));
            continue;
        };
        let inst = match read_instance(&path) {
            Ok(i) => i,
            Err(e) => {
                failed = true;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let start = Instant::now();
        let oracle = MipOracle::new(inst).with_limits(None, Some(budget));
        let cfg = HullConfig {
            use_cache: true,
            max_queries: None,
            time_budget: Some(budget),
        };
        let cache = PointCache::new();
        match polytope_hull(&oracle, Some(&cache), &cfg) {
            Ok(h) if start.elapsed() > budget => {
                inconclusive = true;
                parts.push(format!(
                    "{name} dim {} over budget ({:.0?})",
                    h.dimension,
                    start.elapsed()
                ));
            }
            Ok(h) => {
                failed |= h.dimension != expected;
                parts.push(format!(
                    "{name} dim {} (expected {expected}, {:.1?})",
                    h.dimension,
                    start.elapsed()
                ));
            }
            Err(HullError::Inconclusive { lower, upper, .. }) => {
                inconclusive = true;
                parts.push(format!("{name} inconclusive, dim in [{lower}, {upper}]"));
            }
            Err(e) => {
                failed = true;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let detail = parts.join("; ");
    if failed {
        Outcome::Fail(detail)
    } else if inconclusive {
        Outcome::Inconclusive(detail)
    } else {
        Outcome::Pass(detail)
    }
}

fn impact_properties() -> Outcome {
    let start = Instant::now();
    let opts = ImpactOptions::default();
    let results: Vec<Vec<String>> = random_instances(20, 5)
        .par_iter()
        .map(|(inst, points, seed)| {
            let mut bad = Vec::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a9);
            let cuts: Vec<Inequality> = (0..3)
                .map(|k| {
                    let a = random_cut_direction(&mut rng, inst.num_vars, 5);
                    let top = points.iter().map(|p| inner(&a, p)).max().unwrap();
                    Inequality::new(format!("c{k}"), a, top + int(rng.gen_range(0i64..=1)))
                })
                .collect();
            let (first, second) = match (impact_protocol(inst, &cuts, &opts), impact_protocol(inst, &cuts, &opts)) {
                (Ok(a), Ok(b)) => (a, b),
                (a, b) => return vec![format!("seed {seed}: {:?} / {:?}", a.err(), b.err())],
            };
            let z_star = points.iter().map(|p| inner(&inst.objective, p)).max().unwrap();
            if first.z_star != z_star {
                bad.push(format!("seed {seed}: z* {} vs {z_star}", first.z_star));
            }
            for run in std::iter::once(&first.baseline).chain(&first.per_cut) {
                match &run.closed_gap {
                    Some(g) if !g.is_negative() && *g <= int(1) => {}
                    g => bad.push(format!("seed {seed} {}: gap {g:?}", run.label)),
                }
                let gaps: Vec<Rational> = gap_trajectory(&run.trace, &first.z_lp, &first.z_star)
                    .into_iter()
                    .filter_map(|(_, g)| g)
                    .collect();
                if gaps.windows(2).any(|w| w[0] > w[1]) {
                    bad.push(format!("seed {seed} {}: gap decreases along the trace", run.label));
                }
            }
            // Run 0 recomputed from scratch.
            let z_lp = match solve_relaxation(inst, &inst.objective, &SolveOptions::default()) {
                LpOutcome::Optimal { value, .. } => value,
                other => return vec![format!("seed {seed}: relaxation {other:?}")],
            };
            let full = solve_mip(
                inst,
                &inst.objective,
                &SolveOptions {
                    incumbent: Some(first.x_star.clone()),
                    record_trace: true,
                    time_limit: None,
                    ..Default::default()
                },
            )
            .unwrap();
            let at_n = full.dual_bound_at(first.node_budget).and_then(Bound::finite).cloned();
            let recomputed = at_n.map(|z| closed_gap(&z, &z_lp, &z_star).unwrap());
            if recomputed != first.baseline.closed_gap {
                bad.push(format!(
                    "seed {seed}: baseline gap {:?} vs {recomputed:?}",
                    first.baseline.closed_gap
                ));
            }
            let key = |r: &facedim::analysis::ImpactReport| {
                (
                    r.node_budget,
                    std::iter::once(&r.baseline)
                        .chain(&r.per_cut)
                        .map(|run| (run.dual_bound.clone(), run.closed_gap.clone()))
                        .collect::<Vec<_>>(),
                )
            };
            if key(&first) != key(&second) {
                bad.push(format!("seed {seed}: repeated runs differ"));
            }
            bad
        })
        .collect();
    let bad: Vec<&String> = results.iter().flatten().collect();
    check(
        bad.is_empty(),
        format!(
            "20 instances x 3 cuts, {} violations{}, {:.1?}",
            bad.len(),
            first_of(&bad),
            start.elapsed()
        ),
    )
}

fn histogram_mapping() -> Outcome {
    let mut bad = Vec::new();
    let cases = [
        ((-1, 5), "∅"),
        ((5, 5), "∞"),
        ((4, 5), "100%"),
        ((2, 5), "[50%,55%)"),
        ((0, 5), "[0%,5%)"),
        ((1, 21), "[5%,10%)"),
        ((1, 22), "[0%,5%)"),
        ((19, 21), "[95%,100%)"),
    ];
    for ((k, d), label) in cases {
        match relative_dimension_bin(k, d) {
            Ok(bin) if bin.label() == label => {}
            other => bad.push(format!("k={k}, d={d}: {other:?}, expected {label}")),
        }
    }
    if relative_dimension_bin(0, 1).is_ok() || relative_dimension_bin(6, 5).is_ok() {
        bad.push("degenerate or out-of-range input accepted".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for corpus in 0..200 {
        let instances: Vec<(String, Vec<(isize, isize)>)> = (0..rng.gen_range(1..8))
            .map(|i| {
                let d = rng.gen_range(2isize..40);
                let cuts = (0..rng.gen_range(0..12)).map(|_| (rng.gen_range(-1..=d), d)).collect();
                (format!("i{i}"), cuts)
            })
            .collect();
        if instances.iter().all(|(_, c)| c.is_empty()) {
            continue;
        }
        let total: Rational = build_histogram(&instances).unwrap().into_iter().map(|(_, w)| w).sum();
        if total != int(1) {
            bad.push(format!("corpus {corpus}: mass {total}"));
        }
    }
    check(
        bad.is_empty(),
        format!("boundary bins and mass over random corpora{}", first_of(&bad)),
    )
}

fn solver_soundness() -> Outcome {
    let start = Instant::now();
    let results: Vec<Vec<String>> = random_instances(200, 7)
        .par_iter()
        .map(|(inst, points, seed)| {
            let mut bad = Vec::new();
            let best = points.iter().map(|p| inner(&inst.objective, p)).max().unwrap();
            let opts = SolveOptions {
                record_trace: true,
                time_limit: None,
                ..Default::default()
            };
            match solve_mip(inst, &inst.objective, &opts) {
                Ok(r) => {
                    if r.status != SolveStatus::Optimal || r.primal_value.as_ref() != Some(&best) {
                        bad.push(format!("seed {seed}: {:?} {:?} vs {best}", r.status, r.primal_value));
                    }
                    if r.dual_bound_trace
                        .windows(2)
                        .any(|w| w[0].1 < w[1].1 || w[0].0 >= w[1].0)
                    {
                        bad.push(format!("seed {seed}: trace not monotone"));
                    }
                }
                Err(e) => bad.push(format!("seed {seed}: {e}")),
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
            let start_point = points[rng.gen_range(0..points.len())].clone();
            let start_value = inner(&inst.objective, &start_point);
            for limit in [Some(1), Some(3), None] {
                let injected = SolveOptions {
                    incumbent: Some(start_point.clone()),
                    node_limit: limit,
                    record_trace: true,
                    time_limit: None,
                    ..Default::default()
                };
                match solve_mip(inst, &inst.objective, &injected) {
                    Ok(r) if r.primal_value.as_ref().is_some_and(|v| *v >= start_value) => {}
                    Ok(r) => bad.push(format!(
                        "seed {seed}: injected {start_value}, reported {:?}",
                        r.primal_value
                    )),
                    Err(e) => bad.push(format!("seed {seed}: {e}")),
                }
            }
            bad
        })
        .collect();
    let elapsed = start.elapsed();
    let bad: Vec<&String> = results.iter().flatten().collect();
    check(
        bad.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "200 instances, {} violations{}, {:.1?}",
            bad.len(),
            first_of(&bad),
            elapsed
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("hull uses exactly 2n queries", query_count),
        (
            "dimension and cut classification match enumeration",
            dimension_equivalence,
        ),
        ("known polytope fixtures", fixtures),
        ("MIPLIB dimensions", miplib_dimensions),
        ("impact protocol properties", impact_properties),
        ("histogram bins and mass", histogram_mapping),
        ("solver soundness", solver_soundness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Inconclusive(d) => ("INCONCLUSIVE", d),
            Outcome::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {}: {name}: {detail}", i + 1);
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
