//! Random small instances checked against exhaustive enumeration.

use facedim::analysis::{classify_cut, compute_beta_true, BetaTrue, Verdict};
use facedim::generate::{offset_cut, random_cut_direction, random_instance, GeneratorSpec};
use facedim::linalg::{affine_rank, dot, Rational};
use facedim::model::normalize_cut;
use facedim::oracle::{enumerate_feasible_points, solve_mip, SolveOptions, SolveStatus};
use facedim::{polytope_hull, BruteForceOracle, HullConfig, MipOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Default, Debug, Clone, Copy)]
pub struct Counts {
    pub passed: usize,
    pub failed: usize,
}

impl Counts {
    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.passed += other.passed;
        self.failed += other.failed;
        self
    }
}

#[derive(Default, Debug, Clone, Copy)]
pub struct SelfTestReport {
    pub query_count: Counts,
    pub dimension: Counts,
    pub classification: Counts,
    pub optimum: Counts,
}

impl SelfTestReport {
    pub fn rows(&self) -> [(&'static str, Counts); 4] {
        [
            ("hull uses 2n queries", self.query_count),
            ("hull dimension = enumerated affine rank", self.dimension),
            ("cut verdict and face dimension = enumeration", self.classification),
            ("MIP optimum = enumerated optimum", self.optimum),
        ]
    }

    pub fn ok(&self) -> bool {
        self.rows().iter().all(|(_, c)| c.failed == 0)
    }

    fn merge(self, o: SelfTestReport) -> SelfTestReport {
        SelfTestReport {
            query_count: self.query_count.merge(o.query_count),
            dimension: self.dimension.merge(o.dimension),
            classification: self.classification.merge(o.classification),
            optimum: self.optimum.merge(o.optimum),
        }
    }
}

fn check_instance(seed: u64, index: usize, tolerance: &Rational) -> SelfTestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let inst = random_instance(&mut rng, &GeneratorSpec::default(), format!("random{index}"));
    let n = inst.num_vars;
    let points = enumerate_feasible_points(&inst).expect("generated boxes are small");
    let mut r = SelfTestReport::default();

    let brute = BruteForceOracle::new(inst.clone()).expect("generated boxes are small");
    match polytope_hull(&brute, None, &HullConfig::without_cache()) {
        Ok(h) => {
            r.query_count
                .record(h.oracle_queries == 2 * n && h.basis.len() + h.equations.len() == n + 1);
            r.dimension.record(h.dimension == affine_rank(&points));
        }
        Err(_) => {
            r.query_count.record(false);
            r.dimension.record(false);
        }
    }

    let best = points.iter().map(|p| dot(&inst.objective, p)).max();
    let solved = solve_mip(&inst, &inst.objective, &SolveOptions::default());
    r.optimum.record(matches!(
        solved,
        Ok(ref s) if s.status == SolveStatus::Optimal && s.primal_value == best
    ));

    let oracle = MipOracle::new(inst.clone());
    let Ok(base) = polytope_hull(&oracle, None, &HullConfig::default()) else {
        r.classification.record(false);
        return r;
    };
    for k in 0..3 {
        let a = random_cut_direction(&mut rng, n, 5);
        let Ok(BetaTrue::Finite { value, .. }) = compute_beta_true(&brute, &a, None, &[]) else {
            r.classification.record(false);
            continue;
        };
        let cut = normalize_cut(&offset_cut(format!("c{k}"), a, &value, rng.gen_range(-1..=1)));
        let violated = points.iter().any(|p| dot(&cut.coefficients, p) > &cut.rhs + tolerance);
        let max = points
            .iter()
            .map(|p| dot(&cut.coefficients, p))
            .max()
            .expect("non-empty");
        let expected = if violated {
            (Verdict::Invalid, None)
        } else if cut.rhs > &max + tolerance {
            (Verdict::NonSupporting, None)
        } else {
            let on_face: Vec<_> = points
                .iter()
                .filter(|p| dot(&cut.coefficients, p) == max)
                .cloned()
                .collect();
            (Verdict::Supporting, Some(affine_rank(&on_face)))
        };
        let got = classify_cut(&oracle, &base, &cut, tolerance, None, &HullConfig::default())
            .map(|c| (c.verdict, c.face_dimension));
        r.classification.record(got == Ok(expected));
    }
    r
}

pub fn run(count: usize, seed: u64, tolerance: &Rational) -> SelfTestReport {
    (0..count)
        .into_par_iter()
        .map(|i| check_instance(seed, i, tolerance))
        .reduce(SelfTestReport::default, SelfTestReport::merge)
}
