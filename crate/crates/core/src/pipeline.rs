//! The whole per-instance study: hull of `P`, cut classification with face
//! dimensions, then the impact protocol over the valid cuts.

use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;

use crate::analysis::{
    classify_cut, default_tolerance, impact_protocol, AnalysisError, CutClassification, ImpactError, ImpactOptions,
    ImpactReport, ImpactRun, Verdict,
};
use crate::hull::{polytope_hull, AffineHullResult, HullConfig};
use crate::linalg::Rational;
use crate::model::{Inequality, MipInstance};
use crate::oracle::{MipOracle, PointCache};

#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub tolerance: Rational,
    pub hull: HullConfig,
    /// Limits for every oracle solve.
    pub solve_node_limit: Option<u64>,
    pub solve_time_limit: Option<Duration>,
    /// `None` skips the impact protocol.
    pub impact: Option<ImpactOptions>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            hull: HullConfig::default(),
            solve_node_limit: None,
            solve_time_limit: Some(crate::oracle::branch::DEFAULT_TIME_LIMIT),
            impact: Some(ImpactOptions::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum CutOutcome {
    Classified(CutClassification),
    /// A budget ran out while classifying or measuring the face.
    Timeout(String),
    /// Anything else the oracle or hull computation rejected.
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutRecord {
    /// The cut as read (already normalized by the cut reader).
    pub cut: Inequality,
    pub outcome: CutOutcome,
    /// Impact run for this cut, when it was valid and the protocol ran.
    pub impact: Option<ImpactRun>,
}

impl CutRecord {
    pub fn classification(&self) -> Option<&CutClassification> {
        match &self.outcome {
            CutOutcome::Classified(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceAnalysis {
    pub instance: String,
    pub num_vars: usize,
    pub polytope: AffineHullResult,
    pub cuts: Vec<CutRecord>,
    /// `None` when the protocol was disabled or no cut was valid.
    pub impact: Option<Result<ImpactReport, ImpactError>>,
}

/// Counts in the shape of a per-instance table row.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub analyzed: usize,
    pub analyzed_by_class: BTreeMap<String, usize>,
    pub failed_numerical: usize,
    pub failed_timeout: usize,
    pub failed_invalid: usize,
    pub degenerate: usize,
}

impl InstanceAnalysis {
    pub fn tally(&self) -> Tally {
        let mut t = Tally::default();
        for record in &self.cuts {
            match &record.outcome {
                CutOutcome::Timeout(_) => t.failed_timeout += 1,
                CutOutcome::Failed(_) => t.failed_numerical += 1,
                CutOutcome::Classified(c) if c.verdict == Verdict::Invalid => t.failed_invalid += 1,
                CutOutcome::Classified(c) => {
                    if c.degenerate {
                        t.degenerate += 1;
                    }
                    t.analyzed += 1;
                    let class = record.cut.class.clone().unwrap_or_else(|| "-".to_string());
                    *t.analyzed_by_class.entry(class).or_default() += 1;
                }
            }
        }
        t
    }

    /// `(k, d)` pairs for the histogram: valid, non-degenerate cuts only.
    pub fn histogram_input(&self) -> Vec<(isize, isize)> {
        self.cuts
            .iter()
            .filter_map(|r| r.classification())
            .filter(|c| !c.degenerate)
            .filter_map(|c| c.histogram_dimension())
            .map(|k| (k, self.polytope.dimension))
            .collect()
    }

    /// Some budget ran out somewhere.
    pub fn has_failures(&self) -> bool {
        let t = self.tally();
        t.failed_timeout + t.failed_numerical > 0 || matches!(self.impact, Some(Err(_)))
    }
}

/// Runs the study on one instance. Only a failure to compute the hull of
/// `P` itself is an error; per-cut failures are recorded in the result.
pub fn analyze_instance(
    inst: &MipInstance,
    cuts: &[Inequality],
    config: &AnalysisConfig,
) -> Result<InstanceAnalysis, AnalysisError> {
    let oracle = MipOracle::new(inst.clone()).with_limits(config.solve_node_limit, config.solve_time_limit);
    let cache = PointCache::new();
    let cache_ref = config.hull.use_cache.then_some(&cache);
    let polytope = polytope_hull(&oracle, cache_ref, &config.hull)?;

    let outcomes: Vec<CutOutcome> = cuts
        .par_iter()
        .map(
            |cut| match classify_cut(&oracle, &polytope, cut, &config.tolerance, cache_ref, &config.hull) {
                Ok(c) => CutOutcome::Classified(c),
                Err(e) if e.is_timeout() => CutOutcome::Timeout(e.to_string()),
                Err(e) => CutOutcome::Failed(e.to_string()),
            },
        )
        .collect();
    let mut records: Vec<CutRecord> = cuts
        .iter()
        .zip(outcomes)
        .map(|(cut, outcome)| CutRecord {
            cut: cut.clone(),
            outcome,
            impact: None,
        })
        .collect();

    let valid: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.classification()
                .is_some_and(|c| c.verdict != Verdict::Invalid && !c.degenerate)
        })
        .map(|(i, _)| i)
        .collect();
    let impact = match &config.impact {
        Some(opts) if polytope.dimension >= 0 => {
            let valid_cuts: Vec<Inequality> = valid.iter().map(|&i| records[i].cut.clone()).collect();
            let report = impact_protocol(inst, &valid_cuts, opts);
            if let Ok(report) = &report {
                for (&i, run) in valid.iter().zip(&report.per_cut) {
                    records[i].impact = Some(run.clone());
                }
            }
            Some(report)
        }
        _ => None,
    };

    Ok(InstanceAnalysis {
        instance: inst.name.clone(),
        num_vars: inst.num_vars,
        polytope,
        cuts: records,
        impact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector, parse_rational, RationalMatrix};
    use crate::model::normalize_cut;

    fn square() -> MipInstance {
        MipInstance::new("square", RationalMatrix::new(2), vec![], int_vector(&[1, 1]))
            .with_all_integer()
            .with_box(int(0), int(1))
    }

    fn three_cuts() -> Vec<Inequality> {
        [
            Inequality::new("loose", int_vector(&[1, 1]), int(3)),
            Inequality::new("tight", int_vector(&[1, 1]), parse_rational("1.99").unwrap()),
            Inequality::new("vertex", int_vector(&[1, 1]), int(2)).with_class("clique"),
        ]
        .iter()
        .map(normalize_cut)
        .collect()
    }

    #[test]
    fn square_with_three_cuts() {
        let a = analyze_instance(&square(), &three_cuts(), &AnalysisConfig::default()).unwrap();
        assert_eq!(a.polytope.dimension, 2);
        let verdicts: Vec<_> = a.cuts.iter().map(|r| r.classification().unwrap().verdict).collect();
        assert_eq!(
            verdicts,
            vec![Verdict::NonSupporting, Verdict::Invalid, Verdict::Supporting]
        );
        let t = a.tally();
        assert_eq!((t.analyzed, t.failed_invalid, t.failed_timeout), (2, 1, 0));
        assert_eq!(t.analyzed_by_class.get("clique"), Some(&1));
        assert_eq!(a.histogram_input(), vec![(-1, 2), (0, 2)]);
        let report = a.impact.clone().unwrap().unwrap();
        assert_eq!(report.per_cut.len(), 2);
        assert!(a.cuts[0].impact.is_some() && a.cuts[1].impact.is_none());
        assert!(!a.has_failures());
    }

    #[test]
    fn no_cuts() {
        let a = analyze_instance(&square(), &[], &AnalysisConfig::default()).unwrap();
        assert!(a.cuts.is_empty());
        assert_eq!(a.tally(), Tally::default());
        assert_eq!(a.impact.unwrap().unwrap().node_budget, 1);
    }

    #[test]
    fn infeasible_instance_skips_impact() {
        let mut inst = square();
        inst.constraint_matrix = RationalMatrix::from_i64(&[&[1, 1]], 2);
        inst.rhs = int_vector(&[-1]);
        let a = analyze_instance(&inst, &three_cuts(), &AnalysisConfig::default()).unwrap();
        assert_eq!(a.polytope.dimension, -1);
        assert!(a.impact.is_none());
        assert_eq!(a.histogram_input(), vec![(-1, -1); 3]);
    }
}
