//! Report tables: one row per cut, one summary row per instance, and
//! histogram rows. Rationals are written as exact `p/q` strings.
//!
//! Per-cut CSV columns:
//! `instance,label,class,verdict,beta,beta_true,rhs_excess,face_dimension,closed_gap,nodes,status,incumbent_injected,short_trace,certificate,degenerate`
//!
//! Summary CSV columns:
//! `instance,num_vars,dim_p,equations,node_budget,z_star,z_lp,analyzed,analyzed_by_class,failed_numerical,failed_timeout,failed_invalid,degenerate,impact_error`
//!
//! Histogram CSV columns: `bin,weight,weight_decimal`.
//!
//! Query and cache-hit counts are left out on purpose: with a shared point
//! cache they depend on thread scheduling, and the tables are meant to be
//! byte-identical across runs.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{build_histogram, BinError, DimensionBin};
use crate::linalg::{render, render_decimal, Rational};
use crate::pipeline::{CutOutcome, InstanceAnalysis};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Bin(#[from] BinError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRow {
    pub instance: String,
    pub label: String,
    pub class: Option<String>,
    /// `invalid`, `non_supporting`, `supporting`, `timeout` or `error`.
    pub verdict: String,
    pub beta: String,
    pub beta_true: Option<String>,
    pub rhs_excess: Option<String>,
    pub face_dimension: Option<isize>,
    pub closed_gap: Option<String>,
    pub nodes: Option<u64>,
    pub status: Option<String>,
    pub incumbent_injected: Option<bool>,
    pub short_trace: Option<bool>,
    /// Violating point of an invalid cut, space separated.
    pub certificate: Option<String>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub num_vars: usize,
    pub dim_p: isize,
    pub equations: usize,
    pub node_budget: Option<u64>,
    pub z_star: Option<String>,
    pub z_lp: Option<String>,
    pub analyzed: usize,
    /// `class=count` pairs separated by `;`.
    pub analyzed_by_class: String,
    pub failed_numerical: usize,
    pub failed_timeout: usize,
    pub failed_invalid: usize,
    pub degenerate: usize,
    pub impact_error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin: String,
    pub weight: String,
    pub weight_decimal: String,
}

/// Everything known about one instance; the JSON report format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub summary: SummaryRow,
    pub cuts: Vec<CutRow>,
    pub histogram: Vec<HistogramRow>,
}

fn points(x: &[Rational]) -> String {
    x.iter().map(render).collect::<Vec<_>>().join(" ")
}

pub fn cut_rows(a: &InstanceAnalysis) -> Vec<CutRow> {
    a.cuts
        .iter()
        .map(|r| {
            let mut row = CutRow {
                instance: a.instance.clone(),
                label: r.cut.label.clone(),
                class: r.cut.class.clone(),
                beta: render(&r.cut.rhs),
                degenerate: r.cut.is_zero(),
                ..Default::default()
            };
            match &r.outcome {
                CutOutcome::Timeout(_) => row.verdict = "timeout".into(),
                CutOutcome::Failed(_) => row.verdict = "error".into(),
                CutOutcome::Classified(c) => {
                    row.verdict = c.verdict.to_string();
                    row.beta = render(&c.normalized.rhs);
                    row.beta_true = Some(c.beta_true.to_string());
                    row.rhs_excess = c.rhs_excess.as_ref().map(render);
                    row.face_dimension = c.face_dimension;
                    row.certificate = c.certificate.as_deref().map(points);
                }
            }
            if let Some(run) = &r.impact {
                row.closed_gap = run.closed_gap.as_ref().map(render);
                row.nodes = Some(run.nodes_used);
                row.status = Some(run.status.to_string());
                row.incumbent_injected = Some(run.incumbent_injected);
                row.short_trace = Some(run.short_trace);
            }
            row
        })
        .collect()
}

pub fn summary_row(a: &InstanceAnalysis) -> SummaryRow {
    let t = a.tally();
    let impact = a.impact.as_ref().and_then(|r| r.as_ref().ok());
    SummaryRow {
        instance: a.instance.clone(),
        num_vars: a.num_vars,
        dim_p: a.polytope.dimension,
        equations: a.polytope.equations.len(),
        node_budget: impact.map(|r| r.node_budget),
        z_star: impact.map(|r| render(&r.z_star)),
        z_lp: impact.map(|r| render(&r.z_lp)),
        analyzed: t.analyzed,
        analyzed_by_class: t
            .analyzed_by_class
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";"),
        failed_numerical: t.failed_numerical,
        failed_timeout: t.failed_timeout,
        failed_invalid: t.failed_invalid,
        degenerate: t.degenerate,
        impact_error: a
            .impact
            .as_ref()
            .and_then(|r| r.as_ref().err())
            .map(ToString::to_string),
    }
}

pub fn histogram_rows(histogram: &[(DimensionBin, Rational)]) -> Vec<HistogramRow> {
    histogram
        .iter()
        .map(|(bin, w)| HistogramRow {
            bin: bin.label(),
            weight: render(w),
            weight_decimal: render_decimal(w, 6),
        })
        .collect()
}

pub fn build_report(a: &InstanceAnalysis) -> Result<Report, ReportError> {
    let histogram = build_histogram(&[(a.instance.clone(), a.histogram_input())])?;
    Ok(Report {
        summary: summary_row(a),
        cuts: cut_rows(a),
        histogram: histogram_rows(&histogram),
    })
}

/// `(k, d)` pairs recovered from a report, in the form
/// [`build_histogram`] takes.
pub fn histogram_input(report: &Report) -> (String, Vec<(isize, isize)>) {
    let d = report.summary.dim_p;
    let pairs = report
        .cuts
        .iter()
        .filter(|c| !c.degenerate)
        .filter_map(|c| match c.verdict.as_str() {
            "non_supporting" => Some(-1),
            "supporting" => c.face_dimension,
            _ => None,
        })
        .map(|k| (k, d))
        .collect();
    (report.summary.instance.clone(), pairs)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV text of `rows`, header included even when `rows` is empty.
pub fn csv_string<T: Serialize + Default>(rows: &[T]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.serialize(T::default())?;
        w.flush()?;
        drop(w);
        let text = String::from_utf8(buf).expect("csv output is UTF-8");
        return Ok(text.lines().next().map(|h| format!("{h}\n")).unwrap_or_default());
    }
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn report_to_json(report: &Report) -> Result<String, ReportError> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn report_from_json(text: &str) -> Result<Report, ReportError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector, parse_rational, ratio, RationalMatrix};
    use crate::model::{normalize_cut, Inequality, MipInstance};
    use crate::pipeline::{analyze_instance, AnalysisConfig};

    fn square() -> MipInstance {
        MipInstance::new("square", RationalMatrix::new(2), vec![], int_vector(&[1, 1]))
            .with_all_integer()
            .with_box(int(0), int(1))
    }

    fn analysis(cuts: &[Inequality]) -> InstanceAnalysis {
        let cuts: Vec<_> = cuts.iter().map(normalize_cut).collect();
        analyze_instance(&square(), &cuts, &AnalysisConfig::default()).unwrap()
    }

    #[test]
    fn square_rows() {
        let a = analysis(&[
            Inequality::new("loose", int_vector(&[1, 1]), int(3)),
            Inequality::new("tight", int_vector(&[1, 1]), parse_rational("1.99").unwrap()),
            Inequality::new("vertex", int_vector(&[1, 1]), int(2)),
        ]);
        let rows = cut_rows(&a);
        let verdicts: Vec<_> = rows.iter().map(|r| r.verdict.as_str()).collect();
        assert_eq!(verdicts, ["non_supporting", "invalid", "supporting"]);
        let dims: Vec<_> = rows.iter().map(|r| r.face_dimension).collect();
        assert_eq!(dims, [None, None, Some(0)]);
        assert_eq!(rows[1].certificate.as_deref(), Some("1 1"));
        let csv = csv_string(&rows).unwrap();
        assert!(csv.starts_with("instance,label,class,verdict,beta,beta_true,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains("square,tight,,invalid,199/100,2,"));
    }

    #[test]
    fn empty_cut_list() {
        let a = analysis(&[]);
        let report = build_report(&a).unwrap();
        assert!(report.cuts.is_empty() && report.histogram.is_empty());
        let summary = csv_string(std::slice::from_ref(&report.summary)).unwrap();
        assert_eq!(summary.lines().count(), 2);
        assert!(summary
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("square,2,2,0,1,2,2,0,,0,0,0,0,"));
        assert_eq!(csv_string::<CutRow>(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn histogram_rows_have_exact_weights() {
        let h = build_histogram(&[("a".into(), vec![(-1, 5), (4, 5)])]).unwrap();
        let rows = histogram_rows(&h);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.weight == "1/2" && r.weight_decimal == "0.500000"));
        assert_eq!(rows[0].bin, "∅");
        assert_eq!(rows[1].bin, "100%");
        assert_eq!(
            histogram_rows(&[(DimensionBin::Percent(3), ratio(1, 3))])[0].weight_decimal,
            "0.333333"
        );
    }

    #[test]
    fn json_round_trip_and_histogram_input() {
        let a = analysis(&[
            Inequality::new("loose", int_vector(&[1, 1]), int(3)),
            Inequality::new("facet", int_vector(&[1, 0]), int(1)),
        ]);
        let report = build_report(&a).unwrap();
        let back = report_from_json(&report_to_json(&report).unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(histogram_input(&back), ("square".to_string(), vec![(-1, 2), (1, 2)]));
    }

    #[test]
    fn deterministic_output() {
        let cuts = [
            Inequality::new("a", int_vector(&[1, 0]), int(1)),
            Inequality::new("b", int_vector(&[2, 1]), int(3)),
        ];
        let one = csv_string(&cut_rows(&analysis(&cuts))).unwrap();
        let two = csv_string(&cut_rows(&analysis(&cuts))).unwrap();
        assert_eq!(one, two);
    }
}
