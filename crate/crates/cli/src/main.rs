//! `facedim`: dimensions of mixed-integer hulls and of the faces cutting
//! planes induce on them.
//!
//! Exit status: 0 on success, 1 when an analysis step ran out of budget or
//! failed, 2 on usage, input or parse errors.

mod config;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use facedim::analysis::{build_histogram, classify_cut, impact_protocol, Verdict};
use facedim::io::report::{
    build_report, csv_string, histogram_input, histogram_rows, report_from_json, report_to_json, Report,
};
use facedim::io::{read_cut_file, read_instance};
use facedim::linalg::{render, render_decimal};
use facedim::model::{Inequality, MipInstance};
use facedim::pipeline::CutOutcome;
use facedim::{analyze_instance, polytope_hull, MipOracle, PointCache};

use config::{RunConfig, RunFlags};

#[derive(Parser)]
#[command(
    name = "facedim",
    version,
    about = "Face dimensions and cut impact for mixed-integer programs"
)]
struct Cli {
    #[command(flatten)]
    flags: RunFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of the mixed-integer hull, with its implied equations.
    Dim { instance: PathBuf },
    /// Classify cuts as invalid, non-supporting or supporting, with face dimensions.
    Classify { instance: PathBuf, cuts: PathBuf },
    /// Closed gap of each cut after a common node budget.
    Impact { instance: PathBuf, cuts: PathBuf },
    /// Dimension, classification and impact; writes CSV and JSON reports.
    Analyze { instance: PathBuf, cuts: PathBuf },
    /// Relative-dimension histogram over JSON reports written by `analyze`.
    Histogram {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Check the algorithms against enumeration on random small instances.
    Selftest {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

enum Failure {
    /// Bad input or configuration: exit 2.
    Usage(String),
    /// An analysis step failed or ran out of budget: exit 1.
    Analysis(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn analysis_err(e: impl ToString) -> Failure {
    Failure::Analysis(e.to_string())
}

fn load(instance: &Path, cuts: Option<&Path>) -> Result<(MipInstance, Vec<Inequality>), Failure> {
    let inst = read_instance(instance).map_err(usage)?;
    let cuts = match cuts {
        Some(path) => read_cut_file(path, inst.num_vars).map_err(usage)?,
        None => Vec::new(),
    };
    Ok((inst, cuts))
}

fn oracle(inst: MipInstance, cfg: &RunConfig) -> MipOracle {
    MipOracle::new(inst).with_limits(cfg.node_limit, Some(cfg.solve_time_limit))
}

fn dim(path: &Path, cfg: &RunConfig) -> Outcome {
    let (inst, _) = load(path, None)?;
    let oracle = oracle(inst, cfg);
    let cache = PointCache::new();
    let hull = polytope_hull(&oracle, cfg.use_cache.then_some(&cache), &cfg.hull()).map_err(analysis_err)?;
    println!(
        "dim = {}, queries = {}, equations = {}",
        hull.dimension,
        hull.oracle_queries,
        hull.equations.len()
    );
    for (row, rhs) in hull.equations.lhs.rows().iter().zip(&hull.equations.rhs) {
        let coefficients: Vec<String> = row.iter().map(render).collect();
        println!("  [{}] x = {}", coefficients.join(", "), render(rhs));
    }
    Ok(())
}

fn classify(instance: &Path, cuts: &Path, cfg: &RunConfig) -> Outcome {
    use rayon::prelude::*;
    let (inst, cuts) = load(instance, Some(cuts))?;
    let oracle = oracle(inst, cfg);
    let cache = PointCache::new();
    let cache = cfg.use_cache.then_some(&cache);
    let base = polytope_hull(&oracle, cache, &cfg.hull()).map_err(analysis_err)?;
    println!("dim(P) = {}", base.dimension);
    let results: Vec<_> = cuts
        .par_iter()
        .map(|c| classify_cut(&oracle, &base, c, &cfg.tolerance, cache, &cfg.hull()))
        .collect();
    println!(
        "{:<16} {:<15} {:>14} {:>14} {:>9}",
        "label", "verdict", "beta", "beta_true", "face_dim"
    );
    let mut failed = 0;
    for (cut, result) in cuts.iter().zip(results) {
        match result {
            Ok(c) => {
                let dim = c.face_dimension.map_or("-".to_string(), |d| d.to_string());
                println!(
                    "{:<16} {:<15} {:>14} {:>14} {:>9}",
                    cut.label,
                    c.verdict.to_string(),
                    render(&c.normalized.rhs),
                    c.beta_true.to_string(),
                    dim
                );
                if c.verdict == Verdict::Invalid {
                    if let Some(x) = &c.certificate {
                        let x: Vec<String> = x.iter().map(render).collect();
                        println!("{:<16} violated at ({})", "", x.join(", "));
                    }
                }
            }
            Err(e) => {
                failed += 1;
                let kind = if e.is_timeout() { "timeout" } else { "error" };
                println!("{:<16} {:<15} {e}", cut.label, kind);
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Analysis(format!("{failed} cut(s) could not be classified")));
    }
    Ok(())
}

fn impact(instance: &Path, cuts: &Path, cfg: &RunConfig) -> Outcome {
    let (inst, cuts) = load(instance, Some(cuts))?;
    let report = impact_protocol(&inst, &cuts, &cfg.impact()).map_err(analysis_err)?;
    println!(
        "z* = {}, z_LP = {}, N = {}",
        render(&report.z_star),
        render(&report.z_lp),
        report.node_budget
    );
    println!(
        "{:<16} {:>14} {:>10} {:>8} {:<12} flags",
        "run", "dual_bound", "gap", "nodes", "status"
    );
    let mut short = 0;
    for run in std::iter::once(&report.baseline).chain(&report.per_cut) {
        let gap = run
            .closed_gap
            .as_ref()
            .map_or("-".to_string(), |g| render_decimal(g, 4));
        let mut flags = Vec::new();
        if !run.incumbent_injected {
            flags.push("cuts-off-optimum");
        }
        if run.short_trace {
            flags.push("short-trace");
            short += 1;
        }
        println!(
            "{:<16} {:>14} {:>10} {:>8} {:<12} {}",
            run.label,
            run.dual_bound.to_string(),
            gap,
            run.nodes_used,
            run.status.to_string(),
            flags.join(",")
        );
    }
    if short > 0 {
        return Err(Failure::Analysis(format!(
            "{short} run(s) hit the time limit before N nodes"
        )));
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| analysis_err(format!("{}: {e}", path.display())))
}

fn analyze(instance: &Path, cuts: &Path, cfg: &RunConfig) -> Outcome {
    let (inst, cuts) = load(instance, Some(cuts))?;
    let analysis = analyze_instance(&inst, &cuts, &cfg.analysis()).map_err(analysis_err)?;
    let report = build_report(&analysis).map_err(analysis_err)?;
    let stem = if inst.name.is_empty() {
        instance
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("instance")
            .to_string()
    } else {
        inst.name.clone()
    };
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| analysis_err(format!("{}: {e}", cfg.out_dir.display())))?;
    let files = [
        ("cuts.csv", csv_string(&report.cuts)),
        ("summary.csv", csv_string(std::slice::from_ref(&report.summary))),
        ("histogram.csv", csv_string(&report.histogram)),
        ("report.json", report_to_json(&report)),
    ];
    for (suffix, text) in files {
        write_file(
            &cfg.out_dir.join(format!("{stem}.{suffix}")),
            &text.map_err(analysis_err)?,
        )?;
    }

    let s = &report.summary;
    println!(
        "instance {}: n = {}, dim(P) = {}, equations = {}",
        s.instance, s.num_vars, s.dim_p, s.equations
    );
    match (&s.node_budget, &s.impact_error) {
        (Some(n), _) => println!(
            "N = {n}, z* = {}, z_LP = {}",
            s.z_star.as_deref().unwrap_or("-"),
            s.z_lp.as_deref().unwrap_or("-")
        ),
        (None, Some(e)) => println!("impact protocol failed: {e}"),
        (None, None) => println!("impact protocol not run"),
    }
    println!(
        "cuts: analyzed {} [{}], failed: numerical {}, timeout {}, invalid {}; degenerate {}",
        s.analyzed, s.analyzed_by_class, s.failed_numerical, s.failed_timeout, s.failed_invalid, s.degenerate
    );
    for record in &analysis.cuts {
        if let CutOutcome::Timeout(e) | CutOutcome::Failed(e) = &record.outcome {
            eprintln!("{}: {e}", record.cut.label);
        }
    }
    println!("reports written to {}", cfg.out_dir.display());
    if analysis.has_failures() {
        return Err(Failure::Analysis("some cuts could not be analyzed".into()));
    }
    Ok(())
}

fn histogram(paths: &[PathBuf]) -> Outcome {
    let mut inputs = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let report: Report = report_from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        inputs.push(histogram_input(&report));
    }
    let h = build_histogram(&inputs).map_err(analysis_err)?;
    print!("{}", csv_string(&histogram_rows(&h)).map_err(analysis_err)?);
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let cfg = RunConfig::resolve(&cli.flags).map_err(Failure::Usage)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(usage)?;
    }
    match &cli.command {
        Command::Dim { instance } => dim(instance, &cfg),
        Command::Classify { instance, cuts } => classify(instance, cuts, &cfg),
        Command::Impact { instance, cuts } => impact(instance, cuts, &cfg),
        Command::Analyze { instance, cuts } => analyze(instance, cuts, &cfg),
        Command::Histogram { reports } => histogram(reports),
        Command::Selftest { count } => {
            let r = selftest::run(*count, cfg.seed, &cfg.tolerance);
            for (name, c) in r.rows() {
                let status = if c.failed == 0 { "PASS" } else { "FAIL" };
                println!("{status} {name}: {} passed, {} failed", c.passed, c.failed);
            }
            if r.ok() {
                Ok(())
            } else {
                Err(Failure::Analysis("self-test failures".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Analysis(msg)) => {
            eprintln!("facedim: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("facedim: {msg}");
            ExitCode::from(2)
        }
    }
}
