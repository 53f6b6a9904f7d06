//! Run settings. Precedence: command-line flag, then `FACEDIM_*` environment
//! variable (both handled by clap), then the TOML config file, then the
//! built-in default.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use facedim::analysis::{default_tolerance, ImpactOptions};
use facedim::linalg::{int, parse_rational, Rational};
use facedim::{AnalysisConfig, HullConfig};
use serde::Deserialize;

/// Flags shared by every subcommand. Every field can also be set in the
/// config file under the same name.
#[derive(Args, Clone, Debug, Default)]
pub struct RunFlags {
    /// TOML file with defaults for any of the settings below.
    #[arg(long, global = true, env = "FACEDIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Classification tolerance (decimal or p/q) [default: 1/10000].
    #[arg(long, global = true, env = "FACEDIM_TOLERANCE")]
    pub tolerance: Option<String>,
    /// Seconds allowed per affine hull computation [default: 600].
    #[arg(long, global = true, env = "FACEDIM_HULL_TIME_BUDGET")]
    pub hull_time_budget: Option<f64>,
    /// Seconds allowed per MIP solve [default: 60].
    #[arg(long, global = true, env = "FACEDIM_SOLVE_TIME_LIMIT")]
    pub solve_time_limit: Option<f64>,
    /// Node limit per MIP solve [default: none].
    #[arg(long, global = true, env = "FACEDIM_NODE_LIMIT")]
    pub node_limit: Option<u64>,
    /// Worker threads for per-cut work [default: all cores].
    #[arg(long, global = true, env = "FACEDIM_THREADS")]
    pub threads: Option<usize>,
    /// Seed for `selftest` [default: 0].
    #[arg(long, global = true, env = "FACEDIM_SEED")]
    pub seed: Option<u64>,
    /// Do not reuse oracle answers between queries.
    #[arg(long, global = true, env = "FACEDIM_NO_CACHE")]
    pub no_cache: bool,
    /// Directory for report files [default: current directory].
    #[arg(long, global = true, env = "FACEDIM_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tolerance: Option<String>,
    pub hull_time_budget: Option<f64>,
    pub solve_time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub no_cache: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tolerance: Rational,
    pub hull_time_budget: Duration,
    pub solve_time_limit: Duration,
    pub node_limit: Option<u64>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub use_cache: bool,
    pub out_dir: PathBuf,
}

fn seconds(name: &str, value: f64) -> Result<Duration, String> {
    if value.is_finite() && value > 0.0 {
        Ok(Duration::from_secs_f64(value))
    } else {
        Err(format!("{name} must be a positive number of seconds, got {value}"))
    }
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl RunConfig {
    pub fn resolve(flags: &RunFlags) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => read_config_file(path)?,
            None => ConfigFile::default(),
        };
        let tolerance = match flags.tolerance.as_ref().or(file.tolerance.as_ref()) {
            Some(text) => parse_rational(text).map_err(|e| format!("tolerance: {e}"))?,
            None => default_tolerance(),
        };
        if tolerance <= int(0) {
            return Err("tolerance must be positive".into());
        }
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err("threads must be positive".into());
        }
        let node_limit = flags.node_limit.or(file.node_limit);
        if node_limit == Some(0) {
            return Err("node limit must be positive".into());
        }
        Ok(Self {
            tolerance,
            hull_time_budget: seconds(
                "hull time budget",
                flags.hull_time_budget.or(file.hull_time_budget).unwrap_or(600.0),
            )?,
            solve_time_limit: seconds(
                "solve time limit",
                flags.solve_time_limit.or(file.solve_time_limit).unwrap_or(60.0),
            )?,
            node_limit,
            threads,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            use_cache: !(flags.no_cache || file.no_cache.unwrap_or(false)),
            out_dir: flags
                .out_dir
                .clone()
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn hull(&self) -> HullConfig {
        HullConfig {
            use_cache: self.use_cache,
            max_queries: None,
            time_budget: Some(self.hull_time_budget),
        }
    }

    pub fn impact(&self) -> ImpactOptions {
        ImpactOptions {
            node_limit: self.node_limit,
            time_limit: Some(self.solve_time_limit),
            optimum_time_limit: None,
        }
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            tolerance: self.tolerance.clone(),
            hull: self.hull(),
            solve_node_limit: self.node_limit,
            solve_time_limit: Some(self.solve_time_limit),
            impact: Some(self.impact()),
        }
    }
}
