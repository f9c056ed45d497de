//! Benchmark harness: runs solver pipelines over problem suites and writes
//! per-run statistics and residual traces as flat files.
//!
//! Output layout under the output directory:
//!
//! ```text
//! summary.csv                      (suite) one row per (problem, solver)
//! scaling.csv                      (scale) one row per (copies, solver)
//! traces/<problem>__<solver>.txt   one residual per line
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use goalvi::problems::{fixtures, glue_copies, parse_mdp_file, GridSpec, Layout, Noise};
use goalvi::{is_eps_contracted, GoalDirectedMdp, Pipeline, PipelineReport, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_DISCOUNT: f64 = 0.99;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Problem(String),
}

impl BenchError {
    pub fn is_usage(&self) -> bool {
        matches!(self, BenchError::Usage(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where a problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Chain3,
    Split,
    Grid {
        layout: Layout,
        noise: Noise,
        copies: usize,
    },
    File(PathBuf),
}

impl ProblemSource {
    pub fn grid(layout: Layout, noise: Noise) -> Self {
        ProblemSource::Grid {
            layout,
            noise,
            copies: 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ProblemSource::Chain3 => "chain3".into(),
            ProblemSource::Split => "split".into(),
            ProblemSource::Grid {
                layout,
                noise,
                copies: 1,
            } => format!("{layout}-{noise}"),
            ProblemSource::Grid {
                layout,
                noise,
                copies,
            } => format!("{layout}-{noise}-x{copies}"),
            ProblemSource::File(p) => p.file_stem().map_or_else(
                || p.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        }
    }

    /// Builds or reads the problem. Files carry their own discount.
    pub fn load(&self, discount: f64) -> Result<GoalDirectedMdp<f64>, BenchError> {
        let problem_err =
            |e: &dyn std::fmt::Display| BenchError::Problem(format!("{}: {e}", self.name()));
        match self {
            ProblemSource::Chain3 => Ok(fixtures::chain3(discount)),
            ProblemSource::Split => Ok(fixtures::split(discount)),
            ProblemSource::Grid {
                layout,
                noise,
                copies,
            } => glue_copies(&layout.spec(*noise), *copies, discount)
                .map(|g| g.into_problem())
                .map_err(|e| problem_err(&e)),
            ProblemSource::File(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                parse_mdp_file(&text)
                    .map_err(|e| BenchError::Problem(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// Settings shared by every run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub cfg: SolverConfig<f64>,
    /// Discount for generated problems.
    pub discount: f64,
    pub solvers: Vec<Pipeline>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            cfg: SolverConfig::default(),
            discount: DEFAULT_DISCOUNT,
            solvers: Pipeline::ALL.to_vec(),
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<(), BenchError> {
        self.cfg.validate().map_err(BenchError::Usage)?;
        if !(0.0..1.0).contains(&self.discount) {
            return Err(BenchError::Usage(format!(
                "discount must lie in [0, 1), got {}",
                self.discount
            )));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::Usage("no solver selected".into()));
        }
        Ok(())
    }
}

/// One row of `summary.csv`. Numeric fields are empty when the problem
/// could not be loaded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRun {
    pub problem: String,
    pub solver: String,
    pub num_states: Option<usize>,
    pub eps: f64,
    pub delta: f64,
    pub discount: Option<f64>,
    pub iterations: Option<usize>,
    pub backups: Option<u64>,
    pub skip_tests: Option<u64>,
    /// Solver converged and the final value is eps-contracted.
    pub converged: bool,
    /// `‖V - TV‖` of the final value.
    pub final_residual: Option<f64>,
    pub wall_time_ms: Option<f64>,
    #[serde(skip)]
    pub trace: Vec<f64>,
    #[serde(skip)]
    pub error: Option<String>,
}

impl BenchRun {
    fn from_report(
        problem: &str,
        mdp: &GoalDirectedMdp<f64>,
        report: &PipelineReport<f64>,
        cfg: &SolverConfig<f64>,
        wall_ms: f64,
    ) -> Self {
        let contracted = is_eps_contracted(mdp.mdp(), report.value(), cfg.eps);
        BenchRun {
            problem: problem.to_string(),
            solver: report.pipeline.name().to_string(),
            num_states: Some(mdp.num_states()),
            eps: cfg.eps,
            delta: cfg.delta,
            discount: Some(mdp.mdp().discount()),
            iterations: Some(report.iterations()),
            backups: Some(report.backups()),
            skip_tests: Some(report.skip_tests()),
            converged: report.converged() && contracted,
            final_residual: Some(report.bellman_residual),
            wall_time_ms: Some(wall_ms),
            trace: report.residual_trace().collect(),
            error: None,
        }
    }

    fn failed(problem: &str, solver: Pipeline, cfg: &SolverConfig<f64>, error: String) -> Self {
        BenchRun {
            problem: problem.to_string(),
            solver: solver.name().to_string(),
            num_states: None,
            eps: cfg.eps,
            delta: cfg.delta,
            discount: None,
            iterations: None,
            backups: None,
            skip_tests: None,
            converged: false,
            final_residual: None,
            wall_time_ms: None,
            trace: Vec::new(),
            error: Some(error),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none() && self.converged
    }
}

/// One row of `scaling.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub copies: usize,
    pub num_states: Option<usize>,
    pub solver: String,
    pub iterations: Option<usize>,
    pub backups: Option<u64>,
    pub skip_tests: Option<u64>,
    pub converged: bool,
    pub final_residual: Option<f64>,
    /// VI backups at the same size divided by this solver's backups; empty
    /// when VI is not part of the run.
    pub vi_backup_ratio: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub runs: Vec<BenchRun>,
}

impl SuiteOutcome {
    pub fn all_ok(&self) -> bool {
        self.runs.iter().all(BenchRun::ok)
    }
}

/// Runs every selected solver on every problem. Rows come back in input
/// order (problems outer, solvers inner) whatever order the jobs finish in.
pub fn run_jobs(sources: &[(String, ProblemSource)], settings: &RunSettings) -> Vec<BenchRun> {
    let problems: Vec<_> = sources
        .par_iter()
        .map(|(_, src)| src.load(settings.discount))
        .collect();
    let jobs: Vec<(usize, Pipeline)> = (0..sources.len())
        .flat_map(|i| settings.solvers.iter().map(move |&s| (i, s)))
        .collect();
    jobs.par_iter()
        .map(|&(i, solver)| {
            let name = &sources[i].0;
            match &problems[i] {
                Ok(p) => {
                    let start = Instant::now();
                    let report = solver.run(p, &settings.cfg);
                    let ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
                    BenchRun::from_report(name, p, &report, &settings.cfg, ms)
                }
                Err(e) => BenchRun::failed(name, solver, &settings.cfg, e.to_string()),
            }
        })
        .collect()
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn trace_file_name(problem: &str, solver: &str) -> String {
    format!("{}__{}.txt", sanitize(problem), sanitize(solver))
}

fn write_traces(dir: &Path, runs: &[BenchRun]) -> Result<(), BenchError> {
    let traces = dir.join("traces");
    fs::create_dir_all(&traces).map_err(io_err(&traces))?;
    for run in runs.iter().filter(|r| r.error.is_none()) {
        let mut text = String::new();
        for r in &run.trace {
            let _ = writeln!(text, "{r:e}");
        }
        let path = traces.join(trace_file_name(&run.problem, &run.solver));
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(())
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))
}

/// Gives each source a unique name, suffixing repeats with `-2`, `-3`, ...
fn named(sources: &[ProblemSource]) -> Vec<(String, ProblemSource)> {
    let mut seen = std::collections::HashMap::<String, usize>::new();
    sources
        .iter()
        .map(|s| {
            let base = s.name();
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            let name = if *n == 1 { base } else { format!("{base}-{n}") };
            (name, s.clone())
        })
        .collect()
}

/// Runs the suite and writes `summary.csv` and the traces under `out_dir`.
/// Nothing is written when the inputs are invalid.
pub fn run_suite(
    sources: &[ProblemSource],
    settings: &RunSettings,
    out_dir: &Path,
) -> Result<SuiteOutcome, BenchError> {
    settings.validate()?;
    if sources.is_empty() {
        return Err(BenchError::Usage("no problem selected".into()));
    }
    let runs = run_jobs(&named(sources), settings);
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_csv(&out_dir.join("summary.csv"), &runs)?;
    write_traces(out_dir, &runs)?;
    Ok(SuiteOutcome { runs })
}

/// Runs the solvers over `k` glued copies of a layout for each `k` in
/// `copies` and writes `scaling.csv` plus traces under `out_dir`.
pub fn emit_scaling_table(
    layout: Layout,
    noise: Noise,
    copies: &[usize],
    settings: &RunSettings,
    out_dir: &Path,
) -> Result<Vec<ScalingRow>, BenchError> {
    settings.validate()?;
    if copies.is_empty() {
        return Err(BenchError::Usage("no copy counts given".into()));
    }
    if copies[0] == 0 || copies.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Usage(
            "copy counts must be positive and strictly ascending".into(),
        ));
    }
    let spec: GridSpec<f64> = layout.spec(noise);
    if copies.iter().any(|&k| k > 1) {
        // fail early rather than with one error row per run
        glue_copies(&spec, 2, settings.discount).map_err(|e| BenchError::Usage(e.to_string()))?;
    }
    let sources: Vec<(String, ProblemSource)> = copies
        .iter()
        .map(|&k| {
            let src = ProblemSource::Grid {
                layout,
                noise,
                copies: k,
            };
            (src.name(), src)
        })
        .collect();
    let runs = run_jobs(&sources, settings);
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let rows = scaling_rows(copies, &runs);
    write_csv(&out_dir.join("scaling.csv"), &rows)?;
    write_traces(out_dir, &runs)?;
    Ok(rows)
}

fn scaling_rows(copies: &[usize], runs: &[BenchRun]) -> Vec<ScalingRow> {
    let per_k = runs.len() / copies.len();
    runs.chunks(per_k)
        .zip(copies)
        .flat_map(|(chunk, &k)| {
            let vi = chunk
                .iter()
                .find(|r| r.solver == Pipeline::Vi.name())
                .and_then(|r| r.backups);
            chunk.iter().map(move |r| ScalingRow {
                copies: k,
                num_states: r.num_states,
                solver: r.solver.clone(),
                iterations: r.iterations,
                backups: r.backups,
                skip_tests: r.skip_tests,
                converged: r.ok(),
                final_residual: r.final_residual,
                vi_backup_ratio: match (vi, r.backups) {
                    (Some(v), Some(b)) if b > 0 => Some(v as f64 / b as f64),
                    _ => None,
                },
                wall_time_ms: r.wall_time_ms,
            })
        })
        .collect()
}

/// Builds the problem list for `suite` from layout names (`a`..`d`,
/// `chain3`, `split`), noise profiles and files.
pub fn suite_sources(
    layouts: &[String],
    noises: &[Noise],
    files: &[PathBuf],
) -> Result<Vec<ProblemSource>, BenchError> {
    let mut out = Vec::new();
    for l in layouts {
        match l.to_ascii_lowercase().as_str() {
            "chain3" => out.push(ProblemSource::Chain3),
            "split" => out.push(ProblemSource::Split),
            other => {
                let layout: Layout = other.parse().map_err(BenchError::Usage)?;
                out.extend(noises.iter().map(|&n| ProblemSource::grid(layout, n)));
            }
        }
    }
    out.extend(files.iter().cloned().map(ProblemSource::File));
    Ok(out)
}
