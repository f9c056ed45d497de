use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use goalvi::problems::{glue_copies, write_mdp_file, Layout, Noise};
use goalvi::{Pipeline, SolverConfig};
use goalvi_bench::{
    emit_scaling_table, run_jobs, run_suite, suite_sources, BenchError, BenchRun, ProblemSource,
    RunSettings, DEFAULT_DISCOUNT,
};

#[derive(Parser)]
#[command(
    name = "goalvi",
    version,
    about = "Value-iteration solvers for goal-directed MDPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with one solver and print the statistics.
    Solve {
        #[command(flatten)]
        problem: OneProblem,
        #[command(flatten)]
        run: RunArgs,
        /// Also write summary.csv and the trace here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every selected solver on every selected problem.
    Suite {
        /// Layouts (a, b, c, d, chain3, split). Defaults to all of them
        /// unless --problem is given.
        #[arg(long, value_delimiter = ',')]
        layout: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "standard,noisy")]
        noise: Vec<Noise>,
        /// Problem file; may be repeated.
        #[arg(long)]
        problem: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the solvers over glued copies of one layout.
    Scale {
        #[arg(long, default_value = "a")]
        layout: Layout,
        #[arg(long, default_value = "standard")]
        noise: Noise,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        copies: Vec<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Write a generated grid problem in the text format.
    Export {
        #[arg(long)]
        layout: Layout,
        #[arg(long, default_value = "standard")]
        noise: Noise,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long, default_value_t = DEFAULT_DISCOUNT)]
        discount: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct OneProblem {
    /// Layout (a, b, c, d, chain3, split).
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    layout: Option<String>,
    #[arg(long, default_value = "standard")]
    noise: Noise,
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Bellman residual threshold.
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    /// Skip threshold for the parsimonious solvers.
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    /// Discount for generated problems; files carry their own.
    #[arg(long, default_value_t = DEFAULT_DISCOUNT)]
    discount: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    /// Comma-separated solvers (vi, gs, pvi, gvi, dvi, pvi1) or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    solver: Vec<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<RunSettings, BenchError> {
        let mut solvers = Vec::new();
        for s in self
            .solver
            .iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
        {
            if s.eq_ignore_ascii_case("all") {
                solvers.extend(Pipeline::ALL);
            } else {
                solvers.push(s.parse::<Pipeline>().map_err(BenchError::Usage)?);
            }
        }
        solvers.sort();
        solvers.dedup();
        let settings = RunSettings {
            cfg: SolverConfig {
                eps: self.eps,
                delta: self.delta,
                max_iterations: self.max_iterations,
                record_iterates: false,
            },
            discount: self.discount,
            solvers,
        };
        settings.validate()?;
        Ok(settings)
    }
}

fn print_run(r: &BenchRun) {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    println!("problem         {}", r.problem);
    println!("solver          {}", r.solver);
    println!(
        "num_states      {}",
        opt(r.num_states.map(|v| v.to_string()))
    );
    println!(
        "iterations      {}",
        opt(r.iterations.map(|v| v.to_string()))
    );
    println!("backups         {}", opt(r.backups.map(|v| v.to_string())));
    println!(
        "skip_tests      {}",
        opt(r.skip_tests.map(|v| v.to_string()))
    );
    println!("converged       {}", r.converged);
    println!(
        "final_residual  {}",
        opt(r.final_residual.map(|v| format!("{v:e}")))
    );
    println!(
        "wall_time_ms    {}",
        opt(r.wall_time_ms.map(|v| format!("{v:.3}")))
    );
}

fn report_failures(runs: &[BenchRun]) {
    for r in runs {
        match &r.error {
            Some(e) => eprintln!("error: {} / {}: {e}", r.problem, r.solver),
            None if !r.converged => {
                eprintln!("error: {} / {}: did not converge", r.problem, r.solver)
            }
            None => {}
        }
    }
}

/// Returns whether every run succeeded.
fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Solve { problem, run, out } => {
            let settings = run.settings()?;
            if settings.solvers.len() != 1 {
                return Err(BenchError::Usage("solve takes exactly one --solver".into()));
            }
            let source = match (problem.layout, problem.problem) {
                (_, Some(file)) => ProblemSource::File(file),
                (Some(l), None) => suite_sources(&[l], &[problem.noise], &[])?.remove(0),
                (None, None) => unreachable!("clap requires one of --layout, --problem"),
            };
            let runs = match out {
                Some(dir) => run_suite(std::slice::from_ref(&source), &settings, &dir)?.runs,
                None => run_jobs(&[(source.name(), source)], &settings),
            };
            print_run(&runs[0]);
            report_failures(&runs);
            Ok(runs[0].ok())
        }
        Command::Suite {
            layout,
            noise,
            problem,
            run,
            out,
        } => {
            let settings = run.settings()?;
            let layouts = if layout.is_empty() && problem.is_empty() {
                ["chain3", "split", "a", "b", "c", "d"]
                    .map(String::from)
                    .to_vec()
            } else {
                layout
            };
            let sources = suite_sources(&layouts, &noise, &problem)?;
            let outcome = run_suite(&sources, &settings, &out)?;
            report_failures(&outcome.runs);
            let ok = outcome.runs.iter().filter(|r| r.ok()).count();
            println!(
                "{ok}/{} runs ok; wrote {}",
                outcome.runs.len(),
                out.join("summary.csv").display()
            );
            Ok(outcome.all_ok())
        }
        Command::Scale {
            layout,
            noise,
            copies,
            run,
            out,
        } => {
            let settings = run.settings()?;
            let rows = emit_scaling_table(layout, noise, &copies, &settings, &out)?;
            for r in &rows {
                println!(
                    "k={:<3} {:<5} states={:<6} backups={:<10} ratio={}",
                    r.copies,
                    r.solver,
                    r.num_states.unwrap_or(0),
                    r.backups.unwrap_or(0),
                    r.vi_backup_ratio.map_or("-".into(), |v| format!("{v:.2}"))
                );
            }
            println!("wrote {}", out.join("scaling.csv").display());
            Ok(rows.iter().all(|r| r.converged))
        }
        Command::Export {
            layout,
            noise,
            copies,
            discount,
            out,
        } => {
            if !(0.0..1.0).contains(&discount) {
                return Err(BenchError::Usage(format!(
                    "discount must lie in [0, 1), got {discount}"
                )));
            }
            let grid = glue_copies(&layout.spec(noise), copies, discount)
                .map_err(|e| BenchError::Usage(e.to_string()))?;
            std::fs::write(&out, write_mdp_file(grid.problem())).map_err(|source| {
                BenchError::Io {
                    path: out.clone(),
                    source,
                }
            })?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
