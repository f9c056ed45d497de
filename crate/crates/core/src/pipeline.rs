//! Solver pipelines as run by the benchmark: preprocessing solvers (PVI,
//! PVI1, GVI) are always followed by value-iteration refinement.

use std::fmt;
use std::str::FromStr;

use crate::bellman::bellman_residual;
use crate::mdp::ValueFunction;
use crate::problems::GoalDirectedMdp;
use crate::reachability::DistanceMap;
use crate::scalar::Scalar;
use crate::solvers::{
    refine_with_vi, run_gvi, solve_dvi, solve_gauss_seidel, solve_pvi, solve_pvi1, solve_vi,
    SolveReport, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pipeline {
    /// Synchronous value iteration.
    Vi,
    /// Gauss-Seidel sweeps in state-index order.
    GaussSeidel,
    /// Parsimonious VI, then VI.
    Pvi,
    /// One greedy sweep, then VI.
    Gvi,
    /// Gauss-Seidel sweeps in goal-distance order.
    Dvi,
    /// Distance-ordered parsimonious VI, then VI.
    Pvi1,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::Vi,
        Pipeline::GaussSeidel,
        Pipeline::Pvi,
        Pipeline::Gvi,
        Pipeline::Dvi,
        Pipeline::Pvi1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Vi => "vi",
            Pipeline::GaussSeidel => "gs",
            Pipeline::Pvi => "pvi",
            Pipeline::Gvi => "gvi",
            Pipeline::Dvi => "dvi",
            Pipeline::Pvi1 => "pvi1",
        }
    }

    pub fn needs_distances(self) -> bool {
        matches!(self, Pipeline::Gvi | Pipeline::Dvi | Pipeline::Pvi1)
    }

    pub fn has_refinement(self) -> bool {
        matches!(self, Pipeline::Pvi | Pipeline::Gvi | Pipeline::Pvi1)
    }

    /// Runs the pipeline from `V_0 = 0`, computing the distance map if needed.
    pub fn run<T: Scalar>(
        self,
        problem: &GoalDirectedMdp<T>,
        cfg: &SolverConfig<T>,
    ) -> PipelineReport<T> {
        let dmap = self
            .needs_distances()
            .then(|| DistanceMap::compute(problem.mdp(), problem.goal()));
        self.run_with(problem, dmap.as_ref(), cfg)
    }

    /// Runs the pipeline with a precomputed distance map.
    pub fn run_with<T: Scalar>(
        self,
        problem: &GoalDirectedMdp<T>,
        dmap: Option<&DistanceMap>,
        cfg: &SolverConfig<T>,
    ) -> PipelineReport<T> {
        let mdp = problem.mdp();
        let n = mdp.num_states();
        let dmap = || dmap.expect("pipeline needs a distance map");
        let zeros = || ValueFunction::zeros(n);
        let (pre, main) = match self {
            Pipeline::Vi => (None, solve_vi(mdp, zeros(), cfg)),
            Pipeline::GaussSeidel => {
                let order: Vec<usize> = (0..n).collect();
                (None, solve_gauss_seidel(mdp, zeros(), &order, cfg))
            }
            Pipeline::Dvi => (None, solve_dvi(mdp, dmap(), zeros(), cfg)),
            Pipeline::Pvi => {
                let pre = solve_pvi(mdp, cfg);
                let main = refine_with_vi(mdp, pre.value.clone(), cfg);
                (Some(pre), main)
            }
            Pipeline::Pvi1 => {
                let pre = solve_pvi1(mdp, dmap(), cfg);
                let main = refine_with_vi(mdp, pre.value.clone(), cfg);
                (Some(pre), main)
            }
            Pipeline::Gvi => {
                let sweep = run_gvi(mdp, dmap(), zeros());
                let pre = SolveReport {
                    value: sweep.value,
                    iterations: 1,
                    backups: sweep.backups,
                    skip_tests: 0,
                    residual_trace: vec![sweep.residual],
                    converged: sweep.residual <= cfg.eps,
                    iterates: Vec::new(),
                };
                let main = refine_with_vi(mdp, pre.value.clone(), cfg);
                (Some(pre), main)
            }
        };
        let bellman_residual = bellman_residual(mdp, &main.value);
        PipelineReport {
            pipeline: self,
            pre,
            main,
            bellman_residual,
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown solver {s:?} (expected one of vi, gs, pvi, gvi, dvi, pvi1)")
            })
    }
}

/// Combined report of a pipeline: the preprocessing stage, if any, and the
/// final solver stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport<T> {
    pub pipeline: Pipeline,
    pub pre: Option<SolveReport<T>>,
    pub main: SolveReport<T>,
    /// `‖V - TV‖` of the final value.
    pub bellman_residual: T,
}

impl<T: Scalar> PipelineReport<T> {
    pub fn value(&self) -> &ValueFunction<T> {
        &self.main.value
    }

    pub fn iterations(&self) -> usize {
        self.pre.as_ref().map_or(0, |r| r.iterations) + self.main.iterations
    }

    pub fn backups(&self) -> u64 {
        self.pre.as_ref().map_or(0, |r| r.backups) + self.main.backups
    }

    pub fn skip_tests(&self) -> u64 {
        self.pre.as_ref().map_or(0, |r| r.skip_tests) + self.main.skip_tests
    }

    /// Both stages stopped on the residual test. A GVI sweep counts as
    /// converged regardless, since it is a fixed single pass.
    pub fn converged(&self) -> bool {
        let pre_ok = match (&self.pre, self.pipeline) {
            (_, Pipeline::Gvi) | (None, _) => true,
            (Some(r), _) => r.converged,
        };
        pre_ok && self.main.converged
    }

    /// Residuals of both stages, preprocessing first.
    pub fn residual_trace(&self) -> impl Iterator<Item = T> + '_ {
        self.pre
            .iter()
            .flat_map(|r| r.residual_trace.iter().copied())
            .chain(self.main.residual_trace.iter().copied())
    }
}
