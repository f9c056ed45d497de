//! Value-iteration variants.
//!
//! All solvers share the termination test `‖V_{n+1} - V_n‖ <= eps` and report
//! how many per-state backups (max-over-actions evaluations) they performed.
//! Skip tests are counted separately and are not backups.

use crate::bellman::backup_state;
use crate::mdp::{SparseMdp, ValueFunction};
use crate::reachability::DistanceMap;
use crate::scalar::{max_abs_diff, Scalar};

/// Termination and skip thresholds shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Residual threshold on successive iterates.
    pub eps: T,
    /// Change threshold of the parsimonious skip test.
    pub delta: T,
    pub max_iterations: usize,
    /// Keep every iterate `V_0, V_1, …` in the report.
    pub record_iterates: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            eps: T::lit(0.001),
            delta: T::lit(0.001),
            max_iterations: 100_000,
            record_iterates: false,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    /// Default configuration with the given residual threshold.
    pub fn with_eps(eps: T) -> Self {
        SolverConfig {
            eps,
            ..Default::default()
        }
    }

    pub fn delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.eps.is_nan() || self.eps <= T::zero() {
            return Err(format!("eps must be positive, got {}", self.eps));
        }
        if self.delta.is_nan() || self.delta <= T::zero() {
            return Err(format!("delta must be positive, got {}", self.delta));
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        Ok(())
    }
}

/// Result and instrumentation of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub value: ValueFunction<T>,
    pub iterations: usize,
    pub backups: u64,
    pub skip_tests: u64,
    /// `‖V_{n+1} - V_n‖` per iteration.
    pub residual_trace: Vec<T>,
    /// Terminated by the residual test rather than the iteration cap.
    pub converged: bool,
    /// `V_0 … V_n` when `record_iterates` is set, otherwise empty.
    pub iterates: Vec<ValueFunction<T>>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn final_residual(&self) -> Option<T> {
        self.residual_trace.last().copied()
    }
}

struct Tracker<'a, T> {
    cfg: &'a SolverConfig<T>,
    iterations: usize,
    backups: u64,
    skip_tests: u64,
    residual_trace: Vec<T>,
    converged: bool,
    iterates: Vec<ValueFunction<T>>,
}

impl<'a, T: Scalar> Tracker<'a, T> {
    fn start(mdp: &SparseMdp<T>, v0: &[T], cfg: &'a SolverConfig<T>) -> Self {
        assert_eq!(v0.len(), mdp.num_states(), "initial value length");
        if let Err(msg) = cfg.validate() {
            panic!("invalid solver config: {msg}");
        }
        let mut iterates = Vec::new();
        if cfg.record_iterates {
            iterates.push(ValueFunction::from_vec_unchecked(v0.to_vec()));
        }
        Tracker {
            cfg,
            iterations: 0,
            backups: 0,
            skip_tests: 0,
            residual_trace: Vec::new(),
            converged: false,
            iterates,
        }
    }

    /// Records one iteration; true when the run should stop.
    fn finish_iteration(&mut self, residual: T, v: &[T]) -> bool {
        self.iterations += 1;
        self.residual_trace.push(residual);
        if self.cfg.record_iterates {
            self.iterates
                .push(ValueFunction::from_vec_unchecked(v.to_vec()));
        }
        if residual <= self.cfg.eps {
            self.converged = true;
        }
        self.converged || self.iterations >= self.cfg.max_iterations
    }

    fn report(self, value: Vec<T>) -> SolveReport<T> {
        SolveReport {
            value: ValueFunction::from_vec_unchecked(value),
            iterations: self.iterations,
            backups: self.backups,
            skip_tests: self.skip_tests,
            residual_trace: self.residual_trace,
            converged: self.converged,
            iterates: self.iterates,
        }
    }
}

/// Standard synchronous value iteration.
pub fn solve_vi<T: Scalar>(
    mdp: &SparseMdp<T>,
    v0: ValueFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveReport<T> {
    let n = mdp.num_states();
    let mut run = Tracker::start(mdp, v0.as_slice(), cfg);
    let mut cur = v0.into_vec();
    let mut next = vec![T::zero(); n];
    loop {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = backup_state(mdp, &cur, s);
        }
        run.backups += n as u64;
        let residual = max_abs_diff(&next, &cur);
        std::mem::swap(&mut cur, &mut next);
        if run.finish_iteration(residual, &cur) {
            return run.report(cur);
        }
    }
}

/// Value iteration started from a preprocessing result (PVI, PVI1, GVI).
pub fn refine_with_vi<T: Scalar>(
    mdp: &SparseMdp<T>,
    v0: ValueFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveReport<T> {
    solve_vi(mdp, v0, cfg)
}

/// In-place backups over `order`; returns the largest change.
fn sweep_in_place<T: Scalar>(mdp: &SparseMdp<T>, v: &mut [T], order: &[usize]) -> T {
    let mut residual = T::zero();
    for &s in order {
        let updated = backup_state(mdp, v, s);
        residual = residual.max((updated - v[s]).abs());
        v[s] = updated;
    }
    residual
}

fn assert_permutation(order: &[usize], n: usize) {
    assert_eq!(order.len(), n, "ordering length");
    let mut seen = vec![false; n];
    for &s in order {
        assert!(s < n && !seen[s], "ordering is not a permutation");
        seen[s] = true;
    }
}

/// Gauss-Seidel value iteration: each sweep updates states in `ordering`,
/// reading values already updated earlier in the same sweep.
pub fn solve_gauss_seidel<T: Scalar>(
    mdp: &SparseMdp<T>,
    v0: ValueFunction<T>,
    ordering: &[usize],
    cfg: &SolverConfig<T>,
) -> SolveReport<T> {
    let n = mdp.num_states();
    assert_permutation(ordering, n);
    let mut run = Tracker::start(mdp, v0.as_slice(), cfg);
    let mut v = v0.into_vec();
    loop {
        let residual = sweep_in_place(mdp, &mut v, ordering);
        run.backups += n as u64;
        if run.finish_iteration(residual, &v) {
            return run.report(v);
        }
    }
}

/// Marks states whose value moved by more than `delta` between two iterates.
fn mark_changed<T: Scalar>(changed: &mut [bool], cur: &[T], prev: &[T], delta: T) {
    for ((c, &x), &y) in changed.iter_mut().zip(cur).zip(prev) {
        *c = (x - y).abs() > delta;
    }
}

/// Skip test: no one-step successor of `s` changed by more than `delta`.
#[inline]
fn can_skip<T: Scalar>(mdp: &SparseMdp<T>, changed: &[bool], s: usize) -> bool {
    !mdp.support(s).iter().any(|&t| changed[t])
}

/// Parsimonious value iteration from `V_0 = 0`.
///
/// From the second iteration on, a state keeps its value when none of its
/// one-step successors changed by more than `delta` over the previous
/// iteration. The result is not guaranteed to be eps-contracted; follow it
/// with [`refine_with_vi`].
pub fn solve_pvi<T: Scalar>(mdp: &SparseMdp<T>, cfg: &SolverConfig<T>) -> SolveReport<T> {
    let n = mdp.num_states();
    let mut prev = vec![T::zero(); n];
    let mut cur = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    let mut changed = vec![false; n];
    let mut run = Tracker::start(mdp, &cur, cfg);
    loop {
        let first = run.iterations == 0;
        if !first {
            mark_changed(&mut changed, &cur, &prev, cfg.delta);
        }
        for s in 0..n {
            if !first {
                run.skip_tests += 1;
                if can_skip(mdp, &changed, s) {
                    next[s] = cur[s];
                    continue;
                }
            }
            next[s] = backup_state(mdp, &cur, s);
            run.backups += 1;
        }
        let residual = max_abs_diff(&next, &cur);
        // prev <- cur <- next; the old prev buffer is overwritten next round.
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if run.finish_iteration(residual, &cur) {
            return run.report(cur);
        }
    }
}

/// Outcome of one greedy distance-layered sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySweep<T> {
    pub value: ValueFunction<T>,
    pub backups: u64,
    /// Index of the last distance layer swept; equals `dmap.max_finite()`.
    pub last_layer: usize,
    /// Largest change made by the sweep.
    pub residual: T,
}

/// Layer-by-layer sweep from the goal outward; unreachable states last.
fn greedy_sweep<T: Scalar>(mdp: &SparseMdp<T>, dmap: &DistanceMap, v: &mut [T]) -> (u64, usize, T) {
    let mut residual = T::zero();
    let mut backups = 0u64;
    let mut last_layer = 0;
    for layer in 0..=dmap.max_finite() {
        for &s in dmap.layer(layer) {
            let updated = backup_state(mdp, v, s);
            residual = residual.max((updated - v[s]).abs());
            v[s] = updated;
            backups += 1;
        }
        last_layer = layer;
    }
    for &s in dmap.unreachable() {
        let updated = backup_state(mdp, v, s);
        residual = residual.max((updated - v[s]).abs());
        v[s] = updated;
        backups += 1;
    }
    (backups, last_layer, residual)
}

/// Greedy value iteration: one pass over the distance layers `0..=N`, each
/// state backed up once after all closer states.
pub fn run_gvi<T: Scalar>(
    mdp: &SparseMdp<T>,
    dmap: &DistanceMap,
    v0: ValueFunction<T>,
) -> GreedySweep<T> {
    assert_eq!(v0.len(), mdp.num_states(), "initial value length");
    assert_eq!(
        dmap.distances().len(),
        mdp.num_states(),
        "distance map size"
    );
    let mut v = v0.into_vec();
    let (backups, last_layer, residual) = greedy_sweep(mdp, dmap, &mut v);
    GreedySweep {
        value: ValueFunction::from_vec_unchecked(v),
        backups,
        last_layer,
        residual,
    }
}

/// Double value iteration: repeated greedy sweeps until the residual test
/// passes.
pub fn solve_dvi<T: Scalar>(
    mdp: &SparseMdp<T>,
    dmap: &DistanceMap,
    v0: ValueFunction<T>,
    cfg: &SolverConfig<T>,
) -> SolveReport<T> {
    assert_eq!(
        dmap.distances().len(),
        mdp.num_states(),
        "distance map size"
    );
    let mut run = Tracker::start(mdp, v0.as_slice(), cfg);
    let mut v = v0.into_vec();
    loop {
        let (backups, _, residual) = greedy_sweep(mdp, dmap, &mut v);
        run.backups += backups;
        if run.finish_iteration(residual, &v) {
            return run.report(v);
        }
    }
}

/// Parsimonious value iteration over distance-ordered in-place sweeps,
/// from `V_0 = 0`.
///
/// The skip test compares the previous two outer iterates; non-skipped
/// states get an in-place backup. Follow with [`refine_with_vi`].
pub fn solve_pvi1<T: Scalar>(
    mdp: &SparseMdp<T>,
    dmap: &DistanceMap,
    cfg: &SolverConfig<T>,
) -> SolveReport<T> {
    let n = mdp.num_states();
    assert_eq!(dmap.distances().len(), n, "distance map size");
    let order = dmap.sweep_order();
    let mut v = vec![T::zero(); n];
    let mut prev = vec![T::zero(); n];
    let mut snapshot = vec![T::zero(); n];
    let mut changed = vec![false; n];
    let mut run = Tracker::start(mdp, &v, cfg);
    loop {
        let first = run.iterations == 0;
        snapshot.copy_from_slice(&v);
        if !first {
            mark_changed(&mut changed, &snapshot, &prev, cfg.delta);
        }
        let mut residual = T::zero();
        for &s in order {
            if !first {
                run.skip_tests += 1;
                if can_skip(mdp, &changed, s) {
                    continue;
                }
            }
            let updated = backup_state(mdp, &v, s);
            residual = residual.max((updated - v[s]).abs());
            v[s] = updated;
            run.backups += 1;
        }
        std::mem::swap(&mut prev, &mut snapshot);
        if run.finish_iteration(residual, &v) {
            return run.report(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::is_eps_contracted;
    use crate::mdp::MdpBuilder;
    use crate::problems::fixtures::*;

    fn chain_star() -> [f64; 4] {
        let mut v = [0.0; 4];
        v[CHAIN3_GOAL] = 1.0;
        v[CHAIN3_S1] = 0.9;
        v[CHAIN3_S2] = 0.81;
        v
    }

    fn zero_reward_mdp() -> SparseMdp<f64> {
        let mut b = MdpBuilder::new(3, 2, 0.9);
        for s in 0..3 {
            b.transition(s, 0, (s + 1) % 3, 1.0).unwrap();
            b.transition(s, 1, s, 1.0).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn vi_on_chain() {
        let p = chain3(0.9_f64);
        let r = solve_vi(
            p.mdp(),
            ValueFunction::zeros(4),
            &SolverConfig::with_eps(1e-10),
        );
        assert!(r.converged);
        assert!(max_abs_diff(r.value.as_slice(), &chain_star()) < 1e-9);
        assert!(r.iterations <= 219, "{}", r.iterations);
        assert_eq!(r.residual_trace.len(), r.iterations);
        assert_eq!(r.backups, 4 * r.iterations as u64);
    }

    #[test]
    fn vi_on_split() {
        let p = split(0.9_f64);
        let r = solve_vi(
            p.mdp(),
            ValueFunction::zeros(3),
            &SolverConfig::with_eps(1e-10),
        );
        assert!((r.value[SPLIT_S0] - 0.63 / 0.73).abs() < 1e-8);
    }

    #[test]
    fn vi_from_fixed_point_takes_one_iteration() {
        let p = chain3(0.9_f64);
        let v = ValueFunction::from_vec(chain_star().to_vec()).unwrap();
        let r = solve_vi(p.mdp(), v, &SolverConfig::default());
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let p = split(0.9_f64);
        let cfg = SolverConfig::with_eps(1e-12).max_iterations(3);
        let r = solve_vi(p.mdp(), ValueFunction::zeros(3), &cfg);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn gauss_seidel_on_chain_beats_vi() {
        let p = chain3(0.9_f64);
        let cfg = SolverConfig::with_eps(1e-10);
        let order = [CHAIN3_GOAL, CHAIN3_S1, CHAIN3_S2, CHAIN3_DONE];
        let gs = solve_gauss_seidel(p.mdp(), ValueFunction::zeros(4), &order, &cfg);
        let vi = solve_vi(p.mdp(), ValueFunction::zeros(4), &cfg);
        assert!(gs.converged);
        assert!(max_abs_diff(gs.value.as_slice(), &chain_star()) < 1e-9);
        assert!(gs.iterations <= vi.iterations);
        assert_eq!(gs.iterations, 2);
    }

    #[test]
    #[should_panic(expected = "permutation")]
    fn gauss_seidel_rejects_non_permutation() {
        let p = chain3(0.9_f64);
        solve_gauss_seidel(
            p.mdp(),
            ValueFunction::zeros(4),
            &[0, 0, 1, 2],
            &SolverConfig::default(),
        );
    }

    #[test]
    fn pvi_on_chain_skips() {
        let p = chain3(0.9_f64);
        let r = solve_pvi(p.mdp(), &SolverConfig::default());
        assert!(r.converged);
        assert!(max_abs_diff(r.value.as_slice(), &chain_star()) < 0.01);
        assert!(r.backups < 4 * r.iterations as u64);
        // Hand trace: 4 + 2 + 1 + 0 backups over 4 iterations.
        assert_eq!(r.iterations, 4);
        assert_eq!(r.backups, 7);
        assert_eq!(r.skip_tests, 12);
    }

    #[test]
    fn zero_reward_stops_after_one_iteration() {
        let mdp = zero_reward_mdp();
        let d = DistanceMap::compute(&mdp, 0);
        for r in [
            solve_pvi(&mdp, &SolverConfig::default()),
            solve_pvi1(&mdp, &d, &SolverConfig::default()),
        ] {
            assert_eq!(r.iterations, 1);
            assert!(r.value.as_slice().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gvi_chain_is_exact_split_is_not() {
        let p = chain3(0.9_f64);
        let d = DistanceMap::compute(p.mdp(), p.goal());
        let g = run_gvi(p.mdp(), &d, ValueFunction::zeros(4));
        assert_eq!(g.value.as_slice(), &chain_star());
        assert_eq!(g.backups, 4);
        assert_eq!(g.last_layer, 2);

        let p = split(0.9_f64);
        let d = DistanceMap::compute(p.mdp(), p.goal());
        let g = run_gvi(p.mdp(), &d, ValueFunction::zeros(3));
        assert!((g.value[SPLIT_S0] - 0.63).abs() < 1e-15);
    }

    #[test]
    fn dvi_on_fixtures() {
        let p = split(0.9_f64);
        let d = DistanceMap::compute(p.mdp(), p.goal());
        let r = solve_dvi(
            p.mdp(),
            &d,
            ValueFunction::zeros(3),
            &SolverConfig::with_eps(1e-10),
        );
        assert!((r.value[SPLIT_S0] - 0.63 / 0.73).abs() < 1e-8);
        assert!(is_eps_contracted(p.mdp(), &r.value, 1e-10));

        let p = chain3(0.9_f64);
        let d = DistanceMap::compute(p.mdp(), p.goal());
        let r = solve_dvi(
            p.mdp(),
            &d,
            ValueFunction::zeros(4),
            &SolverConfig::default(),
        );
        assert!(r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn pvi1_on_chain() {
        let p = chain3(0.9_f64);
        let d = DistanceMap::compute(p.mdp(), p.goal());
        let r = solve_pvi1(p.mdp(), &d, &SolverConfig::default().recording());
        assert_eq!(r.iterates[1].as_slice(), &chain_star());
        assert_eq!(r.iterations, 2);
        assert!(r.converged);
    }

    #[test]
    fn refine_from_zero_equals_vi() {
        let p = chain3(0.9_f64);
        let cfg = SolverConfig::default();
        assert_eq!(
            refine_with_vi(p.mdp(), ValueFunction::zeros(4), &cfg),
            solve_vi(p.mdp(), ValueFunction::zeros(4), &cfg)
        );
    }

    #[test]
    fn recording_keeps_every_iterate() {
        let p = split(0.9_f64);
        let r = solve_vi(
            p.mdp(),
            ValueFunction::zeros(3),
            &SolverConfig::default().recording(),
        );
        assert_eq!(r.iterates.len(), r.iterations + 1);
        assert_eq!(r.iterates.last(), Some(&r.value));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::<f64>::default().validate().is_ok());
        assert!(SolverConfig::with_eps(0.0).validate().is_err());
        assert!(SolverConfig::<f64>::default()
            .delta(-1.0)
            .validate()
            .is_err());
        assert!(SolverConfig::<f64>::default()
            .max_iterations(0)
            .validate()
            .is_err());
    }

    #[test]
    fn f32_solves_chain() {
        let p = chain3(0.9f32);
        let r = solve_vi(
            p.mdp(),
            ValueFunction::zeros(4),
            &SolverConfig::with_eps(1e-6f32),
        );
        assert!(r.converged);
        assert!((r.value[CHAIN3_S2] - 0.81).abs() < 1e-5);
    }
}
