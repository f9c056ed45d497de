//! Ideal-reachability graph and goal distances.
//!
//! A state `t` is an ideal successor of `s` when some action at `s` reaches
//! `t` with the highest probability among that action's successors. Ties
//! are all included. The distance of a state is the hop count to the goal
//! over ideal edges.

use std::collections::VecDeque;

use crate::mdp::SparseMdp;
use crate::scalar::Scalar;

/// Sorted set of ideal successors of `s`, across all actions.
pub fn ideal_successors<T: Scalar>(mdp: &SparseMdp<T>, s: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0..mdp.num_actions() {
        let (succ, prob) = mdp.transitions(s, a);
        let top = prob.iter().copied().fold(T::neg_infinity(), T::max);
        out.extend(
            succ.iter()
                .zip(prob)
                .filter(|&(_, &p)| p == top)
                .map(|(&t, _)| t),
        );
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Sorted union of supports over all actions at `s`.
pub fn one_step_successors<T: Scalar>(mdp: &SparseMdp<T>, s: usize) -> &[usize] {
    mdp.support(s)
}

/// Goal distance per state plus the distance-ordered sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    goal: usize,
    dist: Vec<Option<usize>>,
    /// States by (distance, index); unreachable states at the end.
    sweep_order: Vec<usize>,
    /// `sweep_order[layer_starts[k]..layer_starts[k + 1]]` is layer `k`; the
    /// final entry marks the start of the unreachable tail.
    layer_starts: Vec<usize>,
}

impl DistanceMap {
    /// Breadth-first search from `goal` over reversed ideal edges.
    pub fn compute<T: Scalar>(mdp: &SparseMdp<T>, goal: usize) -> Self {
        let n = mdp.num_states();
        assert!(goal < n, "goal {goal} out of range");

        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in 0..n {
            for t in ideal_successors(mdp, s) {
                reverse[t].push(s);
            }
        }

        let mut dist = vec![None; n];
        dist[goal] = Some(0);
        let mut queue = VecDeque::from([goal]);
        while let Some(t) = queue.pop_front() {
            let next = dist[t].map(|d| d + 1);
            for &s in &reverse[t] {
                if dist[s].is_none() {
                    dist[s] = next;
                    queue.push_back(s);
                }
            }
        }

        let mut sweep_order: Vec<usize> = (0..n).collect();
        sweep_order.sort_by_key(|&s| (dist[s].unwrap_or(usize::MAX), s));

        let max_finite = dist.iter().flatten().copied().max().unwrap_or(0);
        let mut layer_starts = Vec::with_capacity(max_finite + 2);
        let mut pos = 0;
        for k in 0..=max_finite + 1 {
            while pos < n && dist[sweep_order[pos]].is_some_and(|d| d < k) {
                pos += 1;
            }
            layer_starts.push(pos);
        }

        DistanceMap {
            goal,
            dist,
            sweep_order,
            layer_starts,
        }
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    /// `d(s)`, or `None` when the goal is not ideally reachable from `s`.
    pub fn distance(&self, s: usize) -> Option<usize> {
        self.dist[s]
    }

    pub fn distances(&self) -> &[Option<usize>] {
        &self.dist
    }

    /// Largest finite distance, `N`.
    pub fn max_finite(&self) -> usize {
        self.layer_starts.len() - 2
    }

    pub fn sweep_order(&self) -> &[usize] {
        &self.sweep_order
    }

    /// States at distance exactly `k`, ascending. Empty for `k > N`.
    pub fn layer(&self, k: usize) -> &[usize] {
        if k > self.max_finite() {
            return &[];
        }
        &self.sweep_order[self.layer_starts[k]..self.layer_starts[k + 1]]
    }

    /// States that cannot ideally reach the goal, ascending.
    pub fn unreachable(&self) -> &[usize] {
        &self.sweep_order[*self.layer_starts.last().expect("non-empty")..]
    }
}
