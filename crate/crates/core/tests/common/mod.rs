//! Random problem generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use goalvi::problems::{fixtures, gen_gridworld, make_goal_directed, BaseModel, Layout, Noise};
use goalvi::{GoalDirectedMdp, MdpBuilder, SparseMdp, ValueFunction};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stochastic weights normalized to sum to one.
fn random_distribution(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Arbitrary (possibly cyclic) MDP with up to `max_states` states and
/// `max_actions` actions.
pub fn random_mdp(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_actions: usize,
    nonneg_rewards: bool,
) -> SparseMdp<f64> {
    let n = rng.gen_range(1..=max_states);
    let num_actions = rng.gen_range(1..=max_actions);
    let gamma = rng.gen_range(0.5..=0.99);
    let mut b = MdpBuilder::new(n, num_actions, gamma);
    let states: Vec<usize> = (0..n).collect();
    for s in 0..n {
        for a in 0..num_actions {
            let k = rng.gen_range(1..=n.min(4));
            let succ: Vec<usize> = states.choose_multiple(rng, k).copied().collect();
            for (t, p) in succ.into_iter().zip(random_distribution(rng, k)) {
                b.transition(s, a, t, p).unwrap();
            }
            let r = if nonneg_rewards {
                rng.gen_range(0.0..1.0)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            b.reward(s, a, r).unwrap();
        }
    }
    b.build().unwrap()
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> ValueFunction<f64> {
    ValueFunction::from_vec((0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap()
}

/// Acyclic goal-directed MDP whose states sit in layers; every move action
/// at layer `L` puts its strictly largest mass on one layer `L-1` state and
/// the rest on states below `L`. The goal (state 0) self-loops on moves.
/// At most `max_states` states including `done`.
pub fn random_layered_acyclic(
    rng: &mut ChaCha8Rng,
    max_states: usize,
) -> (GoalDirectedMdp<f64>, Vec<usize>) {
    let n = rng.gen_range(2..max_states);
    let num_moves = rng.gen_range(1..=3);
    let gamma = rng.gen_range(0.5..=0.99);

    let mut layer = vec![0usize; n];
    let mut top = 0;
    for slot in layer.iter_mut().skip(1) {
        *slot = if top == 0 || rng.gen_bool(0.5) {
            top += 1;
            top
        } else {
            rng.gen_range(1..=top)
        };
    }
    let members = |l: usize| -> Vec<usize> { (0..n).filter(|&s| layer[s] == l).collect() };

    let mut base = BaseModel::new(n, num_moves);
    for a in 0..num_moves {
        base.add(0, a, 0, 1.0);
    }
    for s in 1..n {
        let below: Vec<usize> = (0..n).filter(|&t| layer[t] < layer[s]).collect();
        for a in 0..num_moves {
            let main = *members(layer[s] - 1).choose(rng).unwrap();
            let extra = rng.gen_range(0..=2);
            let others: Vec<usize> = below
                .iter()
                .copied()
                .filter(|&t| t != main)
                .collect::<Vec<_>>()
                .choose_multiple(rng, extra)
                .copied()
                .collect();
            let weights: Vec<f64> = others.iter().map(|_| rng.gen_range(0.05..0.3)).collect();
            let total = 1.0 + weights.iter().sum::<f64>();
            base.add(s, a, main, 1.0 / total);
            for (t, w) in others.into_iter().zip(weights) {
                base.add(s, a, t, w / total);
            }
        }
    }
    (make_goal_directed(&base, 0, gamma).unwrap(), layer)
}

/// Optimal finite-horizon value by expectimax over the decision tree, with
/// memoization on (state, remaining steps).
pub fn finite_horizon_value(mdp: &SparseMdp<f64>, horizon: usize) -> Vec<f64> {
    fn value(
        mdp: &SparseMdp<f64>,
        s: usize,
        h: usize,
        memo: &mut HashMap<(usize, usize), f64>,
    ) -> f64 {
        if h == 0 {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(s, h)) {
            return v;
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..mdp.num_actions() {
            let (succ, prob) = mdp.transitions(s, a);
            let mut expected = 0.0;
            for (&t, &p) in succ.iter().zip(prob) {
                expected += p * value(mdp, t, h - 1, memo);
            }
            best = best.max(mdp.reward(s, a) + mdp.discount() * expected);
        }
        memo.insert((s, h), best);
        best
    }
    let mut memo = HashMap::new();
    (0..mdp.num_states())
        .map(|s| value(mdp, s, horizon, &mut memo))
        .collect()
}

/// Named problems used across the acceptance checks.
pub fn named_fixtures(discount: f64) -> Vec<(String, GoalDirectedMdp<f64>)> {
    vec![
        ("chain3".into(), fixtures::chain3(discount)),
        ("split".into(), fixtures::split(discount)),
    ]
}

pub fn navigation_problems(layouts: &[Layout]) -> Vec<(String, GoalDirectedMdp<f64>)> {
    let mut out = Vec::new();
    for &l in layouts {
        for n in Noise::ALL {
            let g = gen_gridworld(&l.spec::<f64>(n), 0.99).unwrap();
            out.push((format!("{l}-{n}"), g.into_problem()));
        }
    }
    out
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
