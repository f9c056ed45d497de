use thiserror::Error;

use crate::mdp::{MdpBuilder, MdpError, SparseMdp};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("goal state {goal} out of range (num_states = {num_states})")]
    InvalidGoal { goal: usize, num_states: usize },
    #[error("invalid noise profile: {0}")]
    InvalidNoise(String),
    #[error("grid has no free cells")]
    NoFreeCells,
    #[error("goal cell ({row}, {col}) is a wall or off-grid")]
    BadGoalCell { row: usize, col: usize },
    #[error("copy count must be at least 1")]
    ZeroCopies,
    #[error("no free boundary cell for a door between copies")]
    NoDoor,
    #[error("layout: {0}")]
    Layout(String),
    #[error("not goal-directed: {0}")]
    NotGoalDirected(String),
}

/// Transition structure of a navigation model before the goal machinery is
/// attached. Rewards are implied by the goal.
#[derive(Debug, Clone)]
pub struct BaseModel<T> {
    num_states: usize,
    num_actions: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> BaseModel<T> {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        BaseModel {
            num_states,
            num_actions,
            rows: vec![Vec::new(); num_states * num_actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Adds `P(next | s, a) += p`, merging repeated successors.
    pub fn add(&mut self, s: usize, a: usize, next: usize, p: T) {
        let row = &mut self.rows[s * self.num_actions + a];
        match row.iter_mut().find(|(t, _)| *t == next) {
            Some((_, q)) => *q += p,
            None => row.push((next, p)),
        }
    }
}

/// An MDP with a goal state, a declare-goal action, and an absorbing `done`
/// state entered by declaring.
///
/// The declare-goal action is always the last action index. It pays 1 at the
/// goal and 0 elsewhere; every other reward is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalDirectedMdp<T> {
    mdp: SparseMdp<T>,
    goal: usize,
    done: usize,
}

impl<T: Scalar> GoalDirectedMdp<T> {
    /// Wraps an existing MDP without checking the reward shape.
    pub fn from_parts(mdp: SparseMdp<T>, goal: usize, done: usize) -> Result<Self, ProblemError> {
        let n = mdp.num_states();
        for s in [goal, done] {
            if s >= n {
                return Err(ProblemError::InvalidGoal {
                    goal: s,
                    num_states: n,
                });
            }
        }
        Ok(GoalDirectedMdp { mdp, goal, done })
    }

    pub fn mdp(&self) -> &SparseMdp<T> {
        &self.mdp
    }

    pub fn into_mdp(self) -> SparseMdp<T> {
        self.mdp
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn done(&self) -> usize {
        self.done
    }

    pub fn declare_action(&self) -> usize {
        self.mdp.num_actions() - 1
    }

    pub fn num_states(&self) -> usize {
        self.mdp.num_states()
    }

    /// Checks the goal-directed reward shape and the absorbing done state.
    pub fn check_goal_directed(&self) -> Result<(), ProblemError> {
        let mdp = &self.mdp;
        let declare = self.declare_action();
        let bad = |msg: String| Err(ProblemError::NotGoalDirected(msg));
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                let r = mdp.reward(s, a);
                let want = if s == self.goal && a == declare && s != self.done {
                    T::one()
                } else {
                    T::zero()
                };
                if r != want {
                    return bad(format!("reward at ({s}, {a}) is {r}"));
                }
                let (succ, _) = mdp.transitions(s, a);
                if (a == declare || s == self.done) && succ != [self.done] {
                    return bad(format!("({s}, {a}) does not lead only to done"));
                }
            }
        }
        Ok(())
    }
}

/// Appends the absorbing `done` state and the declare-goal action to `base`.
///
/// The new state index is `base.num_states()` and the new action index is
/// `base.num_actions()`. Declaring moves every state to `done`; all actions
/// at `done` self-loop with zero reward.
pub fn make_goal_directed<T: Scalar>(
    base: &BaseModel<T>,
    goal: usize,
    discount: T,
) -> Result<GoalDirectedMdp<T>, ProblemError> {
    let n = base.num_states;
    if goal >= n {
        return Err(ProblemError::InvalidGoal {
            goal,
            num_states: n,
        });
    }
    let done = n;
    let declare = base.num_actions;
    let mut b = MdpBuilder::new(n + 1, base.num_actions + 1, discount);
    for s in 0..n {
        for a in 0..base.num_actions {
            for &(t, p) in &base.rows[s * base.num_actions + a] {
                b.transition(s, a, t, p)?;
            }
        }
        b.transition(s, declare, done, T::one())?;
    }
    for a in 0..=declare {
        b.transition(done, a, done, T::one())?;
    }
    b.reward(goal, declare, T::one())?;
    Ok(GoalDirectedMdp {
        mdp: b.build()?,
        goal,
        done,
    })
}
