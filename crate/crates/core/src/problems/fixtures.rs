//! Small hand-checkable problems.
//!
//! `chain3`: a deterministic chain `s2 -> s1 -> g` with `g` the goal; `move`
//! at `g` stays at `g`. `split`: one non-goal state `s0` whose `move` reaches
//! the goal with 0.7 and stays with 0.3. In both, action 0 is `move` and
//! action 1 is declare-goal.

use super::goal_directed::{make_goal_directed, BaseModel, GoalDirectedMdp};
use crate::scalar::Scalar;

pub const CHAIN3_GOAL: usize = 0;
pub const CHAIN3_S1: usize = 1;
pub const CHAIN3_S2: usize = 2;
pub const CHAIN3_DONE: usize = 3;

pub const SPLIT_GOAL: usize = 0;
pub const SPLIT_S0: usize = 1;
pub const SPLIT_DONE: usize = 2;

pub const MOVE: usize = 0;
pub const DECLARE: usize = 1;

pub fn chain3<T: Scalar>(discount: T) -> GoalDirectedMdp<T> {
    let mut base = BaseModel::new(3, 1);
    base.add(CHAIN3_GOAL, MOVE, CHAIN3_GOAL, T::one());
    base.add(CHAIN3_S1, MOVE, CHAIN3_GOAL, T::one());
    base.add(CHAIN3_S2, MOVE, CHAIN3_S1, T::one());
    make_goal_directed(&base, CHAIN3_GOAL, discount).expect("chain3 is well formed")
}

pub fn split<T: Scalar>(discount: T) -> GoalDirectedMdp<T> {
    let mut base = BaseModel::new(2, 1);
    base.add(SPLIT_GOAL, MOVE, SPLIT_GOAL, T::one());
    base.add(SPLIT_S0, MOVE, SPLIT_GOAL, T::lit(0.7));
    base.add(SPLIT_S0, MOVE, SPLIT_S0, T::lit(0.3));
    make_goal_directed(&base, SPLIT_GOAL, discount).expect("split is well formed")
}
