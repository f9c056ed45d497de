//! Goal-directed problem construction, fixtures, navigation generators, and
//! the plain-text MDP file format.

pub mod fixtures;
pub mod format;
mod goal_directed;
pub mod grid;
pub mod layouts;

pub use format::{parse_mdp_file, write_mdp_file, ParseError, ParseErrorKind};
pub use goal_directed::{make_goal_directed, BaseModel, GoalDirectedMdp, ProblemError};
pub use grid::{gen_gridworld, glue_copies, Cell, GridSpec, GridWorld, NoiseProfile};
pub use layouts::{Layout, Noise};
