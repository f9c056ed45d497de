//! Gridworld navigation problems with slip noise.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::goal_directed::{make_goal_directed, BaseModel, GoalDirectedMdp, ProblemError};
use crate::scalar::Scalar;

/// Grid cell, `row` 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

/// Move actions, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    fn lateral(self) -> [Direction; 2] {
        match self {
            Direction::North | Direction::South => [Direction::West, Direction::East],
            Direction::East | Direction::West => [Direction::North, Direction::South],
        }
    }

    fn step(self, c: Cell, width: usize, height: usize) -> Option<Cell> {
        let (r, k) = (c.row, c.col);
        match self {
            Direction::North => r.checked_sub(1).map(|r| Cell::new(r, k)),
            Direction::South => (r + 1 < height).then(|| Cell::new(r + 1, k)),
            Direction::West => k.checked_sub(1).map(|k| Cell::new(r, k)),
            Direction::East => (k + 1 < width).then(|| Cell::new(r, k + 1)),
        }
    }
}

/// Outcome distribution of a move: intended direction, stay in place, and
/// a slip to each side. `p_move + p_stay + 2·p_slip = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile<T> {
    pub p_move: T,
    pub p_stay: T,
    pub p_slip: T,
}

impl<T: Scalar> NoiseProfile<T> {
    pub fn standard() -> Self {
        NoiseProfile {
            p_move: T::lit(0.8),
            p_stay: T::lit(0.1),
            p_slip: T::lit(0.05),
        }
    }

    pub fn noisy() -> Self {
        NoiseProfile {
            p_move: T::lit(0.6),
            p_stay: T::lit(0.2),
            p_slip: T::lit(0.1),
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let parts = [self.p_move, self.p_stay, self.p_slip];
        if parts.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(ProblemError::InvalidNoise(
                "negative or non-finite mass".into(),
            ));
        }
        let total = self.p_move + self.p_stay + T::lit(2.0) * self.p_slip;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
        if (total - T::one()).abs() > tol {
            return Err(ProblemError::InvalidNoise(format!("masses sum to {total}")));
        }
        Ok(())
    }
}

/// Layout plus noise for one navigation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub width: usize,
    pub height: usize,
    pub walls: BTreeSet<Cell>,
    pub goal: Cell,
    pub noise: NoiseProfile<T>,
}

impl<T: Scalar> GridSpec<T> {
    /// Parses a map of `#` (wall), `.` (free) and one `G` (goal, free).
    /// Blank lines are ignored; all rows must have the same width.
    pub fn from_ascii(map: &str, noise: NoiseProfile<T>) -> Result<Self, ProblemError> {
        let rows: Vec<&str> = map
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut walls = BTreeSet::new();
        let mut goal = None;
        for (r, line) in rows.iter().enumerate() {
            if line.chars().count() != width {
                return Err(ProblemError::Layout(format!(
                    "row {r} has a different width"
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => {
                        walls.insert(Cell::new(r, c));
                    }
                    '.' => {}
                    'G' if goal.is_none() => goal = Some(Cell::new(r, c)),
                    'G' => return Err(ProblemError::Layout("more than one goal".into())),
                    other => {
                        return Err(ProblemError::Layout(format!(
                            "unexpected character {other:?}"
                        )))
                    }
                }
            }
        }
        let goal = goal.ok_or_else(|| ProblemError::Layout("no goal cell".into()))?;
        let spec = GridSpec {
            width,
            height,
            walls,
            goal,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                let cell = Cell::new(r, c);
                out.push(if cell == self.goal {
                    'G'
                } else if self.walls.contains(&cell) {
                    '#'
                } else {
                    '.'
                });
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn is_free(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width && !self.walls.contains(&c)
    }

    pub fn free_cells(&self) -> usize {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| Cell::new(r, c)))
            .filter(|&c| self.is_free(c))
            .count()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        self.noise.validate()?;
        if !self.is_free(self.goal) {
            return Err(ProblemError::BadGoalCell {
                row: self.goal.row,
                col: self.goal.col,
            });
        }
        Ok(())
    }
}

/// A generated navigation problem with its cell-to-state mapping.
///
/// States are the free cells in row-major order, followed by `done`.
/// Actions are N, E, S, W, then declare-goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld<T> {
    problem: GoalDirectedMdp<T>,
    cells: Vec<Cell>,
    width: usize,
    height: usize,
}

impl<T: Scalar> GridWorld<T> {
    pub fn problem(&self) -> &GoalDirectedMdp<T> {
        &self.problem
    }

    pub fn into_problem(self) -> GoalDirectedMdp<T> {
        self.problem
    }

    /// Cell of each non-`done` state.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn state_of(&self, c: Cell) -> Option<usize> {
        self.cells.binary_search(&c).ok()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

fn build_grid<T: Scalar>(
    width: usize,
    height: usize,
    is_free: impl Fn(Cell) -> bool,
    crossing_allowed: impl Fn(Cell, Cell) -> bool,
    goal: Cell,
    noise: &NoiseProfile<T>,
    discount: T,
) -> Result<GridWorld<T>, ProblemError> {
    let cells: Vec<Cell> = (0..height)
        .flat_map(|r| (0..width).map(move |c| Cell::new(r, c)))
        .filter(|&c| is_free(c))
        .collect();
    if cells.is_empty() {
        return Err(ProblemError::NoFreeCells);
    }
    let index_of = |c: Cell| cells.binary_search(&c).ok();
    let goal_state = index_of(goal).ok_or(ProblemError::BadGoalCell {
        row: goal.row,
        col: goal.col,
    })?;

    let mut base = BaseModel::new(cells.len(), Direction::ALL.len());
    for (s, &cell) in cells.iter().enumerate() {
        let land = |dir: Direction| {
            dir.step(cell, width, height)
                .filter(|&t| is_free(t) && crossing_allowed(cell, t))
                .and_then(index_of)
                .unwrap_or(s)
        };
        for dir in Direction::ALL {
            let a = dir.index();
            let [left, right] = dir.lateral();
            base.add(s, a, land(dir), noise.p_move);
            base.add(s, a, land(left), noise.p_slip);
            base.add(s, a, land(right), noise.p_slip);
            base.add(s, a, s, noise.p_stay);
        }
    }
    let problem = make_goal_directed(&base, goal_state, discount)?;
    Ok(GridWorld {
        problem,
        cells,
        width,
        height,
    })
}

/// One state per free cell plus `done`; blocked moves keep their mass in
/// place.
pub fn gen_gridworld<T: Scalar>(
    spec: &GridSpec<T>,
    discount: T,
) -> Result<GridWorld<T>, ProblemError> {
    spec.validate()?;
    build_grid(
        spec.width,
        spec.height,
        |c| spec.is_free(c),
        |_, _| true,
        spec.goal,
        &spec.noise,
        discount,
    )
}

/// Row of the door joining adjacent copies: the middle row if both sides of
/// the seam are free there, else the topmost such row.
pub fn door_row<T: Scalar>(spec: &GridSpec<T>) -> Option<usize> {
    let open =
        |r: usize| spec.is_free(Cell::new(r, spec.width - 1)) && spec.is_free(Cell::new(r, 0));
    let mid = spec.height / 2;
    if open(mid) {
        return Some(mid);
    }
    (0..spec.height).find(|&r| open(r))
}

/// `k` copies of `spec` side by side, joined only through one door per seam.
/// The goal is kept in the last copy.
pub fn glue_copies<T: Scalar>(
    spec: &GridSpec<T>,
    k: usize,
    discount: T,
) -> Result<GridWorld<T>, ProblemError> {
    spec.validate()?;
    if k == 0 {
        return Err(ProblemError::ZeroCopies);
    }
    let door = if k > 1 {
        door_row(spec).ok_or(ProblemError::NoDoor)?
    } else {
        0
    };
    let w = spec.width;
    let local = |c: Cell| Cell::new(c.row, c.col % w);
    let crossing_allowed = |from: Cell, to: Cell| {
        // Copies differ exactly when the move crosses a seam.
        from.col / w == to.col / w || from.row == door
    };
    build_grid(
        w * k,
        spec.height,
        |c| c.col < w * k && spec.is_free(local(c)),
        crossing_allowed,
        Cell::new(spec.goal.row, (k - 1) * w + spec.goal.col),
        &spec.noise,
        discount,
    )
}
