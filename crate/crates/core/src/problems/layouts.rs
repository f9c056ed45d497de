//! Shipped office-style corridor layouts.
//!
//! Each layout is a "comb": a horizontal main corridor through the middle
//! row with vertical side corridors every fourth column. They grow from
//! about 50 to about 1000 free cells and place the goal differently.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::grid::{Cell, GridSpec, NoiseProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layout {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Noise {
    Standard,
    Noisy,
}

const BRANCH_SPACING: usize = 4;

impl Layout {
    pub const ALL: [Layout; 4] = [Layout::A, Layout::B, Layout::C, Layout::D];

    pub fn name(self) -> &'static str {
        match self {
            Layout::A => "grid-a",
            Layout::B => "grid-b",
            Layout::C => "grid-c",
            Layout::D => "grid-d",
        }
    }

    fn dims(self) -> (usize, usize) {
        match self {
            Layout::A => (20, 7),
            Layout::B => (40, 17),
            Layout::C => (60, 30),
            Layout::D => (80, 47),
        }
    }

    fn goal(self) -> Cell {
        let (w, h) = self.dims();
        match self {
            Layout::A | Layout::D => Cell::new(0, 0),
            Layout::B => Cell::new(h - 1, (w - 1) / BRANCH_SPACING * BRANCH_SPACING),
            Layout::C => Cell::new(h / 2, w / 2),
        }
    }

    pub fn spec<T: Scalar>(self, noise: Noise) -> GridSpec<T> {
        let (width, height) = self.dims();
        let corridor = height / 2;
        let walls: BTreeSet<Cell> = (0..height)
            .flat_map(|r| (0..width).map(move |c| Cell::new(r, c)))
            .filter(|c| c.row != corridor && c.col % BRANCH_SPACING != 0)
            .collect();
        GridSpec {
            width,
            height,
            walls,
            goal: self.goal(),
            noise: noise.profile(),
        }
    }
}

impl Noise {
    pub const ALL: [Noise; 2] = [Noise::Standard, Noise::Noisy];

    pub fn name(self) -> &'static str {
        match self {
            Noise::Standard => "standard",
            Noise::Noisy => "noisy",
        }
    }

    pub fn profile<T: Scalar>(self) -> NoiseProfile<T> {
        match self {
            Noise::Standard => NoiseProfile::standard(),
            Noise::Noisy => NoiseProfile::noisy(),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().trim_start_matches("grid-") {
            "a" => Ok(Layout::A),
            "b" => Ok(Layout::B),
            "c" => Ok(Layout::C),
            "d" => Ok(Layout::D),
            _ => Err(format!("unknown layout {s:?}")),
        }
    }
}

impl FromStr for Noise {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Noise::Standard),
            "noisy" => Ok(Noise::Noisy),
            _ => Err(format!("unknown noise profile {s:?}")),
        }
    }
}
