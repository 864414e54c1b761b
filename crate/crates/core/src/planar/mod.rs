//! Lattice loops on the plane.
//!
//! Loops are words of unit lattice steps based at the origin. Reduced loops
//! (no backtracking) form the free group of the graph they are drawn on; the
//! submodules build that graph, enumerate its faces, pick a lasso basis and
//! decompose loops into lasso words.

mod braid;
mod graph;
mod lasso;
mod word;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use braid::{braid_act, BraidLetter, BraidWord, GroupElement};
pub use graph::{build_graph, Face, PlanarGraph, Point};
pub use lasso::{
    decompose, lasso_basis, lasso_basis_with, winding, Lasso, LassoBasis, Orientation, TreePolicy,
};
pub use word::{LassoWord, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanarError {
    #[error("not a loop: step word ends at ({0}, {1})")]
    NotALoop(i64, i64),
    #[error("invalid step {token:?} at position {position}")]
    InvalidStep { token: char, position: usize },
    #[error("cannot build a graph from an empty list of loops")]
    EmptyGraph,
    #[error("loop not drawn on graph: edge from ({0}, {1}) towards {2} is missing")]
    NotOnGraph(i64, i64, Step),
    #[error("braid generator {index} out of range for {strands} strands")]
    BraidIndex { index: usize, strands: usize },
    #[error("braid acts on {strands} strands but the sequence has {len} entries")]
    StrandMismatch { strands: usize, len: usize },
}

/// Letters of a free group: anything with an involutive inverse.
pub trait Invertible: Copy + Eq {
    fn inverse(self) -> Self;
}

/// Free reduction: erase adjacent `x x⁻¹` pairs until none remain.
pub fn free_reduce<L: Invertible>(letters: &[L]) -> Vec<L> {
    let mut out: Vec<L> = Vec::with_capacity(letters.len());
    for &l in letters {
        match out.last() {
            Some(&top) if top == l.inverse() => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

/// Cyclic reduction of an already reduced word. Returns the number of letters
/// stripped from the front together with the cyclically reduced core.
pub fn cyclic_reduce<L: Invertible>(letters: &[L]) -> (usize, Vec<L>) {
    let reduced = free_reduce(letters);
    let mut lo = 0;
    let mut hi = reduced.len();
    while hi - lo >= 2 && reduced[lo] == reduced[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    (lo, reduced[lo..hi].to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    N,
    E,
    S,
    W,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::N, Step::E, Step::S, Step::W];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Step::N => (0, 1),
            Step::E => (1, 0),
            Step::S => (0, -1),
            Step::W => (-1, 0),
        }
    }

    /// Position in anticlockwise angular order starting from east.
    pub(crate) fn angle_index(self) -> usize {
        match self {
            Step::E => 0,
            Step::N => 1,
            Step::W => 2,
            Step::S => 3,
        }
    }

    pub(crate) fn from_angle_index(i: usize) -> Step {
        [Step::E, Step::N, Step::W, Step::S][i % 4]
    }

    pub fn from_char(c: char) -> Option<Step> {
        match c {
            'N' => Some(Step::N),
            'E' => Some(Step::E),
            'S' => Some(Step::S),
            'W' => Some(Step::W),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Step::N => 'N',
            Step::E => 'E',
            Step::S => 'S',
            Step::W => 'W',
        }
    }
}

impl Invertible for Step {
    fn inverse(self) -> Step {
        match self {
            Step::N => Step::S,
            Step::S => Step::N,
            Step::E => Step::W,
            Step::W => Step::E,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub fn parse_steps(s: &str) -> Result<Vec<Step>, PlanarError> {
    s.chars()
        .enumerate()
        .map(|(position, c)| {
            Step::from_char(c).ok_or(PlanarError::InvalidStep { token: c, position })
        })
        .collect()
}

pub fn steps_to_string(steps: &[Step]) -> String {
    steps.iter().map(|s| s.as_char()).collect()
}

pub fn endpoint(start: Point, steps: &[Step]) -> Point {
    steps.iter().fold(start, |(x, y), s| {
        let (dx, dy) = s.delta();
        (x + dx, y + dy)
    })
}

pub fn invert_path(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(|s| s.inverse()).collect()
}

/// A closed lattice path based at the origin. Not necessarily reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Loop {
    steps: Vec<Step>,
}

impl Loop {
    pub fn constant() -> Loop {
        Loop { steps: Vec::new() }
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Loop, PlanarError> {
        let (x, y) = endpoint((0, 0), &steps);
        if (x, y) != (0, 0) {
            return Err(PlanarError::NotALoop(x, y));
        }
        Ok(Loop { steps })
    }

    pub fn parse(s: &str) -> Result<Loop, PlanarError> {
        Loop::from_steps(parse_steps(s.trim())?)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.steps.windows(2).all(|w| w[1] != w[0].inverse())
    }

    pub fn reduce(&self) -> Loop {
        Loop {
            steps: free_reduce(&self.steps),
        }
    }

    /// Product in the group of reduced loops.
    pub fn concat(&self, other: &Loop) -> Loop {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Loop {
            steps: free_reduce(&steps),
        }
    }

    pub fn inverse(&self) -> Loop {
        Loop {
            steps: invert_path(&self.steps),
        }
    }

    /// Lattice points visited, starting and ending at the origin.
    pub fn points(&self) -> Vec<Point> {
        let mut p = (0, 0);
        let mut out = vec![p];
        for s in &self.steps {
            let (dx, dy) = s.delta();
            p = (p.0 + dx, p.1 + dy);
            out.push(p);
        }
        out
    }

    /// Twice the signed shoelace area.
    pub fn signed_area2(&self) -> i64 {
        shoelace2((0, 0), &self.steps)
    }
}

pub(crate) fn shoelace2(start: Point, steps: &[Step]) -> i64 {
    let mut p = start;
    let mut acc = 0;
    for s in steps {
        let (dx, dy) = s.delta();
        let q = (p.0 + dx, p.1 + dy);
        acc += p.0 * q.1 - q.0 * p.1;
        p = q;
    }
    acc
}

impl fmt::Display for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&steps_to_string(&self.steps))
    }
}

impl FromStr for Loop {
    type Err = PlanarError;

    fn from_str(s: &str) -> Result<Loop, PlanarError> {
        Loop::parse(s)
    }
}

/// Reduce a raw step word, rejecting words that do not close up.
pub fn reduce(steps: &[Step]) -> Result<Loop, PlanarError> {
    Ok(Loop::from_steps(steps.to_vec())?.reduce())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopOp {
    Concat,
    Inverse,
}

/// `Concat` returns the reduced product; `Inverse` ignores the second loop.
pub fn loop_group_op(l1: &Loop, l2: &Loop, op: LoopOp) -> Loop {
    match op {
        LoopOp::Concat => l1.concat(l2),
        LoopOp::Inverse => l1.inverse(),
    }
}
