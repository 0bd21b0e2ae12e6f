//! Sliding-tile state space: states, blank-movement operators, instances,
//! solution paths and the Manhattan-distance heuristic.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::PuzzleError;

/// Largest supported board side.
pub const MAX_WIDTH: usize = 4;
const MAX_CELLS: usize = MAX_WIDTH * MAX_WIDTH;

/// Movement of the blank. The declaration order is the search ordering
/// used everywhere ties are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Operator {
    Up,
    Down,
    Left,
    Right,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Up, Operator::Down, Operator::Left, Operator::Right];

    pub fn inverse(self) -> Operator {
        match self {
            Operator::Up => Operator::Down,
            Operator::Down => Operator::Up,
            Operator::Left => Operator::Right,
            Operator::Right => Operator::Left,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Operator::Up => 'U',
            Operator::Down => 'D',
            Operator::Left => 'L',
            Operator::Right => 'R',
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// The operators applicable in one state, in search order.
#[derive(Debug, Clone, Copy)]
pub struct LegalOps {
    ops: [Operator; 4],
    len: u8,
    next: u8,
}

impl LegalOps {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, op: Operator) -> bool {
        self.ops[..self.len as usize].contains(&op)
    }
}

impl Iterator for LegalOps {
    type Item = Operator;

    fn next(&mut self) -> Option<Operator> {
        if self.next < self.len {
            let op = self.ops[self.next as usize];
            self.next += 1;
            Some(op)
        } else {
            None
        }
    }
}

/// A board configuration, stored row-major with 0 for the blank.
///
/// Cells past `width²` are always zero so equality and hashing only
/// depend on the visible board.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    tiles: [u8; MAX_CELLS],
    width: u8,
    blank: u8,
}

impl State {
    pub fn new(width: usize, tiles: &[u8]) -> Result<State, PuzzleError> {
        if !(2..=MAX_WIDTH).contains(&width) {
            return Err(PuzzleError::InvalidWidth(width));
        }
        let cells = width * width;
        if tiles.len() != cells {
            return Err(PuzzleError::WrongLength { expected: cells, found: tiles.len() });
        }
        let mut seen = [false; MAX_CELLS];
        let mut board = [0u8; MAX_CELLS];
        let mut blank = 0u8;
        for (i, &t) in tiles.iter().enumerate() {
            let t_idx = t as usize;
            if t_idx >= cells || seen[t_idx] {
                return Err(PuzzleError::NotPermutation);
            }
            seen[t_idx] = true;
            board[i] = t;
            if t == 0 {
                blank = i as u8;
            }
        }
        Ok(State { tiles: board, width: width as u8, blank })
    }

    /// Ascending tiles with the blank in the last cell.
    pub fn goal(width: usize) -> Result<State, PuzzleError> {
        let cells = width * width;
        let mut tiles: Vec<u8> = (1..cells as u8).collect();
        tiles.push(0);
        State::new(width, &tiles)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn cells(&self) -> usize {
        self.width() * self.width()
    }

    pub fn tiles(&self) -> &[u8] {
        &self.tiles[..self.cells()]
    }

    pub fn blank(&self) -> usize {
        self.blank as usize
    }

    pub fn can_apply(&self, op: Operator) -> bool {
        let w = self.width();
        let (row, col) = (self.blank() / w, self.blank() % w);
        match op {
            Operator::Up => row > 0,
            Operator::Down => row + 1 < w,
            Operator::Left => col > 0,
            Operator::Right => col + 1 < w,
        }
    }

    pub fn legal_ops(&self) -> LegalOps {
        let mut ops = [Operator::Up; 4];
        let mut len = 0u8;
        for op in Operator::ALL {
            if self.can_apply(op) {
                ops[len as usize] = op;
                len += 1;
            }
        }
        LegalOps { ops, len, next: 0 }
    }

    /// Neighbor reached by moving the blank, or `None` against a wall.
    pub fn successor(&self, op: Operator) -> Option<State> {
        if !self.can_apply(op) {
            return None;
        }
        let w = self.width();
        let b = self.blank();
        let target = match op {
            Operator::Up => b - w,
            Operator::Down => b + w,
            Operator::Left => b - 1,
            Operator::Right => b + 1,
        };
        let mut next = *self;
        next.tiles.swap(b, target);
        next.blank = target as u8;
        Some(next)
    }

    pub fn apply(&self, op: Operator) -> Result<State, PuzzleError> {
        self.successor(op).ok_or(PuzzleError::IllegalMove(op))
    }

    /// Whether `other` lies in the same connected component of the move
    /// graph. The position permutation between the boards must have the
    /// same parity as the blank's taxicab displacement.
    pub fn same_parity_class(&self, other: &State) -> bool {
        if self.width != other.width {
            return false;
        }
        let cells = self.cells();
        let mut pos_in_other = [0usize; MAX_CELLS];
        for (i, &t) in other.tiles().iter().enumerate() {
            pos_in_other[t as usize] = i;
        }
        // permutation: cell i of self holds the tile that sits at perm[i] in other
        let mut perm = [0usize; MAX_CELLS];
        for (i, &t) in self.tiles().iter().enumerate() {
            perm[i] = pos_in_other[t as usize];
        }
        let mut visited = [false; MAX_CELLS];
        let mut transpositions = 0usize;
        for start in 0..cells {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = perm[i];
                len += 1;
            }
            transpositions += len - 1;
        }
        let w = self.width();
        let (br, bc) = (self.blank() / w, self.blank() % w);
        let (or, oc) = (other.blank() / w, other.blank() % w);
        let blank_dist = br.abs_diff(or) + bc.abs_diff(oc);
        transpositions % 2 == blank_dist % 2
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({})", self)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tiles().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", t)?;
        }
        Ok(())
    }
}

impl FromStr for State {
    type Err = PuzzleError;

    /// Space-separated row-major labels; the width is the square root of
    /// the token count.
    fn from_str(s: &str) -> Result<State, PuzzleError> {
        let mut tiles = Vec::new();
        for tok in s.split_whitespace() {
            let t: u8 = tok.parse().map_err(|_| PuzzleError::Parse)?;
            tiles.push(t);
        }
        let width = (2..=MAX_WIDTH)
            .find(|w| w * w == tiles.len())
            .ok_or(PuzzleError::Parse)?;
        State::new(width, &tiles)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for State {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<State, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Initial state plus the single goal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemInstance {
    pub initial: State,
    pub goal: State,
}

impl ProblemInstance {
    pub fn new(initial: State, goal: State) -> Result<ProblemInstance, PuzzleError> {
        if initial.width() != goal.width() {
            return Err(PuzzleError::WidthMismatch(initial.width(), goal.width()));
        }
        if !initial.same_parity_class(&goal) {
            return Err(PuzzleError::Unreachable);
        }
        Ok(ProblemInstance { initial, goal })
    }

    /// Instance with the default goal for the state's width.
    pub fn to_default_goal(initial: State) -> Result<ProblemInstance, PuzzleError> {
        ProblemInstance::new(initial, State::goal(initial.width())?)
    }
}

/// Ordered blank moves; with unit costs, cost equals length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolutionPath {
    pub moves: Vec<Operator>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn replay(&self, from: &State) -> Result<State, PuzzleError> {
        self.moves.iter().try_fold(*from, |s, &op| s.apply(op))
    }

    pub fn solves(&self, p: &ProblemInstance) -> bool {
        self.replay(&p.initial).map(|s| s == p.goal).unwrap_or(false)
    }
}

impl fmt::Display for SolutionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.moves {
            write!(f, "{}", op)?;
        }
        Ok(())
    }
}

/// A state evaluator estimating remaining path length.
pub trait Heuristic {
    fn estimate(&self, s: &State) -> u32;
}

/// Manhattan distance to a fixed goal, with the goal coordinates
/// precomputed per tile.
#[derive(Debug, Clone)]
pub struct Manhattan {
    goal_row: [u8; MAX_CELLS],
    goal_col: [u8; MAX_CELLS],
    width: u8,
}

impl Manhattan {
    pub fn new(goal: &State) -> Manhattan {
        let w = goal.width();
        let mut goal_row = [0u8; MAX_CELLS];
        let mut goal_col = [0u8; MAX_CELLS];
        for (i, &t) in goal.tiles().iter().enumerate() {
            goal_row[t as usize] = (i / w) as u8;
            goal_col[t as usize] = (i % w) as u8;
        }
        Manhattan { goal_row, goal_col, width: w as u8 }
    }
}

impl Heuristic for Manhattan {
    fn estimate(&self, s: &State) -> u32 {
        let w = self.width as usize;
        let mut total = 0u32;
        for (i, &t) in s.tiles().iter().enumerate() {
            if t == 0 {
                continue;
            }
            let (r, c) = ((i / w) as u8, (i % w) as u8);
            total += r.abs_diff(self.goal_row[t as usize]) as u32
                + c.abs_diff(self.goal_col[t as usize]) as u32;
        }
        total
    }
}

pub fn manhattan(s: &State, goal: &State) -> u32 {
    Manhattan::new(goal).estimate(s)
}

/// Counts node generations for one search.
#[derive(Debug, Default, Clone)]
pub struct SearchContext {
    pub generated: u64,
}

impl SearchContext {
    pub fn new() -> SearchContext {
        SearchContext::default()
    }

    pub fn apply(&mut self, s: &State, op: Operator) -> Result<State, PuzzleError> {
        let next = s.apply(op)?;
        self.generated += 1;
        Ok(next)
    }

    pub(crate) fn generate(&mut self, s: &State, op: Operator) -> Option<State> {
        let next = s.successor(op);
        if next.is_some() {
            self.generated += 1;
        }
        next
    }
}

/// Random walk from `goal` that never undoes its previous move.
pub fn random_walk(goal: &State, steps: usize, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_walk_with(goal, steps, &mut rng)
}

pub fn random_walk_with<R: Rng + ?Sized>(goal: &State, steps: usize, rng: &mut R) -> State {
    let mut s = *goal;
    let mut last: Option<Operator> = None;
    for _ in 0..steps {
        let mut choices = [Operator::Up; 4];
        let mut n = 0;
        for op in s.legal_ops() {
            if Some(op.inverse()) != last {
                choices[n] = op;
                n += 1;
            }
        }
        let op = choices[rng.random_range(0..n)];
        s = s.successor(op).expect("chosen op is legal");
        last = Some(op);
    }
    s
}
