//! Independent reference model of the tile puzzle: plain vectors, direct
//! coordinate arithmetic, exhaustive enumeration. Shares no code with the
//! crate beyond converting to and from its `State`.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use utilsearch_core::{Operator, State};

pub const OPS: [Operator; 4] = [Operator::Up, Operator::Down, Operator::Left, Operator::Right];

pub fn tiles(s: &State) -> Vec<u8> {
    s.tiles().to_vec()
}

pub fn goal_tiles(width: usize) -> Vec<u8> {
    let n = width * width;
    (1..n as u8).chain([0]).collect()
}

/// Blank movement on a raw board.
pub fn step(board: &[u8], width: usize, op: Operator) -> Option<Vec<u8>> {
    let b = board.iter().position(|&t| t == 0).unwrap();
    let (r, c) = ((b / width) as isize, (b % width) as isize);
    let (dr, dc) = match op {
        Operator::Up => (-1, 0),
        Operator::Down => (1, 0),
        Operator::Left => (0, -1),
        Operator::Right => (0, 1),
    };
    let (nr, nc) = (r + dr, c + dc);
    if nr < 0 || nc < 0 || nr >= width as isize || nc >= width as isize {
        return None;
    }
    let mut next = board.to_vec();
    next.swap(b, (nr as usize) * width + nc as usize);
    Some(next)
}

/// Sum over tiles of row and column offsets to their goal cells.
pub fn manhattan_tally(board: &[u8], goal: &[u8], width: usize) -> u32 {
    let mut total = 0;
    for (i, &t) in board.iter().enumerate() {
        if t == 0 {
            continue;
        }
        let j = goal.iter().position(|&g| g == t).unwrap();
        total += (i / width).abs_diff(j / width) + (i % width).abs_diff(j % width);
    }
    total as u32
}

/// Backward breadth-first distances from `goal` over the whole reachable
/// component.
pub fn all_distances(goal: &[u8], width: usize) -> HashMap<Vec<u8>, u32> {
    let mut dist = HashMap::new();
    dist.insert(goal.to_vec(), 0);
    let mut queue = VecDeque::from([goal.to_vec()]);
    while let Some(b) = queue.pop_front() {
        let d = dist[&b];
        for op in OPS {
            if let Some(n) = step(&b, width, op) {
                if !dist.contains_key(&n) {
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Enumerates every root-to-leaf path of length at most `l` (no move
/// immediately undoing the previous one, goals end their path) and returns
/// the best first operator with its minimum `g + h`.
pub fn lookahead_oracle(board: &[u8], goal: &[u8], width: usize, l: u32) -> (Operator, u32) {
    let mut best: Option<(Operator, u32)> = None;
    for first in OPS {
        let Some(child) = step(board, width, first) else { continue };
        let mut min = u32::MAX;
        // (board, last op, g)
        let mut stack = vec![(child, first, 1u32)];
        while let Some((b, last, g)) = stack.pop() {
            if b == goal {
                min = min.min(g);
                continue;
            }
            if g == l {
                min = min.min(g + manhattan_tally(&b, goal, width));
                continue;
            }
            for op in OPS {
                if op == inverse(last) {
                    continue;
                }
                if let Some(n) = step(&b, width, op) {
                    stack.push((n, op, g + 1));
                }
            }
        }
        if best.is_none_or(|(_, v)| min < v) {
            best = Some((first, min));
        }
    }
    best.unwrap()
}

pub fn inverse(op: Operator) -> Operator {
    match op {
        Operator::Up => Operator::Down,
        Operator::Down => Operator::Up,
        Operator::Left => Operator::Right,
        Operator::Right => Operator::Left,
    }
}
