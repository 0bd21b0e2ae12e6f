//! Shortest-path solvers: breadth-first search with duplicate detection
//! and IDA*, plus generation of instances with verified optimal depth.

use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;
use crate::puzzle::{random_walk_with, Heuristic, Manhattan, Operator, ProblemInstance, SearchContext, SolutionPath, State};

/// Budget large enough for any 3x3 instance under IDA* with Manhattan.
pub const DEFAULT_SOLVER_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub path: SolutionPath,
    pub nodes_generated: u64,
    pub peak_stored: u64,
}

pub fn bfs_optimal(p: &ProblemInstance, node_budget: u64) -> Result<ExactResult, SolverError> {
    if p.initial == p.goal {
        return Ok(ExactResult { path: SolutionPath::default(), nodes_generated: 0, peak_stored: 1 });
    }
    // arena in BFS order doubles as the queue
    let mut arena: Vec<(State, u32, Operator)> = Vec::new();
    let mut seen: HashSet<State> = HashSet::new();
    arena.push((p.initial, u32::MAX, Operator::Up));
    seen.insert(p.initial);
    let mut ctx = SearchContext::new();
    let mut head = 0usize;
    while head < arena.len() {
        let (cur, _, _) = arena[head];
        for op in cur.legal_ops() {
            if ctx.generated >= node_budget {
                return Err(SolverError::BudgetExhausted { budget: node_budget });
            }
            let next = ctx.generate(&cur, op).expect("legal op");
            if !seen.insert(next) {
                continue;
            }
            arena.push((next, head as u32, op));
            if next == p.goal {
                let mut moves = Vec::new();
                let mut idx = arena.len() - 1;
                while arena[idx].1 != u32::MAX {
                    moves.push(arena[idx].2);
                    idx = arena[idx].1 as usize;
                }
                moves.reverse();
                return Ok(ExactResult {
                    path: SolutionPath { moves },
                    nodes_generated: ctx.generated,
                    peak_stored: arena.len() as u64,
                });
            }
        }
        head += 1;
    }
    // only reachable if the instance invariant was bypassed
    Err(SolverError::Puzzle(crate::error::PuzzleError::Unreachable))
}

struct Ida<'a, H> {
    goal: State,
    h: &'a H,
    ctx: SearchContext,
    budget: u64,
    path: Vec<Operator>,
    peak: u64,
}

enum Probe {
    Found,
    Exceeded(u32),
}

impl<H: Heuristic> Ida<'_, H> {
    fn probe(&mut self, s: &State, g: u32, bound: u32) -> Result<Probe, SolverError> {
        let f = g + self.h.estimate(s);
        if f > bound {
            return Ok(Probe::Exceeded(f));
        }
        if *s == self.goal {
            return Ok(Probe::Found);
        }
        let mut next_bound = u32::MAX;
        let last = self.path.last().copied();
        for op in s.legal_ops() {
            if Some(op.inverse()) == last {
                continue;
            }
            if self.ctx.generated >= self.budget {
                return Err(SolverError::BudgetExhausted { budget: self.budget });
            }
            let child = self.ctx.generate(s, op).expect("legal op");
            self.path.push(op);
            self.peak = self.peak.max(self.path.len() as u64 + 1);
            match self.probe(&child, g + 1, bound)? {
                Probe::Found => return Ok(Probe::Found),
                Probe::Exceeded(b) => next_bound = next_bound.min(b),
            }
            self.path.pop();
        }
        Ok(Probe::Exceeded(next_bound))
    }
}

/// Iterative-deepening A*. Optimal when `h` is admissible.
pub fn idastar<H: Heuristic>(p: &ProblemInstance, h: &H, node_budget: u64) -> Result<ExactResult, SolverError> {
    let mut ida = Ida { goal: p.goal, h, ctx: SearchContext::new(), budget: node_budget, path: Vec::new(), peak: 1 };
    let mut bound = h.estimate(&p.initial);
    loop {
        match ida.probe(&p.initial, 0, bound)? {
            Probe::Found => {
                return Ok(ExactResult {
                    path: SolutionPath { moves: ida.path },
                    nodes_generated: ida.ctx.generated,
                    peak_stored: ida.peak,
                })
            }
            Probe::Exceeded(u32::MAX) => {
                return Err(SolverError::Puzzle(crate::error::PuzzleError::Unreachable))
            }
            Probe::Exceeded(b) => bound = b,
        }
    }
}

/// Optimal depth of `s` under IDA* with Manhattan distance.
pub fn optimal_depth(s: &State, goal: &State, node_budget: u64) -> Result<u32, SolverError> {
    let p = ProblemInstance::new(*s, *goal)?;
    let r = idastar(&p, &Manhattan::new(goal), node_budget)?;
    Ok(r.path.len() as u32)
}

/// Largest optimal depth on each supported board, or a safe upper bound
/// where the exact diameter is impractical to use (4x4).
pub fn max_depth(width: usize) -> u32 {
    match width {
        2 => 6,
        3 => 31,
        _ => 80,
    }
}

/// Boards up to this width get a full distance table in [`Distances`].
const TABLE_MAX_WIDTH: usize = 3;

/// Optimal distance to a fixed goal. Small boards are solved once by a
/// backward breadth-first sweep; larger ones fall back to IDA* with a memo.
#[derive(Debug, Clone)]
pub struct Distances {
    goal: State,
    known: HashMap<State, u32>,
    complete: bool,
    budget: u64,
}

impl Distances {
    pub fn new(goal: &State, budget: u64) -> Distances {
        let goal = *goal;
        let mut known = HashMap::new();
        let complete = goal.width() <= TABLE_MAX_WIDTH;
        known.insert(goal, 0);
        if complete {
            let mut frontier = alloc::vec![goal];
            let mut d = 0;
            while !frontier.is_empty() {
                d += 1;
                let mut next = Vec::new();
                for s in &frontier {
                    for op in s.legal_ops() {
                        let c = s.successor(op).expect("legal op");
                        if !known.contains_key(&c) {
                            known.insert(c, d);
                            next.push(c);
                        }
                    }
                }
                frontier = next;
            }
        }
        Distances { goal, known, complete, budget }
    }

    pub fn goal(&self) -> &State {
        &self.goal
    }

    pub fn get(&mut self, s: &State) -> Result<u32, SolverError> {
        if let Some(&d) = self.known.get(s) {
            return Ok(d);
        }
        if self.complete {
            return Err(crate::error::PuzzleError::Unreachable.into());
        }
        let d = optimal_depth(s, &self.goal, self.budget)?;
        self.known.insert(*s, d);
        Ok(d)
    }
}

/// Walk lengths tried per attempt extend past the target by at most this
/// many move pairs.
const EXTRA_PAIRS: u32 = 3;

/// Rejection-samples random walks of length >= `depth` until IDA*
/// confirms an optimal depth of exactly `depth`.
pub fn instance_of_depth(depth: u32, width: usize, seed: u64, attempts: u32) -> Result<ProblemInstance, SolverError> {
    let goal = State::goal(width)?;
    if depth > max_depth(width) {
        return Err(SolverError::DepthUnachievable { depth, width });
    }
    if depth == 0 {
        return Ok(ProblemInstance { initial: goal, goal });
    }
    let h = Manhattan::new(&goal);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        // walk length must share the target's parity on a bipartite graph
        let steps = depth + 2 * rng.random_range(0..=EXTRA_PAIRS);
        let initial = random_walk_with(&goal, steps as usize, &mut rng);
        if h.estimate(&initial) > depth {
            continue;
        }
        let p = ProblemInstance { initial, goal };
        let r = idastar(&p, &h, DEFAULT_SOLVER_BUDGET)?;
        if r.path.len() as u32 == depth {
            return Ok(p);
        }
    }
    Err(SolverError::GenerationFailed { depth, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puzzle::random_walk;

    fn inst(initial: State) -> ProblemInstance {
        ProblemInstance::to_default_goal(initial).unwrap()
    }

    #[test]
    fn trivial_instances() {
        let goal = State::goal(3).unwrap();
        let p = inst(goal);
        let b = bfs_optimal(&p, 10).unwrap();
        assert_eq!(b.path.len(), 0);
        let i = idastar(&p, &Manhattan::new(&goal), 10).unwrap();
        assert_eq!(i.path.len(), 0);
        assert_eq!(i.nodes_generated, 0);

        let one = inst(goal.apply(Operator::Left).unwrap());
        assert_eq!(bfs_optimal(&one, 100).unwrap().path.len(), 1);
        let r = idastar(&one, &Manhattan::new(&goal), 100).unwrap();
        assert_eq!(r.path.moves, [Operator::Right]);
    }

    #[test]
    fn solvers_agree_and_paths_replay() {
        let goal = State::goal(3).unwrap();
        for seed in 0..20u64 {
            let p = inst(random_walk(&goal, 18, seed));
            let b = bfs_optimal(&p, DEFAULT_SOLVER_BUDGET).unwrap();
            let i = idastar(&p, &Manhattan::new(&goal), DEFAULT_SOLVER_BUDGET).unwrap();
            assert_eq!(b.path.len(), i.path.len(), "seed {seed}");
            assert!(b.path.solves(&p));
            assert!(i.path.solves(&p));
        }
    }

    #[test]
    fn frozen_walk_thirty_depth() {
        // d* of the seed-2024, 30-step walk, measured once with bfs_optimal
        let goal = State::goal(3).unwrap();
        let p = inst(random_walk(&goal, 30, 2024));
        let b = bfs_optimal(&p, DEFAULT_SOLVER_BUDGET).unwrap();
        let i = idastar(&p, &Manhattan::new(&goal), DEFAULT_SOLVER_BUDGET).unwrap();
        assert_eq!(b.path.len(), FROZEN_WALK30_DEPTH);
        assert_eq!(i.path.len(), FROZEN_WALK30_DEPTH);
    }

    const FROZEN_WALK30_DEPTH: usize = 22;

    #[test]
    fn budget_errors_and_monotonicity() {
        let goal = State::goal(3).unwrap();
        let p = inst(random_walk(&goal, 20, 3));
        let h = Manhattan::new(&goal);
        assert_eq!(idastar(&p, &h, 3), Err(SolverError::BudgetExhausted { budget: 3 }));
        assert_eq!(bfs_optimal(&p, 3), Err(SolverError::BudgetExhausted { budget: 3 }));
        let full = idastar(&p, &h, DEFAULT_SOLVER_BUDGET).unwrap();
        let mut lengths = Vec::new();
        for budget in [10, 100, 1_000, 10_000, 100_000, 1_000_000] {
            if let Ok(r) = idastar(&p, &h, budget) {
                lengths.push(r.path.len());
            }
            if let Ok(r) = bfs_optimal(&p, budget) {
                lengths.push(r.path.len());
            }
        }
        assert!(!lengths.is_empty());
        assert!(lengths.iter().all(|&l| l == full.path.len()));
    }

    #[test]
    fn generated_instances_have_exact_depth() {
        let goal = State::goal(3).unwrap();
        assert_eq!(instance_of_depth(0, 3, 1, 1).unwrap().initial, goal);
        let one = instance_of_depth(1, 3, 1, 10).unwrap();
        assert_eq!(optimal_depth(&one.initial, &goal, DEFAULT_SOLVER_BUDGET).unwrap(), 1);
        let p = instance_of_depth(19, 3, 42, 10_000).unwrap();
        let r = idastar(&p, &Manhattan::new(&goal), DEFAULT_SOLVER_BUDGET).unwrap();
        assert_eq!(r.path.len(), 19);
        assert_eq!(instance_of_depth(32, 3, 1, 10), Err(SolverError::DepthUnachievable { depth: 32, width: 3 }));
        assert!(matches!(instance_of_depth(31, 3, 1, 1), Err(SolverError::GenerationFailed { .. })));
    }
}
