//! Fixed-depth lookahead Minimin: full-width depth-first lookahead scoring
//! frontier leaves by `g + h`, one committed move per decision, with
//! node-generation and storage accounting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{MiniminError, SolverError};
use crate::exact::optimal_depth;
use crate::puzzle::{Heuristic, Manhattan, Operator, ProblemInstance, SearchContext, State};

pub const DEFAULT_MAX_LOOKAHEAD: u32 = 24;

/// Number of visits after which an executed state is avoided.
const VISIT_LIMIT: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u32", into = "u32"))]
pub struct LookaheadDepth(u32);

impl LookaheadDepth {
    pub fn new(level: u32) -> Result<LookaheadDepth, MiniminError> {
        LookaheadDepth::with_max(level, DEFAULT_MAX_LOOKAHEAD)
    }

    pub fn with_max(level: u32, max: u32) -> Result<LookaheadDepth, MiniminError> {
        if level == 0 || level > max {
            return Err(MiniminError::InvalidLookahead { level, max });
        }
        Ok(LookaheadDepth(level))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for LookaheadDepth {
    type Error = MiniminError;

    fn try_from(level: u32) -> Result<Self, Self::Error> {
        LookaheadDepth::new(level)
    }
}

impl From<LookaheadDepth> for u32 {
    fn from(l: LookaheadDepth) -> u32 {
        l.0
    }
}

impl core::fmt::Display for LookaheadDepth {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Raw resource attributes of one run, in moves and node counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outcome {
    pub path_length: u32,
    /// Node generations.
    pub time_units: u64,
    /// Peak simultaneously stored nodes.
    pub space_units: u64,
    pub solved: bool,
}

impl Outcome {
    pub const TRIVIAL: Outcome = Outcome { path_length: 0, time_units: 0, space_units: 0, solved: true };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResourceLimits {
    pub max_moves: u32,
    pub node_budget: u64,
}

impl ResourceLimits {
    pub fn new(max_moves: u32, node_budget: u64) -> Result<ResourceLimits, MiniminError> {
        if max_moves == 0 || node_budget == 0 {
            return Err(MiniminError::InvalidLimits);
        }
        Ok(ResourceLimits { max_moves, node_budget })
    }
}

impl Default for ResourceLimits {
    /// 100 moves and ten minutes at 20,000 generations per minute.
    fn default() -> Self {
        ResourceLimits { max_moves: 100, node_budget: 200_000 }
    }
}

/// Result of one lookahead decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub op: Operator,
    /// Minimum `g + h` over the frontier.
    pub value: u32,
    pub nodes: u64,
    /// Deepest lookahead stack, root included.
    pub peak_stack: u64,
    /// Backed-up value of every legal first move, in operator order.
    pub first_moves: Vec<(Operator, u32)>,
}

impl Decision {
    /// First moves ordered best first; ties keep operator order.
    pub fn ranked(&self) -> Vec<(Operator, u32)> {
        let mut r = self.first_moves.clone();
        r.sort_by_key(|&(op, v)| (v, op));
        r
    }
}

/// Minimin agent for a fixed goal.
#[derive(Debug, Clone)]
pub struct Minimin {
    goal: State,
    h: Manhattan,
}

struct Lookahead<'a> {
    goal: &'a State,
    h: &'a Manhattan,
    horizon: u32,
    ctx: &'a mut SearchContext,
    peak: u64,
}

impl Lookahead<'_> {
    fn value(&mut self, s: &State, last: Operator, g: u32) -> u32 {
        self.peak = self.peak.max(g as u64 + 1);
        if *s == *self.goal {
            return g;
        }
        if g == self.horizon {
            return g + self.h.estimate(s);
        }
        let mut best = u32::MAX;
        for op in s.legal_ops() {
            if op == last.inverse() {
                continue;
            }
            let child = self.ctx.generate(s, op).expect("legal op");
            best = best.min(self.value(&child, op, g + 1));
        }
        if best == u32::MAX {
            g + self.h.estimate(s)
        } else {
            best
        }
    }
}

impl Minimin {
    pub fn new(goal: State) -> Minimin {
        Minimin { goal, h: Manhattan::new(&goal) }
    }

    pub fn goal(&self) -> &State {
        &self.goal
    }

    /// One decision from `s`, which must not be the goal.
    pub fn decide(&self, s: &State, l: LookaheadDepth, ctx: &mut SearchContext) -> Decision {
        debug_assert!(*s != self.goal, "decide called at the goal");
        let before = ctx.generated;
        let mut la = Lookahead { goal: &self.goal, h: &self.h, horizon: l.get(), ctx, peak: 1 };
        let mut first_moves = Vec::with_capacity(4);
        for op in s.legal_ops() {
            let child = la.ctx.generate(s, op).expect("legal op");
            first_moves.push((op, la.value(&child, op, 1)));
        }
        let peak_stack = la.peak;
        let (op, value) = first_moves
            .iter()
            .copied()
            .fold(None, |acc: Option<(Operator, u32)>, (op, v)| match acc {
                Some((_, bv)) if bv <= v => acc,
                _ => Some((op, v)),
            })
            .expect("every state has a legal move");
        Decision { op, value, nodes: ctx.generated - before, peak_stack, first_moves }
    }

    pub fn run(&self, initial: &State, l: LookaheadDepth, limits: &ResourceLimits) -> Outcome {
        self.run_traced(initial, l, limits, |_, _, _| {})
    }

    /// Runs to the goal or a limit, reporting every decision with the state
    /// it was made in and the operator actually executed (loop avoidance
    /// may override the decision's own choice).
    pub fn run_traced<F: FnMut(&State, &Decision, Operator)>(
        &self,
        initial: &State,
        l: LookaheadDepth,
        limits: &ResourceLimits,
        mut on_decision: F,
    ) -> Outcome {
        let mut state = *initial;
        let mut visits: BTreeMap<State, u8> = BTreeMap::new();
        visits.insert(state, 1);
        let mut ctx = SearchContext::new();
        let mut moves = 0u32;
        let mut space = 0u64;
        let unsolved = |ctx: &SearchContext, space| Outcome {
            path_length: limits.max_moves,
            time_units: ctx.generated,
            space_units: space,
            solved: false,
        };
        while state != self.goal {
            if moves >= limits.max_moves {
                return unsolved(&ctx, space);
            }
            let d = self.decide(&state, l, &mut ctx);
            space = space.max(d.peak_stack + visits.len() as u64);
            if ctx.generated > limits.node_budget {
                return unsolved(&ctx, space);
            }
            let ranked = d.ranked();
            let op = ranked
                .iter()
                .map(|&(op, _)| op)
                .find(|&op| {
                    let next = state.successor(op).expect("legal op");
                    visits.get(&next).copied().unwrap_or(0) < VISIT_LIMIT
                })
                .unwrap_or(d.op);
            on_decision(&state, &d, op);
            state = state.successor(op).expect("legal op");
            *visits.entry(state).or_insert(0) += 1;
            moves += 1;
        }
        Outcome { path_length: moves, time_units: ctx.generated, space_units: space, solved: true }
    }
}

pub fn minimin_decide(s: &State, goal: &State, l: LookaheadDepth, ctx: &mut SearchContext) -> Decision {
    Minimin::new(*goal).decide(s, l, ctx)
}

pub fn minimin_run(p: &ProblemInstance, l: LookaheadDepth, limits: &ResourceLimits) -> Outcome {
    Minimin::new(p.goal).run(&p.initial, l, limits)
}

/// Decision statistics over a sample of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStats {
    /// Fraction of decisions that reduce the true distance to the goal.
    pub accuracy: f64,
    pub decisions: usize,
    pub mean_nodes: f64,
}

/// Labels each non-goal sample state with its optimal depth and measures
/// how often a level-`l` decision moves strictly closer to the goal.
/// Goal states carry no decision and are skipped.
pub fn decision_stats(
    l: LookaheadDepth,
    sample: &[State],
    goal: &State,
    solver_budget: u64,
) -> Result<DecisionStats, MiniminError> {
    let labelled: Vec<(State, u32)> = sample
        .iter()
        .filter(|s| *s != goal)
        .map(|s| optimal_depth(s, goal, solver_budget).map(|d| (*s, d)))
        .collect::<Result<_, SolverError>>()?;
    decision_stats_labelled(l, &labelled, goal, solver_budget)
}

/// As [`decision_stats`] with optimal depths already known.
pub fn decision_stats_labelled(
    l: LookaheadDepth,
    sample: &[(State, u32)],
    goal: &State,
    solver_budget: u64,
) -> Result<DecisionStats, MiniminError> {
    let agent = Minimin::new(*goal);
    let mut correct = 0usize;
    let mut nodes = 0u64;
    let mut n = 0usize;
    for (s, depth) in sample {
        if s == goal {
            continue;
        }
        let mut ctx = SearchContext::new();
        let d = agent.decide(s, l, &mut ctx);
        let next = s.successor(d.op).expect("legal op");
        if optimal_depth(&next, goal, solver_budget)? < *depth {
            correct += 1;
        }
        nodes += d.nodes;
        n += 1;
    }
    if n == 0 {
        return Err(MiniminError::EmptySample);
    }
    Ok(DecisionStats { accuracy: correct as f64 / n as f64, decisions: n, mean_nodes: nodes as f64 / n as f64 })
}

pub fn decision_accuracy(l: LookaheadDepth, sample: &[State], goal: &State, solver_budget: u64) -> Result<f64, MiniminError> {
    decision_stats(l, sample, goal, solver_budget).map(|s| s.accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DEFAULT_SOLVER_BUDGET;

    fn lv(l: u32) -> LookaheadDepth {
        LookaheadDepth::new(l).unwrap()
    }

    #[test]
    fn lookahead_bounds() {
        assert!(LookaheadDepth::new(0).is_err());
        assert!(LookaheadDepth::new(24).is_ok());
        assert_eq!(LookaheadDepth::new(25), Err(MiniminError::InvalidLookahead { level: 25, max: 24 }));
        assert!(ResourceLimits::new(0, 5).is_err());
    }

    #[test]
    fn goal_adjacent_decision() {
        let goal = State::goal(3).unwrap();
        let s = goal.apply(Operator::Up).unwrap();
        for l in 1..=6 {
            let mut ctx = SearchContext::new();
            let d = minimin_decide(&s, &goal, lv(l), &mut ctx);
            assert_eq!(d.op, Operator::Down);
            assert_eq!(d.value, 1);
            assert_eq!(d.nodes, ctx.generated);
        }
    }

    #[test]
    fn trivial_runs() {
        let goal = State::goal(3).unwrap();
        let p = ProblemInstance::to_default_goal(goal).unwrap();
        assert_eq!(minimin_run(&p, lv(3), &ResourceLimits::default()), Outcome::TRIVIAL);
        let one = ProblemInstance::to_default_goal(goal.apply(Operator::Left).unwrap()).unwrap();
        for l in 1..=5 {
            let o = minimin_run(&one, lv(l), &ResourceLimits::default());
            assert!(o.solved);
            assert_eq!(o.path_length, 1);
        }
    }

    #[test]
    fn unsolved_runs_report_move_cap() {
        let goal = State::goal(3).unwrap();
        let p = ProblemInstance::to_default_goal(crate::puzzle::random_walk(&goal, 40, 5)).unwrap();
        let tight = ResourceLimits::new(3, 1_000_000).unwrap();
        let o = minimin_run(&p, lv(2), &tight);
        assert!(!o.solved);
        assert_eq!(o.path_length, 3);
        let starved = ResourceLimits::new(100, 10).unwrap();
        let o = minimin_run(&p, lv(4), &starved);
        assert!(!o.solved);
        assert_eq!(o.path_length, 100);
        assert!(o.time_units > 10);
    }

    #[test]
    fn accuracy_of_goal_adjacent_sample() {
        let goal = State::goal(3).unwrap();
        let sample: Vec<State> = goal.legal_ops().map(|op| goal.apply(op).unwrap()).collect();
        for l in [1, 3, 8] {
            assert_eq!(decision_accuracy(lv(l), &sample, &goal, DEFAULT_SOLVER_BUDGET).unwrap(), 1.0);
        }
        assert_eq!(decision_accuracy(lv(1), &[goal], &goal, DEFAULT_SOLVER_BUDGET), Err(MiniminError::EmptySample));
        assert_eq!(decision_accuracy(lv(1), &[], &goal, DEFAULT_SOLVER_BUDGET), Err(MiniminError::EmptySample));
    }
}
