//! Performance models predicting a lottery over Minimin outcomes for a given
//! instance depth and lookahead level.
//!
//! The Markov model treats the true distance to the goal as a biased random
//! walk: each committed move decreases it with the level's decision accuracy
//! and increases it otherwise (every move changes the optimal depth by
//! exactly one). The empirical model holds measured outcomes per
//! (depth, level) cell.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashSet;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MiniminError, ModelError, SolverError};
use crate::exact::Distances;
use crate::mau::Lottery;
use crate::minimin::{minimin_run, LookaheadDepth, Minimin, Outcome, ResourceLimits};
use crate::puzzle::{ProblemInstance, State};

/// Per-level parameters of the Markov model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelParams {
    pub level: u32,
    /// Probability that one decision moves closer to the goal.
    pub accuracy: f64,
    /// Effective branching factor; a decision generates
    /// `sum_{i=1..level} branching^i` nodes.
    pub branching: f64,
    /// Decisions the estimate was measured on.
    pub sample_size: usize,
}

impl LevelParams {
    pub fn nodes_per_decision(&self) -> u64 {
        let mut total = 0.0;
        let mut term = 1.0;
        for _ in 0..self.level {
            term *= self.branching;
            total += term;
        }
        libm::round(total) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkovParams {
    /// Sorted by level.
    pub levels: Vec<LevelParams>,
    /// Walks longer than this are truncated as unsolved.
    pub max_len: u32,
    /// Decisions taken within `level` of the goal are optimal: the goal
    /// itself is inside the lookahead tree.
    pub exact_within_horizon: bool,
}

impl MarkovParams {
    pub fn new(mut levels: Vec<LevelParams>, max_len: u32, exact_within_horizon: bool) -> Result<MarkovParams, ModelError> {
        levels.sort_by_key(|p| p.level);
        if levels.windows(2).any(|w| w[0].level == w[1].level) {
            return Err(ModelError::InvalidParams("duplicate level"));
        }
        for p in &levels {
            if !(0.0..=1.0).contains(&p.accuracy) {
                return Err(ModelError::InvalidParams("accuracy outside [0, 1]"));
            }
            if !(p.branching > 1.0) || !p.branching.is_finite() {
                return Err(ModelError::InvalidParams("branching factor must exceed 1"));
            }
            if p.level == 0 {
                return Err(ModelError::InvalidParams("level 0"));
            }
        }
        if max_len == 0 {
            return Err(ModelError::InvalidParams("max_len must be positive"));
        }
        Ok(MarkovParams { levels, max_len, exact_within_horizon })
    }

    pub fn level(&self, l: LookaheadDepth) -> Option<&LevelParams> {
        self.levels.iter().find(|p| p.level == l.get())
    }
}

/// Simulates `samples` walks from distance `depth`. Walk `i` draws from its
/// own ChaCha stream, so levels share randomness step by step.
pub fn markov_predict(
    params: &MarkovParams,
    depth: u32,
    l: LookaheadDepth,
    samples: usize,
    seed: u64,
) -> Result<Lottery<Outcome>, ModelError> {
    let lp = params.level(l).ok_or(ModelError::MissingAccuracy(l.get()))?;
    if samples == 0 {
        return Err(ModelError::EmptySample);
    }
    let per_decision = lp.nodes_per_decision();
    let space = l.get() as u64 + 1;
    let horizon = if params.exact_within_horizon { l.get() } else { 0 };
    let mut counts: BTreeMap<(u32, bool), usize> = BTreeMap::new();
    for i in 0..samples {
        let (len, solved) = if depth == 0 {
            (0, true)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            walk(depth, lp.accuracy, horizon, params.max_len, &mut rng)
        };
        *counts.entry((len, solved)).or_insert(0) += 1;
    }
    let n = samples as f64;
    let entries = counts
        .into_iter()
        .map(|((len, solved), c)| {
            let moves = if solved { len } else { params.max_len };
            let o = Outcome {
                path_length: moves,
                time_units: moves as u64 * per_decision,
                space_units: if moves == 0 { 0 } else { space },
                solved,
            };
            (o, c as f64 / n)
        })
        .collect();
    Ok(Lottery::new(entries)?)
}

fn walk<R: Rng>(start: u32, p: f64, horizon: u32, max_len: u32, rng: &mut R) -> (u32, bool) {
    let mut dist = start;
    let mut steps = 0u32;
    while dist > 0 {
        if dist <= horizon {
            let total = steps + dist;
            return if total <= max_len { (total, true) } else { (max_len, false) };
        }
        if steps == max_len {
            return (max_len, false);
        }
        if p >= 1.0 || rng.random::<f64>() < p {
            dist -= 1;
        } else {
            dist += 1;
        }
        steps += 1;
    }
    (steps, true)
}

/// Pool-adjacent-violators: the weighted least-squares nondecreasing fit.
pub fn isotonic_nondecreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w.max(f64::MIN_POSITIVE), 1));
        while blocks.len() > 1 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("two blocks");
            *last = ((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, c1 + c2);
        }
    }
    blocks.iter().flat_map(|&(m, _, c)| core::iter::repeat_n(m, c)).collect()
}

/// Branching factor `b > 1` with `sum_{i=1..level} b^i = nodes`.
pub fn effective_branching(level: u32, nodes: f64) -> f64 {
    let total = |b: f64| (1..=level).map(|i| libm::pow(b, i as f64)).sum::<f64>();
    let (mut lo, mut hi) = (1.0 + 1e-9, 4.0);
    if total(lo) >= nodes {
        return lo;
    }
    while total(hi) < nodes {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < nodes {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimates accuracy and branching per level by running Minimin on the
/// training instances. Accuracy at level `l` is the decision accuracy over
/// the distinct states the runs visit that lie deeper than `l` (shallower
/// ones are decided exactly); it defaults to 1 when there are none, and the
/// sequence is then made nondecreasing. Branching is fitted to the mean
/// nodes per decision.
pub fn fit_markov(
    training: &[ProblemInstance],
    levels: &[LookaheadDepth],
    limits: &ResourceLimits,
    solver_budget: u64,
) -> Result<MarkovParams, ModelError> {
    let goal = match training.first() {
        Some(p) => p.goal,
        None => return Err(ModelError::EmptySample),
    };
    if training.iter().any(|p| p.goal != goal) {
        return Err(ModelError::InvalidParams("training instances must share a goal"));
    }
    let mut dist = Distances::new(&goal, solver_budget);
    let agent = Minimin::new(goal);
    let mut sorted: Vec<LookaheadDepth> = levels.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut raw = Vec::with_capacity(sorted.len());
    for &l in &sorted {
        let mut seen: HashSet<State> = HashSet::new();
        let (mut correct, mut decisions, mut nodes) = (0usize, 0u64, 0u64);
        let mut failure: Option<SolverError> = None;
        for p in training {
            agent.run_traced(&p.initial, l, limits, |s, d, _| {
                decisions += 1;
                nodes += d.nodes;
                if failure.is_some() || !seen.insert(*s) {
                    return;
                }
                let next = s.successor(d.op).expect("legal op");
                match (dist.get(s), dist.get(&next)) {
                    (Ok(here), Ok(there)) if here > l.get() => correct += (there < here) as usize,
                    (Ok(_), Ok(_)) => {
                        seen.remove(s);
                    }
                    (Err(e), _) | (_, Err(e)) => failure = Some(e),
                }
            });
            if let Some(e) = failure.take() {
                return Err(MiniminError::from(e).into());
            }
        }
        let counted = seen.len();
        let accuracy = if counted == 0 { 1.0 } else { correct as f64 / counted as f64 };
        let mean_nodes = if decisions == 0 { l.get() as f64 + 1.0 } else { nodes as f64 / decisions as f64 };
        raw.push(LevelParams {
            level: l.get(),
            accuracy,
            branching: effective_branching(l.get(), mean_nodes),
            sample_size: counted,
        });
    }
    let values: Vec<f64> = raw.iter().map(|p| p.accuracy).collect();
    let weights: Vec<f64> = raw.iter().map(|p| p.sample_size.max(1) as f64).collect();
    for (p, a) in raw.iter_mut().zip(isotonic_nondecreasing(&values, &weights)) {
        p.accuracy = a;
    }
    MarkovParams::new(raw, limits.max_moves, true)
}

/// Outcomes measured in one (depth, level) cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalCell {
    pub depth: u32,
    pub level: u32,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalTable {
    /// Sorted by (depth, level).
    cells: Vec<EmpiricalCell>,
    /// Seeds of the instances each depth bucket was measured on.
    pub seeds: Vec<(u32, Vec<u64>)>,
    /// Clamp queries outside the measured depths to the nearest bucket.
    pub extrapolate: bool,
}

impl EmpiricalTable {
    pub fn new() -> EmpiricalTable {
        EmpiricalTable::default()
    }

    pub fn insert(&mut self, depth: u32, level: u32, outcomes: Vec<Outcome>) -> Result<(), ModelError> {
        if outcomes.is_empty() {
            return Err(ModelError::EmptySample);
        }
        match self.cells.binary_search_by_key(&(depth, level), |c| (c.depth, c.level)) {
            Ok(i) => self.cells[i].outcomes = outcomes,
            Err(i) => self.cells.insert(i, EmpiricalCell { depth, level, outcomes }),
        }
        Ok(())
    }

    pub fn cells(&self) -> &[EmpiricalCell] {
        &self.cells
    }

    pub fn cell(&self, depth: u32, level: u32) -> Option<&EmpiricalCell> {
        self.cells
            .binary_search_by_key(&(depth, level), |c| (c.depth, c.level))
            .ok()
            .map(|i| &self.cells[i])
    }

    fn depths_for(&self, level: u32) -> Vec<u32> {
        self.cells.iter().filter(|c| c.level == level).map(|c| c.depth).collect()
    }

    pub fn predict(&self, depth: u32, l: LookaheadDepth) -> Result<Lottery<Outcome>, ModelError> {
        let depths = self.depths_for(l.get());
        let (first, last) = match (depths.first(), depths.last()) {
            (Some(&f), Some(&t)) => (f, t),
            _ => return Err(ModelError::MissingLevel(l.get())),
        };
        let lottery = |d: u32| -> Result<Lottery<Outcome>, ModelError> {
            let cell = self.cell(d, l.get()).expect("depth listed");
            Ok(Lottery::from_samples(cell.outcomes.clone())?)
        };
        if depth < first || depth > last {
            if !self.extrapolate {
                return Err(ModelError::OutOfRange(depth));
            }
            return lottery(if depth < first { first } else { last });
        }
        if depths.contains(&depth) {
            return lottery(depth);
        }
        let upper = depths.iter().copied().find(|&d| d > depth).expect("inside range");
        let lower = depths.iter().copied().rev().find(|&d| d < depth).expect("inside range");
        let w = (depth - lower) as f64 / (upper - lower) as f64;
        Ok(lottery(lower)?.mixture(&lottery(upper)?, w)?)
    }
}

/// Runs Minimin on every instance of every cell.
pub fn fit_empirical(
    suite: &[(u32, Vec<(u64, ProblemInstance)>)],
    levels: &[LookaheadDepth],
    limits: &ResourceLimits,
) -> Result<EmpiricalTable, ModelError> {
    let mut table = EmpiricalTable::new();
    for (depth, instances) in suite {
        if instances.is_empty() {
            return Err(ModelError::EmptySample);
        }
        for &l in levels {
            let outcomes = instances.iter().map(|(_, p)| minimin_run(p, l, limits)).collect();
            table.insert(*depth, l.get(), outcomes)?;
        }
        table.seeds.push((*depth, instances.iter().map(|(s, _)| *s).collect()));
    }
    Ok(table)
}

/// Markov parameters together with the sampling settings used to query
/// them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkovModel {
    pub params: MarkovParams,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PerfModel {
    Markov(MarkovModel),
    Empirical(EmpiricalTable),
}

impl PerfModel {
    pub fn predict(&self, depth: u32, l: LookaheadDepth) -> Result<Lottery<Outcome>, ModelError> {
        match self {
            PerfModel::Markov(m) => markov_predict(&m.params, depth, l, m.samples, m.seed),
            PerfModel::Empirical(t) => t.predict(depth, l),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            PerfModel::Markov(_) => "markov",
            PerfModel::Empirical(_) => "empirical",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lv(l: u32) -> LookaheadDepth {
        LookaheadDepth::new(l).unwrap()
    }

    fn params(p: f64, horizon: bool) -> MarkovParams {
        MarkovParams::new(vec![LevelParams { level: 2, accuracy: p, branching: 1.7, sample_size: 1 }], 10_000, horizon).unwrap()
    }

    fn mean_len(l: &Lottery<Outcome>) -> f64 {
        l.mean_by(|o| o.path_length as f64)
    }

    #[test]
    fn deterministic_walks() {
        let lot = markov_predict(&params(1.0, false), 20, lv(2), 100, 1).unwrap();
        assert_eq!(lot.len(), 1);
        assert_eq!(lot.entries()[0].0.path_length, 20);
        let lot = markov_predict(&params(0.8, false), 1, lv(2), 5000, 1).unwrap();
        assert_eq!(lot.entries()[0].0.path_length, 1);
        assert!(lot.entries().iter().all(|(o, _)| o.path_length % 2 == 1));
        assert_eq!(markov_predict(&params(0.8, false), 5, lv(3), 10, 1), Err(ModelError::MissingAccuracy(3)));
    }

    #[test]
    fn horizon_rule_shortcuts_the_end() {
        let lot = markov_predict(&params(0.6, true), 2, lv(2), 100, 1).unwrap();
        assert_eq!(lot.entries(), &[(Outcome { path_length: 2, time_units: 2 * 5, space_units: 3, solved: true }, 1.0)]);
    }

    #[test]
    fn hitting_time_mean() {
        let lot = markov_predict(&params(0.75, false), 20, lv(2), 20_000, 7).unwrap();
        assert!((mean_len(&lot) - 40.0).abs() / 40.0 < 0.05);
    }

    #[test]
    fn truncation_marks_unsolved() {
        let p = MarkovParams::new(vec![LevelParams { level: 1, accuracy: 0.3, branching: 2.0, sample_size: 1 }], 50, false).unwrap();
        let lot = markov_predict(&p, 30, lv(1), 200, 3).unwrap();
        let unsolved: f64 = lot.entries().iter().filter(|(o, _)| !o.solved).map(|(_, p)| p).sum();
        assert!(unsolved > 0.9);
        assert!(lot.entries().iter().filter(|(o, _)| !o.solved).all(|(o, _)| o.path_length == 50));
    }

    #[test]
    fn pava() {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&isotonic_nondecreasing(&[0.5, 0.7, 0.6, 0.9], &[1.0; 4]), &[0.5, 0.65, 0.65, 0.9]));
        assert!(close(&isotonic_nondecreasing(&[0.9, 0.6], &[1.0, 2.0]), &[0.7, 0.7]));
        assert_eq!(isotonic_nondecreasing(&[0.1, 0.2], &[1.0, 1.0]), vec![0.1, 0.2]);
    }

    #[test]
    fn branching_inverts_node_count() {
        let b = effective_branching(5, 1.7 + 1.7f64.powi(2) + 1.7f64.powi(3) + 1.7f64.powi(4) + 1.7f64.powi(5));
        assert!((b - 1.7).abs() < 1e-9);
        assert!(effective_branching(3, 1.0) > 1.0);
    }

    #[test]
    fn empirical_interpolation() {
        let o = |len| Outcome { path_length: len, time_units: 10 * len as u64, space_units: 3, solved: true };
        let mut t = EmpiricalTable::new();
        t.insert(4, 2, vec![o(4), o(6)]).unwrap();
        t.insert(8, 2, vec![o(10)]).unwrap();
        assert_eq!(t.predict(8, lv(2)).unwrap().entries(), &[(o(10), 1.0)]);
        let mid = t.predict(6, lv(2)).unwrap();
        assert!((mean_len(&mid) - 7.5).abs() < 1e-12);
        assert_eq!(t.predict(9, lv(2)), Err(ModelError::OutOfRange(9)));
        assert_eq!(t.predict(6, lv(3)), Err(ModelError::MissingLevel(3)));
        t.extrapolate = true;
        assert_eq!(t.predict(9, lv(2)).unwrap().entries(), &[(o(10), 1.0)]);
        assert_eq!(t.insert(4, 5, vec![]), Err(ModelError::EmptySample));
    }
}
