//! Utility-guided real-time search on sliding-tile puzzles.
//!
//! * [`puzzle`]: states, blank-movement operators, Manhattan distance.
//! * [`exact`]: breadth-first and IDA* shortest-path solvers.
//! * [`minimin`]: fixed-depth lookahead agent with resource accounting.
//! * [`mau`]: lotteries, expected utility and multiattribute utility models.
//! * [`perfmodel`]: Markov and empirical predictors of run outcomes.
//! * [`selector`]: expected-utility choice of lookahead level or algorithm.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod mau;
pub mod minimin;
pub mod perfmodel;
pub mod puzzle;
pub mod selector;

pub use error::{MauError, MiniminError, ModelError, PuzzleError, SelectError, SolverError};
pub use exact::{bfs_optimal, idastar, instance_of_depth, ExactResult};
pub use mau::{
    calibrate_multiplicative, choose_max_eu, expected_utility, expected_value, Attribute, AttributeUtility,
    AttributeValues, Form, Lottery, OutcomeScorer, UnitConversion, Utility, UtilityModel,
};
pub use minimin::{decision_accuracy, minimin_decide, minimin_run, LookaheadDepth, Minimin, Outcome, ResourceLimits};
pub use perfmodel::{fit_empirical, fit_markov, markov_predict, EmpiricalTable, MarkovModel, MarkovParams, PerfModel};
pub use puzzle::{manhattan, random_walk, Heuristic, Manhattan, Operator, ProblemInstance, SearchContext, SolutionPath, State};
pub use selector::{compare_algorithms, select_lookahead, SelectionReport};
