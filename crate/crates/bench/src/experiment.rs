//! The lookahead-selection experiment: generate verified-depth instances,
//! fit a performance model, select a level per instance, then run Minimin
//! at every level and score what actually happened.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use utilsearch_core::exact::DEFAULT_SOLVER_BUDGET;
use utilsearch_core::perfmodel::EmpiricalTable;
use utilsearch_core::{
    fit_markov, instance_of_depth, manhattan, minimin_run, select_lookahead, LookaheadDepth, MarkovModel, OutcomeScorer,
    PerfModel, ProblemInstance, ResourceLimits, SelectionReport, UtilityModel,
};

use crate::config::{DepthSource, ExperimentConfig, ModelKind};
use crate::seeds;
use crate::Error;

/// One (instance, level) cell. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub depth: u32,
    pub instance_id: u64,
    pub seed: u64,
    pub level: u32,
    /// Level selected for this instance.
    pub chosen: u32,
    pub path_length: u32,
    pub time_units: u64,
    pub space_units: u64,
    pub solved: bool,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// Selector diagnostics keyed by the depth estimate it was given.
    pub selections: Vec<(u32, SelectionReport)>,
}

/// Seeded instances of one depth from the given stream.
pub fn generate_suite(
    cfg: &ExperimentConfig,
    stream: u64,
    depth: u32,
    count: usize,
) -> Result<Vec<(u64, ProblemInstance)>, Error> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = seeds::derive(cfg.seed, stream, depth, i);
            instance_of_depth(depth, cfg.width, seed, cfg.generation_attempts).map(|p| (seed, p)).map_err(Error::from)
        })
        .collect()
}

/// Fits the configured model on training instances drawn from their own
/// seed stream.
pub fn fit_model(cfg: &ExperimentConfig) -> Result<PerfModel, Error> {
    let levels = cfg.lookahead_levels()?;
    let mut suites = Vec::with_capacity(cfg.depths.len());
    for &d in &cfg.depths {
        suites.push((d, generate_suite(cfg, seeds::TRAIN_STREAM, d, cfg.training_per_depth)?));
    }
    match cfg.model_kind {
        ModelKind::Markov => {
            let training: Vec<ProblemInstance> = suites.iter().flat_map(|(_, s)| s.iter().map(|(_, p)| *p)).collect();
            let params = fit_markov(&training, &levels, &cfg.limits(), DEFAULT_SOLVER_BUDGET)?;
            Ok(PerfModel::Markov(MarkovModel {
                params,
                samples: cfg.markov_samples,
                seed: seeds::derive(cfg.seed, seeds::MODEL_STREAM, 0, 0),
            }))
        }
        ModelKind::Empirical => Ok(PerfModel::Empirical(fit_empirical_parallel(&suites, &levels, &cfg.limits())?)),
    }
}

fn fit_empirical_parallel(
    suites: &[(u32, Vec<(u64, ProblemInstance)>)],
    levels: &[LookaheadDepth],
    limits: &ResourceLimits,
) -> Result<EmpiricalTable, Error> {
    let jobs: Vec<(u32, LookaheadDepth, &[(u64, ProblemInstance)])> =
        suites.iter().flat_map(|(d, s)| levels.iter().map(move |&l| (*d, l, s.as_slice()))).collect();
    let cells: Vec<(u32, u32, Vec<_>)> = jobs
        .par_iter()
        .map(|&(d, l, s)| (d, l.get(), s.iter().map(|(_, p)| minimin_run(p, l, limits)).collect()))
        .collect();
    let mut table = EmpiricalTable::new();
    for (d, l, outcomes) in cells {
        table.insert(d, l, outcomes)?;
    }
    table.seeds = suites.iter().map(|(d, s)| (*d, s.iter().map(|(seed, _)| *seed).collect())).collect();
    Ok(table)
}

/// Runs the protocol with a freshly fitted model.
pub fn run_experiment(cfg: &ExperimentConfig, utility: &UtilityModel) -> Result<ExperimentReport, Error> {
    let model = fit_model(cfg)?;
    run_with_model(cfg, &model, utility)
}

/// Runs the protocol with a given model. If a depth fails to generate, the
/// rows of the depths completed so far travel with the error.
pub fn run_with_model(cfg: &ExperimentConfig, model: &PerfModel, utility: &UtilityModel) -> Result<ExperimentReport, Error> {
    cfg.validate()?;
    let levels = cfg.lookahead_levels()?;
    let limits = cfg.limits();
    let scorer = OutcomeScorer { model: utility, units: cfg.units() };
    let mut report = ExperimentReport::default();
    let mut selections: BTreeMap<u32, SelectionReport> = BTreeMap::new();
    for &depth in &cfg.depths {
        let suite = match generate_suite(cfg, seeds::TEST_STREAM, depth, cfg.instances_per_depth) {
            Ok(s) => s,
            Err(e) => return Err(Error::Aborted { partial: Box::new(finish(report, selections)), source: Box::new(e) }),
        };
        let mut chosen = Vec::with_capacity(suite.len());
        for (_, p) in &suite {
            let estimate = match cfg.depth_source {
                DepthSource::True => depth,
                DepthSource::Manhattan => manhattan(&p.initial, &p.goal),
            };
            if !selections.contains_key(&estimate) {
                let sel = select_lookahead(estimate, model, &scorer, &levels)?;
                selections.insert(estimate, sel);
            }
            chosen.push(selections[&estimate].chosen_level.get());
        }
        let jobs: Vec<(usize, LookaheadDepth)> =
            (0..suite.len()).flat_map(|i| levels.iter().map(move |&l| (i, l))).collect();
        let rows: Vec<ReportRow> = jobs
            .par_iter()
            .map(|&(i, l)| {
                let (seed, p) = &suite[i];
                let o = minimin_run(p, l, &limits);
                let utility = utilsearch_core::Utility::utility(&scorer, &o)?;
                Ok(ReportRow {
                    depth,
                    instance_id: i as u64,
                    seed: *seed,
                    level: l.get(),
                    chosen: chosen[i],
                    path_length: o.path_length,
                    time_units: o.time_units,
                    space_units: o.space_units,
                    solved: o.solved,
                    utility,
                })
            })
            .collect::<Result<_, Error>>()?;
        report.rows.extend(rows);
    }
    Ok(finish(report, selections))
}

fn finish(mut report: ExperimentReport, selections: BTreeMap<u32, SelectionReport>) -> ExperimentReport {
    report.selections = selections.into_iter().collect();
    report
}
