//! Headline statistics of an experiment report.
//!
//! Per instance, the empirically best levels are all levels whose actual
//! utility equals the maximum; a choice counts as best if it is any of them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::experiment::ReportRow;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub instances: usize,
    /// Chosen level's utility ties or beats every level.
    pub fraction_highest: f64,
    /// Chosen level within one of some best level.
    pub fraction_within_one: f64,
    /// Largest distance from the chosen level to the nearest best level.
    pub max_level_error: u32,
    /// Mean of `(best - chosen) / best` utility; zero where best is zero.
    pub mean_relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthSummary {
    pub depth: u32,
    #[serde(flatten)]
    pub stats: Stats,
    pub mean_chosen_utility: f64,
    /// Fixed level with the highest mean utility over the depth's instances.
    pub best_fixed_level: u32,
    pub best_fixed_utility: f64,
    /// `(best_fixed - chosen) / best_fixed` of the mean utilities.
    pub fixed_level_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub overall: Stats,
    pub per_depth: Vec<DepthSummary>,
}

struct Instance {
    chosen: u32,
    utilities: BTreeMap<u32, f64>,
}

impl Instance {
    fn level_error(&self) -> (bool, u32, f64) {
        let best = self.utilities.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let chosen_u = self.utilities[&self.chosen];
        let error = self
            .utilities
            .iter()
            .filter(|(_, u)| **u == best)
            .map(|(l, _)| l.abs_diff(self.chosen))
            .min()
            .expect("nonempty");
        let gap = if best > 0.0 { (best - chosen_u) / best } else { 0.0 };
        (chosen_u >= best, error, gap)
    }
}

fn stats<'a>(instances: impl Iterator<Item = &'a Instance>) -> Stats {
    let (mut n, mut highest, mut within, mut max_err, mut gap) = (0usize, 0usize, 0usize, 0u32, 0.0);
    for inst in instances {
        let (best, err, g) = inst.level_error();
        n += 1;
        highest += best as usize;
        within += (err <= 1) as usize;
        max_err = max_err.max(err);
        gap += g;
    }
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    Stats {
        instances: n,
        fraction_highest: frac(highest),
        fraction_within_one: frac(within),
        max_level_error: max_err,
        mean_relative_gap: if n == 0 { 0.0 } else { gap / n as f64 },
    }
}

pub fn summarize(rows: &[ReportRow]) -> Result<Summary, Error> {
    let incomplete = |msg: String| Error::IncompleteReport(msg);
    let levels: std::collections::BTreeSet<u32> = rows.iter().map(|r| r.level).collect();
    let mut by_instance: BTreeMap<(u32, u64), Instance> = BTreeMap::new();
    for r in rows {
        let inst = by_instance.entry((r.depth, r.instance_id)).or_insert(Instance { chosen: r.chosen, utilities: BTreeMap::new() });
        if inst.chosen != r.chosen {
            return Err(incomplete(format!("instance {}/{} has conflicting choices", r.depth, r.instance_id)));
        }
        if inst.utilities.insert(r.level, r.utility).is_some() {
            return Err(incomplete(format!("instance {}/{} repeats level {}", r.depth, r.instance_id, r.level)));
        }
    }
    if by_instance.is_empty() {
        return Err(incomplete("no rows".into()));
    }
    for ((d, i), inst) in &by_instance {
        if inst.utilities.len() != levels.len() {
            return Err(incomplete(format!("instance {d}/{i} lacks some levels")));
        }
        if !inst.utilities.contains_key(&inst.chosen) {
            return Err(incomplete(format!("instance {d}/{i} chose unrun level {}", inst.chosen)));
        }
    }
    let overall = stats(by_instance.values());
    let depths: std::collections::BTreeSet<u32> = by_instance.keys().map(|(d, _)| *d).collect();
    let per_depth = depths
        .into_iter()
        .map(|depth| {
            let insts: Vec<&Instance> = by_instance.range((depth, 0)..=(depth, u64::MAX)).map(|(_, v)| v).collect();
            let n = insts.len() as f64;
            let mean_chosen_utility = insts.iter().map(|i| i.utilities[&i.chosen]).sum::<f64>() / n;
            let (best_fixed_level, best_fixed_utility) = levels
                .iter()
                .map(|&l| (l, insts.iter().map(|i| i.utilities[&l]).sum::<f64>() / n))
                .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            let fixed_level_gap =
                if best_fixed_utility > 0.0 { (best_fixed_utility - mean_chosen_utility) / best_fixed_utility } else { 0.0 };
            DepthSummary {
                depth,
                stats: stats(insts.into_iter()),
                mean_chosen_utility,
                best_fixed_level,
                best_fixed_utility,
                fixed_level_gap,
            }
        })
        .collect();
    Ok(Summary { overall, per_depth })
}

impl Summary {
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("depth  n     highest  within1  maxerr  rel.gap    chosen.u   best.fixed(l)  fixed.gap\n");
        for d in &self.per_depth {
            out.push_str(&format!(
                "{:<6} {:<5} {:<8.3} {:<8.3} {:<7} {:<10.3e} {:<10.6} {:<8.6}({:>2})   {:.3e}\n",
                d.depth,
                d.stats.instances,
                d.stats.fraction_highest,
                d.stats.fraction_within_one,
                d.stats.max_level_error,
                d.stats.mean_relative_gap,
                d.mean_chosen_utility,
                d.best_fixed_utility,
                d.best_fixed_level,
                d.fixed_level_gap,
            ));
        }
        let o = &self.overall;
        out.push_str(&format!(
            "all    {:<5} {:<8.3} {:<8.3} {:<7} {:<10.3e}\n",
            o.instances, o.fraction_highest, o.fraction_within_one, o.max_level_error, o.mean_relative_gap
        ));
        out.push_str(&format!(
            "\nreference run (1000 instances per depth): highest 0.883, within one 0.954, max error 3, gap < 0.001\n\
             this run:                                 highest {:.3}, within one {:.3}, max error {}, gap {:.4}\n",
            o.fraction_highest, o.fraction_within_one, o.max_level_error, o.mean_relative_gap
        ));
        out
    }

    /// Per-depth rows followed by an `all` row.
    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "depth",
            "instances",
            "fraction_highest",
            "fraction_within_one",
            "max_level_error",
            "mean_relative_gap",
            "mean_chosen_utility",
            "best_fixed_level",
            "best_fixed_utility",
            "fixed_level_gap",
        ])?;
        for d in &self.per_depth {
            w.write_record([
                d.depth.to_string(),
                d.stats.instances.to_string(),
                d.stats.fraction_highest.to_string(),
                d.stats.fraction_within_one.to_string(),
                d.stats.max_level_error.to_string(),
                d.stats.mean_relative_gap.to_string(),
                d.mean_chosen_utility.to_string(),
                d.best_fixed_level.to_string(),
                d.best_fixed_utility.to_string(),
                d.fixed_level_gap.to_string(),
            ])?;
        }
        let o = &self.overall;
        w.write_record([
            "all".to_string(),
            o.instances.to_string(),
            o.fraction_highest.to_string(),
            o.fraction_within_one.to_string(),
            o.max_level_error.to_string(),
            o.mean_relative_gap.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}
