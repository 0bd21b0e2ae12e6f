use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use utilsearch::config::{load_utility, parse_levels, DepthSource, ExperimentConfig, ModelKind};
use utilsearch::experiment::{fit_model, generate_suite, run_with_model};
use utilsearch::formats::{load_model, read_report, save_model, write_report};
use utilsearch::{seeds, summarize, Error};
use utilsearch_core::exact::DEFAULT_SOLVER_BUDGET;
use utilsearch_core::minimin::decision_stats;
use utilsearch_core::{
    bfs_optimal, idastar, minimin_run, select_lookahead, LookaheadDepth, Manhattan, OutcomeScorer, ProblemInstance,
    State, Utility,
};

#[derive(Parser)]
#[command(name = "utilsearch", version, about = "Utility-driven lookahead selection for sliding-tile search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal solution of one instance.
    Solve {
        /// Tiles in row-major order, 0 for the blank, e.g. "1 2 3 4 0 5 7 8 6".
        #[arg(long)]
        instance: String,
        #[arg(long, value_enum, default_value_t = Method::Idastar)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_SOLVER_BUDGET)]
        budget: u64,
    },
    /// One Minimin run.
    Minimin {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        lookahead: u32,
        #[arg(long, default_value_t = 100)]
        max_moves: u32,
        #[arg(long, default_value_t = 200_000)]
        node_budget: u64,
        /// Score the outcome with this utility config (default: built-in).
        #[arg(long)]
        utility: Option<PathBuf>,
    },
    /// Decision accuracy per level on seeded verified-depth states.
    Accuracy {
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value = "4,8,12,16,20")]
        depths: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value = "1-8")]
        levels: String,
        #[arg(long, default_value_t = 1989)]
        seed: u64,
    },
    /// Fit a performance model and save it as JSON.
    Fit {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expected utility of every level at one depth.
    Select {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        depth: u32,
        /// Also write the table as CSV here ("-" for stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Full protocol: generate, fit, select, run every level, score.
    Experiment {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Report CSV destination ("-" for stdout).
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Summary CSV destination.
        #[arg(long)]
        summary_csv: Option<PathBuf>,
        /// Save the fitted model here.
        #[arg(long)]
        save_model: Option<PathBuf>,
    },
    /// Headline statistics of a report CSV.
    Summarize {
        report: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Idastar,
    Bfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Markov,
    Empirical,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthArg {
    True,
    Manhattan,
}

/// Overrides on top of the config file (or the built-in default).
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the full-scale experiment as the base config.
    #[arg(long, conflicts_with = "config")]
    full: bool,
    #[arg(long)]
    width: Option<usize>,
    /// e.g. "4,8,12" or "2-24".
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_moves: Option<u32>,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long, value_enum)]
    model_kind: Option<ModelArg>,
    #[arg(long)]
    training: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    generations_per_minute: Option<f64>,
    #[arg(long)]
    nodes_per_megabyte: Option<f64>,
    #[arg(long, value_enum)]
    depth_source: Option<DepthArg>,
    #[arg(long)]
    utility: Option<PathBuf>,
    /// Previously saved model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = if self.full {
            ExperimentConfig::parse(utilsearch::config::FULL_EXPERIMENT)?
        } else {
            ExperimentConfig::load(self.config.as_deref())?
        };
        if let Some(base) = self.config.as_deref().and_then(Path::parent) {
            for p in [&mut cfg.utility, &mut cfg.model].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        macro_rules! set {
            ($($field:ident <- $arg:expr),* $(,)?) => { $(if let Some(v) = $arg { cfg.$field = v; })* };
        }
        set!(
            width <- self.width,
            instances_per_depth <- self.instances,
            seed <- self.seed,
            max_moves <- self.max_moves,
            node_budget <- self.node_budget,
            training_per_depth <- self.training,
            markov_samples <- self.samples,
            generations_per_minute <- self.generations_per_minute,
            nodes_per_megabyte <- self.nodes_per_megabyte,
        );
        if let Some(d) = &self.depths {
            cfg.depths = parse_levels(d)?;
        }
        if let Some(l) = &self.levels {
            cfg.levels = parse_levels(l)?;
        }
        if let Some(k) = self.model_kind {
            cfg.model_kind = match k {
                ModelArg::Markov => ModelKind::Markov,
                ModelArg::Empirical => ModelKind::Empirical,
            };
        }
        if let Some(d) = self.depth_source {
            cfg.depth_source = match d {
                DepthArg::True => DepthSource::True,
                DepthArg::Manhattan => DepthSource::Manhattan,
            };
        }
        if self.utility.is_some() {
            cfg.utility = self.utility.clone();
        }
        if self.model.is_some() {
            cfg.model = self.model.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_instance(text: &str) -> Result<ProblemInstance, Error> {
    let s: State = text.parse().map_err(|e| Error::Config(format!("instance: {e}")))?;
    Ok(ProblemInstance::to_default_goal(s)?)
}

fn model_for(cfg: &ExperimentConfig) -> Result<utilsearch_core::PerfModel, Error> {
    match &cfg.model {
        Some(p) => load_model(p),
        None => {
            eprintln!("fitting {:?} model ...", cfg.model_kind);
            fit_model(cfg)
        }
    }
}

fn write_to(path: &Path, text: &str) -> Result<(), Error> {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { instance, method, budget } => {
            let p = parse_instance(&instance)?;
            let r = match method {
                Method::Idastar => idastar(&p, &Manhattan::new(&p.goal), budget)?,
                Method::Bfs => bfs_optimal(&p, budget)?,
            };
            println!("length {}", r.path.len());
            println!("path {}", r.path);
            println!("nodes_generated {}", r.nodes_generated);
            println!("peak_stored {}", r.peak_stored);
        }
        Command::Minimin { instance, lookahead, max_moves, node_budget, utility } => {
            let p = parse_instance(&instance)?;
            let limits = utilsearch_core::ResourceLimits::new(max_moves, node_budget)?;
            let o = minimin_run(&p, LookaheadDepth::new(lookahead)?, &limits);
            let model = load_utility(utility.as_deref())?;
            let scorer = OutcomeScorer { model: &model, units: Default::default() };
            println!("solved {}", o.solved);
            println!("path_length {}", o.path_length);
            println!("time_units {}", o.time_units);
            println!("space_units {}", o.space_units);
            println!("utility {}", scorer.utility(&o)?);
        }
        Command::Accuracy { width, depths, count, levels, seed } => {
            let cfg = ExperimentConfig {
                width,
                seed,
                depths: parse_levels(&depths)?,
                levels: parse_levels(&levels)?,
                ..ExperimentConfig::parse(utilsearch::config::DEFAULT_EXPERIMENT)?
            };
            cfg.validate()?;
            let mut states = Vec::new();
            let mut goal = None;
            for &d in &cfg.depths {
                for (_, p) in generate_suite(&cfg, seeds::TRAIN_STREAM, d, count)? {
                    goal = Some(p.goal);
                    states.push(p.initial);
                }
            }
            let goal = goal.expect("nonempty suite");
            let levels = cfg.lookahead_levels()?;
            let stats = levels
                .par_iter()
                .map(|&l| decision_stats(l, &states, &goal, DEFAULT_SOLVER_BUDGET).map(|s| (l, s)))
                .collect::<Result<Vec<_>, _>>()?;
            println!("level,accuracy,decisions,mean_nodes");
            for (l, s) in stats {
                println!("{l},{},{},{}", s.accuracy, s.decisions, s.mean_nodes);
            }
        }
        Command::Fit { exp, out } => {
            let cfg = exp.resolve()?;
            save_model(&fit_model(&cfg)?, &out)?;
            eprintln!("model written to {}", out.display());
        }
        Command::Select { exp, depth, csv } => {
            let cfg = exp.resolve()?;
            let utility = load_utility(cfg.utility.as_deref())?;
            let model = model_for(&cfg)?;
            let scorer = OutcomeScorer { model: &utility, units: cfg.units() };
            let r = select_lookahead(depth, &model, &scorer, &cfg.lookahead_levels()?)?;
            println!("depth {depth}  model {}  utility {}", r.model_id, r.utility_id);
            println!("level  expected_utility");
            for (l, eu) in &r.eu_by_level {
                let mark = if *l == r.chosen_level { "  <- chosen" } else { "" };
                println!("{:<6} {:.9}{mark}", l.get(), eu);
            }
            if let Some(path) = csv {
                let mut text = String::from("depth,level,expected_utility,chosen\n");
                for (l, eu) in &r.eu_by_level {
                    text.push_str(&format!("{depth},{},{eu},{}\n", l.get(), *l == r.chosen_level));
                }
                write_to(&path, &text)?;
            }
        }
        Command::Experiment { exp, out, summary_csv, save_model: save } => {
            let cfg = exp.resolve()?;
            let utility = load_utility(cfg.utility.as_deref())?;
            let model = model_for(&cfg)?;
            if let Some(p) = &save {
                save_model(&model, p)?;
            }
            let report = match run_with_model(&cfg, &model, &utility) {
                Ok(r) => r,
                Err(Error::Aborted { partial, source }) => {
                    let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
                    write_report(&partial.rows, file)?;
                    eprintln!("partial report ({} rows) written to {}", partial.rows.len(), out.display());
                    return Err(*source);
                }
                Err(e) => return Err(e),
            };
            if out == Path::new("-") {
                write_report(&report.rows, std::io::stdout().lock())?;
            } else {
                let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
                write_report(&report.rows, file)?;
            }
            let s = summarize(&report.rows)?;
            let mut err = std::io::stderr().lock();
            for (d, sel) in &report.selections {
                let _ = writeln!(err, "depth estimate {d}: chose level {}", sel.chosen_level);
            }
            let _ = write!(err, "{}", s.table());
            if let Some(p) = summary_csv {
                write_to(&p, &s.to_csv()?)?;
            }
        }
        Command::Summarize { report, csv } => {
            let file = std::fs::File::open(&report).map_err(|e| Error::io(&report, e))?;
            let s = summarize(&read_report(file)?)?;
            print!("{}", s.table());
            if let Some(p) = csv {
                write_to(&p, &s.to_csv()?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
