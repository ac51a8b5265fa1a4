//! `passgraph`: graphlet entropy analysis of possession passing data.
//!
//! Exit codes: 0 on success, 1 on invalid input or any runtime failure,
//! 2 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use passgraph::protocol::CompareValue;
use passgraph::{FeasibilityRule, Metric};

mod commands;
mod render;

use render::Format;

#[derive(Debug, Parser)]
#[command(name = "passgraph", version, about = "Graphlet entropy analysis of possession passing data")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Window duration in seconds.
    #[arg(long, global = true, default_value_t = 6.0)]
    pub delta: f64,
    /// Window step in seconds.
    #[arg(long, global = true, default_value_t = 0.25)]
    pub tau: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Echo input paths as bare file names.
    #[arg(long, global = true)]
    pub portable: bool,
    /// Rule deriving the state-to-state feasibility matrix behind the maxima.
    #[arg(long, global = true, default_value = "walk-edit", value_parser = parse_rule)]
    pub feasibility: FeasibilityRule,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

fn parse_rule(s: &str) -> Result<FeasibilityRule, String> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse()
}

fn parse_value(s: &str) -> Result<CompareValue, String> {
    s.parse()
}

/// Either a directory holding `events.csv` and `possessions.csv`, or both
/// files named explicitly.
#[derive(Debug, Clone, Args)]
pub struct Input {
    #[arg(long, conflicts_with_all = ["events", "possessions"], required_unless_present_all = ["events", "possessions"])]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "possessions")]
    pub events: Option<PathBuf>,
    #[arg(long, requires = "events")]
    pub possessions: Option<PathBuf>,
}

impl Input {
    pub fn paths(&self) -> (PathBuf, PathBuf) {
        match (&self.data, &self.events, &self.possessions) {
            (Some(d), _, _) => (d.join("events.csv"), d.join("possessions.csv")),
            (None, Some(e), Some(p)) => (e.clone(), p.clone()),
            _ => unreachable!("clap enforces one input form"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    Team,
    Game,
    TeamGame,
    ScoreClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Planted {
    Partition,
    Signal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Supervised,
    Search,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check input files against the dataset invariants.
    Validate(Input),
    /// Write a synthetic dataset with its ground-truth manifest.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        games: usize,
        /// Emit a dataset with planted structure instead of random play.
        #[arg(long, value_enum)]
        planted: Option<Planted>,
    },
    #[command(subcommand)]
    Graphlets(GraphletsCommand),
    /// State counts and shares, or transition shares, per group.
    Profile {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = GroupBy::Team)]
        group_by: GroupBy,
        #[arg(long)]
        transitions: bool,
    },
    /// SE, TE and RTE per group.
    Entropy {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = GroupBy::Team)]
        group_by: GroupBy,
        /// Print percentages of the theoretical maxima.
        #[arg(long)]
        normalize: bool,
    },
    /// Score classes: the five fixed classes or the searched 3-class split.
    Classify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Supervised)]
        mode: Mode,
        #[arg(long, default_value = "se", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long, default_value_t = 0.10)]
        min_share: f64,
        /// Minimum number of score values in each searched class.
        #[arg(long, default_value_t = 2)]
        min_width: i32,
        /// One classification per team instead of one over all possessions.
        #[arg(long)]
        per_team: bool,
    },
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Run the full analysis and write every table into a directory.
    Report {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.10)]
        min_share: f64,
        #[arg(long, default_value_t = 2)]
        min_width: i32,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphletsCommand {
    /// The state of every window of every possession.
    Dump(Input),
    /// Feasibility matrix under both rules.
    Feasibility,
    /// Entropy maxima under both rules and both state weightings.
    Maxima,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Spearman correlation of game entropies with game points.
    Correlation(Input),
    /// Winner against loser per game, one-sided.
    WinnerLoser(Input),
    /// Paired tests between lower, middle and upper classes across teams.
    ClassCompare {
        /// Class rows as CSV; `#` lines are skipped.
        #[arg(long)]
        input: PathBuf,
        /// Keep only rows searched on this metric.
        #[arg(long, value_parser = parse_metric)]
        metric: Option<Metric>,
        /// Values to compare.
        #[arg(long, value_delimiter = ',', default_value = "se,te,rte,pts", value_parser = parse_value)]
        values: Vec<CompareValue>,
    },
    /// Pairwise chi-square independence of state counts between groups.
    ProfileChisq {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = GroupBy::ScoreClass)]
        group_by: GroupBy,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    env_logger::Builder::new()
        .filter_level(if cli.global.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match commands::dispatch(&cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
