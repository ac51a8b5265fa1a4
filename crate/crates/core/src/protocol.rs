//! The full analysis on one dataset: game-level entropies against points,
//! winners against losers, the five fixed score classes, the per-team
//! 3-class search and the paired comparison of the resulting classes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{theoretical_maxima, EntropyError, EntropyReport, Metric};
use crate::graphlets::{ChainError, Feasibility, FeasibilityRule, GraphletState, N_STATES};
use crate::ingest::{Dataset, Possession};
use crate::profiles::{profile_of, Profile};
use crate::scorepart::{
    best_partition, supervised_classes, Analysis, Partition, PartitionError, ScoreClass, SearchParams,
};
use crate::stats::{chisq_independence, spearman, wilcoxon_signed_rank, Alternative, StatsError, TestResult};
use crate::windowing::{retained_fraction, WindowParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub params: WindowParams,
    pub rule: FeasibilityRule,
    pub search: SearchParams,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { params: WindowParams::default(), rule: FeasibilityRule::WalkEdit, search: SearchParams::default() }
    }
}

impl Settings {
    pub fn analysis(&self) -> Result<Analysis, EntropyError> {
        Ok(Analysis { params: self.params, maxima: theoretical_maxima(&Feasibility::for_rule(self.rule))? })
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("class comparison input: {0}")]
    CompareInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Win,
    Loss,
    Tie,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Win => "win",
            Outcome::Loss => "loss",
            Outcome::Tie => "tie",
        })
    }
}

/// One team's offense in one game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamGame {
    pub game_id: String,
    pub team: String,
    pub opponent: String,
    pub points: u32,
    pub opponent_points: u32,
    pub outcome: Outcome,
    pub n_possessions: u64,
    pub n_windows: u64,
    pub entropy: Option<EntropyReport>,
}

pub fn team_games(dataset: &Dataset, analysis: &Analysis) -> Result<Vec<TeamGame>, ChainError> {
    let mut out = Vec::new();
    for g in &dataset.games {
        for (team, opp, pts, opp_pts) in [
            (&g.team_a, &g.team_b, g.final_score_a, g.final_score_b),
            (&g.team_b, &g.team_a, g.final_score_b, g.final_score_a),
        ] {
            let profile = profile_of(g.possessions_of(team), &analysis.params)?;
            out.push(TeamGame {
                game_id: g.game_id.clone(),
                team: team.clone(),
                opponent: opp.clone(),
                points: pts,
                opponent_points: opp_pts,
                outcome: match pts.cmp(&opp_pts) {
                    std::cmp::Ordering::Greater => Outcome::Win,
                    std::cmp::Ordering::Less => Outcome::Loss,
                    std::cmp::Ordering::Equal => Outcome::Tie,
                },
                n_possessions: profile.n_possessions,
                n_windows: profile.n_windows(),
                entropy: analysis.entropy_of(&profile),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTest {
    pub metric: Metric,
    pub result: Result<TestResult, StatsError>,
}

/// Spearman correlation of each metric with game points, two-sided, over
/// team-games that have at least one window.
pub fn entropy_points_correlation(games: &[TeamGame]) -> Vec<MetricTest> {
    let with: Vec<(&EntropyReport, f64)> =
        games.iter().filter_map(|g| g.entropy.as_ref().map(|e| (e, f64::from(g.points)))).collect();
    Metric::ALL
        .iter()
        .map(|&m| {
            let x: Vec<f64> = with.iter().map(|(e, _)| e.value(m)).collect();
            let y: Vec<f64> = with.iter().map(|(_, p)| *p).collect();
            MetricTest { metric: m, result: spearman(&x, &y, Alternative::TwoSided) }
        })
        .collect()
}

/// Paired winner-versus-loser test per metric with the alternative
/// "winner greater". Tied games and games where a side has no window are
/// left out.
pub fn winner_loser(games: &[TeamGame]) -> Vec<MetricTest> {
    let mut pairs: Vec<(&EntropyReport, &EntropyReport)> = Vec::new();
    for w in games.iter().filter(|g| g.outcome == Outcome::Win) {
        let loser = games.iter().find(|l| l.game_id == w.game_id && l.team == w.opponent);
        if let (Some(we), Some(le)) = (w.entropy.as_ref(), loser.and_then(|l| l.entropy.as_ref())) {
            pairs.push((we, le));
        }
    }
    Metric::ALL
        .iter()
        .map(|&m| {
            let a: Vec<f64> = pairs.iter().map(|(w, _)| w.value(m)).collect();
            let b: Vec<f64> = pairs.iter().map(|(_, l)| l.value(m)).collect();
            MetricTest { metric: m, result: wilcoxon_signed_rank(&a, &b, Alternative::Greater) }
        })
        .collect()
}

/// One score class as a flat record. Fields other than `team`, `class` and
/// the value being compared may be absent when read back from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub team: String,
    #[serde(default)]
    pub metric: Option<String>,
    #[serde(default)]
    pub f1: Option<i32>,
    #[serde(default)]
    pub f2: Option<i32>,
    pub class: String,
    #[serde(default)]
    pub lo: Option<i32>,
    #[serde(default)]
    pub hi: Option<i32>,
    #[serde(default)]
    pub n_possessions: Option<u64>,
    #[serde(default)]
    pub share: Option<f64>,
    #[serde(default)]
    pub n_windows: Option<u64>,
    #[serde(default)]
    pub se: Option<f64>,
    #[serde(default)]
    pub te: Option<f64>,
    #[serde(default)]
    pub rte: Option<f64>,
    #[serde(default)]
    pub pts_per_poss: Option<f64>,
    #[serde(default)]
    pub objective: Option<f64>,
}

impl ClassRow {
    pub fn from_class(team: &str, class: &ScoreClass<'_>, team_total: usize) -> ClassRow {
        let n = class.possessions.len();
        ClassRow {
            team: team.to_string(),
            metric: None,
            f1: None,
            f2: None,
            class: class.name.clone(),
            lo: class.lo,
            hi: class.hi,
            n_possessions: Some(n as u64),
            share: (team_total > 0).then(|| n as f64 / team_total as f64),
            n_windows: Some(class.profile.n_windows()),
            se: class.entropy.map(|e| e.se),
            te: class.entropy.map(|e| e.te),
            rte: class.entropy.map(|e| e.rte),
            pts_per_poss: class.pts_per_poss,
            objective: None,
        }
    }

    pub fn value(&self, v: CompareValue) -> Option<f64> {
        match v {
            CompareValue::Entropy(Metric::Se) => self.se,
            CompareValue::Entropy(Metric::Te) => self.te,
            CompareValue::Entropy(Metric::Rte) => self.rte,
            CompareValue::Points => self.pts_per_poss,
        }
    }
}

pub fn partition_rows(team: &str, partition: &Partition<'_>, team_total: usize) -> Vec<ClassRow> {
    partition
        .classes
        .iter()
        .map(|c| ClassRow {
            metric: Some(partition.metric.to_string()),
            f1: Some(partition.boundaries.f1),
            f2: Some(partition.boundaries.f2),
            objective: Some(partition.objective),
            ..ClassRow::from_class(team, c, team_total)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareValue {
    Entropy(Metric),
    Points,
}

impl CompareValue {
    pub const ALL: [CompareValue; 4] = [
        CompareValue::Entropy(Metric::Se),
        CompareValue::Entropy(Metric::Te),
        CompareValue::Entropy(Metric::Rte),
        CompareValue::Points,
    ];
}

impl fmt::Display for CompareValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareValue::Entropy(m) => write!(f, "{m}"),
            CompareValue::Points => f.write_str("pts_per_poss"),
        }
    }
}

impl FromStr for CompareValue {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pts" | "pts_per_poss" => Ok(CompareValue::Points),
            other => other.parse().map(CompareValue::Entropy),
        }
    }
}

pub const CLASS_PAIRS: [(&str, &str); 3] = [("lower", "middle"), ("lower", "upper"), ("middle", "upper")];

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub value: CompareValue,
    pub first: String,
    pub second: String,
    /// Teams entering the test.
    pub teams: Vec<String>,
    pub result: Result<TestResult, StatsError>,
}

/// Two-sided paired tests between the lower, middle and upper classes across
/// teams, on each requested value (`first − second`). A team enters a test
/// only when both of its classes carry the value.
pub fn class_compare(rows: &[ClassRow], values: &[CompareValue]) -> Result<Vec<CompareRow>, ProtocolError> {
    let mut teams: Vec<&str> = Vec::new();
    let mut by_team: BTreeMap<(&str, &str), &ClassRow> = BTreeMap::new();
    for r in rows {
        if !CLASS_PAIRS.iter().any(|(a, b)| *a == r.class || *b == r.class) {
            return Err(ProtocolError::CompareInput(format!("unknown class `{}` for team `{}`", r.class, r.team)));
        }
        if by_team.insert((r.team.as_str(), r.class.as_str()), r).is_some() {
            return Err(ProtocolError::CompareInput(format!("duplicate class `{}` for team `{}`", r.class, r.team)));
        }
        if !teams.contains(&r.team.as_str()) {
            teams.push(&r.team);
        }
    }
    let mut out = Vec::new();
    for &v in values {
        for (first, second) in CLASS_PAIRS {
            let mut a = Vec::new();
            let mut b = Vec::new();
            let mut used = Vec::new();
            for &t in &teams {
                let x = by_team.get(&(t, first)).and_then(|r| r.value(v));
                let y = by_team.get(&(t, second)).and_then(|r| r.value(v));
                if let (Some(x), Some(y)) = (x, y) {
                    a.push(x);
                    b.push(y);
                    used.push(t.to_string());
                }
            }
            out.push(CompareRow {
                value: v,
                first: first.to_string(),
                second: second.to_string(),
                teams: used,
                result: wilcoxon_signed_rank(&a, &b, Alternative::TwoSided),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChisqPair {
    pub first: String,
    pub second: String,
    pub result: Result<TestResult, StatsError>,
}

/// Chi-square independence between the state counts of every class pair.
pub fn pairwise_chisq(named: &[(String, &Profile)]) -> Vec<ChisqPair> {
    let mut out = Vec::new();
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            out.push(ChisqPair {
                first: named[i].0.clone(),
                second: named[j].0.clone(),
                result: chisq_independence(&named[i].1.state_counts, &named[j].1.state_counts),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamSearch {
    pub team: String,
    pub metric: Metric,
    pub n_possessions: usize,
    /// Class rows, or why no partition exists.
    pub outcome: Result<Vec<ClassRow>, String>,
    pub n_candidates: usize,
}

pub fn team_search(
    dataset: &Dataset,
    team: &str,
    metric: Metric,
    analysis: &Analysis,
    search: &SearchParams,
) -> Result<TeamSearch, ChainError> {
    let poss: Vec<&Possession> = dataset.possessions_of(team).collect();
    let outcome = match best_partition(&poss, metric, analysis, search) {
        Ok(p) => Ok((partition_rows(team, &p, poss.len()), p.n_candidates)),
        Err(PartitionError::Chain(e)) => return Err(e),
        Err(e) => Err(e.to_string()),
    };
    let (outcome, n_candidates) = match outcome {
        Ok((rows, n)) => (Ok(rows), n),
        Err(e) => (Err(e), 0),
    };
    Ok(TeamSearch { team: team.to_string(), metric, n_possessions: poss.len(), outcome, n_candidates })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateShare {
    pub group: String,
    pub state: GraphletState,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionShare {
    pub group: String,
    pub from: GraphletState,
    pub to: GraphletState,
    pub count: u64,
    /// Row-conditional, self-transitions included.
    pub percent: f64,
    /// Row-conditional over changes of state only; absent on the diagonal.
    pub restricted_percent: Option<f64>,
}

pub fn state_shares(group: &str, profile: &Profile) -> Vec<StateShare> {
    let pct = profile.state_shares_percent();
    GraphletState::ALL
        .iter()
        .map(|&s| StateShare {
            group: group.to_string(),
            state: s,
            count: profile.state_counts[s.index()],
            percent: pct[s.index()],
        })
        .collect()
}

/// Every observed transition; empty for a profile without windows.
pub fn transition_shares(group: &str, profile: &Profile) -> Vec<TransitionShare> {
    let Ok(view) = profile.stochastic_view() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for i in 0..N_STATES {
        for j in 0..N_STATES {
            let count = profile.transition_counts[i][j];
            if count == 0 {
                continue;
            }
            out.push(TransitionShare {
                group: group.to_string(),
                from: GraphletState::ALL[i],
                to: GraphletState::ALL[j],
                count,
                percent: 100.0 * view.transition[i][j],
                restricted_percent: (i != j).then(|| 100.0 * view.restricted[i][j]),
            });
        }
    }
    out
}

/// Everything `report` prints.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub settings: Settings,
    pub n_games: usize,
    pub n_possessions: usize,
    pub retained_fraction: Option<f64>,
    pub team_games: Vec<TeamGame>,
    pub correlation: Vec<MetricTest>,
    pub winner_loser: Vec<MetricTest>,
    pub supervised: Vec<ClassRow>,
    pub supervised_chisq: Vec<ChisqPair>,
    /// One entry per team and metric.
    pub searches: Vec<TeamSearch>,
    /// Keyed by the metric the partitions were searched on.
    pub class_compare: Vec<(Metric, Vec<CompareRow>)>,
    pub state_shares: Vec<StateShare>,
    pub transitions: Vec<TransitionShare>,
}

pub fn run(dataset: &Dataset, settings: &Settings) -> Result<Report, ProtocolError> {
    let analysis = settings.analysis()?;
    let games = team_games(dataset, &analysis)?;

    let all: Vec<&Possession> = dataset.possessions().collect();
    let classes = supervised_classes(&all, &analysis)?;
    let supervised = classes.iter().map(|c| ClassRow::from_class("all", c, all.len())).collect();
    let named: Vec<(String, &Profile)> =
        classes.iter().filter(|c| c.profile.n_windows() > 0).map(|c| (c.name.clone(), &c.profile)).collect();
    let supervised_chisq = pairwise_chisq(&named);

    let teams = dataset.teams();
    let mut searches = Vec::new();
    let mut class_compare_rows = Vec::new();
    for metric in Metric::ALL {
        let mut rows = Vec::new();
        for team in &teams {
            let s = team_search(dataset, team, metric, &analysis, &settings.search)?;
            if let Ok(r) = &s.outcome {
                rows.extend(r.iter().cloned());
            }
            searches.push(s);
        }
        class_compare_rows
            .push((metric, class_compare(&rows, &[CompareValue::Entropy(metric), CompareValue::Points])?));
    }

    let mut state = Vec::new();
    let mut transitions = Vec::new();
    for team in &teams {
        let profile = profile_of(dataset.possessions_of(team), &settings.params)?;
        state.extend(state_shares(team, &profile));
        transitions.extend(transition_shares(team, &profile));
    }

    Ok(Report {
        settings: *settings,
        n_games: dataset.games.len(),
        n_possessions: dataset.n_possessions(),
        retained_fraction: retained_fraction(dataset, &settings.params),
        correlation: entropy_points_correlation(&games),
        winner_loser: winner_loser(&games),
        team_games: games,
        supervised,
        supervised_chisq,
        searches,
        class_compare: class_compare_rows,
        state_shares: state,
        transitions,
    })
}
