//! One function per subcommand. Each builds its tables, then hands them to
//! the renderer together with the configuration echo.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};

use passgraph::graphlets::ChainError;
use passgraph::ingest::{load_dataset, load_unchecked, save_dataset, validate, Severity};
use passgraph::oracle::planted::{partition_dataset, signal_dataset};
use passgraph::oracle::{generate, SynthSpec};
use passgraph::protocol::{
    class_compare, entropy_points_correlation, pairwise_chisq, partition_rows, run, state_shares, team_games,
    transition_shares, winner_loser, ClassRow, CompareRow, MetricTest, Settings, TeamGame,
};
use passgraph::scorepart::{PartitionError, SUPERVISED_CLASSES};
use passgraph::stats::{StatsError, TestResult};
use passgraph::{
    best_partition, classify, profile_of, stationary_maxima, supervised_classes, theoretical_maxima, windows_of,
    Analysis, Dataset, Feasibility, FeasibilityRule, GraphletState, Metric, Possession, Profile, SearchParams,
    WindowParams,
};

use crate::render::{emit, render, Cell, Config, Format, Table};
use crate::{Cli, Command, Global, GraphletsCommand, GroupBy, Input, Mode, Planted, StatsCommand};

const RULES: [FeasibilityRule; 2] = [FeasibilityRule::WalkEdit, FeasibilityRule::EdgeCountStep];

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<ExitCode> {
    let g = &cli.global;
    let params = match WindowParams::new(g.delta, g.tau) {
        Ok(p) => p,
        Err(e) => return Ok(usage(&e.to_string())),
    };
    let ctx = Ctx { g, params };
    match &cli.command {
        Command::Validate(input) => validate_cmd(&ctx, input, out),
        Command::Synth { seed, out: dir, games, planted } => synth(&ctx, *seed, dir, *games, *planted, out),
        Command::Graphlets(GraphletsCommand::Dump(input)) => ctx.done(out, dump(&ctx, input)?),
        Command::Graphlets(GraphletsCommand::Feasibility) => ctx.done(out, feasibility(&ctx)),
        Command::Graphlets(GraphletsCommand::Maxima) => ctx.done(out, maxima(&ctx)?),
        Command::Profile { input, group_by, transitions } => {
            ctx.done(out, profile(&ctx, input, *group_by, *transitions)?)
        }
        Command::Entropy { input, group_by, normalize } => ctx.done(out, entropy(&ctx, input, *group_by, *normalize)?),
        Command::Classify { input, mode, metric, min_share, min_width, per_team } => {
            let Some(search) = search_params(*min_share, *min_width) else {
                return Ok(usage("--min-share must lie in (0, 1] and --min-width must be at least 1"));
            };
            ctx.done(out, classify_cmd(&ctx, input, *mode, *metric, search, *per_team)?)
        }
        Command::Stats(StatsCommand::Correlation(input)) => ctx.done(out, correlation(&ctx, input)?),
        Command::Stats(StatsCommand::WinnerLoser(input)) => ctx.done(out, winners(&ctx, input)?),
        Command::Stats(StatsCommand::ClassCompare { input, metric, values }) => {
            ctx.done(out, compare(&ctx, input, *metric, values)?)
        }
        Command::Stats(StatsCommand::ProfileChisq { input, group_by }) => ctx.done(out, chisq(&ctx, input, *group_by)?),
        Command::Report { input, out: dir, min_share, min_width } => {
            let Some(search) = search_params(*min_share, *min_width) else {
                return Ok(usage("--min-share must lie in (0, 1] and --min-width must be at least 1"));
            };
            report(&ctx, input, dir, search, out)
        }
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn search_params(min_share: f64, min_width: i32) -> Option<SearchParams> {
    (min_share > 0.0 && min_share <= 1.0 && min_width >= 1).then_some(SearchParams { min_share, min_width })
}

struct Ctx<'a> {
    g: &'a Global,
    params: WindowParams,
}

impl Ctx<'_> {
    fn settings(&self, search: SearchParams) -> Settings {
        Settings { params: self.params, rule: self.g.feasibility, search }
    }

    fn analysis(&self) -> Result<Analysis> {
        Ok(self.settings(SearchParams::default()).analysis()?)
    }

    fn path(&self, p: &Path) -> String {
        match (self.g.portable, p.file_name()) {
            (true, Some(name)) => name.to_string_lossy().into_owned(),
            _ => p.display().to_string(),
        }
    }

    fn config(&self, command: &str, input: Option<&Input>) -> Config {
        let mut c = vec![("command".to_string(), command.to_string())];
        if let Some(i) = input {
            let (e, p) = i.paths();
            c.push(("events".into(), self.path(&e)));
            c.push(("possessions".into(), self.path(&p)));
        }
        c.push(("delta_s".into(), self.params.delta().to_string()));
        c.push(("tau_s".into(), self.params.tau().to_string()));
        c.push(("feasibility".into(), self.g.feasibility.to_string()));
        c
    }

    fn done(&self, out: &mut dyn Write, (table, config): (Table, Config)) -> Result<ExitCode> {
        emit(out, &table, &config, self.g.format)?;
        Ok(ExitCode::SUCCESS)
    }
}

fn push(c: &mut Config, key: &str, value: impl ToString) {
    c.push((key.to_string(), value.to_string()));
}

fn load(input: &Input) -> Result<Dataset> {
    let (e, p) = input.paths();
    Ok(load_dataset(&e, &p)?)
}

fn groups(data: &Dataset, by: GroupBy) -> Vec<(String, Vec<&Possession>)> {
    match by {
        GroupBy::Team => data.teams().into_iter().map(|t| (t.to_string(), data.possessions_of(t).collect())).collect(),
        GroupBy::Game => data.games.iter().map(|g| (g.game_id.clone(), g.possessions.iter().collect())).collect(),
        GroupBy::TeamGame => data
            .games
            .iter()
            .flat_map(|g| {
                [&g.team_a, &g.team_b]
                    .into_iter()
                    .map(move |t| (format!("{}/{}", g.game_id, t), g.possessions_of(t).collect()))
            })
            .collect(),
        GroupBy::ScoreClass => SUPERVISED_CLASSES
            .iter()
            .map(|&(name, lo, hi)| {
                let members = data
                    .possessions()
                    .filter(|p| lo.is_none_or(|l| p.relative_score >= l) && hi.is_none_or(|h| p.relative_score <= h))
                    .collect();
                (name.to_string(), members)
            })
            .collect(),
    }
}

fn group_by_name(by: GroupBy) -> &'static str {
    match by {
        GroupBy::Team => "team",
        GroupBy::Game => "game",
        GroupBy::TeamGame => "team-game",
        GroupBy::ScoreClass => "score-class",
    }
}

fn profiles(ctx: &Ctx<'_>, data: &Dataset, by: GroupBy) -> Result<Vec<(String, usize, Profile)>, ChainError> {
    groups(data, by)
        .into_iter()
        .map(|(name, poss)| Ok((name, poss.len(), profile_of(poss.iter().copied(), &ctx.params)?)))
        .collect()
}

fn validate_cmd(ctx: &Ctx<'_>, input: &Input, out: &mut dyn Write) -> Result<ExitCode> {
    let (e, p) = input.paths();
    let data = load_unchecked(&e, &p)?;
    let report = validate(&data);
    let mut t = Table::new(&["severity", "kind", "game_id", "possession_id", "message"]);
    for v in report.errors().chain(report.warnings()) {
        let severity = if v.severity == Severity::Error { "error" } else { "warning" };
        t.push(vec![
            severity.into(),
            format!("{:?}", v.kind).into(),
            v.game_id.as_str().into(),
            v.possession_id.clone().into(),
            v.message.as_str().into(),
        ]);
    }
    let mut c = ctx.config("validate", Some(input));
    push(&mut c, "n_games", data.games.len());
    push(&mut c, "n_possessions", data.n_possessions());
    push(&mut c, "errors", report.errors().count());
    push(&mut c, "warnings", report.warnings().count());
    emit(out, &t, &c, ctx.g.format)?;
    Ok(if report.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn synth(
    ctx: &Ctx<'_>,
    seed: u64,
    dir: &Path,
    games: usize,
    planted: Option<Planted>,
    out: &mut dyn Write,
) -> Result<ExitCode> {
    let mut c = vec![("command".to_string(), "synth".to_string())];
    push(&mut c, "out", ctx.path(dir));
    let t = match planted {
        None => {
            let spec = SynthSpec {
                seed,
                n_games: games,
                delta_ms: ctx.params.delta().0,
                tau_ms: ctx.params.tau().0,
                ..SynthSpec::default()
            };
            let s = generate(&spec)?;
            s.write_to(dir).with_context(|| format!("writing {}", dir.display()))?;
            let mut t = Table::new(&["key", "value"]);
            for (k, v) in &s.manifest.entries {
                t.push(vec![k.as_str().into(), v.as_str().into()]);
            }
            t
        }
        Some(kind) => {
            let p = match kind {
                Planted::Partition => partition_dataset(),
                Planted::Signal => signal_dataset(seed),
            };
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            save_dataset(&p.dataset, &dir.join("events.csv"), &dir.join("possessions.csv"))?;
            let mut truth = String::from("# planted class boundaries\n");
            for (team, f1, f2) in &p.boundaries {
                truth.push_str(&format!("{team}={f1},{f2}\n"));
            }
            fs::write(dir.join("planted.txt"), truth).with_context(|| format!("writing {}", dir.display()))?;
            let mut t = Table::new(&["team", "f1", "f2"]);
            for (team, f1, f2) in &p.boundaries {
                t.push(vec![team.as_str().into(), (*f1).into(), (*f2).into()]);
            }
            push(&mut c, "planted", if kind == Planted::Partition { "partition" } else { "signal" });
            t
        }
    };
    push(&mut c, "seed", seed);
    emit(out, &t, &c, ctx.g.format)?;
    Ok(ExitCode::SUCCESS)
}

fn dump(ctx: &Ctx<'_>, input: &Input) -> Result<(Table, Config)> {
    let data = load(input)?;
    let mut t = Table::new(&["game_id", "possession_id", "team", "window", "start_s", "end_s", "n_passes", "state"]);
    for p in data.possessions() {
        for w in windows_of(p, &ctx.params) {
            let s = classify(&w)?;
            t.push(vec![
                p.game_id.as_str().into(),
                p.possession_id.as_str().into(),
                p.team.as_str().into(),
                w.index.into(),
                w.start.as_secs_f64().into(),
                w.end.as_secs_f64().into(),
                w.events.len().into(),
                s.label().into(),
            ]);
        }
    }
    Ok((t, ctx.config("graphlets dump", Some(input))))
}

fn feasibility(ctx: &Ctx<'_>) -> (Table, Config) {
    let mut cols = vec!["rule", "from"];
    cols.extend(GraphletState::ALL.iter().map(|s| s.label()));
    cols.push("out_degree");
    let mut t = Table::new(&cols);
    for rule in RULES {
        let f = Feasibility::for_rule(rule);
        for from in GraphletState::ALL {
            let mut row: Vec<Cell> = vec![rule.to_string().into(), from.label().into()];
            row.extend(GraphletState::ALL.iter().map(|&to| Cell::Int(i64::from(f.allowed(from, to)))));
            row.push(f.out_degree(from).into());
            t.push(row);
        }
    }
    (t, ctx.config("graphlets feasibility", None))
}

fn maxima(ctx: &Ctx<'_>) -> Result<(Table, Config)> {
    let mut t = Table::new(&["rule", "weighting", "se_max", "te_max", "rte_max"]);
    for rule in RULES {
        let f = Feasibility::for_rule(rule);
        for (weighting, m) in [("uniform", theoretical_maxima(&f)?), ("stationary", stationary_maxima(&f)?)] {
            t.push(vec![rule.to_string().into(), weighting.into(), m.se.into(), m.te.into(), m.rte.into()]);
        }
    }
    Ok((t, ctx.config("graphlets maxima", None)))
}

fn profile(ctx: &Ctx<'_>, input: &Input, by: GroupBy, transitions: bool) -> Result<(Table, Config)> {
    let data = load(input)?;
    let mut c = ctx.config("profile", Some(input));
    push(&mut c, "group_by", group_by_name(by));
    push(&mut c, "transitions", transitions);
    let groups = profiles(ctx, &data, by)?;
    let t = if transitions {
        transitions_table(groups.iter().flat_map(|(name, _, p)| transition_shares(name, p)))
    } else {
        shares_table(groups.iter().flat_map(|(name, _, p)| state_shares(name, p)))
    };
    Ok((t, c))
}

fn shares_table(rows: impl Iterator<Item = passgraph::protocol::StateShare>) -> Table {
    let mut t = Table::new(&["group", "state", "count", "percent"]);
    for s in rows {
        t.push(vec![s.group.into(), s.state.label().into(), s.count.into(), s.percent.into()]);
    }
    t
}

fn transitions_table(rows: impl Iterator<Item = passgraph::protocol::TransitionShare>) -> Table {
    let mut t = Table::new(&["group", "from", "to", "count", "percent", "restricted_percent"]);
    for s in rows {
        t.push(vec![
            s.group.into(),
            s.from.label().into(),
            s.to.label().into(),
            s.count.into(),
            s.percent.into(),
            s.restricted_percent.into(),
        ]);
    }
    t
}

fn entropy(ctx: &Ctx<'_>, input: &Input, by: GroupBy, normalize: bool) -> Result<(Table, Config)> {
    let data = load(input)?;
    let analysis = ctx.analysis()?;
    let mut c = ctx.config("entropy", Some(input));
    push(&mut c, "group_by", group_by_name(by));
    push(&mut c, "normalize", normalize);
    let cols: &[&'static str] = if normalize {
        &["group", "n_possessions", "n_windows", "se_pct", "te_pct", "rte_pct"]
    } else {
        &["group", "n_possessions", "n_windows", "se", "te", "rte"]
    };
    let mut t = Table::new(cols);
    for (name, n, p) in profiles(ctx, &data, by)? {
        let e = analysis.entropy_of(&p).map(|e| if normalize { e.norm() } else { e.raw() });
        t.push(vec![
            name.into(),
            n.into(),
            p.n_windows().into(),
            e.map(|e| e.se).into(),
            e.map(|e| e.te).into(),
            e.map(|e| e.rte).into(),
        ]);
    }
    Ok((t, c))
}

const CLASS_COLUMNS: [&str; 15] = [
    "team",
    "metric",
    "f1",
    "f2",
    "class",
    "lo",
    "hi",
    "n_possessions",
    "share",
    "n_windows",
    "se",
    "te",
    "rte",
    "pts_per_poss",
    "objective",
];

fn class_table(rows: &[ClassRow]) -> Table {
    let mut t = Table::new(&CLASS_COLUMNS);
    for r in rows {
        t.push(vec![
            r.team.as_str().into(),
            r.metric.clone().into(),
            r.f1.into(),
            r.f2.into(),
            r.class.as_str().into(),
            r.lo.into(),
            r.hi.into(),
            r.n_possessions.into(),
            r.share.into(),
            r.n_windows.into(),
            r.se.into(),
            r.te.into(),
            r.rte.into(),
            r.pts_per_poss.into(),
            r.objective.into(),
        ]);
    }
    t
}

fn classify_cmd(
    ctx: &Ctx<'_>,
    input: &Input,
    mode: Mode,
    metric: Metric,
    search: SearchParams,
    per_team: bool,
) -> Result<(Table, Config)> {
    let data = load(input)?;
    let analysis = ctx.analysis()?;
    let mut c = ctx.config("classify", Some(input));
    let scopes: Vec<(String, Vec<&Possession>)> =
        if per_team { groups(&data, GroupBy::Team) } else { vec![("all".to_string(), data.possessions().collect())] };
    let mut rows = Vec::new();
    match mode {
        Mode::Supervised => {
            push(&mut c, "mode", "supervised");
            for (team, poss) in &scopes {
                for class in supervised_classes(poss, &analysis)? {
                    rows.push(ClassRow::from_class(team, &class, poss.len()));
                }
            }
        }
        Mode::Search => {
            push(&mut c, "mode", "search");
            push(&mut c, "metric", metric);
            push(&mut c, "min_share", search.min_share);
            push(&mut c, "min_width", search.min_width);
            for (team, poss) in &scopes {
                match best_partition(poss, metric, &analysis, &search) {
                    Ok(p) => rows.extend(partition_rows(team, &p, poss.len())),
                    Err(PartitionError::NoCandidate) => log::warn!("{team}: no valid classification"),
                    Err(PartitionError::Chain(e)) => return Err(e.into()),
                }
            }
        }
    }
    push(&mut c, "per_team", per_team);
    Ok((class_table(&rows), c))
}

const TEST_COLUMNS: [&str; 8] = ["n", "statistic", "z_approx", "df", "p_value", "method", "alternative", "note"];

fn test_cells(r: &Result<TestResult, StatsError>) -> Vec<Cell> {
    match r {
        Ok(t) => vec![
            t.n.into(),
            t.statistic.into(),
            t.z_approx.into(),
            t.df.into(),
            t.p_value.into(),
            t.method.to_string().into(),
            t.alternative.to_string().into(),
            Cell::Na,
        ],
        Err(e) => {
            let mut v = vec![Cell::Na; 7];
            v.push(e.to_string().into());
            v
        }
    }
}

fn with_tests(lead: &[&'static str]) -> Table {
    let mut cols = lead.to_vec();
    cols.extend(TEST_COLUMNS);
    Table::new(&cols)
}

fn metric_tests_table(tests: &[MetricTest]) -> Table {
    let mut t = with_tests(&["metric"]);
    for m in tests {
        let mut row: Vec<Cell> = vec![m.metric.name().into()];
        row.extend(test_cells(&m.result));
        t.push(row);
    }
    t
}

fn games_of(ctx: &Ctx<'_>, data: &Dataset) -> Result<Vec<TeamGame>> {
    Ok(team_games(data, &ctx.analysis()?)?)
}

fn correlation(ctx: &Ctx<'_>, input: &Input) -> Result<(Table, Config)> {
    let data = load(input)?;
    let t = metric_tests_table(&entropy_points_correlation(&games_of(ctx, &data)?));
    Ok((t, ctx.config("stats correlation", Some(input))))
}

fn winners(ctx: &Ctx<'_>, input: &Input) -> Result<(Table, Config)> {
    let data = load(input)?;
    let t = metric_tests_table(&winner_loser(&games_of(ctx, &data)?));
    Ok((t, ctx.config("stats winner-loser", Some(input))))
}

/// Class rows from CSV. `NA` and empty fields read as absent.
fn read_class_rows(path: &Path) -> Result<Vec<ClassRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers().with_context(|| format!("reading {}", path.display()))?.clone();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.with_context(|| format!("{} record {}", path.display(), i + 1))?;
        let rec: csv::StringRecord = rec.iter().map(|f| if f == "NA" { "" } else { f }).collect();
        let row: ClassRow =
            rec.deserialize(Some(&headers)).with_context(|| format!("{} record {}", path.display(), i + 1))?;
        rows.push(row);
    }
    Ok(rows)
}

fn compare_table(rows: &[CompareRow], search_metric: Option<Metric>) -> Table {
    let mut t = with_tests(&["search_metric", "value", "first", "second", "teams"]);
    for r in rows {
        let mut row: Vec<Cell> = vec![
            search_metric.map(|m| m.name().to_string()).into(),
            r.value.to_string().into(),
            r.first.as_str().into(),
            r.second.as_str().into(),
            r.teams.join(";").into(),
        ];
        row.extend(test_cells(&r.result));
        t.push(row);
    }
    t
}

fn compare(
    ctx: &Ctx<'_>,
    input: &Path,
    metric: Option<Metric>,
    values: &[passgraph::protocol::CompareValue],
) -> Result<(Table, Config)> {
    let rows: Vec<ClassRow> = read_class_rows(input)?
        .into_iter()
        .filter(|r| match (metric, &r.metric) {
            (Some(m), Some(rm)) => rm.parse::<Metric>().is_ok_and(|x| x == m),
            _ => true,
        })
        .collect();
    let out = class_compare(&rows, values)?;
    let c = vec![
        ("command".to_string(), "stats class-compare".to_string()),
        ("input".to_string(), ctx.path(input)),
        ("metric".to_string(), metric.map_or("any".to_string(), |m| m.to_string())),
        ("values".to_string(), values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
    ];
    Ok((compare_table(&out, metric), c))
}

fn chisq_table(pairs: &[passgraph::protocol::ChisqPair]) -> Table {
    let mut t = with_tests(&["first", "second"]);
    for p in pairs {
        let mut row: Vec<Cell> = vec![p.first.as_str().into(), p.second.as_str().into()];
        row.extend(test_cells(&p.result));
        t.push(row);
    }
    t
}

fn chisq(ctx: &Ctx<'_>, input: &Input, by: GroupBy) -> Result<(Table, Config)> {
    let data = load(input)?;
    let groups = profiles(ctx, &data, by)?;
    let named: Vec<(String, &Profile)> =
        groups.iter().filter(|(_, _, p)| p.n_windows() > 0).map(|(n, _, p)| (n.clone(), p)).collect();
    let mut c = ctx.config("stats profile-chisq", Some(input));
    push(&mut c, "group_by", group_by_name(by));
    Ok((chisq_table(&pairwise_chisq(&named)), c))
}

fn team_games_table(games: &[TeamGame]) -> Table {
    let mut t = Table::new(&[
        "game_id",
        "team",
        "opponent",
        "points",
        "opponent_points",
        "outcome",
        "n_possessions",
        "n_windows",
        "se",
        "te",
        "rte",
        "se_pct",
        "te_pct",
        "rte_pct",
    ]);
    for g in games {
        let e = g.entropy.as_ref();
        t.push(vec![
            g.game_id.as_str().into(),
            g.team.as_str().into(),
            g.opponent.as_str().into(),
            g.points.into(),
            g.opponent_points.into(),
            g.outcome.to_string().into(),
            g.n_possessions.into(),
            g.n_windows.into(),
            e.map(|e| e.se).into(),
            e.map(|e| e.te).into(),
            e.map(|e| e.rte).into(),
            e.map(|e| e.se_norm).into(),
            e.map(|e| e.te_norm).into(),
            e.map(|e| e.rte_norm).into(),
        ]);
    }
    t
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Table => "txt",
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn report(ctx: &Ctx<'_>, input: &Input, dir: &Path, search: SearchParams, out: &mut dyn Write) -> Result<ExitCode> {
    let data = load(input)?;
    let settings = ctx.settings(search);
    let r = run(&data, &settings)?;
    let maxima = settings.analysis()?.maxima;

    let mut c = ctx.config("report", Some(input));
    push(&mut c, "min_share", search.min_share);
    push(&mut c, "min_width", search.min_width);

    let mut summary = Table::new(&["key", "value"]);
    let mut kv = |k: &str, v: Cell| summary.push(vec![k.into(), v]);
    kv("n_games", r.n_games.into());
    kv("n_possessions", r.n_possessions.into());
    kv("retained_fraction", r.retained_fraction.into());
    kv("se_max", maxima.se.into());
    kv("te_max", maxima.te.into());
    kv("rte_max", maxima.rte.into());

    let mut searches = Table::new(&["team", "metric", "n_possessions", "n_candidates", "status"]);
    let mut partitions = Vec::new();
    for s in &r.searches {
        let status = match &s.outcome {
            Ok(rows) => {
                partitions.extend(rows.iter().cloned());
                "ok".to_string()
            }
            Err(e) => e.clone(),
        };
        searches.push(vec![
            s.team.as_str().into(),
            s.metric.name().into(),
            s.n_possessions.into(),
            s.n_candidates.into(),
            status.into(),
        ]);
    }

    let mut compare = Table::default();
    for (metric, rows) in &r.class_compare {
        let t = compare_table(rows, Some(*metric));
        compare.columns = t.columns;
        compare.rows.extend(t.rows);
    }

    let tables: Vec<(&str, Table)> = vec![
        ("summary", summary),
        ("team_games", team_games_table(&r.team_games)),
        ("correlation", metric_tests_table(&r.correlation)),
        ("winner_loser", metric_tests_table(&r.winner_loser)),
        ("supervised_classes", class_table(&r.supervised)),
        ("supervised_chisq", chisq_table(&r.supervised_chisq)),
        ("searches", searches),
        ("partitions", class_table(&partitions)),
        ("class_compare", compare),
        ("state_shares", shares_table(r.state_shares.iter().cloned())),
        ("transitions", transitions_table(r.transitions.iter().cloned())),
    ];

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let config_text: String = c.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    fs::write(dir.join("config.txt"), config_text).with_context(|| format!("writing {}", dir.display()))?;
    let mut index = Table::new(&["file", "rows"]);
    index.push(vec!["config.txt".into(), c.len().into()]);
    for (name, table) in &tables {
        let file = format!("{name}.{}", extension(ctx.g.format));
        let path = dir.join(&file);
        fs::write(&path, render(table, &c, ctx.g.format)).with_context(|| format!("writing {}", path.display()))?;
        index.push(vec![file.into(), table.rows.len().into()]);
    }
    log::info!("report written to {}", dir.display());
    let mut echo = c.clone();
    push(&mut echo, "out", ctx.path(dir));
    emit(out, &index, &echo, ctx.g.format)?;
    Ok(ExitCode::SUCCESS)
}
