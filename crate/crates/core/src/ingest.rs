//! Event and possession files: parsing, validation and the immutable game model.
//!
//! Two CSV files describe a dataset:
//!
//! * events: `game_id,possession_id,time_s,passer,receiver`
//! * possessions: `game_id,possession_id,team,start_s,end_s,relative_score,points_scored`
//!
//! Timecodes are decimal seconds with at most three fractional digits and are
//! held internally as integer milliseconds so that window boundaries are exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub const EVENTS_HEADER: [&str; 5] = ["game_id", "possession_id", "time_s", "passer", "receiver"];
pub const POSSESSIONS_HEADER: [&str; 7] =
    ["game_id", "possession_id", "team", "start_s", "end_s", "relative_score", "points_scored"];

/// A timecode or duration in integer milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Millis(pub i64);

impl Millis {
    pub fn from_secs_f64(secs: f64) -> Millis {
        Millis((secs * 1000.0).round() as i64)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl std::ops::Sub for Millis {
    type Output = Millis;
    fn sub(self, rhs: Millis) -> Millis {
        Millis(self.0 - rhs.0)
    }
}

impl std::ops::Add for Millis {
    type Output = Millis;
    fn add(self, rhs: Millis) -> Millis {
        Millis(self.0 + rhs.0)
    }
}

impl FromStr for Millis {
    type Err = String;

    /// Parses non-negative decimal seconds without going through floating point.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("`{s}` is not a non-negative decimal number of seconds"));
        }
        if s.contains('.') && frac.is_empty() || frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("`{s}`: expected at most 3 fractional digits"));
        }
        let whole: i64 = int.parse().map_err(|_| format!("`{s}` is out of range"))?;
        let mut ms = 0i64;
        for (i, b) in frac.bytes().enumerate() {
            ms += i64::from(b - b'0') * 10i64.pow(2 - i as u32);
        }
        whole
            .checked_mul(1000)
            .and_then(|w| w.checked_add(ms))
            .map(Millis)
            .ok_or_else(|| format!("`{s}` is out of range"))
    }
}

impl fmt::Display for Millis {
    /// Two fractional digits unless the value needs millisecond precision.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let v = self.0.abs();
        if v % 10 == 0 {
            write!(f, "{sign}{}.{:02}", v / 1000, (v % 1000) / 10)
        } else {
            write!(f, "{sign}{}.{:03}", v / 1000, v % 1000)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassEvent {
    pub game_id: String,
    pub possession_id: String,
    pub time: Millis,
    pub passer: String,
    pub receiver: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Possession {
    pub game_id: String,
    pub possession_id: String,
    pub team: String,
    pub start: Millis,
    pub end: Millis,
    /// Offense score minus defense score when the possession starts.
    pub relative_score: i32,
    pub points_scored: u32,
    /// Sorted ascending by time.
    pub events: Vec<PassEvent>,
}

impl Possession {
    pub fn duration(&self) -> Millis {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameRecord {
    pub game_id: String,
    pub team_a: String,
    pub team_b: String,
    pub final_score_a: u32,
    pub final_score_b: u32,
    /// Sorted by start time.
    pub possessions: Vec<Possession>,
}

impl GameRecord {
    pub fn final_score(&self, team: &str) -> Option<u32> {
        if team == self.team_a {
            Some(self.final_score_a)
        } else if team == self.team_b {
            Some(self.final_score_b)
        } else {
            None
        }
    }

    pub fn opponent(&self, team: &str) -> Option<&str> {
        if team == self.team_a {
            Some(&self.team_b)
        } else if team == self.team_b {
            Some(&self.team_a)
        } else {
            None
        }
    }

    pub fn possessions_of<'a>(&'a self, team: &'a str) -> impl Iterator<Item = &'a Possession> + 'a {
        self.possessions.iter().filter(move |p| p.team == team)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dataset {
    pub games: Vec<GameRecord>,
}

impl Dataset {
    pub fn possessions(&self) -> impl Iterator<Item = &Possession> {
        self.games.iter().flat_map(|g| g.possessions.iter())
    }

    /// Teams in order of first appearance.
    pub fn teams(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for g in &self.games {
            for t in [g.team_a.as_str(), g.team_b.as_str()] {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    pub fn possessions_of<'a>(&'a self, team: &'a str) -> impl Iterator<Item = &'a Possession> + 'a {
        self.possessions().filter(move |p| p.team == team)
    }

    pub fn n_possessions(&self) -> usize {
        self.games.iter().map(|g| g.possessions.len()).sum()
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Header { file: &'static str, expected: String, found: String },
    #[error("{file} line {line}, column `{column}`: {message}")]
    Malformed { file: &'static str, line: u64, column: String, message: String },
    #[error("duplicate possession `{possession_id}` in game `{game_id}` (possessions line {line})")]
    DuplicatePossession { game_id: String, possession_id: String, line: u64 },
    #[error("events line {line} references unknown possession `{possession_id}` in game `{game_id}`")]
    DanglingPossession { game_id: String, possession_id: String, line: u64 },
    #[error("game `{game_id}` has {count} teams, expected 2")]
    TeamCount { game_id: String, count: usize },
    #[error("{}", summarize(.0))]
    Invalid(Vec<Violation>),
}

fn summarize(v: &[Violation]) -> String {
    match v {
        [] => "invalid dataset".to_string(),
        [one] => one.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more violations)", rest.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    SelfPass,
    EmptyInterval,
    EventOutOfBounds,
    NonIncreasingTimes,
    ChainBreak,
    ForeignTeam,
    ScoreMismatch,
    RelativeScoreDrift,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub severity: Severity,
    pub game_id: String,
    pub possession_id: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.possession_id {
            Some(p) => write!(f, "{sev}: game `{}` possession `{p}`: {}", self.game_id, self.message),
            None => write!(f, "{sev}: game `{}`: {}", self.game_id, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant violation in `dataset`. Never mutates it.
pub fn validate(dataset: &Dataset) -> ValidationReport {
    let mut out = Vec::new();
    for game in &dataset.games {
        validate_game(game, &mut out);
    }
    ValidationReport { violations: out }
}

fn validate_game(game: &GameRecord, out: &mut Vec<Violation>) {
    let err = |kind, poss: Option<&str>, message: String| Violation {
        kind,
        severity: Severity::Error,
        game_id: game.game_id.clone(),
        possession_id: poss.map(str::to_string),
        message,
    };

    let mut sums: HashMap<&str, u32> = HashMap::new();
    for p in &game.possessions {
        let pid = Some(p.possession_id.as_str());
        if p.team != game.team_a && p.team != game.team_b {
            out.push(err(
                ViolationKind::ForeignTeam,
                pid,
                format!("team `{}` is neither `{}` nor `{}`", p.team, game.team_a, game.team_b),
            ));
        }
        *sums.entry(p.team.as_str()).or_default() += p.points_scored;
        if p.start >= p.end {
            out.push(err(ViolationKind::EmptyInterval, pid, format!("start {} is not before end {}", p.start, p.end)));
        }
        for e in &p.events {
            if e.passer == e.receiver {
                out.push(err(
                    ViolationKind::SelfPass,
                    pid,
                    format!("pass at {} from `{}` to itself", e.time, e.passer),
                ));
            }
            if e.time < p.start || e.time > p.end {
                out.push(err(
                    ViolationKind::EventOutOfBounds,
                    pid,
                    format!("pass at {} lies outside [{}, {}]", e.time, p.start, p.end),
                ));
            }
        }
        for pair in p.events.windows(2) {
            if pair[1].time <= pair[0].time {
                out.push(err(
                    ViolationKind::NonIncreasingTimes,
                    pid,
                    format!("passes at {} and {} are not strictly increasing", pair[0].time, pair[1].time),
                ));
            }
            if pair[0].receiver != pair[1].passer {
                out.push(err(
                    ViolationKind::ChainBreak,
                    pid,
                    format!(
                        "chain violation: pass at {} ends with `{}` but pass at {} starts with `{}`",
                        pair[0].time, pair[0].receiver, pair[1].time, pair[1].passer
                    ),
                ));
            }
        }
    }

    for (team, final_score) in [(&game.team_a, game.final_score_a), (&game.team_b, game.final_score_b)] {
        let sum = sums.get(team.as_str()).copied().unwrap_or(0);
        if sum != final_score {
            out.push(err(
                ViolationKind::ScoreMismatch,
                None,
                format!("team `{team}` final score {final_score} differs from summed possession points {sum}"),
            ));
        }
    }

    // Free throws between recorded possessions legitimately desynchronize this,
    // so it is only a warning.
    let mut running: HashMap<&str, i64> = HashMap::new();
    let mut drift = 0usize;
    let mut first = None;
    for p in &game.possessions {
        let own = running.get(p.team.as_str()).copied().unwrap_or(0);
        let other = game.opponent(&p.team).and_then(|o| running.get(o).copied()).unwrap_or(0);
        if own - other != i64::from(p.relative_score) {
            drift += 1;
            first.get_or_insert(p.possession_id.as_str());
        }
        *running.entry(p.team.as_str()).or_default() += i64::from(p.points_scored);
    }
    if drift > 0 {
        out.push(Violation {
            kind: ViolationKind::RelativeScoreDrift,
            severity: Severity::Warning,
            game_id: game.game_id.clone(),
            possession_id: first.map(str::to_string),
            message: format!("{drift} of {} possessions disagree with the running score", game.possessions.len()),
        });
    }
}

struct PossessionRow {
    line: u64,
    possession: Possession,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

/// Loads and validates a dataset; any error-level violation fails the load.
pub fn load_dataset(events_path: &Path, possessions_path: &Path) -> Result<Dataset, IngestError> {
    let dataset = read_dataset(open(events_path)?, open(possessions_path)?)?;
    check(dataset)
}

/// Parses and assembles a dataset without rejecting invariant violations.
pub fn load_unchecked(events_path: &Path, possessions_path: &Path) -> Result<Dataset, IngestError> {
    read_dataset(open(events_path)?, open(possessions_path)?)
}

/// Fails with every error-level violation, passes warnings through.
pub fn check(dataset: Dataset) -> Result<Dataset, IngestError> {
    let report = validate(&dataset);
    if report.has_errors() {
        for w in report.warnings() {
            log::warn!("{w}");
        }
        return Err(IngestError::Invalid(report.errors().cloned().collect()));
    }
    for w in report.warnings() {
        log::warn!("{w}");
    }
    Ok(dataset)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &'static str, expected: &[&str]) -> Result<(), IngestError> {
    let header = rdr.headers().map_err(|e| csv_error(file, e))?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(IngestError::Header { file, expected: expected.join(","), found: found.join(",") });
    }
    Ok(())
}

fn csv_error(file: &'static str, e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    IngestError::Malformed { file, line, column: String::new(), message: e.to_string() }
}

fn field<'r, T, F>(
    rec: &'r csv::StringRecord,
    file: &'static str,
    idx: usize,
    header: &[&str],
    parse: F,
) -> Result<T, IngestError>
where
    F: FnOnce(&'r str) -> Result<T, String>,
{
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let raw = rec.get(idx).ok_or_else(|| IngestError::Malformed {
        file,
        line,
        column: header[idx].to_string(),
        message: "missing field".to_string(),
    })?;
    parse(raw).map_err(|message| IngestError::Malformed { file, line, column: header[idx].to_string(), message })
}

fn ident(s: &str) -> Result<String, String> {
    if s.is_empty() {
        Err("empty identifier".to_string())
    } else {
        Ok(s.to_string())
    }
}

fn int<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a valid integer"))
}

/// Parses both files and builds the game model. Only structural problems
/// (bad rows, duplicate or unknown possessions, team count) are errors here.
pub fn read_dataset<E: Read, P: Read>(events: E, possessions: P) -> Result<Dataset, IngestError> {
    const PF: &str = "possessions";
    const EF: &str = "events";

    let mut rdr = reader(possessions);
    check_header(&mut rdr, PF, &POSSESSIONS_HEADER)?;
    let mut rows: Vec<PossessionRow> = Vec::new();
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(PF, e))?;
        let h = &POSSESSIONS_HEADER;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let possession = Possession {
            game_id: field(&rec, PF, 0, h, ident)?,
            possession_id: field(&rec, PF, 1, h, ident)?,
            team: field(&rec, PF, 2, h, ident)?,
            start: field(&rec, PF, 3, h, str::parse::<Millis>)?,
            end: field(&rec, PF, 4, h, str::parse::<Millis>)?,
            relative_score: field(&rec, PF, 5, h, int::<i32>)?,
            points_scored: field(&rec, PF, 6, h, int::<u32>)?,
            events: Vec::new(),
        };
        let key = (possession.game_id.clone(), possession.possession_id.clone());
        if index.contains_key(&key) {
            return Err(IngestError::DuplicatePossession { game_id: key.0, possession_id: key.1, line });
        }
        index.insert(key, rows.len());
        rows.push(PossessionRow { line, possession });
    }

    let mut rdr = reader(events);
    check_header(&mut rdr, EF, &EVENTS_HEADER)?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(EF, e))?;
        let h = &EVENTS_HEADER;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let ev = PassEvent {
            game_id: field(&rec, EF, 0, h, ident)?,
            possession_id: field(&rec, EF, 1, h, ident)?,
            time: field(&rec, EF, 2, h, str::parse::<Millis>)?,
            passer: field(&rec, EF, 3, h, ident)?,
            receiver: field(&rec, EF, 4, h, ident)?,
        };
        let key = (ev.game_id.clone(), ev.possession_id.clone());
        match index.get(&key) {
            Some(&i) => rows[i].possession.events.push(ev),
            None => return Err(IngestError::DanglingPossession { game_id: key.0, possession_id: key.1, line }),
        }
    }

    assemble(rows.into_iter().map(|r| (r.line, r.possession)).collect())
}

/// Groups possessions into games, sorting events and possessions by time.
/// Final scores are the per-team sums of points scored.
fn assemble(rows: Vec<(u64, Possession)>) -> Result<Dataset, IngestError> {
    let mut order: Vec<String> = Vec::new();
    let mut by_game: BTreeMap<String, Vec<Possession>> = BTreeMap::new();
    for (_, mut p) in rows {
        p.events.sort_by_key(|e| e.time);
        if !by_game.contains_key(&p.game_id) {
            order.push(p.game_id.clone());
        }
        by_game.entry(p.game_id.clone()).or_default().push(p);
    }

    let mut games = Vec::with_capacity(order.len());
    for game_id in order {
        let mut possessions = by_game.remove(&game_id).unwrap_or_default();
        let mut teams: Vec<String> = Vec::new();
        for p in &possessions {
            if !teams.contains(&p.team) {
                teams.push(p.team.clone());
            }
        }
        if teams.len() != 2 {
            return Err(IngestError::TeamCount { game_id, count: teams.len() });
        }
        possessions.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.possession_id.cmp(&b.possession_id)));
        let score = |t: &str| possessions.iter().filter(|p| p.team == t).map(|p| p.points_scored).sum();
        let team_b = teams.pop().unwrap_or_default();
        let team_a = teams.pop().unwrap_or_default();
        games.push(GameRecord {
            final_score_a: score(&team_a),
            final_score_b: score(&team_b),
            game_id,
            team_a,
            team_b,
            possessions,
        });
    }
    Ok(Dataset { games })
}

pub fn write_events<W: Write>(dataset: &Dataset, w: W) -> io::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(EVENTS_HEADER)?;
    for p in dataset.possessions() {
        for e in &p.events {
            wtr.write_record([
                e.game_id.as_str(),
                e.possession_id.as_str(),
                &e.time.to_string(),
                e.passer.as_str(),
                e.receiver.as_str(),
            ])?;
        }
    }
    wtr.flush()
}

pub fn write_possessions<W: Write>(dataset: &Dataset, w: W) -> io::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(POSSESSIONS_HEADER)?;
    for p in dataset.possessions() {
        wtr.write_record([
            p.game_id.as_str(),
            p.possession_id.as_str(),
            p.team.as_str(),
            &p.start.to_string(),
            &p.end.to_string(),
            &p.relative_score.to_string(),
            &p.points_scored.to_string(),
        ])?;
    }
    wtr.flush()
}

pub fn save_dataset(dataset: &Dataset, events_path: &Path, possessions_path: &Path) -> Result<(), IngestError> {
    let io_err = |path: &Path, source| IngestError::Io { path: path.to_path_buf(), source };
    File::create(events_path)
        .and_then(|f| write_events(dataset, io::BufWriter::new(f)))
        .map_err(|e| io_err(events_path, e))?;
    File::create(possessions_path)
        .and_then(|f| write_possessions(dataset, io::BufWriter::new(f)))
        .map_err(|e| io_err(possessions_path, e))
}
