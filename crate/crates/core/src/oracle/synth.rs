//! Deterministic synthetic datasets with a ground-truth manifest.
//!
//! All sampling is integer-valued on a seeded ChaCha8 stream, so a given
//! spec produces byte-identical files on every platform. Ground-truth counts
//! in the manifest come from the naive reference code in [`super::brute`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::brute::{brute_classify, brute_counts, brute_labels, LABELS};
use crate::ingest::{write_events, write_possessions, Dataset, GameRecord, Millis, PassEvent, Possession};

/// How `relative_score` is set on each possession.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreTrajectory {
    /// Running difference of points scored so far in the game.
    Running,
    /// Independent uniform draw from `lo..=hi`.
    Uniform { lo: i32, hi: i32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_games: usize,
    pub teams: Vec<String>,
    pub players_per_team: usize,
    /// Per team and game.
    pub possessions_per_team: usize,
    /// State shares in canonical order. When set, every possession lasts
    /// exactly one window and repeats a single state.
    pub target_profile: Option<[f64; 10]>,
    /// Inclusive, milliseconds.
    pub possession_length_ms: (i64, i64),
    pub inter_pass_gap_min_ms: i64,
    pub inter_pass_gap_max_ms: i64,
    /// Chance, per thousand, that a gap is drawn from `long_gap_ms` instead.
    pub long_gap_permille: u32,
    pub long_gap_ms: (i64, i64),
    pub score_trajectory: ScoreTrajectory,
    /// Replace a few random possessions with scripted two-window ones so that
    /// every state pair reachable in one step occurs somewhere.
    pub coverage_tour: bool,
    /// Window parameters the manifest counts refer to.
    pub delta_ms: i64,
    pub tau_ms: i64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            n_games: 2,
            teams: vec!["A".into(), "B".into()],
            players_per_team: 5,
            possessions_per_team: 60,
            target_profile: None,
            possession_length_ms: (3_000, 24_000),
            inter_pass_gap_min_ms: 500,
            inter_pass_gap_max_ms: 2_500,
            long_gap_permille: 80,
            long_gap_ms: (6_000, 9_000),
            score_trajectory: ScoreTrajectory::Running,
            coverage_tour: true,
            delta_ms: 6_000,
            tau_ms: 250,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("target profile infeasible: {0}")]
    InfeasibleTarget(String),
}

/// Ordered `key=value` ground truth.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# synthetic dataset ground truth\n");
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Manifest {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Manifest { entries }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub manifest: Manifest,
}

impl Synthetic {
    /// Writes `events.csv`, `possessions.csv` and `manifest.txt`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_events(&self.dataset, fs::File::create(dir.join("events.csv"))?)?;
        write_possessions(&self.dataset, fs::File::create(dir.join("possessions.csv"))?)?;
        fs::write(dir.join("manifest.txt"), self.manifest.render())
    }
}

/// Holder codes for a one-window possession in each state.
pub(crate) fn state_code(label: &str) -> &'static [usize] {
    match label {
        "1" => &[1],
        "12" => &[1, 2],
        "121" => &[1, 2, 1],
        "123" => &[1, 2, 3],
        "1212" => &[1, 2, 1, 2],
        "1213" => &[1, 2, 1, 3],
        "1231" => &[1, 2, 3, 1],
        "1232" => &[1, 2, 3, 2],
        "1234" => &[1, 2, 3, 4],
        _ => &[1, 2, 1, 2, 1],
    }
}

fn check_spec(spec: &SynthSpec) -> Result<(), SynthError> {
    let bad = |m: &str| Err(SynthError::Invalid(m.to_string()));
    if spec.teams.len() < 2 {
        return bad("need at least two teams");
    }
    let mut names = spec.teams.clone();
    names.sort();
    names.dedup();
    if names.len() != spec.teams.len() {
        return bad("team names must be distinct");
    }
    if spec.n_games == 0 {
        return bad("need at least one game");
    }
    if spec.possessions_per_team == 0 {
        return bad("need at least one possession per team");
    }
    if spec.players_per_team < 2 {
        return bad("need at least two players per team");
    }
    let (lo, hi) = spec.possession_length_ms;
    if lo <= 0 || hi < lo {
        return bad("possession length range must be positive and ordered");
    }
    if spec.tau_ms <= 0 || spec.delta_ms <= spec.tau_ms {
        return bad("window step must be positive and shorter than the window");
    }
    if spec.inter_pass_gap_min_ms <= spec.tau_ms {
        return bad("minimum inter-pass gap must exceed the window step");
    }
    if spec.inter_pass_gap_max_ms < spec.inter_pass_gap_min_ms {
        return bad("inter-pass gap range must be ordered");
    }
    if spec.long_gap_permille > 1000
        || spec.long_gap_ms.1 < spec.long_gap_ms.0
        || spec.long_gap_ms.0 < spec.inter_pass_gap_min_ms
    {
        return bad("long gap settings out of range");
    }
    if let ScoreTrajectory::Uniform { lo, hi } = spec.score_trajectory {
        if hi < lo {
            return bad("score range must be ordered");
        }
    }
    Ok(())
}

/// Per-possession state counts meeting the target shares as closely as
/// integer counts allow (largest remainder).
fn quota(target: &[f64; 10], n: usize) -> Vec<usize> {
    let raw: Vec<f64> = target.iter().map(|s| s * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut rest: Vec<(usize, f64)> = raw.iter().enumerate().map(|(i, r)| (i, r - r.floor())).collect();
    rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let short = n.saturating_sub(counts.iter().sum::<usize>());
    for &(i, _) in rest.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

fn check_target(spec: &SynthSpec, target: &[f64; 10]) -> Result<(), SynthError> {
    let fail = |m: String| Err(SynthError::InfeasibleTarget(m));
    if target.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return fail("shares must be finite and non-negative".into());
    }
    let sum: f64 = target.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return fail(format!("shares sum to {sum}, not 1"));
    }
    let (lo, hi) = spec.possession_length_ms;
    if spec.delta_ms < lo || spec.delta_ms > hi {
        return fail(format!("one-window possessions last {} ms, outside the length range", spec.delta_ms));
    }
    for (label, share) in LABELS.iter().zip(target) {
        if *share == 0.0 {
            continue;
        }
        let code = state_code(label);
        let players = code.iter().max().copied().unwrap_or(1);
        if players > spec.players_per_team {
            return fail(format!("state {label} needs {players} players"));
        }
        let passes = code.len() as i64 - 1;
        if passes > 0 && spec.delta_ms / (passes + 1) < spec.inter_pass_gap_min_ms {
            return fail(format!(
                "state {label} needs {passes} passes spaced at least {} ms within one window",
                spec.inter_pass_gap_min_ms
            ));
        }
    }
    Ok(())
}

fn roster(team: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{team}{k}")).collect()
}

struct Sampler<'a> {
    rng: ChaCha8Rng,
    spec: &'a SynthSpec,
}

impl Sampler<'_> {
    /// Times and durations sit on the window-step grid, so a pass can leave
    /// and another enter the window in the same step.
    fn on_grid(&mut self, lo: i64, hi: i64) -> i64 {
        let g = self.spec.tau_ms;
        let a = (lo + g - 1) / g;
        let b = hi / g;
        g * self.rng.gen_range(a..=b.max(a))
    }

    fn gap(&mut self) -> i64 {
        if self.rng.gen_range(0..1000) < self.spec.long_gap_permille {
            self.on_grid(self.spec.long_gap_ms.0, self.spec.long_gap_ms.1)
        } else {
            self.on_grid(self.spec.inter_pass_gap_min_ms, self.spec.inter_pass_gap_max_ms)
        }
    }

    fn points(&mut self) -> u32 {
        match self.rng.gen_range(0..100) {
            0..=49 => 0,
            50..=54 => 1,
            55..=86 => 2,
            _ => 3,
        }
    }

    fn random_walk(&mut self, game: &str, pid: &str, players: &[String], start: i64, end: i64) -> Vec<PassEvent> {
        let mut events = Vec::new();
        let mut holder = self.rng.gen_range(0..players.len());
        let mut t = start + self.gap();
        while t <= end {
            let mut next = self.rng.gen_range(0..players.len() - 1);
            if next >= holder {
                next += 1;
            }
            events.push(PassEvent {
                game_id: game.to_string(),
                possession_id: pid.to_string(),
                time: Millis(t),
                passer: players[holder].clone(),
                receiver: players[next].clone(),
            });
            holder = next;
            t += self.gap();
        }
        events
    }

    /// Two windows: the first shows the walk, the second the edited walk.
    /// The dropped pass sits at the possession start and the appended one
    /// one step after the first window closes.
    fn tour(&mut self, game: &str, pid: &str, players: &[String], start: i64, w: &Witness) -> Option<Vec<PassEvent>> {
        let (delta, tau) = (self.spec.delta_ms, self.spec.tau_ms);
        let gap = (self.spec.inter_pass_gap_min_ms + tau - 1) / tau * tau;
        let mut cast = players.to_vec();
        cast.shuffle(&mut self.rng);
        let pass = |t: i64, a: usize, b: usize| PassEvent {
            game_id: game.to_string(),
            possession_id: pid.to_string(),
            time: Millis(start + t),
            passer: cast[a - 1].clone(),
            receiver: cast[b - 1].clone(),
        };
        let holders = &w.walk;
        let mut events = Vec::new();
        let mut first = 0;
        if w.drop {
            events.push(pass(0, holders[0], holders[1]));
            first = 1;
        }
        let kept: Vec<(usize, usize)> = holders[first..].windows(2).map(|p| (p[0], p[1])).collect();
        let limit = if w.append.is_some() { delta + tau - gap } else { delta };
        if !kept.is_empty() {
            let span = limit - gap;
            let step = if kept.len() > 1 { span / (kept.len() as i64 - 1) / tau * tau } else { gap };
            if span < 0 || step < gap {
                return None;
            }
            for (j, &(a, b)) in kept.iter().enumerate() {
                events.push(pass(gap + step * j as i64, a, b));
            }
        }
        if let Some(h) = w.append {
            events.push(pass(delta + tau, *holders.last().unwrap(), h));
        }
        Some(events)
    }

    fn planted(&mut self, game: &str, pid: &str, players: &[String], start: i64, label: &str) -> Vec<PassEvent> {
        let code = state_code(label);
        let mut cast = players.to_vec();
        cast.shuffle(&mut self.rng);
        let spacing = (self.spec.delta_ms / code.len() as i64) / 10 * 10;
        code.windows(2)
            .enumerate()
            .map(|(j, w)| PassEvent {
                game_id: game.to_string(),
                possession_id: pid.to_string(),
                time: Millis(start + spacing * (j as i64 + 1)),
                passer: cast[w[0] - 1].clone(),
                receiver: cast[w[1] - 1].clone(),
            })
            .collect()
    }
}

/// A holder walk and a one-step edit of it: optionally drop the first pass,
/// optionally append a pass to `append`. Holders are 1-based roster slots.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Witness {
    walk: Vec<usize>,
    drop: bool,
    append: Option<usize>,
}

fn walk_passes(walk: &[usize]) -> Vec<(String, String)> {
    walk.windows(2).map(|w| (w[0].to_string(), w[1].to_string())).collect()
}

/// First witness, in enumeration order, for every `(before, after)` label
/// pair reachable by one edit of a canonical walk of up to `max_passes`.
fn witnesses(players: usize, max_passes: usize) -> Vec<Witness> {
    let mut walks = vec![vec![1usize]];
    let mut frontier = walks.clone();
    for _ in 0..max_passes {
        let mut next = Vec::new();
        for w in &frontier {
            let fresh = (w.iter().max().unwrap() + 1).min(players);
            for h in 1..=fresh {
                if h != *w.last().unwrap() {
                    let mut x = w.clone();
                    x.push(h);
                    next.push(x);
                }
            }
        }
        walks.extend(next.iter().cloned());
        frontier = next;
    }
    let mut found: BTreeMap<(usize, usize), Witness> = BTreeMap::new();
    let index = |l: &str| LABELS.iter().position(|x| *x == l).expect("known label");
    for walk in walks {
        let passes = walk_passes(&walk);
        let before = index(&brute_classify(&passes).expect("walks chain"));
        let last = *walk.last().unwrap();
        let fresh = (walk.iter().max().unwrap() + 1).min(players);
        for drop in [false, true] {
            if drop && passes.is_empty() {
                continue;
            }
            let appends = std::iter::once(None).chain((1..=fresh).filter(|&h| h != last).map(Some));
            for append in appends {
                let mut edited: Vec<(String, String)> = passes[usize::from(drop)..].to_vec();
                if let Some(h) = append {
                    edited.push((last.to_string(), h.to_string()));
                }
                let after = index(&brute_classify(&edited).expect("edits chain"));
                found.entry((before, after)).or_insert_with(|| Witness { walk: walk.clone(), drop, append });
            }
        }
    }
    found.into_values().collect()
}

/// Team pairs for game `g`, cycling over all unordered pairs.
fn fixture(teams: &[String], g: usize) -> (String, String) {
    let mut pairs = Vec::new();
    for i in 0..teams.len() {
        for j in i + 1..teams.len() {
            pairs.push((teams[i].clone(), teams[j].clone()));
        }
    }
    pairs[g % pairs.len()].clone()
}

pub fn generate(spec: &SynthSpec) -> Result<Synthetic, SynthError> {
    check_spec(spec)?;
    if let Some(t) = &spec.target_profile {
        check_target(spec, t)?;
    }
    let mut s = Sampler { rng: ChaCha8Rng::seed_from_u64(spec.seed), spec };
    let tour_fits = spec.possession_length_ms.1 >= spec.delta_ms + spec.tau_ms;
    let tour_plan = if spec.coverage_tour && tour_fits && spec.target_profile.is_none() {
        witnesses(spec.players_per_team, 5)
    } else {
        Vec::new()
    };
    let mut games = Vec::with_capacity(spec.n_games);
    for g in 0..spec.n_games {
        let game_id = format!("g{:02}", g + 1);
        let (team_a, team_b) = fixture(&spec.teams, g);
        let sides = [team_a.clone(), team_b.clone()];
        let rosters = [roster(&team_a, spec.players_per_team), roster(&team_b, spec.players_per_team)];
        let mut plans: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
        if let Some(target) = &spec.target_profile {
            for plan in plans.iter_mut() {
                for (label, c) in LABELS.iter().zip(quota(target, spec.possessions_per_team)) {
                    plan.extend(std::iter::repeat_n(*label, c));
                }
                plan.shuffle(&mut s.rng);
            }
        }
        let share = 2 * spec.n_games;
        let tours: [Vec<&Witness>; 2] = [0, 1].map(|side| {
            tour_plan.iter().enumerate().filter(|(i, _)| i % share == 2 * g + side).map(|(_, w)| w).collect()
        });
        let mut running = [0i32; 2];
        let mut clock = 0i64;
        let mut possessions = Vec::new();
        for k in 0..2 * spec.possessions_per_team {
            let side = k % 2;
            let pid = format!("{game_id}-{:03}", k + 1);
            let start = clock;
            let (events, end) = match spec.target_profile {
                Some(_) => {
                    let label = plans[side][k / 2];
                    (s.planted(&game_id, &pid, &rosters[side], start, label), start + spec.delta_ms)
                }
                None if k / 2 < tours[side].len() => {
                    let w = tours[side][k / 2];
                    match s.tour(&game_id, &pid, &rosters[side], start, w) {
                        Some(ev) => (ev, start + spec.delta_ms + spec.tau_ms),
                        None => (Vec::new(), start + spec.delta_ms + spec.tau_ms),
                    }
                }
                None => {
                    let end = start + s.on_grid(spec.possession_length_ms.0, spec.possession_length_ms.1);
                    (s.random_walk(&game_id, &pid, &rosters[side], start, end), end)
                }
            };
            let relative_score = match spec.score_trajectory {
                ScoreTrajectory::Running => running[side] - running[1 - side],
                ScoreTrajectory::Uniform { lo, hi } => s.rng.gen_range(lo..=hi),
            };
            let points = s.points();
            running[side] += points as i32;
            possessions.push(Possession {
                game_id: game_id.clone(),
                possession_id: pid,
                team: sides[side].clone(),
                start: Millis(start),
                end: Millis(end),
                relative_score,
                points_scored: points,
                events,
            });
            clock = end + s.on_grid(1_000, 5_000);
        }
        games.push(GameRecord {
            game_id,
            team_a,
            team_b,
            final_score_a: running[0] as u32,
            final_score_b: running[1] as u32,
            possessions,
        });
    }
    let dataset = Dataset { games };
    let manifest = manifest(spec, &dataset);
    Ok(Synthetic { dataset, manifest })
}

fn manifest(spec: &SynthSpec, dataset: &Dataset) -> Manifest {
    let mut m = Manifest::default();
    m.push("seed", spec.seed);
    m.push("n_games", spec.n_games);
    m.push("teams", spec.teams.join(","));
    m.push("delta_ms", spec.delta_ms);
    m.push("tau_ms", spec.tau_ms);
    m.push("labels", LABELS.join(","));
    let mut n = 0usize;
    let mut retained = 0usize;
    for team in &spec.teams {
        let mut seqs = Vec::new();
        for p in dataset.games.iter().flat_map(|g| &g.possessions).filter(|p| &p.team == team) {
            n += 1;
            let labels = brute_labels(p, spec.delta_ms, spec.tau_ms).expect("generated passes chain");
            if !labels.is_empty() {
                retained += 1;
            }
            seqs.push(labels);
        }
        let counts = brute_counts(&seqs);
        let states: Vec<String> =
            LABELS.iter().map(|l| counts.states.get(*l).copied().unwrap_or(0).to_string()).collect();
        m.push(format!("state_counts.{team}"), states.join(","));
        let transitions: u64 = counts.transitions.values().sum();
        m.push(format!("transitions.{team}"), transitions);
    }
    m.push("n_possessions", n);
    m.push("n_retained", retained);
    let fraction = if n == 0 { 0.0 } else { retained as f64 / n as f64 };
    m.push("retained_fraction", format!("{fraction:.6}"));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = generate(&SynthSpec::default()).unwrap();
        let b = generate(&SynthSpec::default()).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthSpec { seed: 7, ..SynthSpec::default() }).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn short_possessions_retain_nothing() {
        let spec = SynthSpec { possession_length_ms: (1_000, 5_990), ..SynthSpec::default() };
        let s = generate(&spec).unwrap();
        assert_eq!(s.manifest.get("retained_fraction"), Some("0.000000"));
        assert_eq!(s.manifest.get("n_retained"), Some("0"));
    }

    #[test]
    fn target_errors() {
        let mut t = [0.0; 10];
        t[0] = 0.5;
        let spec = SynthSpec { target_profile: Some(t), ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InfeasibleTarget(_))));
        t[0] = 0.0;
        t[8] = 1.0;
        let spec = SynthSpec { target_profile: Some(t), players_per_team: 3, ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InfeasibleTarget(_))));
        let spec = SynthSpec { target_profile: Some(t), possession_length_ms: (7_000, 9_000), ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InfeasibleTarget(_))));
        let mut o = [0.0; 10];
        o[9] = 1.0;
        let spec = SynthSpec { target_profile: Some(o), inter_pass_gap_min_ms: 1_500, ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::InfeasibleTarget(_))));
    }

    #[test]
    fn invalid_spec() {
        let spec = SynthSpec { inter_pass_gap_min_ms: 250, ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::Invalid(_))));
        let spec = SynthSpec { teams: vec!["A".into()], ..SynthSpec::default() };
        assert!(matches!(generate(&spec), Err(SynthError::Invalid(_))));
    }

    #[test]
    fn witness_pairs() {
        let w = witnesses(5, 5);
        assert_eq!(w.len(), 48);
        assert_eq!(witnesses(2, 5).iter().filter(|x| x.walk.iter().any(|&h| h > 2)).count(), 0);
    }

    #[test]
    fn quota_is_exact() {
        let t = [0.3, 0.2, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05];
        assert_eq!(quota(&t, 100), vec![30, 20, 10, 10, 5, 5, 5, 5, 5, 5]);
        assert_eq!(quota(&t, 7).iter().sum::<usize>(), 7);
    }

    #[test]
    fn manifest_round_trip() {
        let s = generate(&SynthSpec::default()).unwrap();
        assert_eq!(Manifest::parse(&s.manifest.render()), s.manifest);
    }
}
