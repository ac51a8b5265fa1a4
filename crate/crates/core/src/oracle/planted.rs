//! Datasets with a known best score partition and a known entropy-to-points
//! ordering. Every possession lasts exactly one default window (6 s), so
//! each contributes one planted state.
//!
//! Per team, relative scores fall in three regimes:
//!
//! * `−20..=−5`: ten possessions per value, all in state `1`;
//! * `−4..=4`: states cycle through the team's first `m` states, with
//!   per-value counts chosen so that only the whole regime is uniform;
//! * `5..=15`: four possessions per value, three `1` and one `12`.
//!
//! The SE spread is then maximal only for the split at `−4` and `5`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::brute::{brute_counts, brute_entropy, brute_labels, LABELS};
use super::synth::state_code;
use crate::ingest::{Dataset, GameRecord, Millis, PassEvent, Possession};

pub const PLANTED_F1: i32 = -4;
pub const PLANTED_F2: i32 = 5;
const WINDOW_MS: i64 = 6_000;
const SPACING_MS: i64 = 7_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub dataset: Dataset,
    /// `(team, f1, f2)` for every team whose partition is planted.
    pub boundaries: Vec<(String, i32, i32)>,
}

/// Possessions in the middle regime per score value. Every proper prefix sum
/// is `1 mod m` and the total is a multiple of `m`.
pub fn middle_counts(m: usize) -> [usize; 9] {
    let mut c = [2 * m; 9];
    c[0] = m + 1;
    c[8] = 2 * m - 1;
    c
}

/// `(relative_score, state label)` for one team with support size `m`.
pub fn team_pool(m: usize) -> Vec<(i32, &'static str)> {
    assert!((2..=10).contains(&m), "support size must be in 2..=10");
    let mut out = Vec::new();
    for s in -20..=-5 {
        out.extend(std::iter::repeat_n((s, "1"), 10));
    }
    let mut k = 0;
    for (s, &c) in (-4..=4).zip(&middle_counts(m)) {
        for _ in 0..c {
            out.push((s, LABELS[k % m]));
            k += 1;
        }
    }
    for s in 5..=15 {
        out.extend([(s, "1"), (s, "1"), (s, "1"), (s, "12")]);
    }
    out
}

fn one_window(game: &str, n: usize, team: &str, start: i64, score: i32, label: &str) -> Possession {
    let pid = format!("{game}-{n:03}");
    let code = state_code(label);
    let events = code
        .windows(2)
        .enumerate()
        .map(|(j, w)| PassEvent {
            game_id: game.to_string(),
            possession_id: pid.clone(),
            time: Millis(start + 1_000 * (j as i64 + 1)),
            passer: format!("{team}{}", w[0]),
            receiver: format!("{team}{}", w[1]),
        })
        .collect();
    Possession {
        game_id: game.to_string(),
        possession_id: pid,
        team: team.to_string(),
        start: Millis(start),
        end: Millis(start + WINDOW_MS),
        relative_score: score,
        points_scored: 0,
        events,
    }
}

fn assemble(game_id: &str, team_a: &str, team_b: &str, sides: [Vec<(i32, &str)>; 2]) -> GameRecord {
    let teams = [team_a, team_b];
    let mut order = Vec::new();
    let longest = sides[0].len().max(sides[1].len());
    for i in 0..longest {
        for (side, items) in sides.iter().enumerate() {
            if let Some(&item) = items.get(i) {
                order.push((side, item));
            }
        }
    }
    let possessions = order
        .into_iter()
        .enumerate()
        .map(|(n, (side, (score, label)))| one_window(game_id, n + 1, teams[side], n as i64 * SPACING_MS, score, label))
        .collect();
    GameRecord {
        game_id: game_id.to_string(),
        team_a: team_a.to_string(),
        team_b: team_b.to_string(),
        final_score_a: 0,
        final_score_b: 0,
        possessions,
    }
}

fn settle_scores(game: &mut GameRecord) {
    let sum = |t: &str| game.possessions.iter().filter(|p| p.team == t).map(|p| p.points_scored).sum();
    game.final_score_a = sum(&game.team_a);
    game.final_score_b = sum(&game.team_b);
}

/// Gives a team `total` points in a game, two at a time from its first
/// possession on.
fn distribute(game: &mut GameRecord, team: &str, total: u32) {
    let mut left = total;
    for p in game.possessions.iter_mut().filter(|p| p.team == team) {
        let pts = left.min(2);
        p.points_scored = pts;
        left -= pts;
    }
    assert_eq!(left, 0, "not enough possessions to carry {total} points");
}

/// One game: team `P` with full support and the planted split, against `Q`.
pub fn partition_dataset() -> Planted {
    let q = vec![(0, "12"); 20];
    let mut game = assemble("g01", "P", "Q", [team_pool(10), q]);
    for (k, p) in game.possessions.iter_mut().enumerate() {
        p.points_scored = if k % 3 == 0 { 2 } else { 0 };
    }
    settle_scores(&mut game);
    Planted { dataset: Dataset { games: vec![game] }, boundaries: vec![("P".to_string(), PLANTED_F1, PLANTED_F2)] }
}

pub const SIGNAL_TEAMS: [(&str, usize); 3] = [("T1", 4), ("T2", 7), ("T3", 10)];

/// Three teams with support sizes 4, 7 and 10 in a double round robin.
/// Each team's pool is shuffled and dealt over its games; game scores are
/// then set so that a team's points rise strictly with its SE in that game.
pub fn signal_dataset(seed: u64) -> Planted {
    let fixtures = [(0, 1), (0, 2), (1, 2), (0, 1), (0, 2), (1, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dealt: Vec<[Vec<(i32, &str)>; 2]> = vec![[Vec::new(), Vec::new()]; fixtures.len()];
    for (t, &(_, m)) in SIGNAL_TEAMS.iter().enumerate() {
        let mut pool = team_pool(m);
        pool.shuffle(&mut rng);
        let slots: Vec<(usize, usize)> = fixtures
            .iter()
            .enumerate()
            .filter_map(|(g, &(a, b))| {
                if a == t {
                    Some((g, 0))
                } else if b == t {
                    Some((g, 1))
                } else {
                    None
                }
            })
            .collect();
        for (i, item) in pool.into_iter().enumerate() {
            let (g, side) = slots[i % slots.len()];
            dealt[g][side].push(item);
        }
    }
    let mut games: Vec<GameRecord> = fixtures
        .iter()
        .zip(dealt)
        .enumerate()
        .map(|(g, (&(a, b), sides))| assemble(&format!("g{:02}", g + 1), SIGNAL_TEAMS[a].0, SIGNAL_TEAMS[b].0, sides))
        .collect();

    let mut ranked: Vec<(f64, usize, String)> = Vec::new();
    for (g, game) in games.iter().enumerate() {
        for team in [&game.team_a, &game.team_b] {
            let seqs: Vec<Vec<String>> = game
                .possessions
                .iter()
                .filter(|p| &p.team == team)
                .map(|p| brute_labels(p, WINDOW_MS, 250).expect("planted passes chain"))
                .collect();
            let (se, _, _) = brute_entropy(&brute_counts(&seqs)).expect("planted windows");
            ranked.push((se, g, team.clone()));
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (rank, (_, g, team)) in ranked.iter().enumerate() {
        distribute(&mut games[*g], team, 40 + 4 * rank as u32);
    }
    for game in games.iter_mut() {
        settle_scores(game);
    }
    Planted {
        dataset: Dataset { games },
        boundaries: SIGNAL_TEAMS.iter().map(|(t, _)| (t.to_string(), PLANTED_F1, PLANTED_F2)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn middle_prefixes_avoid_multiples() {
        for m in 2..=10 {
            let c = middle_counts(m);
            let mut s = 0;
            for (i, &k) in c.iter().enumerate() {
                s += k;
                assert_eq!(s % m == 0, i == 8, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn pools_have_expected_sizes() {
        assert_eq!(team_pool(10).len(), 160 + 170 + 44);
        assert_eq!(team_pool(4).len(), 160 + 68 + 44);
    }

    #[test]
    fn signal_is_deterministic() {
        assert_eq!(signal_dataset(3), signal_dataset(3));
    }
}
