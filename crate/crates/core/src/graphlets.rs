//! Classification of window snapshots into the ten graphlet states.
//!
//! Inside a window the ball travels along a walk: the passer of the first pass,
//! then each receiver in turn. Relabeling that holder sequence by order of first
//! appearance gives the state label (`A→B, B→A` becomes `121`). Windows with no
//! pass are `1`, windows with four or more passes are `other`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ingest::{Millis, PassEvent, Possession};
use crate::windowing::{step_violations, windows_of, TimeWindow, WindowParams};

pub const N_STATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphletState {
    S1,
    S12,
    S121,
    S123,
    S1212,
    S1213,
    S1231,
    S1232,
    S1234,
    Other,
}

use GraphletState::*;

impl GraphletState {
    pub const ALL: [GraphletState; N_STATES] = [S1, S12, S121, S123, S1212, S1213, S1231, S1232, S1234, Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<GraphletState> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            S1 => "1",
            S12 => "12",
            S121 => "121",
            S123 => "123",
            S1212 => "1212",
            S1213 => "1213",
            S1231 => "1231",
            S1232 => "1232",
            S1234 => "1234",
            Other => "other",
        }
    }

    /// Number of passes, `None` for `other` (four or more).
    pub fn edge_count(self) -> Option<usize> {
        match self {
            Other => None,
            s => Some(s.label().len() - 1),
        }
    }

    /// Edge count with `other` collapsed to 4.
    fn edge_class(self) -> usize {
        self.edge_count().unwrap_or(4)
    }
}

impl fmt::Display for GraphletState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GraphletState {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|g| g.label() == s).ok_or_else(|| format!("unknown graphlet label `{s}`"))
    }
}

impl Serialize for GraphletState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("window {window} [{start}, {end}] of possession `{possession_id}`: pass at {time} starts with `{passer}` but the ball is with `{holder}`")]
pub struct ChainError {
    pub possession_id: String,
    pub window: usize,
    pub start: Millis,
    pub end: Millis,
    pub time: Millis,
    pub holder: String,
    pub passer: String,
}

/// State of a window's snapshot.
pub fn classify(window: &TimeWindow<'_>) -> Result<GraphletState, ChainError> {
    let events = window.events;
    for pair in events.windows(2) {
        if pair[0].receiver != pair[1].passer {
            return Err(ChainError {
                possession_id: pair[1].possession_id.clone(),
                window: window.index,
                start: window.start,
                end: window.end,
                time: pair[1].time,
                holder: pair[0].receiver.clone(),
                passer: pair[1].passer.clone(),
            });
        }
    }
    Ok(classify_chain(events))
}

/// Classifies a chain-consistent pass list.
fn classify_chain(events: &[PassEvent]) -> GraphletState {
    if events.is_empty() {
        return S1;
    }
    if events.len() >= 4 {
        return Other;
    }
    let holders = std::iter::once(events[0].passer.as_str()).chain(events.iter().map(|e| e.receiver.as_str()));
    let mut seen: Vec<&str> = Vec::with_capacity(4);
    let mut code = [0u8; 4];
    for (i, h) in holders.enumerate() {
        let id = match seen.iter().position(|s| *s == h) {
            Some(p) => p,
            None => {
                seen.push(h);
                seen.len() - 1
            }
        };
        code[i] = id as u8 + 1;
    }
    state_of_code(&code[..events.len() + 1])
}

/// Maps a canonical holder code (first-appearance numbering) to its state.
fn state_of_code(code: &[u8]) -> GraphletState {
    match code {
        [] | [_] => S1,
        [1, 2] => S12,
        [1, 2, 1] => S121,
        [1, 2, 3] => S123,
        [1, 2, 1, 2] => S1212,
        [1, 2, 1, 3] => S1213,
        [1, 2, 3, 1] => S1231,
        [1, 2, 3, 2] => S1232,
        [1, 2, 3, 4] => S1234,
        _ => Other,
    }
}

/// One state per window, in window order. Logs a warning when the data
/// breaks the one-pass-in/one-pass-out premise between consecutive windows.
pub fn state_sequence(possession: &Possession, params: &WindowParams) -> Result<Vec<GraphletState>, ChainError> {
    let windows = windows_of(possession, params);
    let violations = step_violations(&windows);
    if let Some(v) = violations.first() {
        log::warn!(
            "possession `{}` of game `{}`: {} window steps change more than one pass (first at window {}: -{} +{}); passes closer than the step τ",
            possession.possession_id,
            possession.game_id,
            violations.len(),
            v.window,
            v.dropped,
            v.appended
        );
    }
    windows.iter().map(classify).collect()
}

/// How window-to-window feasibility is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibilityRule {
    /// Enumerate single-step edits of every holder sequence of the source
    /// state: drop the first pass, append one pass, both, or neither.
    WalkEdit,
    /// Any state whose edge count differs by at most one (with `other` as 4).
    EdgeCountStep,
}

impl FromStr for FeasibilityRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "walk-edit" => Ok(FeasibilityRule::WalkEdit),
            "edge-count" => Ok(FeasibilityRule::EdgeCountStep),
            _ => Err(format!("unknown feasibility rule `{s}` (expected walk-edit or edge-count)")),
        }
    }
}

impl fmt::Display for FeasibilityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeasibilityRule::WalkEdit => "walk-edit",
            FeasibilityRule::EdgeCountStep => "edge-count",
        })
    }
}

/// Boolean 10×10 matrix: `allowed(i, j)` iff state `j` may follow state `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    allowed: [[bool; N_STATES]; N_STATES],
}

impl Feasibility {
    pub fn from_matrix(allowed: [[bool; N_STATES]; N_STATES]) -> Self {
        Feasibility { allowed }
    }

    pub fn for_rule(rule: FeasibilityRule) -> Self {
        match rule {
            FeasibilityRule::WalkEdit => Self::walk_edit(),
            FeasibilityRule::EdgeCountStep => Self::edge_count_step(),
        }
    }

    pub fn walk_edit() -> Self {
        Self::walk_edit_up_to(5)
    }

    /// Walk-edit feasibility with `other` represented by walks of 4 up to
    /// `max_other_passes` passes.
    pub fn walk_edit_up_to(max_other_passes: usize) -> Self {
        let mut allowed = [[false; N_STATES]; N_STATES];
        for passes in 0..=max_other_passes.max(3) {
            for walk in canonical_walks(passes) {
                let from = state_of_code(&walk);
                for to in single_step_edits(&walk) {
                    allowed[from.index()][to.index()] = true;
                }
            }
        }
        Feasibility { allowed }
    }

    pub fn edge_count_step() -> Self {
        let mut allowed = [[false; N_STATES]; N_STATES];
        for a in GraphletState::ALL {
            for b in GraphletState::ALL {
                allowed[a.index()][b.index()] = a.edge_class().abs_diff(b.edge_class()) <= 1;
            }
        }
        Feasibility { allowed }
    }

    pub fn complete() -> Self {
        Feasibility { allowed: [[true; N_STATES]; N_STATES] }
    }

    pub fn identity() -> Self {
        let mut allowed = [[false; N_STATES]; N_STATES];
        for (i, row) in allowed.iter_mut().enumerate() {
            row[i] = true;
        }
        Feasibility { allowed }
    }

    pub fn allowed(&self, from: GraphletState, to: GraphletState) -> bool {
        self.allowed[from.index()][to.index()]
    }

    pub fn matrix(&self) -> &[[bool; N_STATES]; N_STATES] {
        &self.allowed
    }

    pub fn successors(&self, from: GraphletState) -> BTreeSet<GraphletState> {
        GraphletState::ALL.into_iter().filter(|&to| self.allowed(from, to)).collect()
    }

    pub fn out_degree(&self, from: GraphletState) -> usize {
        self.allowed[from.index()].iter().filter(|&&b| b).count()
    }
}

/// States reachable in one window step under the walk-edit rule.
pub fn feasible_successors(state: GraphletState) -> BTreeSet<GraphletState> {
    Feasibility::walk_edit().successors(state)
}

/// Canonical holder codes with exactly `passes` passes: restricted-growth
/// strings with no two consecutive equal symbols. Zero passes is the single
/// code `[1]` (one player holding the ball).
fn canonical_walks(passes: usize) -> Vec<Vec<u8>> {
    fn extend(cur: &mut Vec<u8>, max: u8, len: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let last = *cur.last().unwrap_or(&0);
        for h in 1..=max + 1 {
            if h != last {
                cur.push(h);
                extend(cur, max.max(h), len, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![1], 1, passes + 1, &mut out);
    out
}

fn canonicalize(seq: &[u8]) -> Vec<u8> {
    let mut map: HashMap<u8, u8> = HashMap::new();
    seq.iter()
        .map(|h| {
            let next = map.len() as u8 + 1;
            *map.entry(*h).or_insert(next)
        })
        .collect()
}

fn single_step_edits(walk: &[u8]) -> BTreeSet<GraphletState> {
    let fresh = walk.iter().copied().max().unwrap_or(0) + 1;
    let mut out = BTreeSet::new();
    let mut heads: Vec<&[u8]> = vec![walk];
    if walk.len() > 1 {
        heads.push(&walk[1..]);
    }
    for head in heads {
        out.insert(state_of_code(&canonicalize(head)));
        let last = head[head.len() - 1];
        // A dropped holder may receive again, so candidates include the whole walk.
        for next in (1..=fresh).filter(|&h| h != last) {
            let mut seq = head.to_vec();
            seq.push(next);
            out.insert(state_of_code(&canonicalize(&seq)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passes(pairs: &[(&str, &str)]) -> Vec<PassEvent> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| PassEvent {
                game_id: "g".into(),
                possession_id: "p".into(),
                time: Millis(i as i64 * 500),
                passer: a.to_string(),
                receiver: b.to_string(),
            })
            .collect()
    }

    fn window(events: &[PassEvent]) -> TimeWindow<'_> {
        TimeWindow { index: 1, start: Millis(0), end: Millis(6_000), first_event: 0, events }
    }

    fn cls(pairs: &[(&str, &str)]) -> GraphletState {
        classify(&window(&passes(pairs))).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for (i, s) in GraphletState::ALL.into_iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(s.label().parse::<GraphletState>(), Ok(s));
        }
        assert_eq!(S1234.edge_count(), Some(3));
        assert_eq!(S1.edge_count(), Some(0));
        assert_eq!(Other.edge_count(), None);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(cls(&[("A", "B"), ("B", "A")]), S121);
        assert_eq!(cls(&[("C", "D"), ("D", "E"), ("E", "F")]), S1234);
        assert_eq!(cls(&[("A", "B"), ("B", "C"), ("C", "A"), ("A", "B")]), Other);
        assert_eq!(cls(&[]), S1);
        assert_eq!(cls(&[("A", "B")]), S12);
        assert_eq!(cls(&[("A", "B"), ("B", "C"), ("C", "B")]), S1232);
        assert_eq!(cls(&[("A", "B"), ("B", "A"), ("A", "C")]), S1213);
        assert_eq!(cls(&[("A", "B"), ("B", "C"), ("C", "A")]), S1231);
        assert_eq!(cls(&[("A", "B"), ("B", "A"), ("A", "B")]), S1212);
    }

    #[test]
    fn chain_break_names_window() {
        let ev = passes(&[("A", "B"), ("C", "D")]);
        let err = classify(&window(&ev)).unwrap_err();
        assert_eq!(err.window, 1);
        assert_eq!(err.holder, "B");
        assert_eq!(err.passer, "C");
    }

    #[test]
    fn zero_pass_possession_is_single_hold() {
        let p = Possession {
            game_id: "g".into(),
            possession_id: "p".into(),
            team: "T".into(),
            start: Millis(1_000),
            end: Millis(7_000),
            relative_score: 0,
            points_scored: 0,
            events: vec![],
        };
        assert_eq!(state_sequence(&p, &WindowParams::default()).unwrap(), vec![S1]);
    }

    #[test]
    fn walks_are_counted_correctly() {
        // Restricted-growth strings without repeats: 1, 1, 2, 5, 15, 52 ...
        let counts: Vec<usize> = (0..6).map(|n| canonical_walks(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52]);
        let three: BTreeSet<GraphletState> = canonical_walks(3).iter().map(|w| state_of_code(w)).collect();
        assert_eq!(three, [S1212, S1213, S1231, S1232, S1234].into_iter().collect());
    }

    #[test]
    fn successor_examples() {
        let from_121 = feasible_successors(S121);
        assert!(!from_121.contains(&S1231));
        let from_1 = feasible_successors(S1);
        assert_eq!(from_1, [S1, S12].into_iter().collect());
        assert_eq!(feasible_successors(S12), [S1, S12, S121, S123].into_iter().collect());
    }

    #[test]
    fn walk_edit_matrix_matches_enumeration_table() {
        // Produced by exhaustive edit enumeration over walks of up to 5 passes.
        let table: [(GraphletState, &[GraphletState]); N_STATES] = [
            (S1, &[S1, S12]),
            (S12, &[S1, S12, S121, S123]),
            (S121, &[S12, S121, S123, S1212, S1213]),
            (S123, &[S12, S121, S123, S1231, S1232, S1234]),
            (S1212, &[S121, S1212, S1213, Other]),
            (S1213, &[S123, S1213, S1231, S1232, S1234, Other]),
            (S1231, &[S123, S1231, S1232, S1234, Other]),
            (S1232, &[S121, S1212, S1213, S1232, Other]),
            (S1234, &[S123, S1231, S1232, S1234, Other]),
            (Other, &[S1212, S1213, S1231, S1232, S1234, Other]),
        ];
        let f = Feasibility::walk_edit();
        for (from, succ) in table {
            assert_eq!(f.successors(from), succ.iter().copied().collect(), "row {from}");
        }
    }

    #[test]
    fn other_row_is_closed_at_five_passes() {
        assert_eq!(Feasibility::walk_edit_up_to(4), Feasibility::walk_edit_up_to(5));
        assert_eq!(Feasibility::walk_edit_up_to(5), Feasibility::walk_edit_up_to(6));
        assert_eq!(Feasibility::walk_edit_up_to(6), Feasibility::walk_edit_up_to(7));
    }

    #[test]
    fn edge_count_rule_degrees() {
        let f = Feasibility::edge_count_step();
        let deg: Vec<usize> = GraphletState::ALL.iter().map(|&s| f.out_degree(s)).collect();
        assert_eq!(deg, vec![2, 4, 8, 8, 8, 8, 8, 8, 8, 6]);
        assert!(f.allowed(S121, S1231));
    }
}
