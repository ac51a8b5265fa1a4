//! Splitting possessions by relative score.
//!
//! Two schemes: five fixed classes (large deficit to large advantage) and an
//! exhaustive search over three contiguous classes that maximizes the spread
//! (`max − min`) of one entropy metric across the classes.
//!
//! The search walks integer boundaries `f1 < f2` over the observed score range
//! `[lo, hi]`, giving classes `[lo, f1−1]`, `[f1, f2−1]`, `[f2, hi]`. Each class
//! must span at least `min_width` integer values (2 by default, which gives the
//! loop bounds `f1 ∈ [lo+2, hi−3]`, `f2 ∈ [f1+2, hi−1]`) and hold at least
//! `min_share` of the team's possessions, short ones included.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::entropy::{entropies, EntropyReport, Metric, Triple};
use crate::graphlets::ChainError;
use crate::ingest::Possession;
use crate::profiles::{profile_of, Profile};
use crate::windowing::WindowParams;

/// Window parameters and normalization maxima shared by every class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub params: WindowParams,
    pub maxima: Triple,
}

impl Analysis {
    pub fn entropy_of(&self, profile: &Profile) -> Option<EntropyReport> {
        let view = profile.stochastic_view().ok()?;
        Some(EntropyReport::new(entropies(&view), self.maxima))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreClass<'a> {
    pub name: String,
    /// Inclusive bounds; `None` is open-ended.
    pub lo: Option<i32>,
    pub hi: Option<i32>,
    #[serde(skip)]
    pub possessions: Vec<&'a Possession>,
    pub profile: Profile,
    /// Absent when no member possession is long enough for a window.
    pub entropy: Option<EntropyReport>,
    pub pts_per_poss: Option<f64>,
}

impl<'a> ScoreClass<'a> {
    pub fn contains(&self, score: i32) -> bool {
        self.lo.is_none_or(|lo| score >= lo) && self.hi.is_none_or(|hi| score <= hi)
    }

    fn build(
        name: &str,
        lo: Option<i32>,
        hi: Option<i32>,
        possessions: Vec<&'a Possession>,
        analysis: &Analysis,
    ) -> Result<Self, ChainError> {
        let profile = profile_of(possessions.iter().copied(), &analysis.params)?;
        Ok(ScoreClass {
            name: name.to_string(),
            lo,
            hi,
            entropy: analysis.entropy_of(&profile),
            pts_per_poss: class_performance(&possessions),
            possessions,
            profile,
        })
    }
}

/// Points per possession over every member, short possessions included.
pub fn class_performance(possessions: &[&Possession]) -> Option<f64> {
    if possessions.is_empty() {
        return None;
    }
    let pts: u64 = possessions.iter().map(|p| u64::from(p.points_scored)).sum();
    Some(pts as f64 / possessions.len() as f64)
}

pub const SUPERVISED_CLASSES: [(&str, Option<i32>, Option<i32>); 5] = [
    ("large deficit", None, Some(-10)),
    ("small deficit", Some(-9), Some(-3)),
    ("balanced", Some(-2), Some(2)),
    ("small advantage", Some(3), Some(9)),
    ("large advantage", Some(10), None),
];

pub fn supervised_class_name(score: i32) -> &'static str {
    SUPERVISED_CLASSES
        .iter()
        .find(|(_, lo, hi)| lo.is_none_or(|l| score >= l) && hi.is_none_or(|h| score <= h))
        .map(|c| c.0)
        .unwrap_or("balanced")
}

pub fn supervised_classes<'a>(
    possessions: &[&'a Possession],
    analysis: &Analysis,
) -> Result<Vec<ScoreClass<'a>>, ChainError> {
    SUPERVISED_CLASSES
        .iter()
        .map(|&(name, lo, hi)| {
            let members = possessions
                .iter()
                .copied()
                .filter(|p| lo.is_none_or(|l| p.relative_score >= l) && hi.is_none_or(|h| p.relative_score <= h))
                .collect();
            ScoreClass::build(name, lo, hi, members, analysis)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub min_share: f64,
    pub min_width: i32,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { min_share: 0.10, min_width: 2 }
    }
}

/// A 3-class split: `[lo, f1−1]`, `[f1, f2−1]`, `[f2, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Boundaries {
    pub lo: i32,
    pub f1: i32,
    pub f2: i32,
    pub hi: i32,
}

impl Boundaries {
    pub fn ranges(&self) -> [(i32, i32); 3] {
        [(self.lo, self.f1 - 1), (self.f1, self.f2 - 1), (self.f2, self.hi)]
    }

    pub fn class_of(&self, score: i32) -> usize {
        if score < self.f1 {
            0
        } else if score < self.f2 {
            1
        } else {
            2
        }
    }
}

/// Every split meeting the width and share constraints, ordered by `(f1, f2)`.
pub fn enumerate_partitions(scores: &[i32], search: &SearchParams) -> Vec<Boundaries> {
    let (Some(&lo), Some(&hi)) = (scores.iter().min(), scores.iter().max()) else {
        return Vec::new();
    };
    let mut hist: BTreeMap<i32, usize> = BTreeMap::new();
    for &s in scores {
        *hist.entry(s).or_default() += 1;
    }
    // cumulative[v - lo] = number of scores < v
    let width = (hi - lo + 2) as usize;
    let mut below = vec![0usize; width];
    for v in lo..=hi {
        let i = (v - lo) as usize;
        below[i + 1] = below[i] + hist.get(&v).copied().unwrap_or(0);
    }
    let count = |a: i32, b: i32| below[(b - lo + 1) as usize] - below[(a - lo) as usize];
    let total = scores.len() as f64;
    let need = |c: usize| c as f64 / total >= search.min_share;
    let w = search.min_width.max(1);

    let mut out = Vec::new();
    for f1 in (lo + w)..=(hi - 2 * w + 1) {
        for f2 in (f1 + w)..=(hi - w + 1) {
            let b = Boundaries { lo, f1, f2, hi };
            if b.ranges().iter().all(|&(a, z)| need(count(a, z))) {
                out.push(b);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Partition<'a> {
    pub boundaries: Boundaries,
    pub metric: Metric,
    /// Highest class entropy minus lowest, on `metric`.
    pub objective: f64,
    /// Ordered lower, middle, upper.
    pub classes: Vec<ScoreClass<'a>>,
    pub n_candidates: usize,
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("no valid classification")]
    NoCandidate,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Objective of one candidate, or `None` if a class has no windows.
pub fn partition_objective(class_profiles: &[Profile; 3], metric: Metric, analysis: &Analysis) -> Option<f64> {
    let mut values = [0.0; 3];
    for (v, p) in values.iter_mut().zip(class_profiles) {
        *v = analysis.entropy_of(p)?.value(metric);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Some(max - min)
}

/// Exhaustive search for the split maximizing the entropy spread.
///
/// Class profiles are sums of per-score-value profiles. Ties keep the
/// smallest `(f1, f2)`; candidates where a class has no window are skipped.
pub fn best_partition<'a>(
    possessions: &[&'a Possession],
    metric: Metric,
    analysis: &Analysis,
    search: &SearchParams,
) -> Result<Partition<'a>, PartitionError> {
    let scores: Vec<i32> = possessions.iter().map(|p| p.relative_score).collect();
    let candidates = enumerate_partitions(&scores, search);
    if candidates.is_empty() {
        return Err(PartitionError::NoCandidate);
    }

    let mut per_value: BTreeMap<i32, Profile> = BTreeMap::new();
    for p in possessions {
        per_value.entry(p.relative_score).or_insert_with(|| Profile::empty(analysis.params)).add_possession(p)?;
    }
    let empty = Profile::empty(analysis.params);
    let sum_range =
        |a: i32, b: i32| per_value.range(a..=b).fold(empty.clone(), |acc, (_, p)| acc.merge(p).expect("same params"));

    let mut best: Option<(Boundaries, f64)> = None;
    for b in &candidates {
        let [r0, r1, r2] = b.ranges();
        let profiles = [sum_range(r0.0, r0.1), sum_range(r1.0, r1.1), sum_range(r2.0, r2.1)];
        let Some(obj) = partition_objective(&profiles, metric, analysis) else {
            continue;
        };
        if best.is_none_or(|(_, o)| obj > o + 1e-12) {
            best = Some((*b, obj));
        }
    }
    let (boundaries, objective) = best.ok_or(PartitionError::NoCandidate)?;

    let names = ["lower", "middle", "upper"];
    let mut classes = Vec::with_capacity(3);
    for (k, (a, z)) in boundaries.ranges().into_iter().enumerate() {
        let members = possessions.iter().copied().filter(|p| boundaries.class_of(p.relative_score) == k).collect();
        classes.push(ScoreClass::build(names[k], Some(a), Some(z), members, analysis)?);
    }
    Ok(Partition { boundaries, metric, objective, classes, n_candidates: candidates.len() })
}
