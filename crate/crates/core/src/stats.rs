//! Nonparametric tests: Spearman rank correlation, Wilcoxon signed-rank and
//! the 2×K chi-square independence test.
//!
//! Ties get midranks everywhere. Two floating-point values are treated as
//! tied when they differ by at most `1e-9` relative to their magnitude, so
//! differences such as `0.830 − 1.020` and `0.855 − 0.667` do not split ties
//! through rounding noise.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

/// Largest number of pairs for which the Wilcoxon p-value is exact.
pub const WILCOXON_EXACT_MAX: usize = 20;
/// Largest sample for which the Spearman p-value is exact (by permutation).
pub const SPEARMAN_EXACT_MAX: usize = 9;

const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    TwoSided,
    Greater,
    Less,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::TwoSided => "two-sided",
            Alternative::Greater => "greater",
            Alternative::Less => "less",
        })
    }
}

impl FromStr for Alternative {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            _ => Err(format!("unknown alternative `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApproximation,
    StudentT,
    ChiSquared,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::NormalApproximation => "normal-approximation",
            Method::StudentT => "t-approximation",
            Method::ChiSquared => "chi-squared",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    /// rho, W or chi-square; absent when undefined.
    pub statistic: Option<f64>,
    pub z_approx: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
    /// Degrees of freedom, chi-square only.
    pub df: Option<usize>,
    pub method: Method,
    pub alternative: Alternative,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("samples have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("counts must have a positive total")]
    EmptyCounts,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// 1-based midranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && close(values[order[j]], values[order[i]]) {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn tails(alternative: Alternative, le: f64, ge: f64) -> f64 {
    match alternative {
        Alternative::Less => le,
        Alternative::Greater => ge,
        Alternative::TwoSided => (2.0 * le.min(ge)).min(1.0),
    }
}

pub fn spearman(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let rx = midranks(x);
    let ry = midranks(y);
    let exact = n <= SPEARMAN_EXACT_MAX;
    let method = if exact { Method::Exact } else { Method::StudentT };
    let Some(rho) = pearson(&rx, &ry) else {
        return Ok(TestResult { statistic: None, z_approx: None, p_value: None, n, df: None, method, alternative });
    };
    let p = if exact {
        spearman_permutation_p(&rx, &ry, rho, alternative)
    } else {
        let df = (n - 2) as f64;
        let t = if rho.abs() >= 1.0 { rho.signum() * f64::INFINITY } else { rho * (df / (1.0 - rho * rho)).sqrt() };
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        let (le, ge) = (dist.cdf(t), dist.sf(t));
        match alternative {
            Alternative::TwoSided => (2.0 * dist.sf(t.abs())).min(1.0),
            _ => tails(alternative, le, ge),
        }
    };
    Ok(TestResult { statistic: Some(rho), z_approx: None, p_value: Some(p), n, df: None, method, alternative })
}

/// Exact null distribution of rho over all n! pairings of the y ranks.
fn spearman_permutation_p(rx: &[f64], ry: &[f64], rho: f64, alternative: Alternative) -> f64 {
    let n = rx.len();
    let mut perm: Vec<f64> = ry.to_vec();
    let mut c = vec![0usize; n];
    let tol = 1e-12;
    let (mut le, mut ge, mut abs_ge, mut total) = (0u64, 0u64, 0u64, 0u64);
    let mut visit = |p: &[f64]| {
        let r = pearson(rx, p).unwrap_or(0.0);
        total += 1;
        if r <= rho + tol {
            le += 1;
        }
        if r >= rho - tol {
            ge += 1;
        }
        if r.abs() >= rho.abs() - tol {
            abs_ge += 1;
        }
    };
    // Heap's algorithm.
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let t = total as f64;
    match alternative {
        Alternative::Less => le as f64 / t,
        Alternative::Greater => ge as f64 / t,
        Alternative::TwoSided => abs_ge as f64 / t,
    }
}

/// Wilcoxon signed-rank test on the paired differences `a − b`.
///
/// `W` is the sum of ranks of positive differences; zero differences are
/// dropped first. The p-value is exact for up to [`WILCOXON_EXACT_MAX`]
/// non-zero pairs and from the normal approximation beyond. `z` is always
/// reported, without tie or continuity correction.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).filter(|(x, y)| !close(**x, **y)).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let method = if n <= WILCOXON_EXACT_MAX { Method::Exact } else { Method::NormalApproximation };
    if n == 0 {
        return Ok(TestResult { statistic: None, z_approx: None, p_value: None, n, df: None, method, alternative });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    let z = (w - mean) / sd;
    let p = if n <= WILCOXON_EXACT_MAX {
        let (le, ge) = exact_signed_rank_tails(&ranks, w);
        tails(alternative, le, ge)
    } else {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        tails(alternative, normal.cdf(z), normal.sf(z))
    };
    Ok(TestResult { statistic: Some(w), z_approx: Some(z), p_value: Some(p), n, df: None, method, alternative })
}

/// `P(W ≤ w)` and `P(W ≥ w)` under the null, over all `2^n` sign
/// assignments, by counting subset sums of doubled (integer) midranks.
fn exact_signed_rank_tails(ranks: &[f64], w: f64) -> (f64, f64) {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let target = (2.0 * w).round() as usize;
    let total = 2f64.powi(ranks.len() as i32);
    let le: u64 = counts[..=target.min(max)].iter().sum();
    let ge: u64 = counts[target.min(max + 1)..].iter().sum();
    (le as f64 / total, ge as f64 / total)
}

/// Chi-square test of independence on a 2×K table given as two count
/// vectors. Categories empty in both rows are dropped and `df` shrinks
/// accordingly; `n` is the grand total.
pub fn chisq_independence(counts_a: &[u64], counts_b: &[u64]) -> Result<TestResult, StatsError> {
    if counts_a.len() != counts_b.len() {
        return Err(StatsError::LengthMismatch(counts_a.len(), counts_b.len()));
    }
    let ta: u64 = counts_a.iter().sum();
    let tb: u64 = counts_b.iter().sum();
    if ta == 0 || tb == 0 {
        return Err(StatsError::EmptyCounts);
    }
    let grand = (ta + tb) as f64;
    let mut stat = 0.0;
    let mut k = 0usize;
    for (&a, &b) in counts_a.iter().zip(counts_b) {
        let col = (a + b) as f64;
        if col == 0.0 {
            continue;
        }
        k += 1;
        for (obs, row) in [(a, ta), (b, tb)] {
            let e = row as f64 * col / grand;
            stat += (obs as f64 - e).powi(2) / e;
        }
    }
    let df = k.saturating_sub(1);
    let p = if df == 0 { 1.0 } else { ChiSquared::new(df as f64).expect("df > 0").sf(stat) };
    Ok(TestResult {
        statistic: Some(stat),
        z_approx: None,
        p_value: Some(p.clamp(0.0, 1.0)),
        n: (ta + tb) as usize,
        df: Some(df),
        method: Method::ChiSquared,
        alternative: Alternative::TwoSided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        assert_eq!(midranks(&[0.19, 0.1 + 0.09]), vec![1.5, 1.5]);
    }

    #[test]
    fn spearman_perfect() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = spearman(&x, &[10.0, 20.0, 30.0, 40.0], Alternative::TwoSided).unwrap();
        assert_eq!(up.statistic, Some(1.0));
        assert_eq!(up.method, Method::Exact);
        // Only the identity and its reverse reach |rho| = 1 among 24 orderings.
        assert!((up.p_value.unwrap() - 2.0 / 24.0).abs() < 1e-12);
        let down = spearman(&x, &[40.0, 30.0, 20.0, 10.0], Alternative::Less).unwrap();
        assert_eq!(down.statistic, Some(-1.0));
        assert!((down.p_value.unwrap() - 1.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_constant_is_absent() {
        let r = spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, None);
        assert_eq!(r.p_value, None);
    }

    #[test]
    fn spearman_preconditions() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0], Alternative::TwoSided),
            Err(StatsError::TooFew { needed: 3, got: 2 })
        );
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0], Alternative::TwoSided), Err(StatsError::LengthMismatch(3, 1)));
    }

    #[test]
    fn wilcoxon_all_positive_five() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0; 5];
        let r = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
        assert_eq!(r.statistic, Some(15.0));
        assert_eq!(r.p_value, Some(1.0 / 32.0));
    }

    #[test]
    fn wilcoxon_all_zero_is_absent() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.n, 0);
        assert_eq!(r.p_value, None);
    }

    #[test]
    fn wilcoxon_large_sample_uses_normal() {
        let a: Vec<f64> = (0..30).map(|i| i as f64 * 1.1).collect();
        let b: Vec<f64> = (0..30).map(|i| (29 - i) as f64).collect();
        let r = wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap();
        assert_eq!(r.method, Method::NormalApproximation);
        let p = r.p_value.unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn chisq_identical_and_disjoint() {
        let a = [5, 3, 2, 0, 0, 0, 0, 0, 0, 1];
        let r = chisq_independence(&a, &a).unwrap();
        assert!(r.statistic.unwrap().abs() < 1e-12);
        assert!((r.p_value.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.df, Some(3));

        let mut x = [0u64; 10];
        let mut y = [0u64; 10];
        x[0] = 10;
        y[1] = 10;
        let r = chisq_independence(&x, &y).unwrap();
        assert!((r.statistic.unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(r.df, Some(1));
        assert_eq!(r.n, 20);
        assert!(chisq_independence(&[0; 10], &y).is_err());
    }
}
