//! Naive reference implementations. Nothing here calls into the pipeline
//! modules; inputs are read from plain struct fields and integers only.

use std::collections::BTreeMap;

use crate::ingest::Possession;

/// Label of a pass list by direct canonicalization of its holder sequence,
/// or `None` when consecutive passes do not chain.
pub fn brute_classify(passes: &[(String, String)]) -> Option<String> {
    for i in 1..passes.len() {
        if passes[i - 1].1 != passes[i].0 {
            return None;
        }
    }
    if passes.is_empty() {
        return Some("1".to_string());
    }
    if passes.len() > 3 {
        return Some("other".to_string());
    }
    let mut holders = vec![passes[0].0.clone()];
    for p in passes {
        holders.push(p.1.clone());
    }
    let mut names: Vec<String> = Vec::new();
    let mut label = String::new();
    for h in holders {
        if !names.contains(&h) {
            names.push(h.clone());
        }
        let k = names.iter().position(|x| *x == h).unwrap() + 1;
        label.push_str(&k.to_string());
    }
    Some(label)
}

/// Pass lists of every window, from the literal definition: window `k`
/// (0-based) covers `[k·τ, k·τ + δ]` relative to the possession start and
/// exists while `k·τ + δ ≤ L`.
pub fn brute_windows(possession: &Possession, delta_ms: i64, tau_ms: i64) -> Vec<Vec<(String, String)>> {
    let length = possession.end.0 - possession.start.0;
    let mut out = Vec::new();
    let mut k = 0i64;
    loop {
        let a = k * tau_ms;
        let b = a + delta_ms;
        if b > length {
            break;
        }
        let mut w = Vec::new();
        for e in &possession.events {
            let t = e.time.0 - possession.start.0;
            if t >= a && t <= b {
                w.push((e.passer.clone(), e.receiver.clone()));
            }
        }
        out.push(w);
        k += 1;
    }
    out
}

/// Window labels of one possession.
pub fn brute_labels(possession: &Possession, delta_ms: i64, tau_ms: i64) -> Option<Vec<String>> {
    brute_windows(possession, delta_ms, tau_ms).iter().map(|w| brute_classify(w)).collect()
}

/// All ten labels in canonical order.
pub const LABELS: [&str; 10] = ["1", "12", "121", "123", "1212", "1213", "1231", "1232", "1234", "other"];

/// State and transition counts keyed by label, over several label sequences.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BruteCounts {
    pub states: BTreeMap<String, u64>,
    pub transitions: BTreeMap<(String, String), u64>,
}

pub fn brute_counts(sequences: &[Vec<String>]) -> BruteCounts {
    let mut c = BruteCounts::default();
    for seq in sequences {
        for s in seq {
            *c.states.entry(s.clone()).or_insert(0) += 1;
        }
        for i in 1..seq.len() {
            *c.transitions.entry((seq[i - 1].clone(), seq[i].clone())).or_insert(0) += 1;
        }
    }
    c
}

/// SE, TE and RTE in bits straight from label counts.
pub fn brute_entropy(c: &BruteCounts) -> Option<(f64, f64, f64)> {
    let total: u64 = c.states.values().sum();
    if total == 0 {
        return None;
    }
    let mut se = 0.0;
    let mut te = 0.0;
    let mut rte = 0.0;
    for (s, &n) in &c.states {
        let p = n as f64 / total as f64;
        if p > 0.0 {
            se -= p * p.log2();
        }
        let row: Vec<(&String, u64)> =
            c.transitions.iter().filter(|((a, _), _)| a == s).map(|((_, b), &k)| (b, k)).collect();
        let out: u64 = row.iter().map(|(_, k)| k).sum();
        let off: u64 = row.iter().filter(|(b, _)| *b != s).map(|(_, k)| k).sum();
        for (b, k) in row {
            if k == 0 {
                continue;
            }
            let q = k as f64 / out as f64;
            te -= p * q * q.log2();
            if b != s {
                let r = k as f64 / off as f64;
                rte -= p * r * r.log2();
            }
        }
    }
    Some((se, te, rte))
}

/// Split enumeration as a literal loop, 1-based indexing over `f = lo..=hi`:
/// `f1` in `f[3]..=f[n−3]`, `f2` in `f1+2..=f[n−1]`; classes
/// `f[1]..f1−1`, `f1..f2−1`, `f2..f[n]`, each needing at least `p` of the data.
pub fn brute_partitions(scores: &[i32], p: f64) -> Vec<(i32, i32)> {
    let mut c = Vec::new();
    if scores.is_empty() {
        return c;
    }
    let lo = *scores.iter().min().unwrap();
    let hi = *scores.iter().max().unwrap();
    let f: Vec<i32> = (lo..=hi).collect();
    let n = f.len() as i64;
    let at = |i: i64| f[(i - 1) as usize];
    if n < 4 {
        return c;
    }
    let share = |a: i32, b: i32| {
        let k = scores.iter().filter(|&&s| s >= a && s <= b).count();
        k as f64 / scores.len() as f64
    };
    let mut f1 = at(3);
    while f1 <= at(n - 3) {
        let mut f2 = f1 + 2;
        while f2 <= at(n - 1) {
            let class1 = (at(1), f1 - 1);
            let class2 = (f1, f2 - 1);
            let class3 = (f2, at(n));
            if share(class1.0, class1.1) >= p && share(class2.0, class2.1) >= p && share(class3.0, class3.1) >= p {
                c.push((f1, f2));
            }
            f2 += 1;
        }
        f1 += 1;
    }
    c
}

/// Signed-rank p-value by listing all `2^n` sign assignments of the ranks.
/// Zero differences are dropped; ties get midranks. Returns
/// `(W, P(W' ≤ W), P(W' ≥ W))`.
pub fn brute_wilcoxon(a: &[f64], b: &[f64]) -> Option<(f64, f64, f64)> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return None;
    }
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let same = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (same + 1.0) / 2.0
        })
        .collect();
    let w: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let mut le = 0u64;
    let mut ge = 0u64;
    for mask in 0u64..(1u64 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= w + 1e-9 {
            le += 1;
        }
        if s >= w - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    Some((w, le as f64 / total, ge as f64 / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passes(holders: &[&str]) -> Vec<(String, String)> {
        holders.windows(2).map(|w| (w[0].to_string(), w[1].to_string())).collect()
    }

    #[test]
    fn labels() {
        assert_eq!(brute_classify(&[]).as_deref(), Some("1"));
        assert_eq!(brute_classify(&passes(&["a", "b", "a", "c"])).as_deref(), Some("1213"));
        assert_eq!(brute_classify(&passes(&["a", "b", "c", "d", "e"])).as_deref(), Some("other"));
        let broken = vec![("a".to_string(), "b".to_string()), ("c".to_string(), "d".to_string())];
        assert_eq!(brute_classify(&broken), None);
    }

    #[test]
    fn literal_bounds() {
        assert_eq!(brute_partitions(&[0, 1, 2, 3, 4, 5, 6], 0.0), vec![(2, 4), (2, 5), (3, 5)]);
        assert!(brute_partitions(&[-1, 0, 1], 0.1).is_empty());
    }

    #[test]
    fn wilcoxon_extreme() {
        let (w, le, ge) = brute_wilcoxon(&[1., 2., 3., 4., 5.], &[0.; 5]).unwrap();
        assert_eq!(w, 15.0);
        assert_eq!(ge, 1.0 / 32.0);
        assert_eq!(le, 1.0);
    }
}
