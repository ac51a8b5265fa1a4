//! State, transition and restricted-transition entropy, in bits.
//!
//! ```text
//! SE  = −Σ_i p_i log2 p_i
//! TE  = −Σ_i p_i Σ_j p_ij log2 p_ij
//! RTE = −Σ_i p_i Σ_{j≠i} p'_ij log2 p'_ij
//! ```
//!
//! with `0·log 0 = 0`. Rows never observed as a transition source, and rows
//! with only self-transitions (empty restricted row), contribute nothing.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graphlets::{Feasibility, GraphletState, N_STATES};
use crate::profiles::StochasticView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Se,
    Te,
    Rte,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Se, Metric::Te, Metric::Rte];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Se => "se",
            Metric::Te => "te",
            Metric::Rte => "rte",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "se" => Ok(Metric::Se),
            "te" => Ok(Metric::Te),
            "rte" => Ok(Metric::Rte),
            _ => Err(format!("unknown metric `{s}` (expected se, te or rte)")),
        }
    }
}

/// A value per metric: raw bits, maxima, or percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triple {
    pub se: f64,
    pub te: f64,
    pub rte: f64,
}

impl Triple {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Se => self.se,
            Metric::Te => self.te,
            Metric::Rte => self.rte,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub se: f64,
    pub te: f64,
    pub rte: f64,
    pub se_max: f64,
    pub te_max: f64,
    pub rte_max: f64,
    /// Percent of the corresponding maximum.
    pub se_norm: f64,
    pub te_norm: f64,
    pub rte_norm: f64,
}

impl EntropyReport {
    pub fn new(raw: Triple, maxima: Triple) -> Self {
        let norm = normalized(raw, maxima);
        EntropyReport {
            se: raw.se,
            te: raw.te,
            rte: raw.rte,
            se_max: maxima.se,
            te_max: maxima.te,
            rte_max: maxima.rte,
            se_norm: norm.se,
            te_norm: norm.te,
            rte_norm: norm.rte,
        }
    }

    pub fn raw(&self) -> Triple {
        Triple { se: self.se, te: self.te, rte: self.rte }
    }

    pub fn norm(&self) -> Triple {
        Triple { se: self.se_norm, te: self.te_norm, rte: self.rte_norm }
    }

    pub fn value(&self, metric: Metric) -> f64 {
        self.raw().get(metric)
    }
}

fn plog2p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn row_entropy(row: &[f64; N_STATES], skip: Option<usize>) -> f64 {
    row.iter().enumerate().filter(|(j, _)| Some(*j) != skip).map(|(_, &p)| plog2p(p)).sum()
}

pub fn entropies(view: &StochasticView) -> Triple {
    let se = view.p.iter().map(|&p| plog2p(p)).sum();
    let mut te = 0.0;
    let mut rte = 0.0;
    for i in 0..N_STATES {
        if view.p[i] == 0.0 {
            continue;
        }
        te += view.p[i] * row_entropy(&view.transition[i], None);
        rte += view.p[i] * row_entropy(&view.restricted[i], Some(i));
    }
    Triple { se, te, rte }
}

/// Each metric divided by its maximum, in percent.
pub fn normalized(raw: Triple, maxima: Triple) -> Triple {
    Triple { se: 100.0 * raw.se / maxima.se, te: 100.0 * raw.te / maxima.te, rte: 100.0 * raw.rte / maxima.rte }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntropyError {
    #[error("state `{0}` has no feasible successor")]
    NoSuccessor(GraphletState),
}

/// Maxima under uniform state probabilities and uniform rows over feasible
/// successors: `se_max = log2 N`, `te_max = mean_i log2 |succ(i)|`,
/// `rte_max = mean_i log2 |succ(i) \ {i}|`.
pub fn theoretical_maxima(feasibility: &Feasibility) -> Result<Triple, EntropyError> {
    let weights = [1.0 / N_STATES as f64; N_STATES];
    weighted_maxima(feasibility, &weights)
}

/// Same construction, but with state probabilities set to the stationary
/// distribution of the uniform-row chain instead of uniform.
pub fn stationary_maxima(feasibility: &Feasibility) -> Result<Triple, EntropyError> {
    let degrees = degrees(feasibility)?;
    let mut pi = [1.0 / N_STATES as f64; N_STATES];
    for _ in 0..100_000 {
        let mut next = [0.0; N_STATES];
        for i in 0..N_STATES {
            let share = pi[i] / degrees[i].0 as f64;
            for (j, n) in next.iter_mut().enumerate() {
                if feasibility.matrix()[i][j] {
                    *n += share;
                }
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    weighted_maxima(feasibility, &pi)
}

fn degrees(feasibility: &Feasibility) -> Result<[(usize, usize); N_STATES], EntropyError> {
    let mut out = [(0, 0); N_STATES];
    for s in GraphletState::ALL {
        let all = feasibility.out_degree(s);
        if all == 0 {
            return Err(EntropyError::NoSuccessor(s));
        }
        out[s.index()] = (all, all - usize::from(feasibility.allowed(s, s)));
    }
    Ok(out)
}

fn weighted_maxima(feasibility: &Feasibility, weights: &[f64; N_STATES]) -> Result<Triple, EntropyError> {
    let mut te = 0.0;
    let mut rte = 0.0;
    for (i, (all, restricted)) in degrees(feasibility)?.into_iter().enumerate() {
        te += weights[i] * (all as f64).log2();
        // A state whose only successor is itself has an empty restricted row.
        if restricted > 0 {
            rte += weights[i] * (restricted as f64).log2();
        }
    }
    Ok(Triple { se: (N_STATES as f64).log2(), te, rte })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphlets::GraphletState::*;
    use crate::profiles::{Profile, RowStatus};
    use crate::windowing::WindowParams;

    fn view_from_p(p: [f64; N_STATES]) -> StochasticView {
        StochasticView {
            p,
            transition: [[0.0; N_STATES]; N_STATES],
            restricted: [[0.0; N_STATES]; N_STATES],
            rows: [RowStatus::Unobserved; N_STATES],
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn uniform_states_reach_log2_10() {
        let e = entropies(&view_from_p([0.1; N_STATES]));
        assert!((e.se - 10f64.log2()).abs() < 1e-12);
        assert!((e.se - 3.3219).abs() < 1e-4);
    }

    #[test]
    fn concentrated_state_is_zero() {
        let mut p = [0.0; N_STATES];
        p[3] = 1.0;
        assert_eq!(entropies(&view_from_p(p)).se, 0.0);
    }

    #[test]
    fn deterministic_transitions_carry_no_surprise() {
        let mut prof = Profile::empty(WindowParams::default());
        prof.add_sequence(&[S1, S12, S1, S12]);
        prof.add_sequence(&[S12, S1, S12, S1]);
        let v = prof.stochastic_view().unwrap();
        let e = entropies(&v);
        assert!((e.se - 1.0).abs() < 1e-12);
        assert_eq!(e.te, 0.0);
        assert_eq!(e.rte, 0.0);
    }

    #[test]
    fn maxima_special_cases() {
        let m = theoretical_maxima(&Feasibility::complete()).unwrap();
        assert!((m.te - 10f64.log2()).abs() < 1e-12);
        assert!((m.rte - 9f64.log2()).abs() < 1e-12);
        let id = theoretical_maxima(&Feasibility::identity()).unwrap();
        assert_eq!(id.te, 0.0);
        assert_eq!(id.se, 10f64.log2());
        let empty = Feasibility::from_matrix([[false; N_STATES]; N_STATES]);
        assert_eq!(theoretical_maxima(&empty), Err(EntropyError::NoSuccessor(S1)));
    }

    #[test]
    fn edge_count_rule_gives_published_maxima() {
        let m = theoretical_maxima(&Feasibility::edge_count_step()).unwrap();
        assert!((m.te - 2.658).abs() < 5e-4, "{}", m.te);
        assert!((m.rte - 2.356).abs() < 5e-4, "{}", m.rte);
    }

    #[test]
    fn walk_edit_maxima() {
        // mean of log2 of out-degrees (2,4,5,6,4,6,5,5,5,6) and (1,3,4,5,3,5,4,4,4,5)
        let m = theoretical_maxima(&Feasibility::walk_edit()).unwrap();
        let te: f64 = [2.0f64, 4., 5., 6., 4., 6., 5., 5., 5., 6.].iter().map(|d| d.log2()).sum::<f64>() / 10.0;
        let rte: f64 = [1.0f64, 3., 4., 5., 3., 5., 4., 4., 4., 5.].iter().map(|d| d.log2()).sum::<f64>() / 10.0;
        assert!((m.te - te).abs() < 1e-12);
        assert!((m.rte - rte).abs() < 1e-12);
        let s = stationary_maxima(&Feasibility::walk_edit()).unwrap();
        assert!((s.te - 2.3031608790987).abs() < 1e-9, "{}", s.te);
    }

    #[test]
    fn normalization() {
        let max = theoretical_maxima(&Feasibility::walk_edit()).unwrap();
        let n = normalized(max, max);
        assert!((n.se - 100.0).abs() < 1e-12 && (n.te - 100.0).abs() < 1e-12);
        let z = normalized(Triple { se: 0.0, te: 0.0, rte: 0.0 }, max);
        assert_eq!(z.se, 0.0);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("RTE".parse::<Metric>(), Ok(Metric::Rte));
        assert!("xe".parse::<Metric>().is_err());
    }
}
