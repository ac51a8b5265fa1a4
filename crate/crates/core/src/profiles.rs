//! Graphlet and transition profiles.
//!
//! A [`Profile`] holds exact counts and merges by element-wise addition, so a
//! profile over any union of possessions is the sum of per-possession
//! profiles. Transitions are counted only between consecutive windows of the
//! same possession. Probabilities are derived on demand as a
//! [`StochasticView`].

use serde::Serialize;
use thiserror::Error;

use crate::graphlets::{state_sequence, ChainError, GraphletState, N_STATES};
use crate::ingest::Possession;
use crate::windowing::WindowParams;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub params: WindowParams,
    pub state_counts: [u64; N_STATES],
    pub transition_counts: [[u64; N_STATES]; N_STATES],
    /// Every possession fed in, including those too short for a window.
    pub n_possessions: u64,
    /// Possessions that contributed at least one window.
    pub n_retained: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("cannot merge profiles built with different window parameters")]
    ParamsMismatch,
    #[error("profile has no windows")]
    Empty,
}

impl Profile {
    pub fn empty(params: WindowParams) -> Self {
        Profile {
            params,
            state_counts: [0; N_STATES],
            transition_counts: [[0; N_STATES]; N_STATES],
            n_possessions: 0,
            n_retained: 0,
        }
    }

    /// Adds one possession's state sequence.
    pub fn add_sequence(&mut self, states: &[GraphletState]) {
        self.n_possessions += 1;
        if states.is_empty() {
            return;
        }
        self.n_retained += 1;
        for s in states {
            self.state_counts[s.index()] += 1;
        }
        for pair in states.windows(2) {
            self.transition_counts[pair[0].index()][pair[1].index()] += 1;
        }
    }

    pub fn add_possession(&mut self, possession: &Possession) -> Result<(), ChainError> {
        let states = state_sequence(possession, &self.params)?;
        self.add_sequence(&states);
        Ok(())
    }

    pub fn n_windows(&self) -> u64 {
        self.state_counts.iter().sum()
    }

    pub fn n_transitions(&self) -> u64 {
        self.transition_counts.iter().flatten().sum()
    }

    pub fn merge(&self, other: &Profile) -> Result<Profile, ProfileError> {
        if self.params != other.params {
            return Err(ProfileError::ParamsMismatch);
        }
        let mut out = self.clone();
        for i in 0..N_STATES {
            out.state_counts[i] += other.state_counts[i];
            for j in 0..N_STATES {
                out.transition_counts[i][j] += other.transition_counts[i][j];
            }
        }
        out.n_possessions += other.n_possessions;
        out.n_retained += other.n_retained;
        Ok(out)
    }

    /// Share of each state, in percent. All zeros for an empty profile.
    pub fn state_shares_percent(&self) -> [f64; N_STATES] {
        let n = self.n_windows();
        let mut out = [0.0; N_STATES];
        if n > 0 {
            for (o, &c) in out.iter_mut().zip(&self.state_counts) {
                *o = 100.0 * c as f64 / n as f64;
            }
        }
        out
    }

    pub fn stochastic_view(&self) -> Result<StochasticView, ProfileError> {
        StochasticView::from_profile(self)
    }
}

pub fn profile_of<'a, I>(possessions: I, params: &WindowParams) -> Result<Profile, ChainError>
where
    I: IntoIterator<Item = &'a Possession>,
{
    let mut profile = Profile::empty(*params);
    for p in possessions {
        profile.add_possession(p)?;
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Observed,
    /// Never the source of a transition; the row is all zero.
    Unobserved,
    /// Only self-transitions observed; the restricted row is all zero.
    AbsorbingOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticView {
    pub p: [f64; N_STATES],
    pub transition: [[f64; N_STATES]; N_STATES],
    pub restricted: [[f64; N_STATES]; N_STATES],
    pub rows: [RowStatus; N_STATES],
}

impl StochasticView {
    pub fn from_profile(profile: &Profile) -> Result<StochasticView, ProfileError> {
        let n = profile.n_windows();
        if n == 0 {
            return Err(ProfileError::Empty);
        }
        let mut p = [0.0; N_STATES];
        for (pi, &c) in p.iter_mut().zip(&profile.state_counts) {
            *pi = c as f64 / n as f64;
        }
        let mut transition = [[0.0; N_STATES]; N_STATES];
        let mut restricted = [[0.0; N_STATES]; N_STATES];
        let mut rows = [RowStatus::Unobserved; N_STATES];
        for i in 0..N_STATES {
            let counts = &profile.transition_counts[i];
            let total: u64 = counts.iter().sum();
            if total == 0 {
                continue;
            }
            for j in 0..N_STATES {
                transition[i][j] = counts[j] as f64 / total as f64;
            }
            // p'_ij = p_ij / (1 - p_ii), computed on counts to avoid cancellation.
            let off = total - counts[i];
            if off == 0 {
                rows[i] = RowStatus::AbsorbingOnly;
                continue;
            }
            rows[i] = RowStatus::Observed;
            for j in 0..N_STATES {
                if j != i {
                    restricted[i][j] = counts[j] as f64 / off as f64;
                }
            }
        }
        Ok(StochasticView { p, transition, restricted, rows })
    }

    /// Row-conditional transition percentages.
    pub fn transition_percent(&self) -> [[f64; N_STATES]; N_STATES] {
        self.transition.map(|row| row.map(|v| v * 100.0))
    }

    pub fn restricted_percent(&self) -> [[f64; N_STATES]; N_STATES] {
        self.restricted.map(|row| row.map(|v| v * 100.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphlets::GraphletState::*;

    #[test]
    fn empty_set_gives_zero_profile() {
        let p = profile_of(std::iter::empty(), &WindowParams::default()).unwrap();
        assert_eq!(p, Profile::empty(WindowParams::default()));
        assert_eq!(p.stochastic_view(), Err(ProfileError::Empty));
    }

    #[test]
    fn direct_counts() {
        let mut p = Profile::empty(WindowParams::default());
        p.add_sequence(&[S1, S1, S12]);
        assert_eq!(p.state_counts[S1.index()], 2);
        assert_eq!(p.state_counts[S12.index()], 1);
        assert_eq!(p.transition_counts[S1.index()][S1.index()], 1);
        assert_eq!(p.transition_counts[S1.index()][S12.index()], 1);
        assert_eq!(p.n_transitions(), 2);
    }

    #[test]
    fn no_transition_across_possessions() {
        let mut p = Profile::empty(WindowParams::default());
        p.add_sequence(&[S1]);
        p.add_sequence(&[S12]);
        p.add_sequence(&[]);
        assert_eq!(p.n_transitions(), 0);
        assert_eq!((p.n_possessions, p.n_retained, p.n_windows()), (3, 2, 2));
    }

    #[test]
    fn merge_params_mismatch() {
        let a = Profile::empty(WindowParams::default());
        let b = Profile::empty(WindowParams::new(5.0, 0.25).unwrap());
        assert_eq!(a.merge(&b), Err(ProfileError::ParamsMismatch));
    }

    #[test]
    fn restricted_row_formula() {
        let mut p = Profile::empty(WindowParams::default());
        p.state_counts[0] = 11;
        p.transition_counts[0][0] = 8;
        p.transition_counts[0][1] = 1;
        p.transition_counts[0][2] = 1;
        let v = p.stochastic_view().unwrap();
        assert_eq!(&v.transition[0][..3], &[0.8, 0.1, 0.1]);
        assert_eq!(&v.restricted[0][..3], &[0.0, 0.5, 0.5]);
        assert_eq!(v.rows[0], RowStatus::Observed);
        assert_eq!(v.rows[1], RowStatus::Unobserved);
    }

    #[test]
    fn absorbing_state() {
        let mut p = Profile::empty(WindowParams::default());
        p.add_sequence(&[S123; 5]);
        let v = p.stochastic_view().unwrap();
        assert_eq!(v.p[S123.index()], 1.0);
        assert!(v.restricted.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(v.rows[S123.index()], RowStatus::AbsorbingOnly);
    }
}
