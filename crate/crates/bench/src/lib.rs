//! Fixtures shared by the benchmarks.

use passgraph::oracle::{generate, SynthSpec};
use passgraph::Dataset;

/// A synthetic dataset of `n_games` games with the default generator shape.
pub fn fixture(n_games: usize, seed: u64) -> Dataset {
    let spec = SynthSpec { seed, n_games, ..SynthSpec::default() };
    generate(&spec).expect("default spec is valid").dataset
}
