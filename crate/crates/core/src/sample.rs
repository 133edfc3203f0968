//! Seeded random generators shared by the samplers.
//!
//! Every sampled task draws from its own ChaCha substream keyed by the run
//! seed and the task index, so results do not depend on scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{ActionLattice, LatticeValue};
use crate::mrel::{BinaryMultirelation, FuzzyMultirelation, FuzzySet, State};

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform subset of `{0..n}`; nonempty if requested and `n > 0`.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, nonempty: bool) -> Vec<State> {
    assert!(n < 64);
    let lo = u64::from(nonempty && n > 0);
    let mask = rng.gen_range(lo..(1u64 << n));
    (0..n).filter(|i| mask >> i & 1 == 1).map(State).collect()
}

/// Each source gets between 0 and `max_per_source` target sets.
pub fn random_binary<R: Rng>(
    rng: &mut R,
    universe: usize,
    max_per_source: usize,
    nonempty: bool,
) -> BinaryMultirelation {
    let mut r = BinaryMultirelation::new(universe);
    for a in 0..universe {
        for _ in 0..rng.gen_range(0..=max_per_source) {
            r.insert(State(a), random_subset(rng, universe, nonempty).into_iter().collect());
        }
    }
    r
}

/// Random fuzzy multirelation with degrees drawn from the nonzero part of
/// `grid` and supports of at most `max_support` states.
pub fn random_fuzzy<R: Rng>(
    rng: &mut R,
    lattice: &ActionLattice,
    universe: usize,
    max_per_source: usize,
    max_support: usize,
    grid: &[LatticeValue],
) -> FuzzyMultirelation {
    let degrees: Vec<LatticeValue> = grid.iter().copied().filter(|&v| !lattice.is_zero(v)).collect();
    let mut r = FuzzyMultirelation::new(lattice.clone(), universe);
    if degrees.is_empty() || universe == 0 {
        return r;
    }
    let states: Vec<usize> = (0..universe).collect();
    for a in 0..universe {
        for _ in 0..rng.gen_range(0..=max_per_source) {
            let k = rng.gen_range(1..=max_support.clamp(1, universe));
            let support: Vec<usize> = states.choose_multiple(rng, k).copied().collect();
            let fs = FuzzySet::from_entries(
                lattice,
                support
                    .into_iter()
                    .map(|s| (State(s), *degrees.choose(rng).expect("nonempty degrees"))),
            );
            r.insert(State(a), fs);
        }
    }
    r
}
