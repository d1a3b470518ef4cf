//! Deterministic per-trial seed derivation.
//!
//! Trial seeds are produced by a counter-mode SplitMix64 mix of the master
//! seed and the trial index:
//!
//! ```text
//! derive_trial_seed(master, index) = splitmix64(master + index · 0x9E3779B97F4A7C15)
//! ```
//!
//! where `splitmix64` advances its state by the same golden-ratio constant
//! and applies the standard 64-bit finalizer. The mapping is fixed,
//! platform-independent, and pinned by the test vectors in
//! `tests/data/seed_vectors.csv`.

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

/// One SplitMix64 step: advance the state and return the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn derive_trial_seed(master: u64, index: u64) -> u64 {
    let mut state = master.wrapping_add(index.wrapping_mul(GOLDEN));
    splitmix64(&mut state)
}

/// Deterministic random stream of one trial: a ChaCha12 generator keyed by
/// four SplitMix64 outputs chained from the derived trial seed.
pub fn trial_rng(master: u64, index: u64) -> ChaCha12Rng {
    let mut state = derive_trial_seed(master, index);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
