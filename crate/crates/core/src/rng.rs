//! Deterministic uniform draws from a raw 64-bit stream.
//!
//! All Monte Carlo sampling in this crate reduces to these two functions so
//! that trial outcomes are reproducible bit-for-bit from the stream state.

use rand_core::RngCore;

/// Uniform draw in `[0, 1)` using the top 53 bits of one `next_u64` call.
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli draw with success probability `p`.
pub fn bernoulli(rng: &mut impl RngCore, p: f64) -> bool {
    uniform_f64(rng) < p
}

/// Inverse-CDF draw from explicit weights with the given total.
///
/// Weights are walked in index order; the caller guarantees `total > 0` and
/// `total ≈ Σ weights`.
pub fn sample_index(weights: &[f64], total: f64, rng: &mut impl RngCore) -> usize {
    let r = uniform_f64(rng) * total;
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cumulative += w;
        last_nonzero = i;
        if r < cumulative {
            return i;
        }
    }
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn uniform_is_in_unit_interval() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let u = uniform_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn sample_index_skips_zero_weights() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        for _ in 0..100 {
            let i = sample_index(&[0.0, 1.0, 0.0], 1.0, &mut rng);
            assert_eq!(i, 1);
        }
    }
}
