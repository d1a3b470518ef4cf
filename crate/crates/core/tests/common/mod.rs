//! Shared helpers for integration tests.

use std::sync::Arc;

use branchsim_core::layout::SpaceLayout;
use branchsim_core::operator::Operator;
use branchsim_core::state::{Amplitude, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Haar-ish random unitary built by double Gram-Schmidt on a random complex
/// Gaussian matrix. Independent of the operator constructors it is used to
/// test.
pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<Amplitude>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Amplitude::new(gaussian(&mut rng), gaussian(&mut rng)))
                .collect()
        })
        .collect();

    for pass in 0..2 {
        for i in 0..dim {
            for j in 0..i {
                let proj: Amplitude = columns[j]
                    .iter()
                    .zip(&columns[i])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for k in 0..dim {
                    let correction = proj * columns[j][k];
                    columns[i][k] -= correction;
                }
            }
            let norm: f64 = columns[i].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm > 1e-8, "degenerate random matrix at pass {pass}");
            for a in columns[i].iter_mut() {
                *a /= norm;
            }
        }
    }

    let mut entries = vec![Amplitude::ZERO; dim * dim];
    for (c, column) in columns.iter().enumerate() {
        for (r, &value) in column.iter().enumerate() {
            entries[r * dim + c] = value;
        }
    }
    Operator::from_entries(dim, entries).expect("Gram-Schmidt output is unitary")
}

/// Random normalized state over the given layout.
pub fn random_state(layout: &Arc<SpaceLayout>, seed: u64) -> StateVector {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let amps: Vec<Amplitude> = (0..layout.total_dim())
        .map(|_| Amplitude::new(gaussian(&mut rng), gaussian(&mut rng)))
        .collect();
    StateVector::from_amplitudes(Arc::clone(layout), amps)
        .unwrap()
        .normalize()
        .unwrap()
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
