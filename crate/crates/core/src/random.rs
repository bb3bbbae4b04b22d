//! Seeded generators for test instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{incoherent_choi_from_stochastic, QuantumOperation};
use crate::matrix::{haar_isometry, haar_unitary, ComplexMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random unitary channel.
pub fn random_unitary(d: usize, seed: u64) -> QuantumOperation {
    random_unitary_with(d, &mut rng_from_seed(seed))
}

pub fn random_unitary_with(d: usize, rng: &mut impl Rng) -> QuantumOperation {
    QuantumOperation::unitary(haar_unitary(d, rng)).expect("Haar sample is unitary")
}

/// CPTP channel from a Haar isometry `V: C^d -> C^env kron C^d`, with Kraus
/// operators `K_e = (<e| kron I) V`.
pub fn random_cptp(d: usize, env_dim: usize, seed: u64) -> QuantumOperation {
    random_cptp_with(d, env_dim, &mut rng_from_seed(seed))
}

pub fn random_cptp_with(d: usize, env_dim: usize, rng: &mut impl Rng) -> QuantumOperation {
    assert!(d >= 1 && env_dim >= 1);
    let v = haar_isometry(d * env_dim, d, rng);
    let ops = (0..env_dim).map(|e| ComplexMatrix::from_fn(d, d, |al, i| v[(e * d + al, i)])).collect();
    QuantumOperation::kraus(ops).expect("Stinespring Kraus set is complete")
}

/// Random column-stochastic `d x d` matrix, columns drawn from a flat Dirichlet.
pub fn random_stochastic(d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; d]; d];
    for i in 0..d {
        let w: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        for al in 0..d {
            t[al][i] = w[al] / s;
        }
    }
    t
}

/// Incoherent CPTP channel with Choi state `sum (T_{alpha i}/d)|i alpha><i alpha|`.
pub fn random_incoherent_cptp(d: usize, seed: u64) -> QuantumOperation {
    random_incoherent_cptp_with(d, &mut rng_from_seed(seed))
}

pub fn random_incoherent_cptp_with(d: usize, rng: &mut impl Rng) -> QuantumOperation {
    let t = random_stochastic(d, rng);
    QuantumOperation::from_choi(incoherent_choi_from_stochastic(&t).expect("stochastic columns sum to one"))
}

/// Random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        let j = rng.random_range(0..=k);
        p.swap(k, j);
    }
    p
}
