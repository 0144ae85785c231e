use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::haar_unit_vector;

/// Shared random unit vectors `W_1..W_|T|` in `S^{n−1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapCodebook {
    pub n: usize,
    pub k: usize,
    pub size: usize,
    pub vectors: Vec<Vec<f64>>,
    pub seed: u64,
}

impl CapCodebook {
    /// Lowest index attaining `max_j ⟨W_j, v⟩`, with that value.
    pub fn best(&self, v: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (j, w) in self.vectors.iter().enumerate() {
            let ip = super::dot(w, v);
            if ip > best.1 {
                best = (j, ip);
            }
        }
        best
    }

    /// `⌈log₂ |T|⌉`.
    pub fn index_bits(&self) -> u64 {
        index_bits(self.size)
    }
}

pub(crate) fn index_bits(size: usize) -> u64 {
    (usize::BITS - (size.max(1) - 1).leading_zeros()) as u64
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 || 4 * k > n {
        return Err(Error::domain(format!("cap parameter k = {k} outside [1, n/4] for n = {n}")));
    }
    Ok(())
}

/// `⌈32√k·e^{2k}⌉`.
pub fn codebook_size(k: usize) -> usize {
    let v = 32.0 * (k as f64).sqrt() * (2.0 * k as f64).exp();
    (v - 1e-9 * v).ceil() as usize
}

/// `e^{−k}/(16√k)`.
pub fn cap_bound(k: usize) -> f64 {
    (-(k as f64)).exp() / (16.0 * (k as f64).sqrt())
}

pub fn cap_codebook(n: usize, k: usize, seed: u64) -> Result<CapCodebook> {
    check_k(n, k)?;
    let size = codebook_size(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..size).map(|_| haar_unit_vector(n, &mut rng)).collect();
    Ok(CapCodebook { n, k, size, vectors, seed })
}

/// Fraction of Haar `W` with `⟨e₁, W⟩² ≥ k/n`.
pub fn cap_probability_mc(n: usize, k: usize, samples: u64, seed: u64) -> Result<f64> {
    check_k(n, k)?;
    if samples < 10_000 {
        return Err(Error::domain(format!("need at least 10^4 samples, got {samples}")));
    }
    let threshold = k as f64 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let w = haar_unit_vector(n, &mut rng);
        if w[0] * w[0] >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}
