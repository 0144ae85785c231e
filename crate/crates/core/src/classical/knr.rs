use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{check_unit, Transcript};
use crate::error::{Error, Result};
use crate::protocol::ALICE;

/// Constant in `s = ⌈C/ε²⌉`.
pub const KNR_C: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnrRun {
    pub estimate: f64,
    pub rounds: u64,
    pub agreements: u64,
    pub transcript: Transcript,
}

impl KnrRun {
    pub fn agreement_frequency(&self) -> f64 {
        self.agreements as f64 / self.rounds as f64
    }
}

/// `⌈c/ε²⌉`, ignoring float noise just above an integer.
pub fn sketch_rounds(eps: f64, c: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("accuracy {eps} outside (0, 1)")));
    }
    if !(c > 0.0) {
        return Err(Error::domain(format!("sketch constant {c} must be positive")));
    }
    let s = c / (eps * eps);
    Ok((s - 1e-9 * s).ceil().max(1.0) as u64)
}

pub fn knr_estimate(a: &[f64], b: &[f64], eps: f64, seed: u64) -> Result<KnrRun> {
    knr_estimate_with(a, b, eps, KNR_C, seed)
}

/// Sign sketch: for shared random directions `r_j`, Alice sends
/// `sign⟨a, r_j⟩`; Bob counts agreements with `sign⟨b, r_j⟩` and returns
/// `cos(π(1 − agree/s))`. Directions are standard Gaussian vectors, whose
/// normalization would not change any sign.
pub fn knr_estimate_with(a: &[f64], b: &[f64], eps: f64, c: f64, seed: u64) -> Result<KnrRun> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::dim(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    check_unit(a, "a")?;
    check_unit(b, "b")?;
    let s = sketch_rounds(eps, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = vec![0.0; a.len()];
    let mut agreements = 0u64;
    for _ in 0..s {
        let (mut pa, mut pb) = (0.0, 0.0);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = rng.sample(StandardNormal);
            pa += a[i] * *ri;
            pb += b[i] * *ri;
        }
        if (pa >= 0.0) == (pb >= 0.0) {
            agreements += 1;
        }
    }
    let freq = agreements as f64 / s as f64;
    let mut transcript = Transcript::new(2);
    transcript.send(ALICE, s);
    Ok(KnrRun { estimate: (std::f64::consts::PI * (1.0 - freq)).cos(), rounds: s, agreements, transcript })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_count() {
        assert_eq!(sketch_rounds(0.1, KNR_C).unwrap(), 800);
        assert_eq!(sketch_rounds(0.5, 1.0).unwrap(), 4);
        assert!(sketch_rounds(0.0, KNR_C).is_err());
        assert!(sketch_rounds(1.0, KNR_C).is_err());
    }

    #[test]
    fn identical_vectors() {
        let a = [0.6, 0.8];
        let r = knr_estimate(&a, &a, 0.1, 1).unwrap();
        assert_eq!(r.agreements, r.rounds);
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.transcript.total, 800);
        assert_eq!(r.transcript.bits_sent, vec![800, 0]);
    }

    #[test]
    fn orthogonal_vectors_mostly_near_zero() {
        let (a, b) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let ok = (0..100).filter(|&s| knr_estimate(&a, &b, 0.1, s).unwrap().estimate.abs() <= 0.1).count();
        assert!(ok >= 90, "{ok}");
    }

    #[test]
    fn rejects_non_unit() {
        assert!(matches!(knr_estimate(&[1.0, 1.0], &[1.0, 0.0], 0.1, 0), Err(Error::Domain(_))));
        assert!(matches!(knr_estimate(&[1.0], &[1.0, 0.0], 0.1, 0), Err(Error::Dimension(_))));
    }
}
