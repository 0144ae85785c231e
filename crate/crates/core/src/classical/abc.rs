use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::caps::cap_codebook;
use super::knr::{knr_estimate_with, KNR_C};
use super::{dot, Transcript};
use crate::error::{Error, Result};
use crate::problems::AbcInstance;
use crate::protocol::CHARLIE;

/// Sketch accuracy is `ABC_EPS_SCALE·√(k/n)`.
pub const ABC_EPS_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbcClassicalRun {
    /// 1 for `ABC = I`, 0 for `ABC = −I`.
    pub answer: u8,
    pub estimate: f64,
    pub w_index: usize,
    /// `⟨W_max, C_i⟩`.
    pub cap_value: f64,
    /// `⟨A_i, B·W_max⟩`.
    pub true_value: f64,
    pub transcript: Transcript,
}

impl AbcClassicalRun {
    pub fn meets_cap(&self, n: usize, k: usize) -> bool {
        self.cap_value >= (k as f64 / n as f64).sqrt()
    }
}

pub fn abc_classical(inst: &AbcInstance, i: usize, k: usize, seed: u64) -> Result<AbcClassicalRun> {
    abc_classical_with(inst, i, k, KNR_C, seed)
}

/// Charlie sends the index of the codeword closest to column `i` of `C`;
/// Bob forms `B·W_max`; Alice (row `i` of `A`) and Bob estimate the inner
/// product with the sign sketch and answer by its sign.
pub fn abc_classical_with(inst: &AbcInstance, i: usize, k: usize, knr_c: f64, seed: u64) -> Result<AbcClassicalRun> {
    let n = inst.n;
    if i >= n {
        return Err(Error::Index(format!("row {i} out of range for n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (book_seed, sketch_seed): (u64, u64) = (rng.random(), rng.random());
    let book = cap_codebook(n, k, book_seed)?;

    let ci: Vec<f64> = inst.c.column(i).iter().copied().collect();
    let (w_index, cap_value) = book.best(&ci);
    let bw: Vec<f64> = (&inst.b * nalgebra::DVector::from_column_slice(&book.vectors[w_index])).iter().copied().collect();
    let ai: Vec<f64> = inst.a.row(i).iter().copied().collect();
    let true_value = dot(&ai, &bw);

    let eps = ABC_EPS_SCALE * (k as f64 / n as f64).sqrt();
    let sketch = knr_estimate_with(&ai, &normalized(&bw), eps, knr_c, sketch_seed)?;
    let mut transcript = Transcript::new(3);
    transcript.send(CHARLIE, book.index_bits());
    transcript.merge(&sketch.transcript);
    Ok(AbcClassicalRun {
        answer: (sketch.estimate > 0.0) as u8,
        estimate: sketch.estimate,
        w_index,
        cap_value,
        true_value,
        transcript,
    })
}

/// `B` is orthogonal, so this only removes rounding drift.
fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = dot(v, v).sqrt();
    v.iter().map(|x| x / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::abc_instance;

    #[test]
    fn small_instance_and_transcript() {
        let inst = abc_instance(4, 1, 2).unwrap();
        let run = abc_classical_with(&inst, 0, 1, 0.5, 9).unwrap();
        // 8 index bits from Charlie, ⌈0.5 / (0.01²·¼)⌉ sketch bits from Alice
        assert_eq!(run.transcript.bits_sent, vec![20_000, 0, 8]);
        assert!((run.true_value - run.cap_value).abs() < 1e-9);
        let neg = abc_instance(4, -1, 2).unwrap();
        let run = abc_classical_with(&neg, 0, 1, 0.5, 9).unwrap();
        assert!((run.true_value + run.cap_value).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        let inst = abc_instance(4, 1, 0).unwrap();
        assert!(matches!(abc_classical(&inst, 0, 2, 0), Err(Error::Domain(_))));
        assert!(matches!(abc_classical(&inst, 4, 1, 0), Err(Error::Index(_))));
    }
}
