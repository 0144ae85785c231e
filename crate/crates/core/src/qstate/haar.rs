use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, UnitaryMatrix, C64};
use crate::error::{Error, Result};

/// Haar-distributed orthogonal matrix (from SO(n) when `special`).
///
/// Gaussian matrix, QR, then columns rescaled by `sign(diag(R))` so the
/// distribution is exactly Haar rather than QR-biased.
pub fn haar_orthogonal_real(n: usize, special: bool, seed: u64) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::domain("haar_orthogonal needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_orthogonal(n, special, &mut rng))
}

pub(crate) fn sample_orthogonal<R: Rng + ?Sized>(n: usize, special: bool, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if special && q.determinant() < 0.0 {
        q.column_mut(n - 1).neg_mut();
    }
    q
}

pub fn haar_orthogonal(n: usize, special: bool, seed: u64) -> Result<UnitaryMatrix> {
    let q = haar_orthogonal_real(n, special, seed)?;
    let m = CMatrix::from_fn(n, n, |i, j| C64::new(q[(i, j)], 0.0));
    if !n.is_power_of_two() {
        return Err(Error::dim(format!("orthogonal matrix of size {n} is not a qubit operator")));
    }
    UnitaryMatrix::new(m)
}

/// Haar unitary on `qubits` qubits (complex Ginibre + phase-corrected QR).
pub fn haar_unitary(qubits: usize, seed: u64) -> UnitaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_unitary(qubits, &mut rng)
}

pub(crate) fn sample_unitary<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> UnitaryMatrix {
    let n = 1usize << qubits;
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q[(i, j)] * phase
    });
    UnitaryMatrix::new(m).expect("QR factor is unitary")
}

/// Uniform point on the sphere S^{n-1}.
pub fn haar_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
