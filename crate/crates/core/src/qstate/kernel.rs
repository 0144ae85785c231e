//! In-place application of a small matrix to a subset of qubits of a flat
//! amplitude array. Qubit 0 is the most significant bit of the index.

use super::matrix::{CMatrix, C64, ZERO};

#[inline]
fn bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

/// Applies `m` on `targets` (first target = most significant local bit),
/// restricted to indices where every `(qubit, value)` control matches.
pub(crate) fn apply_local(
    state: &mut [C64],
    n_qubits: usize,
    targets: &[usize],
    controls: &[(usize, bool)],
    m: &CMatrix,
) {
    let t = targets.len();
    let dim = 1usize << t;
    debug_assert_eq!(state.len(), 1usize << n_qubits);
    debug_assert_eq!(m.rows(), dim);

    let offsets: Vec<usize> = (0..dim)
        .map(|k| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| (k >> (t - 1 - j)) & 1 == 1)
                .fold(0, |acc, (_, &q)| acc | bit(n_qubits, q))
        })
        .collect();
    let target_mask = targets.iter().fold(0, |acc, &q| acc | bit(n_qubits, q));
    let (ctrl_mask, ctrl_val) = controls.iter().fold((0, 0), |(mask, val), &(q, v)| {
        let b = bit(n_qubits, q);
        (mask | b, if v { val | b } else { val })
    });

    let md = m.data();
    let mut buf = vec![ZERO; dim];
    for base in 0..state.len() {
        if base & target_mask != 0 || base & ctrl_mask != ctrl_val {
            continue;
        }
        for (slot, &off) in buf.iter_mut().zip(&offsets) {
            *slot = state[base | off];
        }
        for (i, &off) in offsets.iter().enumerate() {
            let row = &md[i * dim..(i + 1) * dim];
            state[base | off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// `rho <- U rho U†` on a density matrix of `q` qubits stored row-major.
pub(crate) fn conjugate_density(
    rho: &mut [C64],
    q: usize,
    targets: &[usize],
    controls: &[(usize, bool)],
    u: &CMatrix,
) {
    apply_local(rho, 2 * q, targets, controls, u);
    let col_targets: Vec<usize> = targets.iter().map(|&t| t + q).collect();
    let col_controls: Vec<(usize, bool)> = controls.iter().map(|&(c, v)| (c + q, v)).collect();
    apply_local(rho, 2 * q, &col_targets, &col_controls, &u.conj());
}
