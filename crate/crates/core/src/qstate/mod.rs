//! Dense complex linear algebra for small quantum registers.
//!
//! Qubit 0 is always the most significant tensor factor: in a basis index
//! of a `q`-qubit register, qubit `j` is bit `q - 1 - j`.

mod exchange;
pub(crate) mod haar;
pub(crate) mod kernel;
mod matrix;

pub use exchange::MatrixExchange;
pub use haar::{haar_orthogonal, haar_orthogonal_real, haar_unit_vector, haar_unitary};
pub use matrix::{gates, CMatrix, C64};
pub(crate) use matrix::{ONE, ZERO};

use crate::error::{Error, Result};

/// Global absolute tolerance for entrywise comparisons.
pub const TOL: f64 = 1e-9;

/// Imaginary parts or range violations above this are treated as bugs.
pub const INTEGRITY_TOL: f64 = 1e-6;

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

/// A square matrix with `U†U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

/// A Hermitian idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector(CMatrix);

fn require_power_of_two(m: &CMatrix, what: &str) -> Result<usize> {
    m.qubit_count()
        .ok_or_else(|| Error::dim(format!("{what} must be square with power-of-two dimension, got {}x{}", m.rows(), m.cols())))
}

impl DensityMatrix {
    /// Checks hermiticity and trace. Positivity is not checked here (see
    /// [`hermitian_eigenvalues`]).
    pub fn new(m: CMatrix) -> Result<Self> {
        require_power_of_two(&m, "density matrix")?;
        let herm = m.hermiticity_deviation();
        if herm > TOL {
            return Err(Error::NumericalIntegrity(format!("density matrix not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::NumericalIntegrity(format!("density matrix trace {tr} != 1")));
        }
        Ok(DensityMatrix(m))
    }

    /// `|0…0⟩⟨0…0|` on `clean` qubits tensored with `I/2^mixed`.
    pub fn one_clean_initial(clean: usize, mixed: usize) -> Self {
        Self::with_fixed_bits(clean + mixed, &(0..clean).map(|q| (q, false)).collect::<Vec<_>>())
    }

    /// Qubits listed in `fixed` are in the given basis state; all others are
    /// totally mixed.
    pub fn with_fixed_bits(q: usize, fixed: &[(usize, bool)]) -> Self {
        let dim = 1usize << q;
        let (mask, val) = fixed.iter().fold((0usize, 0usize), |(m, v), &(qb, b)| {
            let bit = 1usize << (q - 1 - qb);
            (m | bit, if b { v | bit } else { v })
        });
        let free = q - fixed.len();
        let w = 1.0 / (1usize << free) as f64;
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            if i & mask == val {
                m[(i, i)] = C64::new(w, 0.0);
            }
        }
        DensityMatrix(m)
    }

    pub fn pure(ket: &CMatrix) -> Result<Self> {
        if ket.cols() != 1 {
            return Err(Error::dim("pure state must be a column vector"));
        }
        Self::new(CMatrix::outer(ket))
    }

    pub fn qubits(&self) -> usize {
        self.0.qubit_count().expect("validated")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        self.0.data_mut()
    }
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        require_power_of_two(&m, "unitary")?;
        let dev = m.unitarity_deviation();
        if dev > TOL {
            return Err(Error::NumericalIntegrity(format!("matrix is not unitary (max |U†U - I| = {dev:e})")));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(qubits: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(1 << qubits))
    }

    pub fn qubits(&self) -> usize {
        self.0.qubit_count().expect("validated")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn compose(&self, then: &UnitaryMatrix) -> Result<Self> {
        Ok(UnitaryMatrix(then.0.matmul(&self.0)?))
    }
}

impl Projector {
    pub fn new(m: CMatrix) -> Result<Self> {
        require_power_of_two(&m, "projector")?;
        let herm = m.hermiticity_deviation();
        let idem = m.matmul(&m)?.max_abs_diff(&m);
        if herm > TOL || idem > TOL {
            return Err(Error::NumericalIntegrity(format!(
                "not a projector (hermiticity {herm:e}, idempotence {idem:e})"
            )));
        }
        Ok(Projector(m))
    }

    /// Projector onto the span of the given computational basis states.
    pub fn from_basis_states(qubits: usize, states: &[usize]) -> Result<Self> {
        let dim = 1usize << qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for &s in states {
            if s >= dim {
                return Err(Error::Index(format!("basis state {s} outside dimension {dim}")));
            }
            m[(s, s)] = ONE;
        }
        Ok(Projector(m))
    }

    pub fn qubits(&self) -> usize {
        self.0.qubit_count().expect("validated")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Projector(CMatrix::identity(self.0.rows()).sub(&self.0).expect("same shape"))
    }

    pub fn rank(&self) -> usize {
        self.0.trace().re.round() as usize
    }
}

/// Kronecker product `a ⊗ b`; `a` occupies the most significant qubits.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    require_power_of_two(a, "left tensor operand")?;
    require_power_of_two(b, "right tensor operand")?;
    Ok(a.kron(b))
}

/// Reduced state on `keep`, in the listed order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let q = rho.qubits();
    check_qubit_list(keep, q)?;
    let traced: Vec<usize> = (0..q).filter(|j| !keep.contains(j)).collect();
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let spread = |local: usize, qubits: &[usize]| -> usize {
        let n = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(j, _)| (local >> (n - 1 - j)) & 1 == 1)
            .fold(0, |acc, (_, &qb)| acc | (1usize << (q - 1 - qb)))
    };
    let keep_idx: Vec<usize> = (0..kd).map(|i| spread(i, keep)).collect();
    let traced_idx: Vec<usize> = (0..td).map(|i| spread(i, &traced)).collect();
    let m = rho.matrix();
    let out = CMatrix::from_fn(kd, kd, |r, c| {
        traced_idx.iter().map(|&t| m[(keep_idx[r] | t, keep_idx[c] | t)]).sum()
    });
    Ok(DensityMatrix(out))
}

/// `U ρ U†` with `u` embedded on `targets` (first target = most significant).
pub fn apply_on_subset(rho: &DensityMatrix, u: &UnitaryMatrix, targets: &[usize]) -> Result<DensityMatrix> {
    let q = rho.qubits();
    check_qubit_list(targets, q)?;
    if u.qubits() != targets.len() {
        return Err(Error::dim(format!("unitary on {} qubits applied to {} targets", u.qubits(), targets.len())));
    }
    let mut out = rho.clone();
    kernel::conjugate_density(out.data_mut(), q, targets, &[], u.matrix());
    Ok(out)
}

/// `Tr(Pρ)`, checked to be real and clamped into `[0, 1]`.
pub fn accept_probability(rho: &DensityMatrix, p: &Projector) -> Result<f64> {
    if rho.matrix().rows() != p.matrix().rows() {
        return Err(Error::dim(format!(
            "projector dimension {} does not match state dimension {}",
            p.matrix().rows(),
            rho.matrix().rows()
        )));
    }
    let pm = p.matrix();
    let rm = rho.matrix();
    let n = pm.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += pm[(i, j)] * rm[(j, i)];
        }
    }
    checked_probability(acc)
}

/// Rejects values that are not numerically a probability, then clamps.
pub fn checked_probability(z: C64) -> Result<f64> {
    if z.im.abs() > INTEGRITY_TOL {
        return Err(Error::NumericalIntegrity(format!("probability has imaginary part {:e}", z.im)));
    }
    if z.re < -INTEGRITY_TOL || z.re > 1.0 + INTEGRITY_TOL {
        return Err(Error::NumericalIntegrity(format!("probability {} outside [0, 1]", z.re)));
    }
    Ok(z.re.clamp(0.0, 1.0))
}

pub(crate) fn check_qubit_list(qs: &[usize], q: usize) -> Result<()> {
    for (i, &a) in qs.iter().enumerate() {
        if a >= q {
            return Err(Error::Index(format!("qubit {a} out of range for {q} qubits")));
        }
        if qs[..i].contains(&a) {
            return Err(Error::Index(format!("qubit {a} listed twice")));
        }
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::dim("eigenvalues need a square matrix"));
    }
    let n = m.rows();
    let na = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let mut ev: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Unitary whose first column is the unit vector `phi` and whose remaining
/// columns orthonormalize the standard basis against it, smallest index
/// first; basis vectors that become numerically dependent are skipped.
pub fn orthonormal_completion(phi: &[C64]) -> Result<UnitaryMatrix> {
    let d = phi.len();
    let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if d == 0 || (norm - 1.0).abs() > TOL {
        return Err(Error::domain(format!("completion needs a unit vector (norm {norm})")));
    }
    let mut basis: Vec<Vec<C64>> = vec![phi.to_vec()];
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![ZERO; d];
        v[e] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let dot: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    UnitaryMatrix::new(CMatrix::from_fn(d, d, |i, j| basis[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gates::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tensor_clean_and_mixed() {
        let zero = ket_bra(0);
        let half_id = CMatrix::identity(2).scale(c(0.5));
        let t = tensor(&zero, &half_id).unwrap();
        assert_eq!(t, CMatrix::diagonal(&[c(0.5), c(0.5), c(0.0), c(0.0)]));
        assert_eq!(tensor(&CMatrix::identity(2), &CMatrix::identity(2)).unwrap(), CMatrix::identity(4));
    }

    #[test]
    fn tensor_x_z_squares_to_identity() {
        let xz = tensor(&x(), &z()).unwrap();
        // direct 4x4 oracle: X⊗Z = [[0, Z], [Z, 0]]
        let expected = CMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(xz, expected);
        assert_eq!(xz.matmul(&xz).unwrap(), CMatrix::identity(4));
    }

    #[test]
    fn tensor_rejects_non_square() {
        let v = CMatrix::zeros(2, 1);
        assert!(matches!(tensor(&v, &x()), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let rho = DensityMatrix::pure(&CMatrix::basis_ket(4, 0)).unwrap();
        let r = partial_trace(&rho, &[0]).unwrap();
        assert_eq!(r.matrix(), &ket_bra(0));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CMatrix::from_vec(4, 1, vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let rho = DensityMatrix::pure(&bell).unwrap();
        for keep in [[0], [1]] {
            let r = partial_trace(&rho, &keep).unwrap();
            assert!(r.matrix().max_abs_diff(&CMatrix::identity(2).scale(c(0.5))) < TOL);
        }
    }

    #[test]
    fn partial_trace_keep_all_is_identity_and_range_checked() {
        let rho = DensityMatrix::one_clean_initial(1, 2);
        assert_eq!(partial_trace(&rho, &[0, 1, 2]).unwrap(), rho);
        assert!(matches!(partial_trace(&rho, &[3]), Err(Error::Index(_))));
    }

    #[test]
    fn apply_x_on_clean_qubit() {
        let rho = DensityMatrix::one_clean_initial(1, 1);
        let out = apply_on_subset(&rho, &UnitaryMatrix::new(x()).unwrap(), &[0]).unwrap();
        let expected = tensor(&ket_bra(1), &CMatrix::identity(2).scale(c(0.5))).unwrap();
        assert!(out.matrix().max_abs_diff(&expected) < TOL);
        let same = apply_on_subset(&rho, &UnitaryMatrix::identity(2), &[0, 1]).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let rho = DensityMatrix::one_clean_initial(1, 1);
        let err = apply_on_subset(&rho, &UnitaryMatrix::identity(2), &[0]);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn accept_probability_basics() {
        let rho = DensityMatrix::one_clean_initial(1, 2);
        let p = Projector::new(tensor(&ket_bra(0), &CMatrix::identity(4)).unwrap()).unwrap();
        assert!((accept_probability(&rho, &p).unwrap() - 1.0).abs() < TOL);
        let zero = Projector::new(CMatrix::zeros(8, 8)).unwrap();
        assert_eq!(accept_probability(&rho, &zero).unwrap(), 0.0);
        let mixed = DensityMatrix::with_fixed_bits(3, &[]);
        let half = Projector::from_basis_states(3, &[0, 3, 5, 6]).unwrap();
        assert!((accept_probability(&mixed, &half).unwrap() - 0.5).abs() < TOL);
    }

    #[test]
    fn accept_probability_flags_complex_values() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0);
        let rho = DensityMatrix::new(m).unwrap();
        // Not a real projector, just enough to produce an imaginary trace.
        let mut bogus = CMatrix::zeros(2, 2);
        bogus[(0, 0)] = C64::new(0.5, 0.1);
        let p = Projector(bogus);
        assert!(matches!(accept_probability(&rho, &p), Err(Error::NumericalIntegrity(_))));
    }
}
