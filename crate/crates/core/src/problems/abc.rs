use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::protocol::{
    Channel, DeclaredBias, GateOp, Measurement, Mode, PlayerInput, ProtocolSpec, RegisterLayout, RoundAction,
    UnitarySource, ALICE, BOB, CHARLIE, DESCRIPTOR_VERSION,
};
use crate::qstate::{gates, CMatrix, C64};

/// Three real orthogonal matrices with `ABC = label·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcInstance {
    pub n: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// +1 or −1.
    pub label: i8,
}

impl AbcInstance {
    /// 1 when `ABC = I`, 0 when `ABC = −I`.
    pub fn answer(&self) -> u8 {
        (self.label > 0) as u8
    }

    pub fn product_deviation(&self) -> f64 {
        let p = &self.a * &self.b * &self.c;
        (p - DMatrix::<f64>::identity(self.n, self.n) * self.label as f64).amax()
    }

    pub fn inputs(&self) -> Vec<PlayerInput> {
        vec![
            PlayerInput::Matrix(to_cmatrix(&self.a)),
            PlayerInput::Matrix(to_cmatrix(&self.b)),
            PlayerInput::Matrix(to_cmatrix(&self.c)),
        ]
    }

    /// Builds an instance from given matrices, checking orthogonality and the
    /// product.
    pub fn from_matrices(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        for m in [&a, &b, &c] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::dim("ABC matrices must share one square shape"));
            }
            let dev = (m.transpose() * m - DMatrix::<f64>::identity(n, n)).amax();
            if dev > 1e-9 {
                return Err(Error::domain(format!("matrix is not orthogonal (deviation {dev:.3e})")));
            }
        }
        let p = &a * &b * &c;
        let id = DMatrix::<f64>::identity(n, n);
        let label = if (&p - &id).amax() < 1e-8 {
            1
        } else if (&p + &id).amax() < 1e-8 {
            -1
        } else {
            return Err(Error::domain("ABC is neither I nor −I"));
        };
        Ok(AbcInstance { n, a, b, c, label })
    }
}

pub fn to_cmatrix(m: &DMatrix<f64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

pub fn from_cmatrix(m: &CMatrix) -> Result<DMatrix<f64>> {
    if !m.is_real(1e-12) {
        return Err(Error::domain("expected a real matrix"));
    }
    Ok(DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re))
}

/// `B, C` Haar on SO(n), `A = label·(BC)ᵀ`.
pub fn abc_instance(n: usize, label: i8, seed: u64) -> Result<AbcInstance> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::domain(format!("ABC needs even n, got {n}")));
    }
    if label != 1 && label != -1 {
        return Err(Error::domain("label must be +1 or -1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = crate::qstate::haar::sample_orthogonal(n, true, &mut rng);
    let c = crate::qstate::haar::sample_orthogonal(n, true, &mut rng);
    let a = (&b * &c).transpose() * label as f64;
    Ok(AbcInstance { n, a, b, c, label })
}

pub(crate) fn gen_matrix(_: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    Ok(input.matrix()?.clone())
}

/// One clean control plus `log n` mixed qubits, all starting with Alice.
/// Alice: H, send to Charlie; Charlie: controlled-C, send to Bob; Bob:
/// controlled-B, send to Alice; Alice: controlled-A, H, accept on |0⟩.
pub fn abc_protocol(n: usize) -> Result<ProtocolSpec> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::domain(format!("ABC protocol needs n a power of two >= 2, got {n}")));
    }
    let l = n.trailing_zeros() as usize;
    let all: Vec<usize> = (0..=l).collect();
    let ctrl = || {
        GateOp::new(
            UnitarySource::Controlled(Box::new(UnitarySource::Generator {
                name: "abc-matrix".into(),
                params: serde_json::Value::Null,
            })),
            all.clone(),
        )
    };
    let h = || GateOp::explicit(gates::h(), vec![0]);
    Ok(ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 3,
        layout: RegisterLayout::new(1, l, vec![ALICE; l + 1]),
        rounds: vec![
            RoundAction::new(ALICE, vec![h()]).send(all.clone(), CHARLIE),
            RoundAction::new(CHARLIE, vec![ctrl()]).send(all.clone(), BOB),
            RoundAction::new(BOB, vec![ctrl()]).send(all.clone(), ALICE),
            RoundAction::new(ALICE, vec![ctrl(), h()]),
        ],
        mode: Mode::Clocked,
        channel: Channel::Fixed,
        measurement: Measurement::SingleQubit { player: ALICE, index: 0, outcome: 0 },
        declared: Some(DeclaredBias { p: 0.5, eps: 0.5 }),
        trace_form: Some(crate::protocol::TraceForm { control: 0, counter: vec![] }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::communication_cost;
    use crate::simulator::{run_density, run_trace};

    #[test]
    fn instance_products() {
        for label in [1i8, -1] {
            let inst = abc_instance(2, label, 5).unwrap();
            assert!(inst.product_deviation() < 1e-9);
        }
        assert!(abc_instance(3, 1, 0).is_err());
    }

    #[test]
    fn protocol_is_exact() {
        for n in [2usize, 4] {
            let p = abc_protocol(n).unwrap();
            assert_eq!(communication_cost(&p).unwrap(), 3 * (n.trailing_zeros() as usize + 1));
            for seed in 0..5 {
                for label in [1i8, -1] {
                    let inst = abc_instance(n, label, seed).unwrap();
                    let acc = run_density(&p, &inst.inputs()).unwrap().acceptance;
                    assert!((acc - inst.answer() as f64).abs() < 1e-9);
                    let tr = run_trace(&p, &inst.inputs()).unwrap().acceptance;
                    assert!((tr - acc).abs() < 1e-9);
                }
            }
        }
    }
}
