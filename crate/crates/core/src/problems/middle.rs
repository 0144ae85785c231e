use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    Channel, GateOp, Measurement, Mode, PlayerInput, ProtocolSpec, RegisterLayout, RoundAction, ALICE, BOB,
    DESCRIPTOR_VERSION,
};
use crate::qstate::{gates, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleVariant {
    Standard,
    OneClean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MiddleInstance {
    pub n: usize,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    /// `Σ xᵢyᵢ − n/2`.
    pub t: i64,
}

impl MiddleInstance {
    pub fn new(x: Vec<u8>, y: Vec<u8>) -> Result<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(Error::domain("x and y must have equal length"));
        }
        check_n(n)?;
        let dot: i64 = x.iter().zip(&y).map(|(a, b)| (a & b) as i64).sum();
        Ok(MiddleInstance { n, x, y, t: dot - n as i64 / 2 })
    }

    /// 1 unless `Σ xᵢyᵢ = n/2`.
    pub fn label(&self) -> u8 {
        (self.t != 0) as u8
    }

    pub fn expected_acceptance(&self, variant: MiddleVariant) -> f64 {
        let (t, n) = (self.t as f64, self.n as f64);
        match variant {
            MiddleVariant::Standard => 4.0 * t * t / (n * n),
            MiddleVariant::OneClean => 2.0 * t * t / (n * n * n),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::domain(format!("MIDDLE needs n a power of two >= 2, got {n}")));
    }
    Ok(())
}

/// `|i⟩|b⟩ ↦ |i⟩|b ⊕ x_i⟩` on `log n + 1` qubits.
fn load(x: &[u8]) -> CMatrix {
    let n = x.len();
    let perm: Vec<usize> = (0..2 * n).map(|j| j ^ (x[j >> 1] as usize)).collect();
    gates::permutation(&perm)
}

fn index_hadamard(n: usize) -> CMatrix {
    gates::h_all(n.trailing_zeros() as usize).kron(&CMatrix::identity(2))
}

fn input_bits(input: &PlayerInput) -> Result<&[u8]> {
    let x = input.bits()?;
    check_n(x.len())?;
    Ok(x)
}

pub(crate) fn gen_alice_prep(_: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let x = input_bits(input)?;
    load(x).matmul(&index_hadamard(x.len()))
}

pub(crate) fn gen_bob_phase(_: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let y = input_bits(input)?;
    let diag: Vec<C64> = (0..2 * y.len())
        .map(|j| C64::new(if (j & 1) as u8 & y[j >> 1] == 1 { -1.0 } else { 1.0 }, 0.0))
        .collect();
    Ok(CMatrix::diagonal(&diag))
}

pub(crate) fn gen_alice_finish(_: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let x = input_bits(input)?;
    index_hadamard(x.len()).matmul(&load(x))
}

/// Three rounds on `log n + 1` clean qubits: Alice loads `Σ|i⟩|x_i⟩`, Bob
/// applies `(−1)^{x_i y_i}`, Alice unloads, applies H and accepts on the
/// all-zero index.
pub fn middle_protocol(n: usize, variant: MiddleVariant) -> Result<ProtocolSpec> {
    check_n(n)?;
    let l = n.trailing_zeros() as usize;
    let k = l + 1;
    let all: Vec<usize> = (0..k).collect();
    let gen = |name: &str| GateOp::generator(name, serde_json::Value::Null, all.clone());
    let mut proj = CMatrix::zeros(1 << k, 1 << k);
    proj[(0, 0)] = C64::new(1.0, 0.0);
    proj[(1, 1)] = C64::new(1.0, 0.0);
    let standard = ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(k, 0, vec![ALICE; k]),
        rounds: vec![
            RoundAction::new(ALICE, vec![gen("middle-alice-prep")]).send(all.clone(), BOB),
            RoundAction::new(BOB, vec![gen("middle-bob-phase")]).send(all.clone(), ALICE),
            RoundAction::new(ALICE, vec![gen("middle-alice-finish")]),
        ],
        mode: Mode::Clocked,
        channel: Channel::Fixed,
        measurement: Measurement::Projector { player: ALICE, targets: all.clone(), projector: proj },
        declared: None,
        trace_form: None,
    };
    match variant {
        MiddleVariant::Standard => Ok(standard),
        MiddleVariant::OneClean => Ok(crate::transforms::two_round_one_clean(&standard)?.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::communication_cost;
    use crate::simulator::run_density;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn instance_offset() {
        let m = MiddleInstance::new(bits("1100"), bits("1010")).unwrap();
        assert_eq!(m.t, -1);
        assert_eq!(m.label(), 1);
        assert!(MiddleInstance::new(bits("110"), bits("101")).is_err());
    }

    #[test]
    fn n4_examples() {
        let p = middle_protocol(4, MiddleVariant::Standard).unwrap();
        assert_eq!(communication_cost(&p).unwrap(), 2 * 2 + 2);
        let run = |x: &str, y: &str| {
            run_density(&p, &[PlayerInput::Bits(bits(x)), PlayerInput::Bits(bits(y))]).unwrap().acceptance
        };
        assert!((run("1100", "1010") - 0.25).abs() < 1e-12);
        assert!(run("1100", "1100").abs() < 1e-12);
    }

    #[test]
    fn one_clean_scales() {
        let p = middle_protocol(4, MiddleVariant::OneClean).unwrap();
        assert_eq!(p.layout.clean, 1);
        assert_eq!(communication_cost(&p).unwrap(), 6);
        let acc = run_density(&p, &[PlayerInput::Bits(bits("1100")), PlayerInput::Bits(bits("1010"))])
            .unwrap()
            .acceptance;
        assert!((acc - 1.0 / 32.0).abs() < 1e-12);
    }
}
