use serde_json::json;

use crate::error::{Error, Result};
use crate::protocol::{
    Channel, DeclaredBias, GateOp, Measurement, Mode, PlayerInput, ProtocolSpec, RegisterLayout, RoundAction, ALICE,
    BOB, DESCRIPTOR_VERSION,
};
use crate::qstate::{gates, CMatrix};

pub fn ip2_value(x: &[u8], y: &[u8]) -> u8 {
    x.iter().zip(y).map(|(a, b)| a & b).fold(0, |acc, v| acc ^ v)
}

fn round_param(params: &serde_json::Value) -> Result<usize> {
    params
        .get("round")
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .filter(|&v| v >= 1)
        .ok_or_else(|| Error::Input("ip2 generator needs a positive 'round' parameter".into()))
}

fn bit(bits: &[u8], i: usize) -> Result<u8> {
    bits.get(i)
        .copied()
        .ok_or_else(|| Error::Input(format!("input has {} bits, round needs bit {}", bits.len(), i + 1)))
}

/// Round `i`: restore qubit 0 from `x_{i−1}` and store `x_i`.
pub(crate) fn gen_alice(params: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let i = round_param(params)?;
    let x = input.bits()?;
    let prev = if i == 1 { 0 } else { bit(x, i - 2)? };
    Ok(if prev ^ bit(x, i - 1)? == 1 { gates::x() } else { CMatrix::identity(2) })
}

/// Round `i`: add `x_i·y_i` into qubit 1.
pub(crate) fn gen_bob(params: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let i = round_param(params)?;
    Ok(if bit(input.bits()?, i - 1)? == 1 { gates::cnot() } else { CMatrix::identity(4) })
}

/// Two clean qubits, 2n rounds, communication 2n; Bob outputs the parity.
pub fn ip2_clocked(n: usize) -> Result<ProtocolSpec> {
    if n == 0 {
        return Err(Error::domain("IP2 needs n >= 1"));
    }
    let mut rounds = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let a = RoundAction::new(ALICE, vec![GateOp::generator("ip2-alice", json!({ "round": i }), vec![0])]);
        rounds.push(if i == 1 { a.send(vec![0, 1], BOB) } else { a.send(vec![0], BOB) });
        let b = RoundAction::new(BOB, vec![GateOp::generator("ip2-bob", json!({ "round": i }), vec![0, 1])]);
        rounds.push(if i < n { b.send(vec![0], ALICE) } else { b });
    }
    Ok(ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(2, 0, vec![ALICE, ALICE]),
        rounds,
        mode: Mode::Clocked,
        channel: Channel::Ghosted,
        measurement: Measurement::SingleQubit { player: BOB, index: 1, outcome: 1 },
        declared: Some(DeclaredBias { p: 0.5, eps: 0.5 }),
        trace_form: None,
    })
}

/// The clocked protocol pushed through the clean-qubit reduction.
pub fn ip2_one_clean(n: usize) -> Result<ProtocolSpec> {
    Ok(crate::transforms::k_to_one_clean(&ip2_clocked(n)?)?.0)
}
