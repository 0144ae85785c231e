use crate::error::{Error, Result};
use crate::protocol::{
    Channel, GateOp, Measurement, Mode, ProtocolSpec, RegisterLayout, RoundAction, TraceForm, UnitarySource, ALICE,
    BOB, DESCRIPTOR_VERSION,
};
use crate::qstate::{gates, UnitaryMatrix};

/// `Re tr(B·A) / 2^{m+1}` for `m`-qubit operators: the acceptance of the
/// one-way Hadamard-test protocol minus ½.
pub fn oneway_bias(ua: &UnitaryMatrix, ub: &UnitaryMatrix) -> Result<f64> {
    let (a, b) = (ua.matrix(), ub.matrix());
    if a.rows() != b.rows() {
        return Err(Error::dim(format!("operators of dimension {} and {}", a.rows(), b.rows())));
    }
    let n = a.rows();
    let mut tr = 0.0;
    for i in 0..n {
        for k in 0..n {
            tr += (b[(i, k)] * a[(k, i)]).re;
        }
    }
    Ok(tr / (2 * n) as f64)
}

/// Control qubit plus an `m`-qubit mixed register, all starting with Alice:
/// Alice applies H and controlled-A, sends everything to Bob, who applies
/// controlled-B and H and accepts on control = 0.
pub fn oneway_protocol(ua: &UnitaryMatrix, ub: &UnitaryMatrix) -> Result<ProtocolSpec> {
    if ua.qubits() != ub.qubits() {
        return Err(Error::dim("one-way operators must act on the same register"));
    }
    let m = ua.qubits();
    let all: Vec<usize> = (0..=m).collect();
    let ctrl = |u: &UnitaryMatrix| {
        GateOp::new(UnitarySource::Controlled(Box::new(UnitarySource::Explicit(u.matrix().clone()))), all.clone())
    };
    Ok(ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(1, m, vec![ALICE; m + 1]),
        rounds: vec![
            RoundAction::new(ALICE, vec![GateOp::explicit(gates::h(), vec![0]), ctrl(ua)]).send(all.clone(), BOB),
            RoundAction::new(BOB, vec![ctrl(ub), GateOp::explicit(gates::h(), vec![0])]),
        ],
        mode: Mode::Clocked,
        channel: Channel::Ghosted,
        measurement: Measurement::SingleQubit { player: BOB, index: 0, outcome: 0 },
        declared: None,
        trace_form: Some(TraceForm { control: 0, counter: vec![] }),
    })
}
