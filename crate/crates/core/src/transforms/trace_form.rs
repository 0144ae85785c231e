use num_rational::Rational64;

use super::{cost, mapped_declared, pow2_inv, TransformCert};
use crate::error::{Error, Result};
use crate::protocol::{
    Channel, GateOp, Measurement, Mode, PlayerId, ProtocolSpec, RegisterLayout, RoundAction, TraceForm, UnitarySource,
};
use crate::qstate::gates;

fn controlled(op: &GateOp, shift: usize) -> GateOp {
    let mut t = vec![0];
    t.extend(op.targets.iter().map(|&q| q + shift));
    GateOp::new(UnitarySource::Controlled(Box::new(op.unitary.clone())), t)
}

fn controlled_adjoint(op: &GateOp, shift: usize) -> GateOp {
    let mut g = controlled(op, shift);
    if let UnitarySource::Controlled(inner) = g.unitary {
        g.unitary = UnitarySource::Controlled(Box::new(UnitarySource::Adjoint(inner)));
    }
    g
}

/// Hadamard-test wrapper around a protocol `P'` with `k` clean qubits that
/// measures a single qubit. With a fresh control `c` and one mixed ancilla
/// per clean qubit plus one for the measured qubit, the controlled operator
/// is `W = C_meas · P' · C_clean · P'†`, where the `C` are CNOTs from the
/// tracked qubits onto their ancillas. Tracing the ancillas turns each CNOT
/// into `2|0⟩⟨0|`, so `Tr W = 2^{N+1}·a` on `N` base qubits and the wrapper
/// accepts with `½ + a/2^{k+1}`.
///
/// Scheduling: every qubit that is ever sent, together with `c`, travels as
/// one bundle to whichever player acts next, so the output uses a fixed
/// channel; unsent qubits stay with their initial owner.
pub fn to_trace_form(p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    let (m, outcome) = match p.measurement {
        Measurement::SingleQubit { index, outcome, .. } => (index, outcome),
        _ => return Err(Error::shape("trace-form needs a single-qubit measurement (apply sq-measure first)")),
    };
    if p.mode != Mode::Clocked {
        return Err(Error::shape("trace-form applies to clocked protocols"));
    }
    let k = p.layout.clean;
    if k == 0 {
        return Err(Error::domain("trace-form needs at least one clean qubit"));
    }
    let before = cost(p)?;
    let n = p.total_qubits();
    let total = n + k + 2;
    let meas_anc = n + 1 + k;

    let mut bundle: Vec<usize> = vec![0];
    for r in &p.rounds {
        bundle.extend(r.message.iter().map(|&q| q + 1));
    }
    bundle.sort_unstable();
    bundle.dedup();
    let in_bundle = |q: usize| bundle.binary_search(&(q + 1)).is_ok();

    let mut steps: Vec<(PlayerId, Vec<GateOp>)> = Vec::new();
    for r in p.rounds.iter().rev() {
        steps.push((r.player, r.ops.iter().rev().map(|op| controlled_adjoint(op, 1)).collect()));
    }
    let mut ancilla_owner = vec![0; k + 1];
    for i in 0..k {
        let who = p.layout.owners[i];
        ancilla_owner[i] = who;
        let cx = GateOp::explicit(gates::cnot(), vec![i + 1, n + 1 + i]);
        steps.push((who, vec![controlled(&cx, 0)]));
    }
    for r in &p.rounds {
        steps.push((r.player, r.ops.iter().map(|op| controlled(op, 1)).collect()));
    }
    let meas_player = if in_bundle(m) { p.measurement.player() } else { p.layout.owners[m] };
    ancilla_owner[k] = meas_player;
    let cm = if outcome == 0 { gates::cnot() } else { gates::anti_cnot() };
    steps.push((meas_player, vec![controlled(&GateOp::explicit(cm, vec![m + 1, meas_anc]), 0)]));

    let mut rounds: Vec<RoundAction> = Vec::new();
    for (who, ops) in steps {
        match rounds.last_mut() {
            Some(r) if r.player == who => r.ops.extend(ops),
            _ => rounds.push(RoundAction::new(who, ops)),
        }
    }
    let h = || GateOp::explicit(gates::h(), vec![0]);
    rounds.first_mut().expect("at least one step").ops.insert(0, h());
    rounds.last_mut().expect("at least one step").ops.push(h());
    let players: Vec<PlayerId> = rounds.iter().map(|r| r.player).collect();
    for (i, r) in rounds.iter_mut().enumerate() {
        if let Some(&next) = players.get(i + 1) {
            r.message = bundle.clone();
            r.to = Some(next);
        }
    }

    let first = players[0];
    let mut owners = vec![first; total];
    for q in 0..n {
        if !in_bundle(q) {
            owners[q + 1] = p.layout.owners[q];
        }
    }
    for (i, &o) in ancilla_owner.iter().enumerate() {
        owners[n + 1 + i] = o;
    }
    let last = *players.last().expect("non-empty");

    let alpha = pow2_inv(k + 1);
    let beta = Rational64::new(1, 2);
    let out = ProtocolSpec {
        version: p.version,
        players: p.players,
        layout: RegisterLayout::new(1, total - 1, owners),
        rounds,
        mode: Mode::Clocked,
        channel: Channel::Fixed,
        measurement: Measurement::SingleQubit { player: last, index: 0, outcome: 0 },
        declared: mapped_declared(p, alpha, beta),
        trace_form: Some(TraceForm { control: 0, counter: vec![] }),
    };
    let after = cost(&out)?;
    Ok((out, TransformCert::new("trace-form", alpha, beta, p.declared, before, after)))
}
