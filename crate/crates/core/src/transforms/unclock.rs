use super::{cost, TransformCert};
use crate::error::{Error, Result};
use crate::protocol::{
    Channel, GateOp, Measurement, Mode, ProtocolSpec, RegisterLayout, RoundAction, TraceForm, UnitarySource,
};
use crate::qstate::{gates, TOL};

fn is_h_on(op: &GateOp, c: usize) -> bool {
    op.targets == [c] && matches!(&op.unitary, UnitarySource::Explicit(m) if m.max_abs_diff(&gates::h()) < TOL)
}

/// Trace-form protocol → semi-unclocked protocol. Rounds are paired
/// (first player, second player); pair `j` runs when a counter register
/// reads `j`, and the second player advances the counter after each pair.
/// The pair count is padded with identity pairs to `R = 2^w`, so the
/// counter is `w` fresh mixed qubits. Every round is `Û = (H⊗I)·U·(H⊗I)`
/// with the same `U` for all rounds of a player; by cyclicity of the trace
/// the acceptance equals the original for every counter start.
pub fn unclock(p: &ProtocolSpec, r: usize) -> Result<(ProtocolSpec, TransformCert)> {
    let tf = p.trace_form.as_ref().ok_or_else(|| Error::shape("unclock needs a trace-form protocol"))?;
    if !tf.counter.is_empty() {
        return Err(Error::shape("protocol is already unclocked"));
    }
    if r != p.rounds.len() || r == 0 {
        return Err(Error::shape(format!("round count {r} does not match the protocol's {} rounds", p.rounds.len())));
    }
    let c = tf.control;
    let outcome = match p.measurement {
        Measurement::SingleQubit { index, outcome, .. } if index == c => outcome,
        _ => return Err(Error::shape("trace form must measure its control qubit")),
    };
    let acting = p.acting_players();
    if acting.len() > 2 {
        return Err(Error::shape("unclock supports two acting players"));
    }
    if p.rounds.windows(2).any(|w| w[0].player == w[1].player) {
        return Err(Error::shape("rounds must alternate between the two players"));
    }
    let before = cost(p)?;
    let p1 = p.rounds[0].player;
    let p2 = acting.iter().copied().find(|&x| x != p1).unwrap_or(if p1 == 0 { 1 } else { 0 });

    // Strip the outer Hadamards and the control from every op.
    let mut bodies: Vec<Vec<(UnitarySource, Vec<usize>)>> = Vec::with_capacity(r);
    for (i, round) in p.rounds.iter().enumerate() {
        let mut ops: &[GateOp] = &round.ops;
        if i == 0 {
            match ops.split_first() {
                Some((h, rest)) if is_h_on(h, c) => ops = rest,
                _ => return Err(Error::shape("first op must be H on the control")),
            }
        }
        if i + 1 == r {
            match ops.split_last() {
                Some((h, rest)) if is_h_on(h, c) => ops = rest,
                _ => return Err(Error::shape("last op must be H on the control")),
            }
        }
        let mut body = Vec::with_capacity(ops.len());
        for op in ops {
            match (&op.unitary, op.targets.split_first()) {
                (UnitarySource::Controlled(inner), Some((&ctl, rest))) if ctl == c && !rest.contains(&c) => {
                    body.push(((**inner).clone(), rest.to_vec()))
                }
                _ => return Err(Error::shape(format!("round {i}: inner ops must be controlled by the control qubit"))),
            }
        }
        bodies.push(body);
    }

    let pairs = r.div_ceil(2);
    let big_r = pairs.next_power_of_two();
    let w = big_r.trailing_zeros() as usize;
    let n = p.total_qubits();
    let counter: Vec<usize> = (n..n + w).collect();

    let register_of = |parity: usize| -> Vec<usize> {
        let mut reg: Vec<usize> =
            bodies.iter().skip(parity).step_by(2).flat_map(|b| b.iter().flat_map(|(_, t)| t.clone())).collect();
        reg.sort_unstable();
        reg.dedup();
        reg
    };
    let dispatch_op = |parity: usize, shift: usize| -> GateOp {
        let reg = register_of(parity);
        let local = |q: usize| reg.iter().position(|&x| x == q).expect("register covers targets");
        let branches: Vec<UnitarySource> = (0..big_r)
            .map(|j| {
                let ops = bodies
                    .get(2 * j + parity)
                    .map(|b| {
                        b.iter()
                            .map(|(u, t)| GateOp::new(u.clone(), t.iter().map(|&q| local(q)).collect()))
                            .collect()
                    })
                    .unwrap_or_default();
                UnitarySource::Circuit { width: reg.len(), ops }
            })
            .collect();
        let d = UnitarySource::Dispatch { register_width: reg.len(), counter_width: w, branches, shift };
        let mut targets = vec![c];
        targets.extend_from_slice(&reg);
        targets.extend_from_slice(&counter);
        GateOp::new(UnitarySource::Controlled(Box::new(d)), targets)
    };
    let h = || GateOp::explicit(gates::h(), vec![c]);
    let first_ops = vec![h(), dispatch_op(0, 0), h()];
    let second_ops = vec![h(), dispatch_op(1, 1), h()];

    let mut bundle: Vec<usize> = p.rounds.iter().flat_map(|r| r.message.iter().copied()).collect();
    bundle.push(c);
    bundle.extend_from_slice(&counter);
    bundle.sort_unstable();
    bundle.dedup();

    let total_rounds = 2 * big_r;
    let rounds: Vec<RoundAction> = (0..total_rounds)
        .map(|i| {
            let (who, other, ops) =
                if i % 2 == 0 { (p1, p2, first_ops.clone()) } else { (p2, p1, second_ops.clone()) };
            let round = RoundAction::new(who, ops);
            if i + 1 < total_rounds {
                round.send(bundle.clone(), other)
            } else {
                round
            }
        })
        .collect();

    let mut owners = p.layout.owners.clone();
    owners.extend(std::iter::repeat_n(p1, w));
    for &q in &bundle {
        owners[q] = p1;
    }
    let out = ProtocolSpec {
        version: p.version,
        players: p.players,
        layout: RegisterLayout::new(p.layout.clean, p.layout.mixed + w, owners),
        rounds,
        mode: Mode::SemiUnclocked,
        channel: Channel::Fixed,
        measurement: Measurement::SingleQubit { player: p2, index: c, outcome },
        declared: p.declared,
        trace_form: Some(TraceForm { control: c, counter }),
    };
    let after = cost(&out)?;
    Ok((out, TransformCert::identity("unclock", p.declared, before, after)))
}
