use super::{cost, TransformCert};
use crate::error::Result;
use crate::protocol::{remap_round, GateOp, Measurement, ProtocolSpec, RegisterLayout, RoundAction};
use crate::qstate::{gates, CMatrix};

/// Replaces the projective measurement `P` by a computational-basis
/// measurement of a fresh clean qubit `a`: the measurer applies
/// `U_S = I ⊗ P + X ⊗ (I − P)` on `a` and the measured qubits and accepts on
/// `a = 0`. Acceptance is unchanged.
pub fn projective_to_single_qubit(p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    let before = cost(p)?;
    let measurer = p.measurement.player();
    let shift = |q: usize| q + 1;

    let mut owners = vec![measurer];
    owners.extend_from_slice(&p.layout.owners);
    let layout = RegisterLayout::new(p.layout.clean + 1, p.layout.mixed, owners);

    let mut rounds: Vec<RoundAction> = p.rounds.iter().map(|r| remap_round(r, &shift)).collect();
    let targets: Vec<usize> = p.measurement.targets().iter().map(|&q| shift(q)).collect();

    // Deliver measured qubits still held elsewhere, one round per holder.
    let finals = p.final_owners().map_err(crate::error::Error::shape)?;
    let mut holders: Vec<usize> = p
        .measurement
        .targets()
        .iter()
        .map(|&q| finals[q])
        .filter(|&o| o != measurer)
        .collect();
    holders.sort_unstable();
    holders.dedup();
    let channel = if holders.is_empty() { p.channel } else { crate::protocol::Channel::Ghosted };
    for h in holders {
        let msg: Vec<usize> = p.measurement.targets().iter().filter(|&&q| finals[q] == h).map(|&q| shift(q)).collect();
        rounds.push(RoundAction::new(h, vec![]).send(msg, measurer));
    }

    let proj = p.measurement.projector()?;
    let d = proj.matrix().rows();
    let rest = CMatrix::identity(d).sub(proj.matrix())?;
    let us = CMatrix::identity(2).kron(proj.matrix()).add(&gates::x().kron(&rest))?;
    let mut all = vec![0];
    all.extend_from_slice(&targets);
    let op = GateOp::explicit(us, all);
    match rounds.last_mut() {
        Some(r) if r.player == measurer && r.message.is_empty() => r.ops.push(op),
        _ => rounds.push(RoundAction::new(measurer, vec![op])),
    }

    let out = ProtocolSpec {
        version: p.version,
        players: p.players,
        layout,
        rounds,
        mode: p.mode,
        channel,
        measurement: Measurement::SingleQubit { player: measurer, index: 0, outcome: 0 },
        declared: p.declared,
        trace_form: None,
    };
    let after = cost(&out)?;
    Ok((out, TransformCert::identity("sq-measure", p.declared, before, after)))
}
