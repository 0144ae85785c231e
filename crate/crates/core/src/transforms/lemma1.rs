use num_rational::Rational64;
use num_traits::Zero;

use super::{cost, mapped_declared, pow2_inv, TransformCert};
use crate::error::{Error, Result};
use crate::protocol::{remap_round, GateOp, Measurement, ProtocolSpec, RegisterLayout, UnitarySource};
use crate::qstate::gates;

/// Alice → Bob → Alice protocol on `k` clean qubits → one clean qubit.
/// The clean register becomes mixed; Alice's first unitary is replaced by a
/// flag flip on the component `|φ_x⟩ = U_x|0^k⟩` of the mixed register, and
/// the measurement additionally demands the flag. Acceptance `a ↦ a/2^k`,
/// communication unchanged.
pub fn two_round_one_clean(p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    let k = p.layout.clean;
    let clean: Vec<usize> = (0..k).collect();
    let shape_ok = k >= 1
        && p.rounds.len() == 3
        && p.rounds[0].player == p.rounds[2].player
        && p.rounds[1].player != p.rounds[0].player
        && p.rounds[0].to == Some(p.rounds[1].player)
        && p.rounds[1].to == Some(p.rounds[0].player)
        && p.rounds[2].message.is_empty()
        && sorted(&p.rounds[0].message) == clean
        && sorted(&p.rounds[1].message) == clean
        && p.layout.owners[..k].iter().all(|&o| o == p.rounds[0].player)
        && p.measurement.player() == p.rounds[0].player;
    if !shape_ok {
        return Err(Error::shape(
            "lemma1 needs rounds Alice→Bob→Alice whose two messages are exactly the clean qubits",
        ));
    }
    if p.rounds[0].ops.iter().any(|op| op.targets.iter().any(|&t| t >= k)) {
        return Err(Error::shape("lemma1 needs Alice's first unitary to act on the clean qubits only"));
    }
    let before = cost(p)?;
    let alice = p.rounds[0].player;
    let shift = |q: usize| q + 1;

    let prep = UnitarySource::Circuit { width: k, ops: p.rounds[0].ops.clone() };
    let flag = GateOp::new(UnitarySource::FlagState(Box::new(prep)), (0..=k).collect());
    let mut rounds: Vec<_> = p.rounds.iter().map(|r| remap_round(r, &shift)).collect();
    rounds[0].ops = vec![flag];

    let mut owners = vec![alice];
    owners.extend_from_slice(&p.layout.owners);
    let proj = p.measurement.projector()?;
    let mut targets = vec![0];
    targets.extend(p.measurement.targets().iter().map(|&q| shift(q)));
    let measurement =
        Measurement::Projector { player: alice, targets, projector: gates::ket_bra(1).kron(proj.matrix()) };

    let alpha = pow2_inv(k);
    let beta = Rational64::zero();
    let out = ProtocolSpec {
        version: p.version,
        players: p.players,
        layout: RegisterLayout::new(1, p.total_qubits(), owners),
        rounds,
        mode: p.mode,
        channel: p.channel,
        measurement,
        declared: mapped_declared(p, alpha, beta),
        trace_form: None,
    };
    let after = cost(&out)?;
    Ok((out, TransformCert::new("lemma1", alpha, beta, p.declared, before, after)))
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}
