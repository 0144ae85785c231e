use num_rational::Rational64;

use super::{cost, mapped_declared, pow2_inv, TransformCert};
use crate::error::{Error, Result};
use crate::protocol::{remap_round, Channel, GateOp, Measurement, Mode, ProtocolSpec, RegisterLayout, RoundAction};
use crate::qstate::{gates, CMatrix};

/// `|f, z⟩ ↦ |f ⊕ [z = 0…0], z⟩` on `1 + k` qubits.
fn flag_if_zero(k: usize) -> CMatrix {
    let perm: Vec<usize> = (0..1usize << (k + 1))
        .map(|j| if j & ((1 << k) - 1) == 0 { j ^ (1 << k) } else { j })
        .collect();
    gates::permutation(&perm)
}

/// k clean qubits → one clean qubit. A new flag qubit records whether the
/// old clean qubits (now mixed) happen to be all zero; the final measurement
/// runs the original test when the flag is set and a fair coin otherwise.
/// Acceptance becomes `(1 − 2^{-k})/2 + a/2^k`.
pub fn k_to_one_clean(p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    let k = p.layout.clean;
    if k == 0 {
        return Err(Error::domain("k1 needs at least one clean qubit"));
    }
    if p.mode != Mode::Clocked {
        return Err(Error::domain("k1 applies to clocked protocols"));
    }
    if k > 20 {
        return Err(Error::domain(format!("{k} clean qubits is beyond the supported range")));
    }
    let before = cost(p)?;
    let owner = p.layout.owners[0];
    if p.layout.owners[..k].iter().any(|&o| o != owner) {
        return Err(Error::shape("k1 needs every clean qubit to start with the same player"));
    }
    let n = p.total_qubits();
    let measurer = p.measurement.player();
    let shift = |q: usize| q + 1;
    let coin = n + 1;

    let mut owners = vec![owner];
    owners.extend_from_slice(&p.layout.owners);
    owners.push(measurer);
    let layout = RegisterLayout::new(1, n + 1, owners);

    let a = GateOp::explicit(flag_if_zero(k), (0..=k).collect());
    let mut rounds: Vec<RoundAction> = p.rounds.iter().map(|r| remap_round(r, &shift)).collect();
    match rounds.first_mut() {
        Some(r0) if r0.player == owner => r0.ops.insert(0, a),
        _ => rounds.insert(0, RoundAction::new(owner, vec![a])),
    }
    // The flag rides along with the first message to the measurer; without
    // one it is delivered by the implicit final transfer.
    let mut channel = p.channel;
    if owner != measurer {
        if let Some(r) = rounds.iter_mut().find(|r| r.player == owner && r.to == Some(measurer)) {
            r.message.insert(0, 0);
            channel = Channel::Ghosted;
        }
    }

    let old_targets: Vec<usize> = p.measurement.targets().iter().map(|&q| shift(q)).collect();
    let proj = p.measurement.projector()?;
    let t = old_targets.len();
    let one = gates::ket_bra(1);
    let zero = gates::ket_bra(0);
    let accept = one.kron(proj.matrix()).kron(&CMatrix::identity(2));
    let coin_accept = zero.kron(&CMatrix::identity(1 << t)).kron(&one);
    let projector = accept.add(&coin_accept)?;
    let mut targets = vec![0];
    targets.extend_from_slice(&old_targets);
    targets.push(coin);

    let alpha = pow2_inv(k);
    let beta = (Rational64::from_integer(1) - alpha) / 2;
    let out = ProtocolSpec {
        version: p.version,
        players: p.players,
        layout,
        rounds,
        mode: Mode::Clocked,
        channel,
        measurement: Measurement::Projector { player: measurer, targets, projector },
        declared: mapped_declared(p, alpha, beta),
        trace_form: None,
    };
    let after = cost(&out)?;
    let cert = TransformCert::new("k1", alpha, beta, p.declared, before, after);
    Ok((out, cert))
}
