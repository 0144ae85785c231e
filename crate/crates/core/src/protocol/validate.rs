use serde::Serialize;

use super::{player_name, Channel, Mode, ProtocolSpec, UnitarySource};
use crate::qstate::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Layout,
    Ownership,
    Message,
    Unitarity,
    Structure,
    Measurement,
    Mode,
    Channel,
    Declared,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub round: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, round: Option<usize>, message: impl Into<String>) {
        self.violations.push(Violation { kind, round, message: message.into() });
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(crate::Error::Validation(
                self.violations
                    .into_iter()
                    .map(|v| match v.round {
                        Some(r) => format!("{:?} (round {r}): {}", v.kind, v.message),
                        None => format!("{:?}: {}", v.kind, v.message),
                    })
                    .collect(),
            ))
        }
    }
}

/// Static checks on a protocol. Generators are not resolved here; their
/// outputs are checked for unitarity when simulated.
pub fn validate(p: &ProtocolSpec) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let q = p.total_qubits();

    if !(2..=3).contains(&p.players) {
        rep.push(ViolationKind::Layout, None, format!("{} players; 2 or 3 supported", p.players));
    }
    if p.layout.owners.len() != q {
        rep.push(
            ViolationKind::Layout,
            None,
            format!("{} owners listed for {} qubits", p.layout.owners.len(), q),
        );
        return rep;
    }
    if let Some(&bad) = p.layout.owners.iter().find(|&&o| o >= p.players) {
        rep.push(ViolationKind::Layout, None, format!("initial owner {bad} is not a player"));
        return rep;
    }

    let mut owners = p.layout.owners.clone();
    for (i, round) in p.rounds.iter().enumerate() {
        let who = round.player;
        if who >= p.players {
            rep.push(ViolationKind::Structure, Some(i), format!("player {who} does not exist"));
            continue;
        }
        for op in &round.ops {
            let mut seen = vec![false; q];
            for &t in &op.targets {
                if t >= q {
                    rep.push(ViolationKind::Structure, Some(i), format!("target {t} out of range"));
                    continue;
                }
                if std::mem::replace(&mut seen[t], true) {
                    rep.push(ViolationKind::Structure, Some(i), format!("target {t} repeated"));
                }
                if owners[t] != who {
                    rep.push(
                        ViolationKind::Ownership,
                        Some(i),
                        format!("{} acts on qubit {t} held by {}", player_name(who), player_name(owners[t])),
                    );
                }
            }
            check_source(&op.unitary, op.targets.len(), i, &mut rep);
        }
        match (round.to, round.message.is_empty()) {
            (None, false) => rep.push(ViolationKind::Message, Some(i), "message without receiver"),
            (Some(to), _) if to >= p.players => {
                rep.push(ViolationKind::Message, Some(i), format!("receiver {to} does not exist"))
            }
            (Some(to), false) if to == who => {
                rep.push(ViolationKind::Message, Some(i), "player sends to itself")
            }
            _ => {}
        }
        let mut seen = vec![false; q];
        for &m in &round.message {
            if m >= q {
                rep.push(ViolationKind::Message, Some(i), format!("message qubit {m} out of range"));
                continue;
            }
            if std::mem::replace(&mut seen[m], true) {
                rep.push(ViolationKind::Message, Some(i), format!("message qubit {m} repeated"));
            }
            if owners[m] != who {
                rep.push(
                    ViolationKind::Ownership,
                    Some(i),
                    format!("{} sends qubit {m} held by {}", player_name(who), player_name(owners[m])),
                );
            }
        }
        if let Some(to) = round.to.filter(|&t| t < p.players) {
            for &m in round.message.iter().filter(|&&m| m < q) {
                owners[m] = to;
            }
        }
    }

    let meas = &p.measurement;
    if meas.player() >= p.players {
        rep.push(ViolationKind::Measurement, None, format!("measuring player {} does not exist", meas.player()));
    }
    let targets = meas.targets();
    let mut seen = vec![false; q];
    for &t in &targets {
        if t >= q || std::mem::replace(&mut seen[t], true) {
            rep.push(ViolationKind::Measurement, None, format!("measured qubit {t} out of range or repeated"));
        }
    }
    match meas.projector() {
        Ok(pr) if pr.qubits() != targets.len() => rep.push(
            ViolationKind::Measurement,
            None,
            format!("projector on {} qubits measured on {} targets", pr.qubits(), targets.len()),
        ),
        Ok(_) => {}
        Err(e) => rep.push(ViolationKind::Measurement, None, e.to_string()),
    }

    if p.mode == Mode::SemiUnclocked {
        let acting = p.acting_players();
        if acting.len() != 2 {
            rep.push(ViolationKind::Mode, None, format!("semi-unclocked needs exactly two players, found {}", acting.len()));
        }
        for (i, w) in p.rounds.windows(2).enumerate() {
            if w[0].player == w[1].player {
                rep.push(ViolationKind::Mode, Some(i + 1), "rounds do not alternate");
            }
        }
        for (i, r) in p.rounds.iter().enumerate().skip(2) {
            if r.ops != p.rounds[i - 2].ops {
                rep.push(ViolationKind::Mode, Some(i), "unitary differs from the player's previous round");
            }
        }
        check_fixed_messages(p, ViolationKind::Mode, &mut rep);
    }
    if p.channel == Channel::Fixed {
        check_fixed_messages(p, ViolationKind::Channel, &mut rep);
    }

    if let Some(d) = p.declared {
        if !(d.p > 0.0 && d.p < 1.0) {
            rep.push(ViolationKind::Declared, None, format!("reference point {} outside (0,1)", d.p));
        }
        if !(d.eps > 0.0 && d.eps <= 0.5) {
            rep.push(ViolationKind::Declared, None, format!("declared bias {} outside (0,1/2]", d.eps));
        }
    }
    if let Some(tf) = &p.trace_form {
        if tf.control >= q {
            rep.push(ViolationKind::Structure, None, "trace-form control out of range");
        }
        if tf.counter.iter().any(|&c| c >= q || c == tf.control) {
            rep.push(ViolationKind::Structure, None, "trace-form counter qubit invalid");
        }
    }
    rep
}

/// Every round but the last sends the same qubit set; the last sends that
/// set or nothing.
fn check_fixed_messages(p: &ProtocolSpec, kind: ViolationKind, rep: &mut ValidationReport) {
    let Some(first) = p.rounds.first() else { return };
    let mut base = first.message.clone();
    base.sort_unstable();
    let last = p.rounds.len() - 1;
    for (i, r) in p.rounds.iter().enumerate().skip(1) {
        let mut m = r.message.clone();
        m.sort_unstable();
        if m != base && !(i == last && m.is_empty()) {
            rep.push(kind, Some(i), format!("message set {m:?} differs from {base:?}"));
        }
    }
}

fn check_source(src: &UnitarySource, width: usize, round: usize, rep: &mut ValidationReport) {
    match src {
        UnitarySource::Explicit(m) => {
            if !m.is_square() || m.rows() != 1usize << width {
                rep.push(
                    ViolationKind::Structure,
                    Some(round),
                    format!("{}x{} matrix on {width} qubits", m.rows(), m.cols()),
                );
                return;
            }
            let dev = m.unitarity_deviation();
            if dev > TOL {
                rep.push(ViolationKind::Unitarity, Some(round), format!("U†U deviates from I by {dev:.3e}"));
            }
        }
        UnitarySource::Generator { .. } => {}
        UnitarySource::Adjoint(inner) => check_source(inner, width, round, rep),
        UnitarySource::Controlled(inner) => {
            if width == 0 {
                rep.push(ViolationKind::Structure, Some(round), "controlled op without control");
            } else {
                check_source(inner, width - 1, round, rep)
            }
        }
        UnitarySource::FlagState(inner) => {
            if width == 0 {
                rep.push(ViolationKind::Structure, Some(round), "flag-state op without flag");
            } else {
                check_source(inner, width - 1, round, rep)
            }
        }
        UnitarySource::Circuit { width: w, ops } => {
            if *w != width {
                rep.push(ViolationKind::Structure, Some(round), format!("circuit width {w} on {width} qubits"));
            }
            for op in ops {
                if op.targets.iter().any(|&t| t >= *w) {
                    rep.push(ViolationKind::Structure, Some(round), "circuit-local target out of range");
                }
                check_source(&op.unitary, op.targets.len(), round, rep);
            }
        }
        UnitarySource::Dispatch { register_width, counter_width, branches, .. } => {
            if register_width + counter_width != width {
                rep.push(ViolationKind::Structure, Some(round), "dispatch widths do not match targets");
            }
            if branches.is_empty() || branches.len() > 1usize << counter_width {
                rep.push(ViolationKind::Structure, Some(round), "dispatch branch count does not fit counter");
            }
            for b in branches {
                check_source(b, *register_width, round, rep);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ip2_clocked;
    use crate::protocol::{GateOp, RoundAction};
    use crate::qstate::gates;

    #[test]
    fn ip2_is_valid() {
        for n in 1..=4 {
            assert!(validate(&ip2_clocked(n).unwrap()).is_valid());
        }
    }

    #[test]
    fn acting_on_foreign_qubit_is_flagged() {
        let mut p = ip2_clocked(2).unwrap();
        // Round 1 is Bob's; qubit 1 has been sent back to Alice by then? No:
        // Bob holds q0,q1 after round 0 and returns only q0, so after round 1
        // Alice holds q0 and Bob holds q1. Round 2 (Alice) touching q1 is foreign.
        p.rounds[2].ops.push(GateOp::explicit(gates::x(), vec![1]));
        let rep = validate(&p);
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::Ownership && v.round == Some(2)), "{rep:?}");
    }

    #[test]
    fn semi_unclocked_with_varying_messages_is_flagged() {
        let mut p = crate::problems::accept_all_protocol();
        p.layout = crate::protocol::RegisterLayout::new(1, 1, vec![0, 0]);
        p.mode = Mode::SemiUnclocked;
        p.rounds = vec![
            RoundAction::new(0, vec![]).send(vec![0], 1),
            RoundAction::new(1, vec![]).send(vec![0], 0),
            RoundAction::new(0, vec![]).send(vec![0, 1], 1),
            RoundAction::new(1, vec![]),
        ];
        let rep = validate(&p);
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::Mode), "{rep:?}");
    }
}
