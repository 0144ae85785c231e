//! Protocol intermediate representation: registers, ownership schedule,
//! rounds of local unitaries with qubit messages, and a final measurement.

mod cost;
mod source;
mod validate;

pub use cost::{communication_cost, pp_cost, q1_cost, CostReport};
pub use source::{GateOp, GeneratorFn, PlayerInput, Prim, Registry, UnitarySource};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{CMatrix, Projector};

pub type PlayerId = usize;

pub const ALICE: PlayerId = 0;
pub const BOB: PlayerId = 1;
pub const CHARLIE: PlayerId = 2;

pub const DESCRIPTOR_VERSION: u32 = 1;

pub fn player_name(p: PlayerId) -> &'static str {
    match p {
        ALICE => "alice",
        BOB => "bob",
        CHARLIE => "charlie",
        _ => "unknown",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Clocked,
    SemiUnclocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Ghosted,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitRole {
    Clean,
    Mixed,
}

/// `clean` qubits in |0⟩ followed by `mixed` qubits in I/2; `owners[q]` is
/// the player holding qubit `q` before the first round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterLayout {
    pub clean: usize,
    pub mixed: usize,
    pub owners: Vec<PlayerId>,
}

impl RegisterLayout {
    pub fn new(clean: usize, mixed: usize, owners: Vec<PlayerId>) -> Self {
        RegisterLayout { clean, mixed, owners }
    }

    pub fn total(&self) -> usize {
        self.clean + self.mixed
    }

    pub fn roles(&self) -> Vec<QubitRole> {
        (0..self.total())
            .map(|q| if q < self.clean { QubitRole::Clean } else { QubitRole::Mixed })
            .collect()
    }

    pub fn clean_qubits(&self) -> std::ops::Range<usize> {
        0..self.clean
    }
}

/// One round: `player` applies `ops` in order, then sends `message` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundAction {
    pub player: PlayerId,
    #[serde(default)]
    pub ops: Vec<GateOp>,
    #[serde(default)]
    pub message: Vec<usize>,
    #[serde(default)]
    pub to: Option<PlayerId>,
}

impl RoundAction {
    pub fn new(player: PlayerId, ops: Vec<GateOp>) -> Self {
        RoundAction { player, ops, message: Vec::new(), to: None }
    }

    pub fn send(mut self, message: Vec<usize>, to: PlayerId) -> Self {
        self.message = message;
        self.to = Some(to);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Measurement {
    /// Accept on the range of `projector` acting on `targets`.
    Projector { player: PlayerId, targets: Vec<usize>, projector: CMatrix },
    /// Accept when qubit `index` is found in basis state `outcome`.
    SingleQubit { player: PlayerId, index: usize, outcome: u8 },
}

impl Measurement {
    pub fn player(&self) -> PlayerId {
        match self {
            Measurement::Projector { player, .. } | Measurement::SingleQubit { player, .. } => *player,
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Measurement::Projector { targets, .. } => targets.clone(),
            Measurement::SingleQubit { index, .. } => vec![*index],
        }
    }

    /// The accepting projector on [`Measurement::targets`].
    pub fn projector(&self) -> Result<Projector> {
        match self {
            Measurement::Projector { projector, .. } => Projector::new(projector.clone()),
            Measurement::SingleQubit { outcome, .. } => {
                if *outcome > 1 {
                    return Err(Error::domain(format!("single-qubit outcome {outcome} is not a bit")));
                }
                Projector::from_basis_states(1, &[*outcome as usize])
            }
        }
    }
}

/// Claimed contract: 1-inputs accepted w.p. ≥ p+ε, 0-inputs w.p. ≤ p−ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBias {
    pub p: f64,
    pub eps: f64,
}

/// Marks a Hadamard-test shaped protocol: `control` is the single clean
/// qubit, everything else forms the register of the controlled operator.
/// `counter` lists the qubits of a round counter, if the protocol is unclocked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceForm {
    pub control: usize,
    #[serde(default)]
    pub counter: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub version: u32,
    pub players: usize,
    pub layout: RegisterLayout,
    pub rounds: Vec<RoundAction>,
    pub mode: Mode,
    pub channel: Channel,
    pub measurement: Measurement,
    #[serde(default)]
    pub declared: Option<DeclaredBias>,
    #[serde(default)]
    pub trace_form: Option<TraceForm>,
}

impl ProtocolSpec {
    pub fn total_qubits(&self) -> usize {
        self.layout.total()
    }

    /// Ownership of every qubit after each round; `result[0]` is the
    /// initial assignment. Fails on the first inconsistent transfer.
    pub fn ownership_schedule(&self) -> std::result::Result<Vec<Vec<PlayerId>>, String> {
        let mut owners = self.layout.owners.clone();
        let mut schedule = vec![owners.clone()];
        for (i, round) in self.rounds.iter().enumerate() {
            if let Some(to) = round.to {
                for &q in &round.message {
                    match owners.get(q) {
                        Some(&o) if o == round.player => owners[q] = to,
                        Some(&o) => {
                            return Err(format!(
                                "round {i}: {} sends qubit {q} held by {}",
                                player_name(round.player),
                                player_name(o)
                            ))
                        }
                        None => return Err(format!("round {i}: message qubit {q} out of range")),
                    }
                }
            }
            schedule.push(owners.clone());
        }
        Ok(schedule)
    }

    pub fn final_owners(&self) -> std::result::Result<Vec<PlayerId>, String> {
        self.ownership_schedule().map(|mut s| s.pop().expect("non-empty"))
    }

    pub fn to_descriptor(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocols always serialize")
    }

    /// Parses a descriptor; structural problems surface as parse errors,
    /// semantic ones are left to [`validate`].
    pub fn from_descriptor(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Distinct players that act in some round.
    pub fn acting_players(&self) -> Vec<PlayerId> {
        let mut ps: Vec<PlayerId> = self.rounds.iter().map(|r| r.player).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// Applies `f` to every global qubit index of a round.
pub(crate) fn remap_round(r: &RoundAction, f: &impl Fn(usize) -> usize) -> RoundAction {
    RoundAction {
        player: r.player,
        ops: r.ops.iter().map(|op| op.remap(f)).collect(),
        message: r.message.iter().map(|&q| f(q)).collect(),
        to: r.to,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ip2_clocked;

    #[test]
    fn descriptor_round_trip() {
        let p = ip2_clocked(3).unwrap();
        let text = p.to_descriptor();
        assert_eq!(ProtocolSpec::from_descriptor(&text).unwrap(), p);
    }

    #[test]
    fn missing_mode_is_named() {
        let p = ip2_clocked(2).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&p.to_descriptor()).unwrap();
        v.as_object_mut().unwrap().remove("mode");
        let err = ProtocolSpec::from_descriptor(&v.to_string()).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("mode"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let p = ip2_clocked(1).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&p.to_descriptor()).unwrap();
        v.as_object_mut().unwrap().insert("colour".into(), serde_json::json!("red"));
        assert!(matches!(ProtocolSpec::from_descriptor(&v.to_string()), Err(Error::Parse { .. })));
    }

    #[test]
    fn perturbed_explicit_matrix_fails_validation() {
        use crate::qstate::{gates, C64};
        let mut p = crate::problems::accept_all_protocol();
        let mut h = gates::h();
        h[(0, 0)] += C64::new(1e-3, 0.0);
        p.rounds[0].ops.push(GateOp::explicit(h, vec![0]));
        let text = p.to_descriptor();
        let parsed = ProtocolSpec::from_descriptor(&text).unwrap();
        let report = validate(&parsed);
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Unitarity), "{report:?}");
    }
}
