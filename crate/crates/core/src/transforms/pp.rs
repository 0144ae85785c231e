use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{cost, pow2_inv, TransformCert};
use crate::error::{Error, Result};
use crate::protocol::{
    Channel, DeclaredBias, GateOp, Measurement, Mode, PlayerInput, ProtocolSpec, RegisterLayout, RoundAction, ALICE,
    BOB, DESCRIPTOR_VERSION,
};
use crate::qstate::{gates, CMatrix};

/// One-way classical protocol with private coins: Alice sends a `c`-bit
/// message drawn from `message[x]`, Bob accepts message `z` on input `y`
/// with probability `accept[y][z]`. Inputs index their tables as big-endian
/// integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpProtocol {
    pub alice_bits: usize,
    pub bob_bits: usize,
    pub c: usize,
    pub message: Vec<Vec<Rational64>>,
    pub accept: Vec<Vec<Rational64>>,
}

fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

impl PpProtocol {
    /// Deterministic message `t[x]`.
    pub fn deterministic(alice_bits: usize, bob_bits: usize, c: usize, t: &[usize], accept: Vec<Vec<Rational64>>) -> Self {
        let message = t
            .iter()
            .map(|&z| (0..1usize << c).map(|j| if j == z { Rational64::one() } else { Rational64::zero() }).collect())
            .collect();
        PpProtocol { alice_bits, bob_bits, c, message, accept }
    }

    /// One bit each, `f = x ⊕ y`; Alice sends `x`, Bob accepts with ¾ when
    /// the message differs from `y` and ¼ otherwise. Bias ¼.
    pub fn xor_toy() -> Self {
        let q = |n| Rational64::new(n, 4);
        let accept = (0..2).map(|y| (0..2).map(|z| if z != y { q(3) } else { q(1) }).collect()).collect();
        PpProtocol::deterministic(1, 1, 1, &[0, 1], accept)
    }

    /// Two bits each, `f = (x₀ ∧ y₀) ⊕ x₁`; Alice sends `x`, Bob accepts with
    /// ¾ when `f(z, y) = 1` and ¼ otherwise. Bias ¼.
    pub fn and_xor_toy() -> Self {
        let q = |n| Rational64::new(n, 4);
        let f = |z: usize, y: usize| ((z >> 1) & (y >> 1) & 1) ^ (z & 1);
        let accept = (0..4).map(|y| (0..4).map(|z| if f(z, y) == 1 { q(3) } else { q(1) }).collect()).collect();
        PpProtocol::deterministic(2, 2, 2, &[0, 1, 2, 3], accept)
    }

    /// Exact acceptance probability on `(x, y)`.
    pub fn acceptance(&self, x: &[u8], y: &[u8]) -> Result<Rational64> {
        self.check()?;
        let (xi, yi) = (index_of(x), index_of(y));
        if x.len() != self.alice_bits || y.len() != self.bob_bits {
            return Err(Error::Input("input lengths do not match the protocol".into()));
        }
        Ok(self.message[xi].iter().zip(&self.accept[yi]).map(|(m, a)| m * a).sum())
    }

    /// Adds one message bit `b` (always 0 on Alice's side) with acceptance
    /// `β` for `b = 0` and `1 − β` for `b = 1`, so every row of the
    /// acceptance table sums to half the message space.
    pub fn balanced(&self) -> Self {
        let message = self
            .message
            .iter()
            .map(|row| row.iter().flat_map(|&m| [m, Rational64::zero()]).collect())
            .collect();
        let accept = self
            .accept
            .iter()
            .map(|row| row.iter().flat_map(|&a| [a, Rational64::one() - a]).collect())
            .collect();
        PpProtocol { alice_bits: self.alice_bits, bob_bits: self.bob_bits, c: self.c + 1, message, accept }
    }

    fn check(&self) -> Result<()> {
        let zs = 1usize << self.c;
        if self.message.len() != 1 << self.alice_bits || self.accept.len() != 1 << self.bob_bits {
            return Err(Error::dim("table sizes must be 2^bits"));
        }
        if self.message.iter().chain(&self.accept).any(|r| r.len() != zs) {
            return Err(Error::dim(format!("rows must have 2^c = {zs} entries")));
        }
        let unit = |v: &Rational64| *v >= Rational64::zero() && *v <= Rational64::one();
        if !self.message.iter().chain(&self.accept).flatten().all(unit) {
            return Err(Error::domain("probabilities must lie in [0, 1]"));
        }
        if self.message.iter().any(|r| r.iter().sum::<Rational64>() != Rational64::one()) {
            return Err(Error::domain("message distributions must sum to 1"));
        }
        Ok(())
    }

    /// `T(x)` for every `x`; fails unless each distribution is a point mass.
    fn message_map(&self) -> Result<Vec<usize>> {
        self.message
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let support: Vec<usize> = (0..row.len()).filter(|&z| !row[z].is_zero()).collect();
                match support.as_slice() {
                    [z] => Ok(*z),
                    _ => Err(Error::shape(format!("message for x = {x} is not deterministic ({} outcomes)", support.len()))),
                }
            })
            .collect()
    }

    /// Smallest `s ≥ 1` with every acceptance probability a multiple of `2^{-s}`.
    fn coin_bits(&self) -> Result<usize> {
        let mut s = 1;
        for a in self.accept.iter().flatten() {
            let d = *a.denom();
            if d <= 0 || (d & (d - 1)) != 0 {
                return Err(Error::shape(format!("acceptance {a} is not dyadic")));
            }
            s = s.max(d.trailing_zeros() as usize);
        }
        Ok(s)
    }
}

fn usize_param(params: &serde_json::Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| Error::Input(format!("generator needs integer parameter '{key}'")))
}

fn table_param(params: &serde_json::Value, key: &str) -> Result<Vec<serde_json::Value>> {
    params
        .get(key)
        .and_then(|v| v.as_array())
        .cloned()
        .ok_or_else(|| Error::Input(format!("generator needs array parameter '{key}'")))
}

/// Swaps `|0, z⟩ ↔ |1, z⟩` at `z = T(x)`.
pub(crate) fn gen_alice(params: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let c = usize_param(params, "c")?;
    let t = table_param(params, "t")?;
    let x = index_of(input.bits()?);
    let z = t.get(x).and_then(|v| v.as_u64()).ok_or_else(|| Error::Input(format!("no message for x = {x}")))? as usize;
    let mask = (1usize << c) - 1;
    let perm: Vec<usize> = (0..2usize << c).map(|j| if j & mask == z { j ^ (1 << c) } else { j }).collect();
    Ok(gates::permutation(&perm))
}

/// Sends the accepting set `{(1, z, r) : r < k_z} ∪ {(0, z, r) : r < 2^{s−1}}`
/// in index order onto the states with first qubit 1, and the rest in order
/// onto those with first qubit 0.
pub(crate) fn gen_bob(params: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
    let c = usize_param(params, "c")?;
    let s = usize_param(params, "s")?;
    let rows = table_param(params, "k")?;
    let y = index_of(input.bits()?);
    let kz: Vec<usize> = rows
        .get(y)
        .and_then(|r| r.as_array())
        .map(|r| r.iter().filter_map(|v| v.as_u64()).map(|v| v as usize).collect())
        .ok_or_else(|| Error::Input(format!("no acceptance row for y = {y}")))?;
    if kz.len() != 1 << c {
        return Err(Error::Input("acceptance row has the wrong length".into()));
    }
    let half = 1usize << (c + s);
    let accepted = |j: usize| {
        let f = j >> (c + s);
        let z = (j >> s) & ((1 << c) - 1);
        let r = j & ((1 << s) - 1);
        if f == 1 {
            r < kz[z]
        } else {
            r < 1 << (s - 1)
        }
    };
    let (mut acc, mut rej) = (0usize, 0usize);
    let mut perm = vec![0; 2 * half];
    for (j, slot) in perm.iter_mut().enumerate() {
        if accepted(j) {
            *slot = half + acc;
            acc += 1;
        } else {
            *slot = rej;
            rej += 1;
        }
    }
    if acc != half {
        return Err(Error::Input(format!("acceptance table for y = {y} is not balanced")));
    }
    Ok(gates::permutation(&perm))
}

/// Classical one-way protocol with deterministic message → one-clean
/// one-way protocol on `1 + c` communicated qubits. The flag qubit is set
/// exactly when the mixed message register equals `T(x)` (probability
/// `2^{-c}`); Bob then accepts with `β(y, z)` and with ½ otherwise, so the
/// acceptance is `½ + (a − ½)/2^c`. Requires every row of Bob's table to sum
/// to `2^{c−1}` (see [`PpProtocol::balanced`]).
pub fn pp_to_oneway(pp: &PpProtocol, eps: f64) -> Result<(ProtocolSpec, TransformCert)> {
    pp.check()?;
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::domain(format!("bias {eps} outside [0, 1/2]")));
    }
    let t = pp.message_map()?;
    let s = pp.coin_bits()?;
    let c = pp.c;
    if 1 + c + s > crate::simulator::ENSEMBLE_LIMIT {
        return Err(Error::BackendLimit(format!("{} qubits needed", 1 + c + s)));
    }
    let target = Rational64::from_integer(1i64 << c) / 2;
    let scale = Rational64::from_integer(1i64 << s);
    let mut k_rows = Vec::with_capacity(pp.accept.len());
    for (y, row) in pp.accept.iter().enumerate() {
        if row.iter().sum::<Rational64>() != target {
            return Err(Error::shape(format!(
                "acceptance row for y = {y} sums to {} instead of 2^(c-1) = {target}; use the balanced extension",
                row.iter().sum::<Rational64>()
            )));
        }
        k_rows.push(row.iter().map(|a| (a * scale).to_integer()).collect::<Vec<i64>>());
    }

    let sent: Vec<usize> = (0..=c).collect();
    let all: Vec<usize> = (0..=c + s).collect();
    let mut owners = vec![ALICE; 1 + c];
    owners.extend(std::iter::repeat_n(BOB, s));
    let declared = (eps > 0.0).then_some(DeclaredBias { p: 0.5, eps });
    let alpha = pow2_inv(c);
    let beta = (Rational64::one() - alpha) / 2;
    let out = ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(1, c + s, owners),
        rounds: vec![
            RoundAction::new(ALICE, vec![GateOp::generator("pp-alice", json!({ "c": c, "t": t }), sent.clone())])
                .send(sent, BOB),
            RoundAction::new(BOB, vec![GateOp::generator("pp-bob", json!({ "c": c, "s": s, "k": k_rows }), all)]),
        ],
        mode: Mode::Clocked,
        channel: Channel::Ghosted,
        measurement: Measurement::SingleQubit { player: BOB, index: 0, outcome: 1 },
        declared: declared.map(|d| DeclaredBias { p: 0.5, eps: d.eps / (1u64 << c) as f64 }),
        trace_form: None,
    };
    let after = cost(&out)?;
    let mut cert = TransformCert::new("pp-oneway", alpha, beta, declared, c, after);
    cert.q1_cost_bound = (eps > 0.0).then(|| (c + 1) as f64 * (1u64 << (2 * c)) as f64 / (eps * eps));
    Ok((out, cert))
}
