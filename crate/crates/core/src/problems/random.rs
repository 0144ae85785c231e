//! Random protocol batteries for cross-checking backends and transforms.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::protocol::{
    Channel, GateOp, Measurement, Mode, ProtocolSpec, RegisterLayout, RoundAction, ALICE, BOB, DESCRIPTOR_VERSION,
};
use crate::qstate::haar::sample_unitary;
use crate::qstate::{CMatrix, C64};

/// Random rank-`rank` projector on `qubits` qubits.
pub fn random_projector<R: Rng + ?Sized>(qubits: usize, rank: usize, rng: &mut R) -> CMatrix {
    let u = sample_unitary(qubits, rng);
    let d = 1usize << qubits;
    let diag: Vec<C64> = (0..d).map(|i| C64::new(if i < rank { 1.0 } else { 0.0 }, 0.0)).collect();
    u.matrix().matmul(&CMatrix::diagonal(&diag)).unwrap().matmul(&u.matrix().adjoint()).unwrap()
}

fn random_subset<R: Rng + ?Sized>(from: &[usize], rng: &mut R) -> Vec<usize> {
    let size = rng.random_range(1..=from.len());
    let mut s: Vec<usize> = index::sample(rng, from.len(), size).into_iter().map(|i| from[i]).collect();
    s.sort_unstable();
    s
}

/// Clocked two-player protocol with explicit Haar unitaries. Clean qubits
/// start with Alice, mixed qubits with a random player; each round the
/// actor scrambles everything it holds and sends a random subset across.
/// With `single_qubit` the final measurement is one computational-basis
/// qubit, otherwise a random projector on up to three qubits.
pub fn random_protocol(clean: usize, mixed: usize, rounds: usize, single_qubit: bool, seed: u64) -> ProtocolSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = clean + mixed;
    let mut owners: Vec<usize> =
        (0..q).map(|j| if j < clean { ALICE } else { rng.random_range(0..2) }).collect();
    let layout = RegisterLayout::new(clean, mixed, owners.clone());
    let mut rs = Vec::with_capacity(rounds);
    for i in 0..rounds {
        let who = if i % 2 == 0 { ALICE } else { BOB };
        let held: Vec<usize> = (0..q).filter(|&j| owners[j] == who).collect();
        let mut ops = Vec::new();
        if !held.is_empty() {
            let u = sample_unitary(held.len(), &mut rng);
            ops.push(GateOp::explicit(u.into_matrix(), held.clone()));
        }
        let mut round = RoundAction::new(who, ops);
        if i + 1 < rounds && !held.is_empty() {
            let msg = random_subset(&held, &mut rng);
            for &m in &msg {
                owners[m] = 1 - who;
            }
            round = round.send(msg, 1 - who);
        }
        rs.push(round);
    }
    let measurer = if rounds == 0 { ALICE } else if (rounds - 1) % 2 == 0 { ALICE } else { BOB };
    let all: Vec<usize> = (0..q).collect();
    let measurement = if single_qubit {
        Measurement::SingleQubit {
            player: measurer,
            index: rng.random_range(0..q),
            outcome: rng.random_range(0..2),
        }
    } else {
        let mut targets = random_subset(&all, &mut rng);
        targets.truncate(3);
        let t = targets.len();
        let rank = rng.random_range(1..(1usize << t));
        Measurement::Projector { player: measurer, targets, projector: random_projector(t, rank, &mut rng) }
    };
    ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout,
        rounds: rs,
        mode: Mode::Clocked,
        channel: Channel::Ghosted,
        measurement,
        declared: None,
        trace_form: None,
    }
}

/// Alice → Bob → Alice on `k` clean qubits only, both messages carrying all
/// of them, with a random final projector.
pub fn random_two_round(k: usize, seed: u64) -> ProtocolSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..k).collect();
    let mut u = || GateOp::explicit(sample_unitary(k, &mut rng).into_matrix(), all.clone());
    let rounds = vec![
        RoundAction::new(ALICE, vec![u()]).send(all.clone(), BOB),
        RoundAction::new(BOB, vec![u()]).send(all.clone(), ALICE),
        RoundAction::new(ALICE, vec![u()]),
    ];
    let t = rng.random_range(1..=k.min(3));
    let rank = rng.random_range(1..(1usize << t));
    let targets = index::sample(&mut rng, k, t).into_vec();
    ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(k, 0, vec![ALICE; k]),
        rounds,
        mode: Mode::Clocked,
        channel: Channel::Fixed,
        measurement: Measurement::Projector { player: ALICE, targets, projector: random_projector(t, rank, &mut rng) },
        declared: None,
        trace_form: None,
    }
}
