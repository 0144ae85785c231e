//! Built-in protocol families, instance generators and input samplers.

mod abc;
mod ip2;
mod middle;
pub mod random;
mod razborov;

pub use abc::{abc_instance, abc_protocol, from_cmatrix, to_cmatrix, AbcInstance};
pub use ip2::{ip2_clocked, ip2_one_clean, ip2_value};
pub use middle::{middle_protocol, MiddleInstance, MiddleVariant};
pub use razborov::{middle_pad, razborov_params, razborov_sample, razborov_sample_with, RazborovDist};

use crate::protocol::{
    Channel, Measurement, Mode, ProtocolSpec, RegisterLayout, Registry, RoundAction, ALICE, DESCRIPTOR_VERSION,
};
use crate::qstate::CMatrix;

pub(crate) fn register_builtins(r: &mut Registry) {
    r.register("ip2-alice", ip2::gen_alice);
    r.register("ip2-bob", ip2::gen_bob);
    r.register("middle-alice-prep", middle::gen_alice_prep);
    r.register("middle-bob-phase", middle::gen_bob_phase);
    r.register("middle-alice-finish", middle::gen_alice_finish);
    r.register("abc-matrix", abc::gen_matrix);
}

fn constant_protocol(projector: CMatrix) -> ProtocolSpec {
    ProtocolSpec {
        version: DESCRIPTOR_VERSION,
        players: 2,
        layout: RegisterLayout::new(1, 2, vec![ALICE; 3]),
        rounds: vec![RoundAction::new(ALICE, vec![])],
        mode: Mode::Clocked,
        channel: Channel::Ghosted,
        measurement: Measurement::Projector { player: ALICE, targets: vec![0, 1, 2], projector },
        declared: None,
        trace_form: None,
    }
}

/// One clean and two mixed qubits, no gates, `P = I`.
pub fn accept_all_protocol() -> ProtocolSpec {
    constant_protocol(CMatrix::identity(8))
}

/// As [`accept_all_protocol`] with `P = 0`.
pub fn reject_all_protocol() -> ProtocolSpec {
    constant_protocol(CMatrix::zeros(8, 8))
}

/// All `2^n` strings, lexicographic.
pub fn all_bit_strings(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n).map(|v| (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect()).collect()
}

/// Builds a named built-in protocol.
pub fn builtin_protocol(name: &str, n: usize) -> crate::error::Result<ProtocolSpec> {
    match name {
        "ip2-clocked" | "ip2" => ip2_clocked(n),
        "ip2-one-clean" => ip2_one_clean(n),
        "middle" => middle_protocol(n, MiddleVariant::Standard),
        "middle-one-clean" => middle_protocol(n, MiddleVariant::OneClean),
        "abc" => abc_protocol(n),
        "accept-all" => Ok(accept_all_protocol()),
        "reject-all" => Ok(reject_all_protocol()),
        _ => Err(crate::error::Error::Input(format!(
            "unknown protocol '{name}' (ip2-clocked, ip2-one-clean, middle, middle-one-clean, abc, accept-all, reject-all)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::run_density;

    #[test]
    fn constant_protocols() {
        assert_eq!(run_density(&accept_all_protocol(), &[]).unwrap().acceptance, 1.0);
        assert_eq!(run_density(&reject_all_protocol(), &[]).unwrap().acceptance, 0.0);
    }

    #[test]
    fn bit_strings_in_order() {
        assert_eq!(all_bit_strings(2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
