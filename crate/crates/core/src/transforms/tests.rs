use num_rational::Rational64;

use super::*;
use crate::problems::random::{random_protocol, random_two_round};
use crate::problems::{
    accept_all_protocol, all_bit_strings, ip2_clocked, ip2_value, middle_protocol, reject_all_protocol, MiddleVariant,
};
use crate::protocol::{communication_cost, validate, PlayerInput};
use crate::simulator::{run_density, run_ensemble, run_trace, run_trace_blocks, Sample};

fn bits_inputs(x: &[u8], y: &[u8]) -> Vec<PlayerInput> {
    vec![PlayerInput::Bits(x.to_vec()), PlayerInput::Bits(y.to_vec())]
}

#[test]
fn k1_cert_on_ip2() {
    let (out, cert) = k_to_one_clean(&ip2_clocked(2).unwrap()).unwrap();
    assert_eq!(cert.alpha, Rational64::new(1, 4));
    assert_eq!(cert.beta, Rational64::new(3, 8));
    assert_eq!(cert.predicted_bias_exact, Some(Rational64::new(1, 8)));
    assert_eq!(cert.communication_after, 5);
    assert!(validate(&out).is_valid());
}

#[test]
fn k1_needs_clean_qubits() {
    let mut p = accept_all_protocol();
    p.layout.clean = 0;
    p.layout.mixed = 3;
    assert!(matches!(k_to_one_clean(&p), Err(crate::Error::Domain(_))));
}

#[test]
fn k1_with_single_clean_gives_quarter_bias() {
    let base = random_protocol(1, 2, 3, false, 4);
    let (_, cert) = k_to_one_clean(&base).unwrap();
    assert_eq!(cert.alpha, Rational64::new(1, 2));
    assert_eq!(cert.predict(1.0) - cert.predict(0.0), 0.5);
}

#[test]
fn k1_matches_affine_map_on_random_protocols() {
    for seed in 0..12 {
        let base = random_protocol(2, 2, 3 + (seed as usize % 2), seed % 3 == 0, seed);
        let (out, cert) = k_to_one_clean(&base).unwrap();
        let a = run_density(&base, &[]).unwrap().acceptance;
        let b = run_density(&out, &[]).unwrap().acceptance;
        assert!((b - (0.375 + a / 4.0)).abs() < 1e-9, "seed {seed}: {a} -> {b}");
        assert!((cert.predict(a) - b).abs() < 1e-9);
    }
}

#[test]
fn sq_measure_preserves_acceptance() {
    assert_eq!(run_density(&projective_to_single_qubit(&accept_all_protocol()).unwrap().0, &[]).unwrap().acceptance, 1.0);
    assert_eq!(run_density(&projective_to_single_qubit(&reject_all_protocol()).unwrap().0, &[]).unwrap().acceptance, 0.0);
    for seed in 0..10 {
        let base = random_protocol(1, 3, 3, false, 100 + seed);
        let (out, cert) = projective_to_single_qubit(&base).unwrap();
        assert_eq!(cert.alpha, Rational64::from_integer(1));
        let a = run_density(&base, &[]).unwrap().acceptance;
        let b = run_density(&out, &[]).unwrap().acceptance;
        assert!((a - b).abs() < 1e-9, "seed {seed}");
        assert_eq!(communication_cost(&base).unwrap(), communication_cost(&out).unwrap());
    }
}

#[test]
fn trace_form_formula() {
    for seed in 0..6 {
        let base = projective_to_single_qubit(&random_protocol(1, 2, 3, seed % 2 == 0, 200 + seed)).unwrap().0;
        let (out, cert) = to_trace_form(&base).unwrap();
        assert!(validate(&out).is_valid(), "{:?}", validate(&out));
        let a = run_density(&base, &[]).unwrap().acceptance;
        let d = run_density(&out, &[]).unwrap().acceptance;
        let t = run_trace(&out, &[]).unwrap().acceptance;
        assert!((d - (0.5 + a / 8.0)).abs() < 1e-9, "seed {seed}: a={a} d={d}");
        assert!((t - d).abs() < 1e-9);
        assert!((cert.predict(a) - d).abs() < 1e-9);
    }
}

#[test]
fn trace_form_endpoints() {
    let (p, _) = to_trace_form(&projective_to_single_qubit(&accept_all_protocol()).unwrap().0).unwrap();
    assert!((run_trace(&p, &[]).unwrap().acceptance - 0.625).abs() < 1e-12);
    let (_, cert) = to_trace_form(&projective_to_single_qubit(&accept_all_protocol()).unwrap().0).unwrap();
    assert!((cert.predict(0.5) - 9.0 / 16.0).abs() < 1e-15);
}

#[test]
fn trace_form_rejects_projectors() {
    assert!(matches!(to_trace_form(&accept_all_protocol()), Err(crate::Error::Shape(_))));
}

#[test]
fn ip2_chain_acceptance() {
    let base = ip2_clocked(2).unwrap();
    let (chain, cert) = apply_chain(&["k1", "sq-measure", "trace-form"], &base).unwrap();
    assert_eq!(cert.alpha, Rational64::new(1, 32));
    for x in all_bit_strings(2) {
        for y in all_bit_strings(2) {
            let inp = bits_inputs(&x, &y);
            let acc = run_trace(&chain, &inp).unwrap().acceptance;
            let one = ip2_value(&x, &y) == 1;
            // ½ + 1/16 ± ε/2^{k+3} with ε = 1/2, k = 2
            let expect = if one { 0.5 + 1.0 / 16.0 + 0.5 / 32.0 } else { 0.5 + 1.0 / 16.0 - 0.5 / 32.0 };
            assert!((acc - expect).abs() < 1e-9, "{x:?} {y:?}: {acc}");
        }
    }
}

#[test]
fn unclock_preserves_acceptance_for_every_start() {
    let base = ip2_clocked(2).unwrap();
    let (tf, _) = apply_chain(&["k1", "sq-measure", "trace-form"], &base).unwrap();
    let (un, cert) = unclock(&tf, tf.rounds.len()).unwrap();
    assert!(validate(&un).is_valid(), "{:?}", validate(&un));
    assert_eq!(cert.communication_after, communication_cost(&un).unwrap());
    for x in all_bit_strings(2) {
        for y in all_bit_strings(2) {
            let inp = bits_inputs(&x, &y);
            let a = run_trace(&tf, &inp).unwrap().acceptance;
            let blocks = run_trace_blocks(&un, &inp).unwrap();
            assert!(blocks.len() >= 2);
            for b in blocks {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
    assert!(matches!(unclock(&tf, tf.rounds.len() + 1), Err(crate::Error::Shape(_))));
}

#[test]
fn unclock_small_agrees_with_density() {
    let base = projective_to_single_qubit(&random_protocol(1, 1, 2, true, 7)).unwrap().0;
    let (tf, _) = to_trace_form(&base).unwrap();
    let (un, _) = unclock(&tf, tf.rounds.len()).unwrap();
    if un.total_qubits() <= crate::simulator::DENSITY_LIMIT {
        let d = run_density(&un, &[]).unwrap().acceptance;
        let t = run_trace(&tf, &[]).unwrap().acceptance;
        assert!((d - t).abs() < 1e-9);
    } else {
        let e = run_ensemble(&un, &[], Sample::All).unwrap().acceptance;
        let t = run_trace(&tf, &[]).unwrap().acceptance;
        assert!((e - t).abs() < 1e-9);
    }
}

#[test]
fn lemma1_scales_by_two_to_the_k() {
    for seed in 0..10 {
        let base = random_two_round(2, seed);
        let (out, cert) = two_round_one_clean(&base).unwrap();
        assert_eq!(cert.alpha, Rational64::new(1, 4));
        let a = run_density(&base, &[]).unwrap().acceptance;
        let b = run_density(&out, &[]).unwrap().acceptance;
        assert!((b - a / 4.0).abs() < 1e-9, "seed {seed}");
        assert_eq!(communication_cost(&out).unwrap(), communication_cost(&base).unwrap());
    }
}

#[test]
fn lemma1_shape_errors() {
    assert!(matches!(two_round_one_clean(&ip2_clocked(2).unwrap()), Err(crate::Error::Shape(_))));
    let m = middle_protocol(4, MiddleVariant::Standard).unwrap();
    assert!(two_round_one_clean(&m).is_ok());
}

#[test]
fn pp_xor_toy() {
    let pp = PpProtocol::xor_toy();
    let (p, cert) = pp_to_oneway(&pp, 0.25).unwrap();
    assert_eq!(communication_cost(&p).unwrap(), 2);
    assert_eq!(cert.q1_cost_bound, Some(2.0 * 4.0 / 0.0625));
    for x in 0..2u8 {
        for y in 0..2u8 {
            let acc = run_density(&p, &bits_inputs(&[x], &[y])).unwrap().acceptance;
            let expect = if x != y { 0.625 } else { 0.375 };
            assert!((acc - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn pp_two_bit_toy() {
    let pp = PpProtocol::and_xor_toy();
    let (p, _) = pp_to_oneway(&pp, 0.25).unwrap();
    for x in all_bit_strings(2) {
        for y in all_bit_strings(2) {
            let f = (x[0] & y[0]) ^ x[1];
            let acc = run_density(&p, &bits_inputs(&x, &y)).unwrap().acceptance;
            let sign = if f == 1 { 1.0 } else { -1.0 };
            assert!((acc - (0.5 + sign * 0.25 / 4.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn pp_zero_bias_is_half() {
    let half = Rational64::new(1, 2);
    let pp = PpProtocol::deterministic(1, 1, 1, &[0, 1], vec![vec![half, half], vec![half, half]]);
    let (p, cert) = pp_to_oneway(&pp, 0.0).unwrap();
    assert!(cert.q1_cost_bound.is_none());
    for x in 0..2u8 {
        for y in 0..2u8 {
            assert!((run_density(&p, &bits_inputs(&[x], &[y])).unwrap().acceptance - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn pp_rejects_randomized_messages_and_unbalanced_tables() {
    let half = Rational64::new(1, 2);
    let mut pp = PpProtocol::xor_toy();
    pp.message[0] = vec![half, half];
    assert!(matches!(pp_to_oneway(&pp, 0.25), Err(crate::Error::Shape(_))));

    let q = |n| Rational64::new(n, 4);
    let skew = PpProtocol::deterministic(1, 1, 1, &[0, 1], vec![vec![q(3), q(3)], vec![q(1), q(1)]]);
    assert!(matches!(pp_to_oneway(&skew, 0.25), Err(crate::Error::Shape(_))));
    let (p, _) = pp_to_oneway(&skew.balanced(), 0.25).unwrap();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let a = skew.acceptance(&[x], &[y]).unwrap();
            let a = *a.numer() as f64 / *a.denom() as f64;
            let acc = run_density(&p, &bits_inputs(&[x], &[y])).unwrap().acceptance;
            assert!((acc - (0.5 + (a - 0.5) / 4.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn chain_composes_certificates() {
    let (_, c) = apply_chain(&["k1", "sq-measure"], &ip2_clocked(1).unwrap()).unwrap();
    assert_eq!(c.pass, "k1,sq-measure");
    assert_eq!(c.alpha, Rational64::new(1, 4));
    assert!(apply_pass("nope", &ip2_clocked(1).unwrap()).is_err());
}
