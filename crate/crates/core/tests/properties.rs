use dqc1_core::classical::{
    abc_classical_with, cap_codebook, disc_bruteforce, knr_estimate_with, sketch_rounds, SignMatrix,
};
use dqc1_core::problems::random::random_protocol;
use dqc1_core::problems::abc_instance;
use dqc1_core::protocol::{communication_cost, GateOp, Measurement, ProtocolSpec, RoundAction};
use dqc1_core::qstate::{
    apply_on_subset, haar_orthogonal_real, haar_unit_vector, haar_unitary, hermitian_eigenvalues, tensor, CMatrix,
    DensityMatrix, C64,
};
use dqc1_core::simulator::{oneway_bias, run_density, run_ensemble, run_trace, Sample};
use dqc1_core::transforms::{k_to_one_clean, projective_to_single_qubit, to_trace_form};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-4i32..=4, -4i32..=4), dim * dim)
        .prop_map(move |v| CMatrix::from_vec(dim, dim, v.into_iter().map(|(a, b)| C64::new(a as f64, b as f64)).collect()).unwrap())
}

/// Mixture of Haar pure states on `q` qubits with Dirichlet-like weights.
fn random_density(q: usize, seed: u64) -> DensityMatrix {
    let dim = 1 << q;
    let mut acc = CMatrix::zeros(dim, dim);
    let weights = [0.5, 0.3, 0.2];
    for (i, w) in weights.iter().enumerate() {
        let u = haar_unitary(q, seed * 7 + i as u64);
        let col = CMatrix::from_fn(dim, 1, |r, _| u.matrix()[(r, 0)]);
        acc = acc.add(&CMatrix::outer(&col).scale(C64::new(*w, 0.0))).unwrap();
    }
    DensityMatrix::new(acc).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Permutes qubits within the clean block and within the mixed block.
fn relabel(p: &ProtocolSpec, seed: u64) -> ProtocolSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, total) = (p.layout.clean, p.total_qubits());
    let mut clean: Vec<usize> = (0..k).collect();
    let mut mixed: Vec<usize> = (k..total).collect();
    clean.shuffle(&mut rng);
    mixed.shuffle(&mut rng);
    let perm: Vec<usize> = clean.into_iter().chain(mixed).collect();
    let f = |q: usize| perm[q];
    let mut owners = vec![0; total];
    for (q, &o) in p.layout.owners.iter().enumerate() {
        owners[f(q)] = o;
    }
    let rounds = p
        .rounds
        .iter()
        .map(|r| RoundAction {
            player: r.player,
            ops: r.ops.iter().map(|op: &GateOp| op.remap(&f)).collect(),
            message: r.message.iter().map(|&q| f(q)).collect(),
            to: r.to,
        })
        .collect();
    let measurement = match &p.measurement {
        Measurement::Projector { player, targets, projector } => {
            Measurement::Projector { player: *player, targets: targets.iter().map(|&q| f(q)).collect(), projector: projector.clone() }
        }
        Measurement::SingleQubit { player, index, outcome } => {
            Measurement::SingleQubit { player: *player, index: f(*index), outcome: *outcome }
        }
    };
    let mut out = p.clone();
    out.layout.owners = owners;
    out.rounds = rounds;
    out.measurement = measurement;
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensor_is_associative(a in small_matrix(2), b in small_matrix(2), c in small_matrix(4)) {
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn apply_on_subset_keeps_trace_and_spectrum(seed in 0u64..10_000, mask in 1usize..16, reverse in any::<bool>()) {
        let rho = random_density(4, seed);
        let mut targets: Vec<usize> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
        if reverse {
            targets.reverse();
        }
        let u = haar_unitary(targets.len(), seed + 1);
        let out = apply_on_subset(&rho, &u, &targets).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-9);
        prop_assert!(out.matrix().hermiticity_deviation() < 1e-9);
        let before = sorted(hermitian_eigenvalues(rho.matrix()).unwrap());
        let after = sorted(hermitian_eigenvalues(out.matrix()).unwrap());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!(after[0] > -1e-9);
    }

    #[test]
    fn special_orthogonal_has_unit_determinant(seed in any::<u64>(), n in 1usize..9) {
        let q = haar_orthogonal_real(n, true, seed).unwrap();
        prop_assert!((q.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relabeling_keeps_cost_and_acceptance(seed in 0u64..5_000, perm_seed in any::<u64>()) {
        let p = random_protocol(1 + seed as usize % 2, 2, 3, seed % 2 == 0, seed);
        let q = relabel(&p, perm_seed);
        prop_assert_eq!(communication_cost(&p).unwrap(), communication_cost(&q).unwrap());
        let (a, b) = (run_density(&p, &[]).unwrap().acceptance, run_density(&q, &[]).unwrap().acceptance);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn descriptor_round_trip(seed in 0u64..5_000) {
        let p = random_protocol(2, 2, 3, seed % 2 == 0, seed);
        prop_assert_eq!(ProtocolSpec::from_descriptor(&p.to_descriptor()).unwrap(), p);
    }

    #[test]
    fn backends_agree(seed in 0u64..5_000) {
        let p = random_protocol(1 + seed as usize % 2, 1 + seed as usize % 3, 3, true, seed);
        let d = run_density(&p, &[]).unwrap().acceptance;
        let e = run_ensemble(&p, &[], Sample::All).unwrap().acceptance;
        prop_assert!((d - e).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&d));
        let (tf, _) = to_trace_form(&projective_to_single_qubit(&p).unwrap().0).unwrap();
        if tf.total_qubits() <= 10 {
            let d = run_density(&tf, &[]).unwrap().acceptance;
            prop_assert!((d - run_trace(&tf, &[]).unwrap().acceptance).abs() < 1e-9);
        }
    }

    #[test]
    fn oneway_bias_is_bounded(seed in any::<u64>(), m in 1usize..5) {
        let f = oneway_bias(&haar_unitary(m, seed), &haar_unitary(m, seed ^ 0x5555)).unwrap();
        prop_assert!(f.abs() <= 0.5 + 1e-12);
    }

    #[test]
    fn k1_follows_its_certificate(seed in 0u64..5_000) {
        let p = random_protocol(1 + seed as usize % 3, 2, 2, false, seed);
        let (out, cert) = k_to_one_clean(&p).unwrap();
        let a = run_density(&p, &[]).unwrap().acceptance;
        prop_assert!((run_density(&out, &[]).unwrap().acceptance - cert.predict(a)).abs() < 1e-9);
    }

    #[test]
    fn discrepancy_ignores_row_and_column_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, c) = (4, 5);
        let entries: Vec<Vec<i8>> = (0..r).map(|_| (0..c).map(|_| if rand::Rng::random(&mut rng) { 1 } else { -1 }).collect()).collect();
        let raw: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rand::Rng::random::<f64>(&mut rng)).collect()).collect();
        let total: f64 = raw.iter().flatten().sum();
        let w: Vec<Vec<f64>> = raw.iter().map(|row| row.iter().map(|x| x / total).collect()).collect();
        let mut rp: Vec<usize> = (0..r).collect();
        let mut cp: Vec<usize> = (0..c).collect();
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
        let pe = rp.iter().map(|&i| cp.iter().map(|&j| entries[i][j]).collect()).collect();
        let pw = rp.iter().map(|&i| cp.iter().map(|&j| w[i][j]).collect()).collect();
        let a = disc_bruteforce(&SignMatrix::new(entries, w).unwrap()).unwrap().value;
        let b = disc_bruteforce(&SignMatrix::new(pe, pw).unwrap()).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn codebook_invariants(seed in any::<u64>(), n in 4usize..12) {
        let book = cap_codebook(n, 1, seed).unwrap();
        prop_assert_eq!(book.vectors.len(), 237);
        for v in &book.vectors {
            prop_assert_eq!(v.len(), n);
            prop_assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn knr_is_unbiased_after_arccos() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = haar_unit_vector(6, &mut rng);
    let b = haar_unit_vector(6, &mut rng);
    let ip: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let p = 1.0 - ip.clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
    let seeds = 10_000u64;
    let s = sketch_rounds(0.5, 8.0).unwrap();
    let mean = (0..seeds).map(|seed| knr_estimate_with(&a, &b, 0.5, 8.0, seed).unwrap().agreement_frequency()).sum::<f64>()
        / seeds as f64;
    let sigma = (p * (1.0 - p) / (s * seeds) as f64).sqrt();
    assert!((mean - p).abs() <= 3.0 * sigma, "mean {mean}, expected {p} ± {}", 3.0 * sigma);
}

#[test]
fn knr_failure_rate_at_n32() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    for seed in 0..1000u64 {
        let a = haar_unit_vector(32, &mut rng);
        let b = haar_unit_vector(32, &mut rng);
        let ip: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let run = knr_estimate_with(&a, &b, 0.05, 8.0, seed).unwrap();
        if (run.estimate - ip).abs() > 0.05 {
            failures += 1;
        }
    }
    assert!(failures <= 100, "{failures} failures");
}

#[test]
fn abc_classical_separation_and_transcript() {
    let (n, k) = (8, 2);
    let threshold = (k as f64 / n as f64).sqrt();
    let mut totals = Vec::new();
    let mut checked = 0;
    for s in 0..200u64 {
        let label = if s % 2 == 0 { 1 } else { -1 };
        let inst = abc_instance(n, label, s).unwrap();
        // tiny sketch constant: only the real inner product matters here
        let run = abc_classical_with(&inst, 0, k, 1e-4, 1000 + s).unwrap();
        totals.push(run.transcript.total);
        if run.meets_cap(n, k) {
            checked += 1;
            assert!(run.true_value * label as f64 >= threshold - 1e-12, "{run:?}");
        }
    }
    assert!(checked > 150, "{checked}");
    totals.dedup();
    assert_eq!(totals.len(), 1);
}
