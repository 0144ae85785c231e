//! Quick invariant suite behind `dqc1 verify`: small-scale versions of the
//! exact formulas, each reported as a named pass/fail line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classical::{cap_bound, cap_probability_mc, disc_bruteforce, SignMatrix};
use crate::error::Result;
use crate::problems::random::random_protocol;
use crate::problems::{
    abc_instance, abc_protocol, all_bit_strings, builtin_protocol, ip2_clocked, ip2_one_clean, ip2_value, middle_pad,
    middle_protocol, razborov_sample_with, MiddleInstance, MiddleVariant, RazborovDist,
};
use crate::protocol::{communication_cost, validate, PlayerInput};
use crate::qstate::haar_unitary;
use crate::simulator::{
    amplify, oneway_bias, oneway_protocol, run_density, run_density_with, run_trace, run_trace_blocks, RunOptions,
};
use crate::transforms::{apply_chain, k_to_one_clean, pp_to_oneway, projective_to_single_qubit, to_trace_form, unclock, PpProtocol};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn bits(x: &[u8], y: &[u8]) -> Vec<PlayerInput> {
    vec![PlayerInput::Bits(x.to_vec()), PlayerInput::Bits(y.to_vec())]
}

fn pairs(n: usize) -> impl Iterator<Item = (Vec<u8>, Vec<u8>)> {
    all_bit_strings(n).into_iter().flat_map(move |x| all_bit_strings(n).into_iter().map(move |y| (x.clone(), y)))
}

/// Largest deviation seen, or the first error.
type Probe = Result<f64>;

fn ip2() -> Probe {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let (two, one) = (ip2_clocked(n)?, ip2_one_clean(n)?);
        if communication_cost(&two)? != 2 * n || communication_cost(&one)? != 2 * n + 1 {
            return Ok(f64::INFINITY);
        }
        for (x, y) in pairs(n) {
            let f = ip2_value(&x, &y) as f64;
            worst = worst.max((run_density(&two, &bits(&x, &y))?.acceptance - f).abs());
            let expect = 0.375 + 0.25 * f;
            worst = worst.max((run_density(&one, &bits(&x, &y))?.acceptance - expect).abs());
        }
    }
    Ok(worst)
}

fn k1_random(seed: u64) -> Probe {
    let mut worst = 0.0f64;
    for s in 0..5 {
        let base = random_protocol(2, 2, 3, false, seed.wrapping_add(s));
        let (out, cert) = k_to_one_clean(&base)?;
        let a = run_density(&base, &[])?.acceptance;
        worst = worst.max((run_density(&out, &[])?.acceptance - cert.predict(a)).abs());
    }
    Ok(worst)
}

fn trace_form_random(seed: u64) -> Probe {
    let mut worst = 0.0f64;
    for s in 0..4 {
        let base = projective_to_single_qubit(&random_protocol(1, 2, 3, true, seed.wrapping_add(s)))?.0;
        let (tf, cert) = to_trace_form(&base)?;
        let a = run_density(&base, &[])?.acceptance;
        let d = run_density(&tf, &[])?.acceptance;
        worst = worst.max((d - cert.predict(a)).abs()).max((run_trace(&tf, &[])?.acceptance - d).abs());
    }
    Ok(worst)
}

fn unclock_ip2() -> Probe {
    let (tf, _) = apply_chain(&["k1", "sq-measure", "trace-form"], &ip2_clocked(2)?)?;
    let (un, _) = unclock(&tf, tf.rounds.len())?;
    let mut worst = 0.0f64;
    for (x, y) in pairs(2) {
        let a = run_trace(&tf, &bits(&x, &y))?.acceptance;
        for b in run_trace_blocks(&un, &bits(&x, &y))? {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn middle() -> Probe {
    let mut worst = 0.0f64;
    for n in [2, 4] {
        for variant in [MiddleVariant::Standard, MiddleVariant::OneClean] {
            let p = middle_protocol(n, variant)?;
            for (x, y) in pairs(n) {
                let inst = MiddleInstance::new(x.clone(), y.clone())?;
                let acc = run_density(&p, &bits(&x, &y))?.acceptance;
                worst = worst.max((acc - inst.expected_acceptance(variant)).abs());
            }
        }
    }
    Ok(worst)
}

fn abc(seed: u64) -> Probe {
    let p = abc_protocol(4)?;
    let mut worst = 0.0f64;
    for s in 0..5 {
        for label in [1i8, -1] {
            let inst = abc_instance(4, label, seed.wrapping_add(s))?;
            let expect = inst.answer() as f64;
            worst = worst.max((run_density(&p, &inst.inputs())?.acceptance - expect).abs());
            let fixed = [(1, s % 2 == 0), (2, true)];
            let opts = RunOptions { fixed: &fixed, ..RunOptions::default() };
            worst = worst.max((run_density_with(&p, &inst.inputs(), opts)?.acceptance - expect).abs());
        }
    }
    Ok(worst)
}

fn pp() -> Probe {
    let mut worst = 0.0f64;
    for (pp, c) in [(PpProtocol::xor_toy(), 1), (PpProtocol::and_xor_toy(), 2)] {
        let (p, _) = pp_to_oneway(&pp, 0.25)?;
        for (x, y) in pairs(c) {
            let a = pp.acceptance(&x, &y)?;
            let a = *a.numer() as f64 / *a.denom() as f64;
            let expect = 0.5 + (a - 0.5) / (1u64 << c) as f64;
            worst = worst.max((run_density(&p, &bits(&x, &y))?.acceptance - expect).abs());
        }
    }
    Ok(worst)
}

fn oneway(seed: u64) -> Probe {
    let mut worst = 0.0f64;
    for s in 0..5 {
        let ua = haar_unitary(3, seed.wrapping_add(2 * s));
        let ub = haar_unitary(3, seed.wrapping_add(2 * s + 1));
        let f = oneway_bias(&ua, &ub)?;
        let acc = run_density(&oneway_protocol(&ua, &ub)?, &[])?.acceptance;
        worst = worst.max((acc - 0.5 - f).abs());
    }
    Ok(worst)
}

fn razborov(seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = |v: &[u8]| v.iter().filter(|&&b| b == 1).count();
    for _ in 0..1000 {
        let which = if rng.random::<bool>() { RazborovDist::Mu0 } else { RazborovDist::Mu1 };
        let (x, y) = razborov_sample_with(14, which, &mut rng)?;
        let meet = x.iter().zip(&y).filter(|(a, b)| **a == 1 && **b == 1).count();
        let want = if which == RazborovDist::Mu0 { 1 } else { 0 };
        if weight(&x) != 2 || weight(&y) != 2 || meet != want {
            return Ok(false);
        }
        let (px, py) = middle_pad(&x, &y, 14)?;
        let t = px.iter().zip(&py).filter(|(a, b)| **a == 1 && **b == 1).count() as i64 - 7;
        if px.len() != 14 || t != want as i64 - 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn within(name: &str, probe: Probe) -> Check {
    match probe {
        Ok(dev) => Check { name: name.into(), pass: dev <= TOL, detail: format!("max deviation {dev:.3e}") },
        Err(e) => Check { name: name.into(), pass: false, detail: e.to_string() },
    }
}

fn boolean(name: &str, r: Result<bool>, detail: impl Into<String>) -> Check {
    match r {
        Ok(pass) => Check { name: name.into(), pass, detail: detail.into() },
        Err(e) => Check { name: name.into(), pass: false, detail: e.to_string() },
    }
}

/// Runs every check; never stops early.
pub fn verify_all(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let builtins = ["ip2-clocked", "ip2-one-clean", "middle", "middle-one-clean", "abc", "accept-all", "reject-all"];
    let valid = builtins.iter().all(|name| builtin_protocol(name, 4).map(|p| validate(&p).is_valid()).unwrap_or(false));
    out.push(boolean("builtin protocols validate", Ok(valid), "n = 4"));
    out.push(within("ip2 exact acceptance, n = 1..3", ip2()));
    out.push(within("k1 affine acceptance map", k1_random(seed)));
    out.push(within("trace-form formula and trace backend", trace_form_random(seed)));
    out.push(within("unclocked counter-start invariance", unclock_ip2()));
    out.push(within("middle acceptance formulas, n = 2, 4", middle()));
    out.push(within("abc exact answers with pinned catalyst", abc(seed)));
    out.push(within("pp to one-way acceptance", pp()));
    out.push(within("one-way bias formula", oneway(seed)));
    let amp = [0.5, 0.25, 0.125].iter().try_fold(0.0f64, |m, &eps| amplify(0.5 - eps, 0.5 + eps, 0.5, eps).map(|r| m.max(r.error)));
    out.push(boolean("amplification error ≤ 1/3", amp.as_ref().map(|&e| e <= 1.0 / 3.0).map_err(clone_err), format!("{amp:?}")));
    let caps = cap_probability_mc(4, 1, 20_000, seed);
    out.push(boolean("cap probability above bound, n = 4, k = 1", caps.as_ref().map(|&p| p > cap_bound(1)).map_err(clone_err), format!("{caps:?}")));
    let eq2 = SignMatrix::uniform(vec![vec![1, -1], vec![-1, 1]]).and_then(|m| disc_bruteforce(&m));
    out.push(boolean("discrepancy of 2×2 equality", eq2.as_ref().map(|d| d.value == 0.25).map_err(clone_err), format!("{eq2:?}")));
    out.push(boolean("razborov sampler constraints", razborov(seed), "1000 draws at n = 14"));
    out
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::Input(e.to_string())
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_check_passes() {
        for c in super::verify_all(1) {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
