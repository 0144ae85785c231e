//! Protocol-to-protocol constructions. Each pass returns the new protocol
//! together with a certificate stating how acceptance probabilities map.

mod k1;
mod lemma1;
mod pp;
mod sq;
mod trace_form;
mod unclock;

pub use k1::k_to_one_clean;
pub use lemma1::two_round_one_clean;
pub use pp::{pp_to_oneway, PpProtocol};
pub use sq::projective_to_single_qubit;
pub use trace_form::to_trace_form;
pub use unclock::unclock;

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{communication_cost, DeclaredBias, ProtocolSpec, Registry};

pub const PASS_NAMES: [&str; 6] = ["k1", "sq-measure", "trace-form", "unclock", "lemma1", "pp-oneway"];

pub(crate) fn register_builtins(r: &mut Registry) {
    r.register("pp-alice", pp::gen_alice);
    r.register("pp-bob", pp::gen_bob);
}

/// Acceptance of the output is `alpha·a + beta` for base acceptance `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformCert {
    pub pass: String,
    pub alpha: Rational64,
    pub beta: Rational64,
    pub input_reference: Option<f64>,
    pub input_bias: Option<f64>,
    pub predicted_reference: Option<f64>,
    pub predicted_bias: Option<f64>,
    /// `alpha·ε` as a fraction when the input bias is dyadic.
    pub predicted_bias_exact: Option<Rational64>,
    pub communication_before: usize,
    pub communication_after: usize,
    pub q1_cost_bound: Option<f64>,
}

fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().expect("small fractions convert")
}

/// Exact fraction for `x` when `x` has a denominator of at most `2^40`.
fn dyadic(x: f64) -> Option<Rational64> {
    let scaled = x * (1u64 << 40) as f64;
    (scaled.fract() == 0.0 && scaled.abs() < i64::MAX as f64)
        .then(|| Rational64::new(scaled as i64, 1i64 << 40))
}

impl TransformCert {
    pub(crate) fn new(
        pass: &str,
        alpha: Rational64,
        beta: Rational64,
        declared: Option<DeclaredBias>,
        communication_before: usize,
        communication_after: usize,
    ) -> Self {
        let (a, b) = (ratio_f64(alpha), ratio_f64(beta));
        TransformCert {
            pass: pass.to_string(),
            alpha,
            beta,
            input_reference: declared.map(|d| d.p),
            input_bias: declared.map(|d| d.eps),
            predicted_reference: declared.map(|d| a * d.p + b),
            predicted_bias: declared.map(|d| a * d.eps),
            predicted_bias_exact: declared.and_then(|d| dyadic(d.eps)).map(|e| alpha * e),
            communication_before,
            communication_after,
            q1_cost_bound: None,
        }
    }

    pub fn predict(&self, base_acceptance: f64) -> f64 {
        ratio_f64(self.alpha) * base_acceptance + ratio_f64(self.beta)
    }

    /// Certificate for applying `self` and then `next`.
    pub fn then(&self, next: &TransformCert) -> TransformCert {
        TransformCert {
            pass: format!("{},{}", self.pass, next.pass),
            alpha: next.alpha * self.alpha,
            beta: next.alpha * self.beta + next.beta,
            input_reference: self.input_reference,
            input_bias: self.input_bias,
            predicted_reference: next.predicted_reference,
            predicted_bias: next.predicted_bias,
            predicted_bias_exact: next.predicted_bias_exact,
            communication_before: self.communication_before,
            communication_after: next.communication_after,
            q1_cost_bound: next.q1_cost_bound.or(self.q1_cost_bound),
        }
    }

    pub fn identity(pass: &str, declared: Option<DeclaredBias>, before: usize, after: usize) -> Self {
        TransformCert::new(pass, Rational64::one(), Rational64::zero(), declared, before, after)
    }
}

/// The declared contract pushed through `alpha·a + beta`, when it stays in range.
pub(crate) fn mapped_declared(p: &ProtocolSpec, alpha: Rational64, beta: Rational64) -> Option<DeclaredBias> {
    p.declared.map(|d| DeclaredBias {
        p: ratio_f64(alpha) * d.p + ratio_f64(beta),
        eps: ratio_f64(alpha) * d.eps,
    })
}

pub(crate) fn pow2_inv(k: usize) -> Rational64 {
    Rational64::new(1, 1i64 << k)
}

pub(crate) fn cost(p: &ProtocolSpec) -> Result<usize> {
    communication_cost(p)
}

/// Applies a named pass with default parameters.
pub fn apply_pass(name: &str, p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    match name {
        "k1" => k_to_one_clean(p),
        "sq-measure" => projective_to_single_qubit(p),
        "trace-form" => to_trace_form(p),
        "unclock" => unclock(p, p.rounds.len()),
        "lemma1" => two_round_one_clean(p),
        "pp-oneway" => Err(Error::Input(
            "pp-oneway consumes a classical protocol table, not a descriptor".into(),
        )),
        _ => Err(Error::Input(format!("unknown pass '{name}' (one of {})", PASS_NAMES.join(", ")))),
    }
}

/// Applies passes left to right, composing certificates.
pub fn apply_chain(names: &[&str], p: &ProtocolSpec) -> Result<(ProtocolSpec, TransformCert)> {
    let (first, rest) = names.split_first().ok_or_else(|| Error::Input("empty pass chain".into()))?;
    let (mut cur, mut cert) = apply_pass(first, p)?;
    for name in rest {
        let (next, c) = apply_pass(name, &cur)?;
        cert = cert.then(&c);
        cur = next;
    }
    Ok((cur, cert))
}

#[cfg(test)]
mod tests;
