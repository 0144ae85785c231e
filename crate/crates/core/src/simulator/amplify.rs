use serde::Serialize;

use crate::error::{Error, Result};

/// Repeat `t` times and accept iff at least `threshold` runs accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepetitionPlan {
    pub t: u64,
    pub threshold: u64,
}

impl RepetitionPlan {
    /// `t = ⌈4/ε²⌉`, `threshold = ⌈p·t⌉`.
    pub fn for_bias(p: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::domain(format!("bias {eps} outside (0, 1/2]")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("reference point {p} outside [0, 1]")));
        }
        let t = ceil_tol(4.0 / (eps * eps)).max(1.0) as u64;
        let threshold = ceil_tol(p * t as f64) as u64;
        Ok(RepetitionPlan { t, threshold })
    }
}

/// Ceiling that ignores representation noise just above an integer.
fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifyResult {
    pub plan: RepetitionPlan,
    /// `Pr[Bin(t, acc1) < threshold]`.
    pub error_on_one: f64,
    /// `Pr[Bin(t, acc0) ≥ threshold]`.
    pub error_on_zero: f64,
    pub error: f64,
}

/// Exact error of the majority-style repetition of a protocol with
/// acceptance `acc0` on 0-inputs and `acc1` on 1-inputs.
pub fn amplify(acc0: f64, acc1: f64, p: f64, eps: f64) -> Result<AmplifyResult> {
    let slack = 1e-12;
    if !(acc0 <= p - eps + slack && p + eps <= acc1 + slack) {
        return Err(Error::domain(format!(
            "need acc0 ≤ p−ε ≤ p+ε ≤ acc1, got acc0={acc0}, acc1={acc1}, p={p}, ε={eps}"
        )));
    }
    if !(0.0..=1.0).contains(&acc0) || !(0.0..=1.0).contains(&acc1) {
        return Err(Error::domain("acceptance probabilities must lie in [0, 1]"));
    }
    let plan = RepetitionPlan::for_bias(p, eps)?;
    let error_on_one = 1.0 - binomial_tail_ge(plan.t, acc1, plan.threshold);
    let error_on_zero = binomial_tail_ge(plan.t, acc0, plan.threshold);
    Ok(AmplifyResult { plan, error_on_one, error_on_zero, error: error_on_one.max(error_on_zero) })
}

/// `Pr[Bin(t, q) ≥ k]`, summed from the probability mass function in log space.
pub fn binomial_tail_ge(t: u64, q: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > t {
        return 0.0;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let (lq, lr) = (q.ln(), (1.0 - q).ln());
    let mut ln_choose = 0.0f64;
    let mut below = 0.0;
    let mut above = 0.0;
    for i in 0..=t {
        if i > 0 {
            ln_choose += ((t - i + 1) as f64).ln() - (i as f64).ln();
        }
        let pmf = (ln_choose + i as f64 * lq + (t - i) as f64 * lr).exp();
        if i >= k {
            above += pmf;
        } else {
            below += pmf;
        }
    }
    // Use the smaller side to limit cancellation.
    let total = above + below;
    if above <= below {
        above / total
    } else {
        1.0 - below / total
    }
}
