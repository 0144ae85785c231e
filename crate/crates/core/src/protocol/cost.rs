use serde::Serialize;

use super::{validate, ProtocolSpec};
use crate::error::{Error, Result};

/// Qubits communicated: every message plus, when the measuring player does
/// not hold all measured qubits at the end, one implicit final transfer of
/// those qubits.
pub fn communication_cost(p: &ProtocolSpec) -> Result<usize> {
    validate(p).into_result()?;
    let sent: usize = p.rounds.iter().map(|r| r.message.len()).sum();
    Ok(sent + implicit_transfer(p))
}

pub(crate) fn implicit_transfer(p: &ProtocolSpec) -> usize {
    let owners = p.final_owners().expect("validated");
    let who = p.measurement.player();
    p.measurement.targets().iter().filter(|&&q| owners[q] != who).count()
}

fn check_eps(eps: f64, upper_inclusive: bool) -> Result<()> {
    let ok = eps > 0.0 && if upper_inclusive { eps <= 0.5 } else { eps < 0.5 };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "bias {eps} outside {}",
            if upper_inclusive { "(0, 1/2]" } else { "(0, 1/2)" }
        )))
    }
}

/// `c / ε²`. Exact whenever ε is a power of two.
pub fn q1_cost(c: usize, eps: f64) -> Result<f64> {
    check_eps(eps, true)?;
    Ok(c as f64 / (eps * eps))
}

/// `c − ⌊log₂ ε⌋`.
pub fn pp_cost(c: usize, eps: f64) -> Result<i64> {
    check_eps(eps, false)?;
    // log2 may round across an integer near powers of two; correct against exact powers.
    let mut j = eps.log2().floor() as i32;
    while 2f64.powi(j) > eps {
        j -= 1;
    }
    while 2f64.powi(j + 1) <= eps {
        j += 1;
    }
    Ok(c as i64 - j as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub communication: usize,
    pub bias: f64,
    pub q1_cost: f64,
    /// Undefined at ε = 1/2.
    pub pp_cost: Option<i64>,
    pub qubits_total: usize,
}

impl CostReport {
    pub fn new(communication: usize, bias: f64, qubits_total: usize) -> Result<Self> {
        Ok(CostReport {
            communication,
            bias,
            q1_cost: q1_cost(communication, bias)?,
            pp_cost: if bias < 0.5 { Some(pp_cost(communication, bias)?) } else { None },
            qubits_total,
        })
    }

    pub fn for_protocol(p: &ProtocolSpec, bias: f64) -> Result<Self> {
        CostReport::new(communication_cost(p)?, bias, p.total_qubits())
    }

    pub const CSV_HEADER: &'static str = "communication,bias,q1_cost,pp_cost,qubits";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.communication,
            self.bias,
            self.q1_cost,
            self.pp_cost.map(|v| v.to_string()).unwrap_or_default(),
            self.qubits_total
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn q1_examples() {
        assert_eq!(q1_cost(9, 0.125).unwrap(), 576.0);
        assert!((q1_cost(10, 0.1).unwrap() - 1000.0).abs() < 1e-9);
        assert_eq!(q1_cost(0, 0.3).unwrap(), 0.0);
        assert!(q1_cost(1, 0.0).is_err());
        assert!(q1_cost(1, 0.6).is_err());
    }

    #[test]
    fn pp_examples() {
        assert_eq!(pp_cost(5, 0.125).unwrap(), 8);
        assert_eq!(pp_cost(1, 0.25).unwrap(), 3);
        assert_eq!(pp_cost(3, 0.3).unwrap(), 5);
        assert!(pp_cost(3, 0.5).is_err());
    }

    /// Largest integer j with 2^j ≤ eps, by bracketing with exact powers of two.
    fn floor_log2_oracle(eps: f64) -> i64 {
        let mut j = 0i64;
        while 2f64.powi(j as i32) > eps {
            j -= 1;
        }
        j
    }

    proptest! {
        #[test]
        fn pp_matches_bracketing(c in 0usize..100, eps in 1e-12f64..0.4999) {
            prop_assert_eq!(pp_cost(c, eps).unwrap(), c as i64 - floor_log2_oracle(eps));
        }

        #[test]
        fn costs_are_monotone(c in 0usize..50, e1 in 1e-6f64..0.49, e2 in 1e-6f64..0.49) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(q1_cost(c, lo).unwrap() >= q1_cost(c, hi).unwrap());
            prop_assert!(pp_cost(c, lo).unwrap() >= pp_cost(c, hi).unwrap());
            prop_assert!(q1_cost(c + 1, lo).unwrap() >= q1_cost(c, lo).unwrap());
            prop_assert!(pp_cost(c + 1, lo).unwrap() >= pp_cost(c, lo).unwrap());
            prop_assert!(q1_cost(c, lo).unwrap() >= c as f64);
            prop_assert!(pp_cost(c, lo).unwrap() >= c as i64);
        }
    }
}
