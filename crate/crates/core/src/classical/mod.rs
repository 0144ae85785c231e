//! Classical baselines: sign-sketch inner-product estimation, the randomized
//! ABC protocol over a spherical-cap codebook, and exact rectangle
//! discrepancy of small sign matrices.

mod abc;
mod caps;
mod disc;
mod knr;

pub use abc::{abc_classical, abc_classical_with, AbcClassicalRun, ABC_EPS_SCALE};
pub use caps::{cap_bound, cap_codebook, cap_probability_mc, codebook_size, CapCodebook};
pub use disc::{disc_bruteforce, Discrepancy, SignMatrix, DISC_LIMIT};
pub use knr::{knr_estimate, knr_estimate_with, sketch_rounds, KnrRun, KNR_C};

use serde::Serialize;

use crate::protocol::PlayerId;

/// Classical bits sent, per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub bits_sent: Vec<u64>,
    pub total: u64,
}

impl Transcript {
    pub fn new(players: usize) -> Self {
        Transcript { bits_sent: vec![0; players], total: 0 }
    }

    pub fn send(&mut self, player: PlayerId, bits: u64) {
        if player >= self.bits_sent.len() {
            self.bits_sent.resize(player + 1, 0);
        }
        self.bits_sent[player] += bits;
        self.total += bits;
    }

    pub fn merge(&mut self, other: &Transcript) {
        for (p, &b) in other.bits_sent.iter().enumerate() {
            self.send(p, b);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_unit(v: &[f64], what: &str) -> crate::Result<()> {
    let norm = dot(v, v).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(crate::Error::domain(format!("{what} has norm {norm}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_totals() {
        let mut t = Transcript::new(2);
        t.send(0, 5);
        t.send(2, 3);
        assert_eq!(t.bits_sent, vec![5, 0, 3]);
        assert_eq!(t.total, 8);
        let mut u = Transcript::new(1);
        u.merge(&t);
        assert_eq!(u, t);
    }
}
