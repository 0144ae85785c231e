use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RazborovDist {
    /// Supports meet in exactly one index.
    Mu0,
    /// Disjoint supports.
    Mu1,
}

impl std::str::FromStr for RazborovDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu0" => Ok(RazborovDist::Mu0),
            "mu1" => Ok(RazborovDist::Mu1),
            _ => Err(Error::Input(format!("unknown distribution '{s}' (mu0|mu1)"))),
        }
    }
}

/// Length `n/2 + 1` and weight `(n/2 + 1)/4`.
pub fn razborov_params(n: usize) -> Result<(usize, usize)> {
    let len = n / 2 + 1;
    if n % 2 != 0 || len % 4 != 0 {
        return Err(Error::domain(format!("n/2+1 must be a multiple of 4 (n = {n})")));
    }
    Ok((len, len / 4))
}

/// One draw, uniform over the admissible pairs.
pub fn razborov_sample(n: usize, which: RazborovDist, seed: u64) -> Result<(Vec<u8>, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    razborov_sample_with(n, which, &mut rng)
}

/// Every support of `x` admits the same number of partners, so a uniform
/// `x` followed by a uniform partner is uniform over pairs.
pub fn razborov_sample_with<R: Rng + ?Sized>(
    n: usize,
    which: RazborovDist,
    rng: &mut R,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let (len, w) = razborov_params(n)?;
    let mut x = vec![0u8; len];
    let mut y = vec![0u8; len];
    let perm = index::sample(rng, len, len).into_vec();
    let (xs, rest) = perm.split_at(w);
    for &i in xs {
        x[i] = 1;
    }
    let shared = match which {
        RazborovDist::Mu1 => 0,
        RazborovDist::Mu0 => 1,
    };
    if shared == 1 {
        y[xs[rng.random_range(0..w)]] = 1;
    }
    for j in index::sample(rng, rest.len(), w - shared) {
        y[rest[j]] = 1;
    }
    Ok((x, y))
}

/// Prefixes `n/2 − 1` ones to both strings.
pub fn middle_pad(xt: &[u8], yt: &[u8], n: usize) -> Result<(Vec<u8>, Vec<u8>)> {
    if n < 2 || xt.len() != n / 2 + 1 || yt.len() != n / 2 + 1 {
        return Err(Error::domain(format!(
            "padding to n = {n} needs strings of length {}, got {} and {}",
            n / 2 + 1,
            xt.len(),
            yt.len()
        )));
    }
    let pad = vec![1u8; n / 2 - 1];
    Ok(([pad.as_slice(), xt].concat(), [pad.as_slice(), yt].concat()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overlap(x: &[u8], y: &[u8]) -> usize {
        x.iter().zip(y).filter(|(a, b)| **a == 1 && **b == 1).count()
    }

    #[test]
    fn constraints_hold() {
        for seed in 0..200 {
            let (x, y) = razborov_sample(14, RazborovDist::Mu1, seed).unwrap();
            assert_eq!((x.len(), x.iter().filter(|&&b| b == 1).count()), (8, 2));
            assert_eq!(y.iter().filter(|&&b| b == 1).count(), 2);
            assert_eq!(overlap(&x, &y), 0);
            let (x, y) = razborov_sample(14, RazborovDist::Mu0, seed).unwrap();
            assert_eq!(overlap(&x, &y), 1);
            assert_eq!(y.iter().filter(|&&b| b == 1).count(), 2);
        }
        assert!(razborov_sample(12, RazborovDist::Mu0, 0).is_err());
    }

    #[test]
    fn padding() {
        let z = vec![0u8; 8];
        let (x, y) = middle_pad(&z, &z, 14).unwrap();
        assert_eq!(x.len(), 14);
        assert_eq!(overlap(&x, &y), 6);
        assert!(middle_pad(&z[..7], &z, 14).is_err());
    }
}
