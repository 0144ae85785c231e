//! Text exchange format for square matrices:
//! `{"dim": d, "entries": [[re, im], ...]}`, row-major.

use serde::{Deserialize, Serialize};

use super::{CMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixExchange {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixExchange> for CMatrix {
    type Error = Error;

    fn try_from(x: MatrixExchange) -> Result<Self> {
        if x.entries.len() != x.dim * x.dim {
            return Err(Error::dim(format!(
                "matrix declares dim {} but has {} entries",
                x.dim,
                x.entries.len()
            )));
        }
        CMatrix::from_vec(x.dim, x.dim, x.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<CMatrix> for MatrixExchange {
    fn from(m: CMatrix) -> Self {
        assert!(m.is_square(), "exchange format holds square matrices only");
        MatrixExchange { dim: m.rows(), entries: m.data().iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixExchange::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = MatrixExchange::deserialize(d)?;
        CMatrix::try_from(x).map_err(serde::de::Error::custom)
    }
}

impl CMatrix {
    pub fn to_exchange_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrices always serialize")
    }

    pub fn from_exchange_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(entries in proptest::collection::vec((any::<f64>(), any::<f64>()), 16)) {
            prop_assume!(entries.iter().all(|(a, b)| a.is_finite() && b.is_finite()));
            let m = CMatrix::from_vec(4, 4, entries.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let back = CMatrix::from_exchange_str(&m.to_exchange_string()).unwrap();
            for (x, y) in m.data().iter().zip(back.data()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn wrong_entry_count_is_rejected() {
        let err = CMatrix::from_exchange_str(r#"{"dim": 2, "entries": [[1, 0]]}"#);
        assert!(matches!(err, Err(Error::Parse { .. })));
    }
}
