use serde::Serialize;

use crate::error::{Error, Result};

/// Largest row or column count accepted by [`disc_bruteforce`].
pub const DISC_LIMIT: usize = 16;

/// ±1 matrix with a probability weight per cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i8>>,
    pub weights: Vec<Vec<f64>>,
}

impl SignMatrix {
    pub fn new(entries: Vec<Vec<i8>>, weights: Vec<Vec<f64>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::dim("sign matrix must be non-empty"));
        }
        if entries.iter().any(|r| r.len() != cols) || weights.len() != rows || weights.iter().any(|r| r.len() != cols) {
            return Err(Error::dim(format!("entries and weights must both be {rows}×{cols}")));
        }
        if entries.iter().flatten().any(|&e| e != 1 && e != -1) {
            return Err(Error::domain("entries must be +1 or -1"));
        }
        if weights.iter().flatten().any(|&w| !(w >= 0.0)) {
            return Err(Error::domain("weights must be non-negative"));
        }
        let total: f64 = weights.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(SignMatrix { rows, cols, entries, weights })
    }

    pub fn uniform(entries: Vec<Vec<i8>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        let w = 1.0 / (rows * cols).max(1) as f64;
        SignMatrix::new(entries, vec![vec![w; cols]; rows])
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i8) -> Result<Self> {
        SignMatrix::uniform((0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect())
    }

    /// CSV of ±1 entries, optionally with a same-shaped CSV of weights
    /// (uniform when absent).
    pub fn from_csv(matrix: &str, weights: Option<&str>) -> Result<Self> {
        let entries: Vec<Vec<i8>> = parse_csv(matrix)?;
        match weights {
            None => SignMatrix::uniform(entries),
            Some(w) => SignMatrix::new(entries, parse_csv(w)?),
        }
    }

    /// `μ(x, y)·M(x, y)`.
    pub fn signed(&self, i: usize, j: usize) -> f64 {
        self.weights[i][j] * self.entries[i][j] as f64
    }
}

fn parse_csv<T: std::str::FromStr>(text: &str) -> Result<Vec<Vec<T>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { location: format!("line {}", line + 1), message: e.to_string() })?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<T>().map_err(|_| Error::Parse {
                    location: format!("line {}, field {}", line + 1, col + 1),
                    message: format!("cannot parse '{field}'"),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub value: f64,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Exact `max_R |Σ_{(x,y)∈R} μ(x,y)·M(x,y)|` over every row set × column
/// set. Subsets are visited as binary counters (bit `i` = row/column `i`),
/// rows outermost; the reported rectangle is the first whose value exceeds
/// every earlier one by more than 1e-12.
pub fn disc_bruteforce(m: &SignMatrix) -> Result<Discrepancy> {
    if m.rows > DISC_LIMIT || m.cols > DISC_LIMIT {
        return Err(Error::BackendLimit(format!(
            "{}×{} matrix exceeds the {DISC_LIMIT}×{DISC_LIMIT} enumeration limit",
            m.rows, m.cols
        )));
    }
    let (nr, nc) = (1usize << m.rows, 1usize << m.cols);
    // colsum[r][j] = Σ_{i∈r} μM(i, j), filled by dropping the lowest row bit.
    let mut colsum = vec![0.0; nr * m.cols];
    for r in 1..nr {
        let low = r.trailing_zeros() as usize;
        let prev = r & (r - 1);
        for j in 0..m.cols {
            colsum[r * m.cols + j] = colsum[prev * m.cols + j] + m.signed(low, j);
        }
    }
    let mut total = vec![0.0; nc];
    let (mut best, mut best_r, mut best_c) = (0.0f64, 0usize, 0usize);
    for r in 0..nr {
        let s = &colsum[r * m.cols..(r + 1) * m.cols];
        for c in 1..nc {
            total[c] = total[c & (c - 1)] + s[c.trailing_zeros() as usize];
            let v = total[c].abs();
            if v > best + 1e-12 {
                (best, best_r, best_c) = (v, r, c);
            }
        }
    }
    let bits = |mask: usize, n: usize| (0..n).filter(|&i| mask >> i & 1 == 1).collect();
    Ok(Discrepancy { value: best, rows: bits(best_r, m.rows), cols: bits(best_c, m.cols) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_2x2() {
        let m = SignMatrix::uniform(vec![vec![1, -1], vec![-1, 1]]).unwrap();
        let d = disc_bruteforce(&m).unwrap();
        assert_eq!(d.value, 0.25);
        assert_eq!((d.rows, d.cols), (vec![0], vec![0]));
    }

    #[test]
    fn all_ones_is_one() {
        let w = vec![vec![0.1, 0.2, 0.0], vec![0.3, 0.15, 0.25]];
        let m = SignMatrix::new(vec![vec![1; 3]; 2], w).unwrap();
        let d = disc_bruteforce(&m).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12);
        assert_eq!((d.rows, d.cols), (vec![0, 1], vec![0, 1, 2]));
    }

    #[test]
    fn csv_and_validation() {
        let m = SignMatrix::from_csv("1,-1\n-1, 1\n", None).unwrap();
        assert_eq!(m.entries, vec![vec![1, -1], vec![-1, 1]]);
        let m = SignMatrix::from_csv("1,1\n", Some("0.5,0.5")).unwrap();
        assert_eq!(disc_bruteforce(&m).unwrap().value, 1.0);
        assert!(matches!(SignMatrix::from_csv("1,0\n", None), Err(Error::Domain(_))));
        assert!(matches!(SignMatrix::from_csv("1,x\n", None), Err(Error::Parse { .. })));
        assert!(matches!(SignMatrix::from_csv("1,1\n", Some("0.5,0.6")), Err(Error::Domain(_))));
        assert!(SignMatrix::from_csv("1,1\n1\n", None).is_err());
    }

    #[test]
    fn size_limit() {
        let m = SignMatrix::from_fn(17, 1, |_, _| 1).unwrap();
        assert!(matches!(disc_bruteforce(&m), Err(Error::BackendLimit(_))));
    }
}
