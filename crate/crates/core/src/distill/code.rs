//! Binary linear codes given by parity checks, with syndrome decoding.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::bits::{parity, BitString};
use crate::{Error, Result};

/// Largest length for which cosets and decoding tables are enumerated.
pub const MAX_CODE_LENGTH: usize = 16;

/// A code on `n` bits described by `k` linearly independent parity checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearCode {
    n: usize,
    checks: Vec<BitString>,
    #[serde(skip)]
    leaders: Vec<BitString>,
}

impl LinearCode {
    pub fn new(n: usize, checks: Vec<BitString>) -> Result<Self> {
        if n == 0 || n > MAX_CODE_LENGTH {
            return Err(Error::invalid(format!(
                "code length {n} outside 1..={MAX_CODE_LENGTH}"
            )));
        }
        for row in &checks {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        let rank = gf2_rank(checks.iter().map(|r| r.value()).collect());
        if rank != checks.len() {
            return Err(Error::invalid(format!(
                "parity checks have rank {rank}, expected {}",
                checks.len()
            )));
        }
        let mut code = Self {
            n,
            checks,
            leaders: Vec::new(),
        };
        code.leaders = code.leader_table();
        Ok(code)
    }

    /// Every syndrome bit checks one position: all errors are identified.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| BitString::unit(n, i)).collect())
    }

    /// No checks: nothing is learned.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn from_strings(n: usize, rows: &[&str]) -> Result<Self> {
        let checks = rows
            .iter()
            .map(|r| r.parse::<BitString>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, checks)
    }

    /// Uniformly random full-rank `k × n` check matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::invalid(format!("{k} checks on {n} bits")));
        }
        loop {
            let rows: Vec<u64> = (0..k).map(|_| rng.gen_range(0..1u64 << n)).collect();
            if gf2_rank(rows.clone()) == k {
                let checks = rows
                    .into_iter()
                    .map(|r| BitString::new(r, n))
                    .collect::<Result<Vec<_>>>()?;
                return Self::new(n, checks);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks (syndrome length).
    pub fn k(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[BitString] {
        &self.checks
    }

    pub fn syndrome(&self, e: &BitString) -> Result<BitString> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: e.len(),
            });
        }
        Ok(self.syndrome_raw(e.value()))
    }

    pub(crate) fn syndrome_raw(&self, e: u64) -> BitString {
        let value = self
            .checks
            .iter()
            .fold(0u64, |acc, row| (acc << 1) | parity(row.value(), e) as u64);
        BitString::new(value, self.k()).expect("syndrome fits")
    }

    /// Minimum-weight error with syndrome `s`, ties broken by smallest value.
    pub fn leader(&self, s: &BitString) -> Result<BitString> {
        if s.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                found: s.len(),
            });
        }
        Ok(self.leaders[s.index()])
    }

    /// The decoder's estimate of an error from its syndrome.
    pub fn decode(&self, e: &BitString) -> Result<BitString> {
        self.leader(&self.syndrome(e)?)
    }

    /// All strings with syndrome `s`, ascending.
    pub fn coset(&self, s: &BitString) -> Result<Vec<BitString>> {
        if s.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                found: s.len(),
            });
        }
        Ok(BitString::all(self.n)
            .filter(|v| self.syndrome_raw(v.value()) == *s)
            .collect())
    }

    /// The partition of `{0,1}^n` into cosets, keyed by syndrome.
    pub fn cosets(&self) -> BTreeMap<BitString, Vec<BitString>> {
        let mut out: BTreeMap<BitString, Vec<BitString>> = BTreeMap::new();
        for v in BitString::all(self.n) {
            out.entry(self.syndrome_raw(v.value())).or_default().push(v);
        }
        out
    }

    fn leader_table(&self) -> Vec<BitString> {
        let mut table: Vec<Option<BitString>> = vec![None; 1 << self.k()];
        let mut all: Vec<BitString> = BitString::all(self.n).collect();
        all.sort_by_key(|v| (v.weight(), v.value()));
        for v in all {
            let s = self.syndrome_raw(v.value()).index();
            if table[s].is_none() {
                table[s] = Some(v);
            }
        }
        table
            .into_iter()
            .map(|t| t.expect("full-rank checks reach every syndrome"))
            .collect()
    }
}

/// Rank over GF(2) of rows given as bit masks.
pub fn gf2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in (0..64).rev() {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r >> bit & 1 == 1 {
                *r ^= p;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn rank_checks() {
        assert_eq!(gf2_rank(vec![0b11, 0b01, 0b10]), 2);
        assert!(LinearCode::from_strings(3, &["110", "011", "101"]).is_err());
        assert!(LinearCode::from_strings(3, &["11"]).is_err());
    }

    #[test]
    fn full_and_empty_codes() {
        let full = LinearCode::full(3).unwrap();
        for v in BitString::all(3) {
            assert_eq!(full.decode(&v).unwrap(), v);
            assert_eq!(full.coset(&full.syndrome(&v).unwrap()).unwrap(), vec![v]);
        }
        let empty = LinearCode::empty(3).unwrap();
        assert_eq!(empty.cosets().len(), 1);
        assert_eq!(empty.decode(&bits("101")).unwrap(), bits("000"));
    }

    #[test]
    fn single_parity_cosets() {
        let c = LinearCode::from_strings(3, &["111"]).unwrap();
        let cosets = c.cosets();
        assert_eq!(cosets.len(), 2);
        assert!(cosets.values().all(|v| v.len() == 4));
        assert_eq!(c.leader(&bits("1")).unwrap(), bits("001"));
    }

    #[test]
    fn random_codes_have_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=5 {
            let c = LinearCode::random(5, k, &mut rng).unwrap();
            assert_eq!(c.k(), k);
            assert_eq!(c.cosets().len(), 1 << k);
        }
    }
}
