//! Fixed-length bit strings naming Pauli error patterns, syndromes and basis states.
//!
//! Character 0 of the textual form is the most significant bit, which is also
//! qubit 0 of the register the string addresses. A string of length `n` read
//! as an integer is therefore the computational-basis index of that register.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub const MAX_BITS: usize = 63;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BitString {
    value: u64,
    len: u8,
}

impl BitString {
    pub fn new(value: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::invalid(format!(
                "bit strings are limited to {MAX_BITS} bits"
            )));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::invalid(format!(
                "value {value} does not fit in {len} bits"
            )));
        }
        Ok(Self {
            value,
            len: len as u8,
        })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_BITS);
        Self {
            value: 0,
            len: len as u8,
        }
    }

    pub fn ones(len: usize) -> Self {
        assert!(len <= MAX_BITS);
        Self {
            value: (1u64 << len) - 1,
            len: len as u8,
        }
    }

    /// Unit vector with a one at position `i` (0 = most significant).
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len && len <= MAX_BITS);
        Self {
            value: 1u64 << (len - 1 - i),
            len: len as u8,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Self::new(value, bits.len())
    }

    /// Every string of the given length in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len <= 24, "refusing to enumerate 2^{len} strings");
        (0..1u64 << len).map(move |value| BitString {
            value,
            len: len as u8,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn index(&self) -> usize {
        self.value as usize
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len());
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn weight(&self) -> usize {
        self.value.count_ones() as usize
    }

    fn check_len(&self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.check_len(other)?;
        Ok(BitString {
            value: self.value ^ other.value,
            len: self.len,
        })
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitString) -> Result<bool> {
        self.check_len(other)?;
        Ok((self.value & other.value).count_ones() & 1 == 1)
    }

    pub fn concat(&self, other: &BitString) -> Result<BitString> {
        BitString::new(
            (self.value << other.len) | other.value,
            self.len() + other.len(),
        )
    }

    /// Apply a permutation of positions: bit `i` of the result is bit `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<BitString> {
        if perm.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: perm.len(),
            });
        }
        let bits: Vec<bool> = perm.iter().map(|&p| self.bit(p)).collect();
        BitString::from_bits(&bits)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }
}

/// Parity of `a & b` for raw masks.
#[inline]
pub(crate) fn parity(a: u64, b: u64) -> bool {
    (a & b).count_ones() & 1 == 1
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!(
                    "bad bit character `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitString::from_bits(&bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
