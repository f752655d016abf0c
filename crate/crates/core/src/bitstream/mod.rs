//! Finite binary sequences: storage, generation and file formats.
//!
//! Public indexing is 1-based throughout (`x_1 .. x_n`); the packed layout
//! stores bit `i` at byte `(i-1)/8`, most-significant bit first.

mod io;
pub mod rng;
mod source;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub use io::{decode_ascii01, decode_packed, encode_ascii01, encode_packed, read_bits, write_bits};
pub use io::{BitFormat, PACKED_MAGIC};
pub use source::{generate, parse_probability, SourceSpec};

/// Largest supported sequence length, `2^32 - 1`.
pub const MAX_LEN: usize = u32::MAX as usize;

/// A packed, immutable-by-convention finite binary sequence.
///
/// Pad bits in the last byte are kept zero so that derived equality and
/// hashing only see logical bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSequence {
    bytes: Vec<u8>,
    len: usize,
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Builds a sequence from packed MSB-first bytes, masking any pad bits.
    pub(crate) fn from_packed_bytes(mut bytes: Vec<u8>, len: usize) -> Self {
        debug_assert!(len <= MAX_LEN);
        bytes.truncate(len.div_ceil(8));
        debug_assert_eq!(bytes.len(), len.div_ceil(8));
        let tail = len % 8;
        if tail != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xFFu8 << (8 - tail);
            }
        }
        Self { bytes, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed payload, `ceil(len/8)` bytes with zero pad bits.
    pub fn as_packed_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Appends one bit.
    ///
    /// # Panics
    ///
    /// Panics if the sequence already holds [`MAX_LEN`] bits.
    pub fn push(&mut self, bit: bool) {
        assert!(self.len < MAX_LEN, "BitSequence length limit exceeded");
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Bit `x_index` using 1-based indexing; `None` outside `1..=len`.
    pub fn get(&self, index: usize) -> Option<bool> {
        if index == 0 || index > self.len {
            return None;
        }
        Some(self.bit0(index - 1))
    }

    #[inline]
    pub(crate) fn bit0(&self, i: usize) -> bool {
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + Clone + '_ {
        (0..self.len).map(move |i| self.bit0(i))
    }

    pub fn count_ones(&self) -> u64 {
        self.bytes.iter().map(|b| b.count_ones() as u64).sum()
    }

    /// The first `len` bits (the whole sequence if it is shorter).
    pub fn prefix(&self, len: usize) -> BitSequence {
        let len = len.min(self.len);
        Self::from_packed_bytes(self.bytes[..len.div_ceil(8)].to_vec(), len)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }
}

impl FromIterator<bool> for BitSequence {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut seq = BitSequence::with_capacity(iter.size_hint().0);
        for bit in iter {
            seq.push(bit);
        }
        seq
    }
}

impl FromStr for BitSequence {
    type Err = Error;

    /// Same rules as the ascii01 file format: `0`/`1`, whitespace ignored.
    fn from_str(s: &str) -> Result<Self> {
        decode_ascii01(s.as_bytes())
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        write!(f, "BitSequence(n={}, \"", self.len)?;
        for bit in self.iter().take(SHOWN) {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        if self.len > SHOWN {
            f.write_str("...")?;
        }
        f.write_str("\")")
    }
}

/// Exact frequency of ones, `#ones / length`, in lowest terms.
pub fn frequency(seq: &BitSequence) -> Result<Ratio<u64>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(Ratio::new(seq.count_ones(), seq.len() as u64))
}
