use std::fmt;
use std::ops::{BitXor, Index, Range};

use crate::error::{Error, Result};

/// Ordered bit sequence. Index 0 is the first transmitted bit.
///
/// Bits are stored one per byte (0 or 1); every stage of the chain works on
/// frames of a few hundred bits, where packing buys nothing.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    pub fn ones(len: usize) -> Self {
        Self { bits: vec![1; len] }
    }

    /// Builds a vector from 0/1 bytes. Any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            bits: bits.iter().map(|&b| (b != 0) as u8).collect(),
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self {
            bits: bits.iter().map(|&b| b as u8).collect(),
        }
    }

    /// `width` bits of `value`, MSB first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut v = Self::new();
        v.push_uint(value, width);
        v
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.bits[i] = (bit != 0) as u8;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn push(&mut self, bit: u8) {
        self.bits.push((bit != 0) as u8);
    }

    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        for k in (0..width).rev() {
            self.bits.push(((value >> k) & 1) as u8);
        }
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Reads `range` as an unsigned integer, MSB first.
    pub fn read_uint(&self, range: Range<usize>) -> u64 {
        assert!(range.len() <= 64);
        self.bits[range]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn slice(&self, range: Range<usize>) -> BitVector {
        Self {
            bits: self.bits[range].to_vec(),
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len(), other.len());
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Hex rendering, MSB first, zero-padded at the end to a multiple of 4 bits.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|nib| {
                let v = (0..4).fold(0u32, |acc, k| (acc << 1) | *nib.get(k).unwrap_or(&0) as u32);
                char::from_digit(v, 16).unwrap().to_ascii_uppercase()
            })
            .collect()
    }

    /// Parses exactly `ceil(len / 4)` hex digits into `len` bits. Padding bits
    /// beyond `len` must be zero.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        let digits = len.div_ceil(4);
        if s.len() != digits {
            return Err(Error::Parse(format!(
                "expected {digits} hex digits for {len} bits, got {}",
                s.len()
            )));
        }
        let mut bits = Vec::with_capacity(digits * 4);
        for c in s.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for k in (0..4).rev() {
                bits.push(((v >> k) & 1) as u8);
            }
        }
        if bits[len..].iter().any(|&b| b != 0) {
            return Err(Error::Parse("nonzero padding bits".into()));
        }
        bits.truncate(len);
        Ok(Self { bits })
    }
}

impl Index<usize> for BitVector {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        assert_eq!(self.len(), rhs.len(), "xor of unequal-length bit vectors");
        BitVector {
            bits: self.bits.iter().zip(&rhs.bits).map(|(a, b)| a ^ b).collect(),
        }
    }
}

impl FromIterator<u8> for BitVector {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().map(|b| (b != 0) as u8).collect(),
        }
    }
}

impl From<Vec<u8>> for BitVector {
    fn from(bits: Vec<u8>) -> Self {
        Self::from_bits(&bits)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}](", self.len())?;
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}
