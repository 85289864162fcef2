//! Additive Fibonacci LFSR scrambler. The default generating polynomial is
//! x^4 + x^3 + 1: four registers and one XOR.
//!
//! Register bit `k - 1` holds the value delayed by `k` steps. Each clock
//! emits the bit in the highest-degree register, computes the feedback as
//! the parity of the tapped registers and shifts it in at the bottom. The
//! register is reset to the seed at the start of every frame.

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Coefficient mask of x^4 + x^3 + 1 (bit q set when c_q = 1).
pub const DEFAULT_POLYNOMIAL: u32 = 0b1_1001;
pub const DEFAULT_SEED: u32 = 0b1111;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LfsrState(u32);

impl LfsrState {
    pub fn new(bits: u32) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScramblerConfig {
    polynomial: u32,
    degree: u32,
    seed: u32,
}

impl Default for ScramblerConfig {
    fn default() -> Self {
        Self::new(DEFAULT_POLYNOMIAL, DEFAULT_SEED).expect("default scrambler is valid")
    }
}

impl ScramblerConfig {
    /// `polynomial` is the coefficient mask of P(x); bit 0 (c_0) must be set.
    pub fn new(polynomial: u32, seed: u32) -> Result<Self> {
        if polynomial & 1 == 0 {
            return Err(Error::InvalidPolynomial("c_0 must be 1".into()));
        }
        let degree = 31 - polynomial.leading_zeros();
        if degree == 0 {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        if degree > 31 {
            return Err(Error::InvalidPolynomial("degree must be at most 31".into()));
        }
        if seed == 0 {
            return Err(Error::DegenerateLfsr);
        }
        if seed >> degree != 0 {
            return Err(Error::InvalidArgument(format!(
                "seed 0x{seed:x} wider than {degree} registers"
            )));
        }
        Ok(Self {
            polynomial,
            degree,
            seed,
        })
    }

    pub fn with_seed(self, seed: u32) -> Result<Self> {
        Self::new(self.polynomial, seed)
    }

    pub fn polynomial(&self) -> u32 {
        self.polynomial
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }

    fn register_mask(&self) -> u32 {
        (1u32 << self.degree) - 1
    }

    /// Registers feeding the XOR: c_q for q >= 1 lands on register bit q - 1.
    fn tap_mask(&self) -> u32 {
        (self.polynomial >> 1) & self.register_mask()
    }
}

/// One clock of the LFSR: returns the emitted keystream bit and the next state.
pub fn lfsr_next(state: LfsrState, cfg: &ScramblerConfig) -> Result<(u8, LfsrState)> {
    if state.0 == 0 {
        return Err(Error::DegenerateLfsr);
    }
    Ok(step(state.0, cfg))
}

#[inline]
fn step(reg: u32, cfg: &ScramblerConfig) -> (u8, LfsrState) {
    let out = ((reg >> (cfg.degree - 1)) & 1) as u8;
    let feedback = (reg & cfg.tap_mask()).count_ones() & 1;
    let next = ((reg << 1) | feedback) & cfg.register_mask();
    (out, LfsrState(next))
}

/// First `len` keystream bits from the configured seed.
pub fn keystream(len: usize, cfg: &ScramblerConfig) -> BitVector {
    let mut reg = cfg.seed;
    (0..len)
        .map(|_| {
            let (bit, next) = step(reg, cfg);
            reg = next.0;
            bit
        })
        .collect()
}

pub fn scramble(data: &BitVector, cfg: &ScramblerConfig) -> BitVector {
    data ^ &keystream(data.len(), cfg)
}

/// Identical to [`scramble`]: the additive scrambler is its own inverse.
pub fn descramble(data: &BitVector, cfg: &ScramblerConfig) -> BitVector {
    scramble(data, cfg)
}

/// Applies the keystream in place. Used on hot paths where `keystream` has
/// been computed once per run.
pub fn apply_keystream(data: &mut [u8], keystream: &BitVector) {
    assert_eq!(data.len(), keystream.len());
    for (d, k) in data.iter_mut().zip(keystream.iter()) {
        *d ^= k;
    }
}
