//! 158-bit beacon frame: 6-bit preamble, 8-bit frame type, 128-bit ID
//! payload and a 16-bit CRC, MSB first within each field.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

pub const PREAMBLE_BITS: usize = 6;
pub const FRAME_TYPE_BITS: usize = 8;
pub const PAYLOAD_BITS: usize = 128;
pub const CRC_BITS: usize = 16;
pub const FRAME_BITS: usize = PREAMBLE_BITS + FRAME_TYPE_BITS + PAYLOAD_BITS + CRC_BITS;

pub const FRAME_TYPE_OFFSET: usize = PREAMBLE_BITS;
pub const PAYLOAD_OFFSET: usize = FRAME_TYPE_OFFSET + FRAME_TYPE_BITS;
pub const CRC_OFFSET: usize = PAYLOAD_OFFSET + PAYLOAD_BITS;

pub const DEFAULT_PREAMBLE: u8 = 0b10_1010;
pub const DEFAULT_FRAME_TYPE: u8 = 0x01;

/// Non-reflected 16-bit CRC parameters. Defaults to CRC-16/CCITT-FALSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcParams {
    pub poly: u16,
    pub init: u16,
    pub xorout: u16,
}

impl Default for CrcParams {
    fn default() -> Self {
        Self {
            poly: 0x1021,
            init: 0xFFFF,
            xorout: 0x0000,
        }
    }
}

/// Which bits the CRC field protects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrcCoverage {
    /// Preamble, frame type and payload (first 142 bits).
    #[default]
    SofAndPayload,
    PayloadOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub preamble: u8,
    pub crc: CrcParams,
    pub coverage: CrcCoverage,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            preamble: DEFAULT_PREAMBLE,
            crc: CrcParams::default(),
            coverage: CrcCoverage::default(),
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.preamble >> PREAMBLE_BITS != 0 {
            return Err(Error::InvalidArgument(format!(
                "preamble 0x{:x} does not fit in {PREAMBLE_BITS} bits",
                self.preamble
            )));
        }
        Ok(())
    }

    fn crc_range(&self) -> std::ops::Range<usize> {
        match self.coverage {
            CrcCoverage::SofAndPayload => 0..CRC_OFFSET,
            CrcCoverage::PayloadOnly => PAYLOAD_OFFSET..CRC_OFFSET,
        }
    }
}

/// Bit-serial CRC over an arbitrary-length bit sequence (no byte alignment).
pub fn crc16_with(data: &[u8], params: &CrcParams) -> Result<u16> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut reg = params.init;
    for &bit in data {
        let feedback = ((reg >> 15) as u8 ^ bit) & 1;
        reg <<= 1;
        if feedback == 1 {
            reg ^= params.poly;
        }
    }
    Ok(reg ^ params.xorout)
}

/// CRC-16/CCITT-FALSE of `data`.
pub fn crc16(data: &BitVector) -> Result<u16> {
    crc16_with(data.as_slice(), &CrcParams::default())
}

/// Parsed fields of a received frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaconFrame {
    pub preamble: u8,
    pub frame_type: u8,
    pub payload: BitVector,
    pub crc: u16,
}

impl BeaconFrame {
    pub fn new(payload: BitVector, frame_type: u8, cfg: &FrameConfig) -> Result<Self> {
        if payload.len() != PAYLOAD_BITS {
            return Err(Error::PayloadLength);
        }
        let mut frame = Self {
            preamble: cfg.preamble,
            frame_type,
            payload,
            crc: 0,
        };
        let bits = frame.to_bits();
        frame.crc = crc16_with(&bits.as_slice()[cfg.crc_range()], &cfg.crc)?;
        Ok(frame)
    }

    pub fn to_bits(&self) -> BitVector {
        let mut bits = BitVector::new();
        bits.push_uint(self.preamble as u64, PREAMBLE_BITS);
        bits.push_uint(self.frame_type as u64, FRAME_TYPE_BITS);
        bits.extend_from(&self.payload);
        bits.push_uint(self.crc as u64, CRC_BITS);
        bits
    }

    pub fn from_bits(bits: &BitVector) -> Result<Self> {
        if bits.len() != FRAME_BITS {
            return Err(Error::FrameLength);
        }
        Ok(Self {
            preamble: bits.read_uint(0..FRAME_TYPE_OFFSET) as u8,
            frame_type: bits.read_uint(FRAME_TYPE_OFFSET..PAYLOAD_OFFSET) as u8,
            payload: bits.slice(PAYLOAD_OFFSET..CRC_OFFSET),
            crc: bits.read_uint(CRC_OFFSET..FRAME_BITS) as u16,
        })
    }
}

/// Result of [`decapsulate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decapsulated {
    pub payload: BitVector,
    pub frame_type: u8,
    pub crc_ok: bool,
    pub preamble_ok: bool,
}

pub fn encapsulate(payload: &BitVector, frame_type: u8, cfg: &FrameConfig) -> Result<BitVector> {
    Ok(BeaconFrame::new(payload.clone(), frame_type, cfg)?.to_bits())
}

pub fn decapsulate(frame: &BitVector, cfg: &FrameConfig) -> Result<Decapsulated> {
    let parsed = BeaconFrame::from_bits(frame)?;
    let expected = crc16_with(&frame.as_slice()[cfg.crc_range()], &cfg.crc)?;
    Ok(Decapsulated {
        crc_ok: expected == parsed.crc,
        preamble_ok: parsed.preamble == cfg.preamble,
        payload: parsed.payload,
        frame_type: parsed.frame_type,
    })
}
