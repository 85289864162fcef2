//! End-to-end transmitter and receiver built from the individual stages.
//!
//! TX: encapsulate -> scramble -> insert frozen bits -> polar encode.
//! RX: LLR front end -> SC decode -> descramble -> decapsulate.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::channel::{exact_llr, hard_llr, ChannelConfig};
use crate::error::{Error, Result};
use crate::frame::{self, Decapsulated, FrameConfig, DEFAULT_FRAME_TYPE, FRAME_BITS};
use crate::polar::{self, Encoding, Kernel, LlrValue, PolarCode, ScDecoder};
use crate::quantizer::{self, compute_thresholds, LlrMapping, Polarity, ThresholdSet};
use crate::scrambler::{self, ScramblerConfig};

/// How received samples become decoder LLRs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverMode {
    /// Float Gaussian LLRs from the true channel parameters.
    Exact,
    /// 3-bit soft-decision filter with the 9-bit transformer.
    #[default]
    #[serde(rename = "3bit")]
    ThreeBit,
    /// Nearest-level decisions as +-1 LLRs.
    Hard,
}

impl std::str::FromStr for ReceiverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "3bit" | "three-bit" => Ok(Self::ThreeBit),
            "hard" => Ok(Self::Hard),
            other => Err(Error::Parse(format!("unknown receiver mode {other:?}"))),
        }
    }
}

/// Sample-to-LLR front end.
#[derive(Debug, Clone, PartialEq)]
pub enum Demapper {
    Exact(ChannelConfig),
    ThreeBit { thresholds: ThresholdSet, mapping: LlrMapping },
    Hard(ChannelConfig),
}

impl Demapper {
    /// Builds the front end for `mode`. For the 3-bit filter the peaks default
    /// to the nominal OOK levels.
    pub fn new(
        mode: ReceiverMode,
        channel: &ChannelConfig,
        peaks: Option<(f64, f64)>,
        mapping: LlrMapping,
    ) -> Result<Self> {
        Ok(match mode {
            ReceiverMode::Exact => Self::Exact(*channel),
            ReceiverMode::Hard => Self::Hard(*channel),
            ReceiverMode::ThreeBit => {
                let (plus, minus) = peaks.unwrap_or((channel.level1, channel.level0));
                let thresholds = compute_thresholds(plus, minus)?.with_polarity(Polarity::HighIsOne);
                Self::ThreeBit { thresholds, mapping }
            }
        })
    }

    pub fn llr(&self, sample: f64) -> LlrValue {
        match self {
            Self::Exact(cfg) => exact_llr(sample, cfg),
            Self::Hard(cfg) => hard_llr(sample, cfg),
            Self::ThreeBit { thresholds, mapping } => {
                quantizer::transform(quantizer::quantize_sample(sample, thresholds, mapping)).to_f64()
            }
        }
    }

    pub fn llrs_into(&self, samples: &[f64], out: &mut Vec<LlrValue>) {
        out.clear();
        out.extend(samples.iter().map(|&s| self.llr(s)));
    }
}

/// Everything the transmitter and receiver agree on.
#[derive(Debug, Clone)]
pub struct Chain {
    pub frame: FrameConfig,
    pub frame_type: u8,
    /// `None` bypasses the pre-scrambler.
    pub scrambler: Option<ScramblerConfig>,
    pub code: PolarCode,
    pub encoding: Encoding,
    pub kernel: Kernel,
    keystream: Option<BitVector>,
}

impl Chain {
    pub fn new(
        frame: FrameConfig,
        frame_type: u8,
        scrambler: Option<ScramblerConfig>,
        code: PolarCode,
        encoding: Encoding,
        kernel: Kernel,
    ) -> Result<Self> {
        frame.validate()?;
        if code.k() != FRAME_BITS {
            return Err(Error::InvalidCode(format!(
                "message length K={} must equal the {FRAME_BITS}-bit frame",
                code.k()
            )));
        }
        let keystream = scrambler.as_ref().map(|s| scrambler::keystream(FRAME_BITS, s));
        Ok(Self { frame, frame_type, scrambler, code, encoding, kernel, keystream })
    }

    /// The (256;158) chain with every default.
    pub fn beacon_default() -> Self {
        let code = polar::construct_code(256, FRAME_BITS, polar::DEFAULT_DESIGN_DB)
            .expect("default code is valid");
        Self::new(
            FrameConfig::default(),
            DEFAULT_FRAME_TYPE,
            Some(ScramblerConfig::default()),
            code,
            Encoding::NonSystematic,
            Kernel::MinSum,
        )
        .expect("default chain is valid")
    }

    pub fn with_scrambler(&self, scrambler: Option<ScramblerConfig>) -> Self {
        let keystream = scrambler.as_ref().map(|s| scrambler::keystream(FRAME_BITS, s));
        Self { scrambler, keystream, ..self.clone() }
    }

    pub fn with_encoding(&self, encoding: Encoding) -> Self {
        Self { encoding, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn rate(&self) -> f64 {
        self.code.rate()
    }

    pub fn encapsulate(&self, payload: &BitVector) -> Result<BitVector> {
        frame::encapsulate(payload, self.frame_type, &self.frame)
    }

    /// Scramble, insert frozen bits and encode an already-built frame.
    pub fn encode_frame(&self, frame_bits: &BitVector) -> Result<BitVector> {
        if frame_bits.len() != FRAME_BITS {
            return Err(Error::FrameLength);
        }
        let mut msg = frame_bits.clone();
        if let Some(ks) = &self.keystream {
            scrambler::apply_keystream(msg.as_mut_slice(), ks);
        }
        polar::encode(&msg, &self.code, self.encoding)
    }

    /// Payload to codeword.
    pub fn transmit(&self, payload: &BitVector) -> Result<BitVector> {
        self.encode_frame(&self.encapsulate(payload)?)
    }

    /// Decodes LLRs back to the (descrambled) 158-bit frame.
    pub fn decode_frame(&self, decoder: &mut ScDecoder, llrs: &[LlrValue]) -> Result<BitVector> {
        let out = decoder.decode(llrs)?;
        let mut msg = out.message(&self.code, self.encoding);
        if let Some(ks) = &self.keystream {
            scrambler::apply_keystream(msg.as_mut_slice(), ks);
        }
        Ok(msg)
    }

    pub fn receive(&self, decoder: &mut ScDecoder, llrs: &[LlrValue]) -> Result<Decapsulated> {
        let frame_bits = self.decode_frame(decoder, llrs)?;
        frame::decapsulate(&frame_bits, &self.frame)
    }

    pub fn decoder(&self) -> ScDecoder {
        ScDecoder::new(self.code.clone(), self.kernel)
    }
}
