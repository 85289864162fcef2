//! OOK modulation, AWGN and the exact Gaussian LLR receiver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::polar::{LlrValue, LLR_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// OOK "off" level (bit 0), volts.
    pub level0: f64,
    /// OOK "on" level (bit 1), volts.
    pub level1: f64,
    /// Noise std on the "off" level; also used for "on" unless `noise_sigma1` is set.
    pub noise_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma1: Option<f64>,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            level0: -1.0,
            level1: 1.0,
            noise_sigma: 1.0,
            noise_sigma1: None,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level1 > self.level0) {
            return Err(Error::InvalidArgument("level1 must exceed level0".into()));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument("noise_sigma must be positive".into()));
        }
        if let Some(s1) = self.noise_sigma1 {
            if !(s1 > 0.0) || !s1.is_finite() {
                return Err(Error::InvalidArgument("noise_sigma1 must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn sigma0(&self) -> f64 {
        self.noise_sigma
    }

    pub fn sigma1(&self) -> f64 {
        self.noise_sigma1.unwrap_or(self.noise_sigma)
    }

    pub fn separation(&self) -> f64 {
        self.level1 - self.level0
    }

    pub fn midpoint(&self) -> f64 {
        (self.level0 + self.level1) / 2.0
    }

    /// Same config with the noise set for the given per-information-bit SNR.
    pub fn at_eb_n0(&self, eb_n0_db: f64, code_rate: f64) -> Result<Self> {
        let sigma = eb_n0_to_sigma(eb_n0_db, code_rate, self)?;
        Ok(Self { noise_sigma: sigma, noise_sigma1: None, ..*self })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleBlock {
    pub samples: Vec<f64>,
}

impl SampleBlock {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn ook_modulate(bits: &BitVector, cfg: &ChannelConfig) -> SampleBlock {
    SampleBlock {
        samples: bits
            .iter()
            .map(|b| if b == 0 { cfg.level0 } else { cfg.level1 })
            .collect(),
    }
}

/// Channel instance owning its noise stream.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    rng: ChaCha8Rng,
}

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed) })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Adds i.i.d. N(0, noise_sigma^2) to every sample.
    pub fn awgn(&mut self, block: &SampleBlock) -> SampleBlock {
        let sigma = self.cfg.noise_sigma;
        SampleBlock {
            samples: block
                .samples
                .iter()
                .map(|&s| s + sigma * standard_normal(&mut self.rng))
                .collect(),
        }
    }

    /// Modulates and adds noise with the per-level std for each bit.
    pub fn transmit(&mut self, bits: &BitVector) -> SampleBlock {
        let (s0, s1) = (self.cfg.sigma0(), self.cfg.sigma1());
        SampleBlock {
            samples: bits
                .iter()
                .map(|b| {
                    let z = standard_normal(&mut self.rng);
                    if b == 0 {
                        self.cfg.level0 + s0 * z
                    } else {
                        self.cfg.level1 + s1 * z
                    }
                })
                .collect(),
        }
    }
}

#[inline]
pub(crate) fn standard_normal(rng: &mut impl rand::Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `ln P(0|y) / P(1|y)` for Gaussian likelihoods around the two levels with
/// equal priors, saturated at +-LLR_MAX. With equal variances this reduces to
/// `((y - mu1)^2 - (y - mu0)^2) / (2 sigma^2)`.
pub fn exact_llr(sample: f64, cfg: &ChannelConfig) -> LlrValue {
    let (s0, s1) = (cfg.sigma0(), cfg.sigma1());
    let d0 = sample - cfg.level0;
    let d1 = sample - cfg.level1;
    let llr = (s1 / s0).ln() + d1 * d1 / (2.0 * s1 * s1) - d0 * d0 / (2.0 * s0 * s0);
    if llr.is_nan() {
        0.0
    } else {
        llr.clamp(-LLR_MAX, LLR_MAX)
    }
}

/// Hard-decision LLR: +-1 by nearest level, ties to bit 0.
pub fn hard_llr(sample: f64, cfg: &ChannelConfig) -> LlrValue {
    if sample > cfg.midpoint() {
        -1.0
    } else {
        1.0
    }
}

/// Noise std for a per-information-bit SNR:
/// `sigma = (delta / 2) * 10^(-(EbN0_dB + 10 log10 R) / 20) * sqrt(1/2)`,
/// i.e. `Es = (delta/2)^2`, `Es/N0 = R Eb/N0`, `sigma^2 = N0 / 2`.
pub fn eb_n0_to_sigma(eb_n0_db: f64, code_rate: f64, cfg: &ChannelConfig) -> Result<f64> {
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("code rate {code_rate} outside (0, 1]")));
    }
    if !eb_n0_db.is_finite() {
        return Err(Error::InvalidArgument("Eb/N0 must be finite".into()));
    }
    let es_n0_db = eb_n0_db + 10.0 * code_rate.log10();
    Ok(cfg.separation() / 2.0 * 10f64.powf(-es_n0_db / 20.0) * 0.5f64.sqrt())
}
