//! 3-bit soft-decision filter: seven thresholds derived from the peak
//! levels, an eight-region comparator bank, a region-to-LLR lookup table
//! and the 9-bit fixed-point transformer that feeds the decoder.
//!
//! Regions are numbered 0..8 from the most confident 0-side to the most
//! confident 1-side, matching the lookup table order. A sample lying exactly
//! on a threshold goes to the lower-numbered region.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::LlrValue;

pub const REGIONS: usize = 8;

/// Default region LLRs, region 0 first.
pub const DEFAULT_LLR_TABLE: [LlrValue; REGIONS] =
    [1.2017, 0.3630, 0.2185, 0.0656, -0.0702, -0.2116, -0.3547, -1.1943];

/// Which voltage extreme carries bit 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Low level is bit 0 (OOK "off" = 0). Region 0 is the lowest band.
    #[default]
    HighIsOne,
    /// Inverting front end: region 0 is the highest band.
    HighIsZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSet {
    /// `v_t-3 .. v_t+3`, ascending.
    levels: [f64; 7],
    peak_plus: f64,
    peak_minus: f64,
    polarity: Polarity,
}

impl ThresholdSet {
    pub fn levels(&self) -> &[f64; 7] {
        &self.levels
    }

    pub fn midpoint(&self) -> f64 {
        self.levels[3]
    }

    pub fn peaks(&self) -> (f64, f64) {
        (self.peak_plus, self.peak_minus)
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    /// Comparator bank output: region index in `0..8`.
    pub fn region(&self, sample: f64) -> usize {
        match self.polarity {
            Polarity::HighIsOne => self.levels.iter().filter(|&&t| t < sample).count(),
            Polarity::HighIsZero => self.levels.iter().filter(|&&t| t > sample).count(),
        }
    }
}

/// `v_t` is the midpoint of the peaks; the other six thresholds are spaced
/// by a quarter of the half-swing on either side.
pub fn compute_thresholds(v_peak_plus: f64, v_peak_minus: f64) -> Result<ThresholdSet> {
    if !(v_peak_plus > v_peak_minus) || !v_peak_plus.is_finite() || !v_peak_minus.is_finite() {
        return Err(Error::DegeneratePeaks);
    }
    let vt = (v_peak_plus + v_peak_minus) / 2.0;
    let step = (v_peak_plus - vt) / 4.0;
    let mut levels = [0.0; 7];
    for (slot, k) in levels.iter_mut().zip(-3i32..=3) {
        *slot = vt + k as f64 * step;
    }
    Ok(ThresholdSet {
        levels,
        peak_plus: v_peak_plus,
        peak_minus: v_peak_minus,
        polarity: Polarity::default(),
    })
}

/// Peak levels as the max/min of a training prefix.
pub fn estimate_peaks(training: &[f64]) -> Result<(f64, f64)> {
    if training.is_empty() {
        return Err(Error::EmptyData);
    }
    let hi = training.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = training.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((hi, lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrMapping {
    values: [LlrValue; REGIONS],
}

impl Default for LlrMapping {
    fn default() -> Self {
        Self { values: DEFAULT_LLR_TABLE }
    }
}

impl LlrMapping {
    /// Table must be finite and non-increasing from region 0 to region 7.
    pub fn new(values: [LlrValue; REGIONS]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("LLR table entries must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("LLR table must be non-increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[LlrValue; REGIONS] {
        &self.values
    }

    pub fn llr(&self, region: usize) -> LlrValue {
        self.values[region]
    }

    /// Eight lines of `region llr`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (r, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{r} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = [f64::NAN; REGIONS];
        let mut seen = [false; REGIONS];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut parts = line.split_whitespace();
            let (Some(r), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("expected `region llr`, got {line:?}")));
            };
            let r: usize = r.parse().map_err(|_| Error::Parse(format!("bad region {r:?}")))?;
            let v: f64 = v.parse().map_err(|_| Error::Parse(format!("bad LLR {v:?}")))?;
            if r >= REGIONS || seen[r] {
                return Err(Error::Parse(format!("region {r} out of range or repeated")));
            }
            seen[r] = true;
            values[r] = v;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse("mapping needs all 8 regions".into()));
        }
        Self::new(values)
    }
}

pub fn quantize_sample(sample: f64, thr: &ThresholdSet, map: &LlrMapping) -> LlrValue {
    map.llr(thr.region(sample))
}

/// 9-bit two's-complement LLR in Q2.6: range [-4, 4 - 1/64], step 1/64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LlrFixed(i16);

impl LlrFixed {
    pub const FRAC_BITS: u32 = 6;
    pub const MIN_RAW: i16 = -256;
    pub const MAX_RAW: i16 = 255;
    pub const STEP: f64 = 1.0 / 64.0;

    pub fn from_raw(raw: i16) -> Result<Self> {
        if !(Self::MIN_RAW..=Self::MAX_RAW).contains(&raw) {
            return Err(Error::InvalidArgument(format!("raw value {raw} outside 9 bits")));
        }
        Ok(Self(raw))
    }

    pub fn raw(self) -> i16 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 * Self::STEP
    }
}

/// Round-half-even to the nearest multiple of 1/64, saturating at the range
/// ends. NaN maps to 0.
pub fn transform(llr: LlrValue) -> LlrFixed {
    if llr.is_nan() {
        return LlrFixed(0);
    }
    let scaled = (llr * 64.0).round_ties_even();
    LlrFixed(scaled.clamp(LlrFixed::MIN_RAW as f64, LlrFixed::MAX_RAW as f64) as i16)
}

pub fn quantize_frame(
    samples: &[f64],
    n: usize,
    thr: &ThresholdSet,
    map: &LlrMapping,
) -> Result<Vec<LlrFixed>> {
    if samples.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: samples.len() });
    }
    Ok(samples
        .iter()
        .map(|&s| transform(quantize_sample(s, thr, map)))
        .collect())
}

/// Per-region empirical LLR `ln(#zeros / #ones)` from labelled samples, with
/// add-one smoothing so empty regions stay finite. The result is forced
/// non-increasing by pooling adjacent violators.
pub fn calibrate_mapping(samples: &[(f64, u8)], thr: &ThresholdSet) -> Result<LlrMapping> {
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut counts = [[1.0f64; 2]; REGIONS];
    for &(y, bit) in samples {
        counts[thr.region(y)][(bit != 0) as usize] += 1.0;
    }
    // Pool-adjacent-violators on the log ratio.
    let mut blocks: Vec<([f64; 2], usize)> = Vec::with_capacity(REGIONS);
    for c in counts {
        blocks.push((c, 1));
        while blocks.len() >= 2 {
            let (b, a) = (blocks[blocks.len() - 1], blocks[blocks.len() - 2]);
            if (b.0[0] / b.0[1]).ln() > (a.0[0] / a.0[1]).ln() {
                blocks.pop();
                let last = blocks.last_mut().unwrap();
                last.0 = [a.0[0] + b.0[0], a.0[1] + b.0[1]];
                last.1 += b.1;
            } else {
                break;
            }
        }
    }
    let mut values = [0.0; REGIONS];
    let mut r = 0;
    for (c, width) in blocks {
        for _ in 0..width {
            values[r] = (c[0] / c[1]).ln();
            r += 1;
        }
    }
    LlrMapping::new(values)
}
