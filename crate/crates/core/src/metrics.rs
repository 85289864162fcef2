//! Flicker statistics, BER/FER aggregation, the Monte-Carlo harness and the
//! throughput/energy/area calculators.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::chain::{Chain, Demapper, ReceiverMode};
use crate::channel::{standard_normal, ChannelConfig};
use crate::error::{Error, Result};
use crate::frame::{FRAME_BITS, PAYLOAD_BITS};
use crate::polar::Encoding;
use crate::quantizer::LlrMapping;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Percentage of ones in `frame`.
pub fn bit_ratio(frame: &BitVector) -> Result<f64> {
    if frame.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(100.0 * frame.count_ones() as f64 / frame.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunLengthStats {
    pub max_run: usize,
    pub max_run_zeros: usize,
    pub max_run_ones: usize,
    /// run length -> number of runs, both symbols.
    pub histogram: BTreeMap<usize, usize>,
    pub zeros_histogram: BTreeMap<usize, usize>,
    pub ones_histogram: BTreeMap<usize, usize>,
}

impl RunLengthStats {
    pub fn run_count(&self) -> usize {
        self.histogram.values().sum()
    }
}

pub fn run_length_stats(frame: &BitVector) -> Result<RunLengthStats> {
    if frame.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut stats = RunLengthStats::default();
    let bits = frame.as_slice();
    let mut start = 0;
    for i in 1..=bits.len() {
        if i == bits.len() || bits[i] != bits[start] {
            let len = i - start;
            *stats.histogram.entry(len).or_default() += 1;
            if bits[start] == 0 {
                *stats.zeros_histogram.entry(len).or_default() += 1;
                stats.max_run_zeros = stats.max_run_zeros.max(len);
            } else {
                *stats.ones_histogram.entry(len).or_default() += 1;
                stats.max_run_ones = stats.max_run_ones.max(len);
            }
            start = i;
        }
    }
    stats.max_run = stats.max_run_zeros.max(stats.max_run_ones);
    Ok(stats)
}

/// Longest run of identical symbols; allocation-free.
pub fn max_run(bits: &[u8]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    let mut prev = u8::MAX;
    for &b in bits {
        cur = if b == prev { cur + 1 } else { 1 };
        prev = b;
        best = best.max(cur);
    }
    best
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlickerFormula {
    /// `F = maxRL / MFTP`.
    #[default]
    Corrected,
    /// `F = 1 / (MFTP * maxRL)` as printed.
    Literal,
}

/// Minimum flicker-free transmit frequency in hertz.
pub fn f_min_flicker(max_run: usize, mftp_s: f64, formula: FlickerFormula) -> Result<f64> {
    if max_run == 0 || !(mftp_s > 0.0) {
        return Err(Error::InvalidArgument("max_run and MFTP must be positive".into()));
    }
    Ok(match formula {
        FlickerFormula::Corrected => max_run as f64 / mftp_s,
        FlickerFormula::Literal => 1.0 / (mftp_s * max_run as f64),
    })
}

/// Wilson score interval `(low, high)` for `successes` out of `n` at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: u64,
    pub bits_per_frame: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Frames whose recovered CRC did not check.
    pub crc_failures: u64,
}

impl TrialReport {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.trials * self.bits_per_frame) as f64
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.trials as f64
    }

    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.trials)
    }

    pub fn ber_interval(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.trials * self.bits_per_frame)
    }

    /// Half-width of the FER Wilson interval.
    pub fn fer_half_width(&self) -> f64 {
        let (lo, hi) = self.fer_interval();
        (hi - lo) / 2.0
    }
}

/// One receiver configuration evaluated by [`paired_monte_carlo`].
#[derive(Debug, Clone)]
pub struct Variant {
    pub chain: Chain,
    pub mode: ReceiverMode,
    pub peaks: Option<(f64, f64)>,
    pub mapping: LlrMapping,
}

impl Variant {
    pub fn new(chain: Chain, mode: ReceiverMode) -> Self {
        Self { chain, mode, peaks: None, mapping: LlrMapping::default() }
    }
}

/// Generator for trial `index` under `master_seed`. Each trial owns a
/// ChaCha stream, so results do not depend on scheduling.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn random_payload(rng: &mut impl Rng) -> BitVector {
    (0..PAYLOAD_BITS).map(|_| rng.random_range(0..2u8)).collect()
}

/// Runs every variant on the same payloads and the same unit-variance noise
/// draws per trial, so their error counts are directly comparable. Noise is
/// applied relative to the sent level (`+z` on a 0, `-z` on a 1); this is
/// still AWGN, and a symmetric receiver then makes the same codeword errors
/// whatever the codeword. The channel's seed field is ignored; `master_seed`
/// drives everything.
pub fn paired_monte_carlo(
    variants: &[Variant],
    channel: &ChannelConfig,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<TrialReport>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if variants.is_empty() {
        return Err(Error::InvalidArgument("no variants".into()));
    }
    channel.validate()?;
    let n = variants[0].chain.n();
    if variants.iter().any(|v| v.chain.n() != n) {
        return Err(Error::InvalidArgument("variants must share the block length".into()));
    }
    let demappers: Vec<Demapper> = variants
        .iter()
        .map(|v| Demapper::new(v.mode, channel, v.peaks, v.mapping))
        .collect::<Result<_>>()?;
    let (s0, s1) = (channel.sigma0(), channel.sigma1());

    let zero = vec![[0u64; 3]; variants.len()];
    let totals = (0..trials)
        .into_par_iter()
        .map_init(
            || {
                let decoders: Vec<_> = variants.iter().map(|v| v.chain.decoder()).collect();
                (decoders, Vec::with_capacity(n), Vec::with_capacity(n))
            },
            |(decoders, samples, llrs), t| -> Result<Vec<[u64; 3]>> {
                let mut rng = trial_rng(master_seed, t);
                let payload = random_payload(&mut rng);
                let noise: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
                let mut counts = Vec::with_capacity(variants.len());
                for ((v, demap), dec) in variants.iter().zip(&demappers).zip(decoders.iter_mut()) {
                    let sent = v.chain.encapsulate(&payload)?;
                    let x = v.chain.encode_frame(&sent)?;
                    samples.clear();
                    samples.extend(x.iter().zip(&noise).map(|(b, z)| {
                        if b == 0 {
                            channel.level0 + s0 * z
                        } else {
                            channel.level1 - s1 * z
                        }
                    }));
                    demap.llrs_into(samples, llrs);
                    let got = v.chain.decode_frame(dec, llrs)?;
                    let errors = got.hamming_distance(&sent) as u64;
                    let crc_fail = !crate::frame::decapsulate(&got, &v.chain.frame)?.crc_ok;
                    counts.push([errors, (errors > 0) as u64, crc_fail as u64]);
                }
                Ok(counts)
            },
        )
        .try_reduce(
            || zero.clone(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for k in 0..3 {
                        x[k] += y[k];
                    }
                }
                Ok(a)
            },
        )?;
    Ok(totals
        .into_iter()
        .map(|[bit_errors, frame_errors, crc_failures]| TrialReport {
            trials,
            bits_per_frame: FRAME_BITS as u64,
            bit_errors,
            frame_errors,
            crc_failures,
        })
        .collect())
}

/// Single-variant harness.
pub fn monte_carlo(
    chain: &Chain,
    mode: ReceiverMode,
    channel: &ChannelConfig,
    trials: u64,
    master_seed: u64,
) -> Result<TrialReport> {
    let v = Variant::new(chain.clone(), mode);
    Ok(paired_monte_carlo(&[v], channel, trials, master_seed)?[0])
}

/// Uncoded OOK reference: hard decisions on the raw 158-bit frame.
pub fn uncoded_monte_carlo(channel: &ChannelConfig, trials: u64, master_seed: u64) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    channel.validate()?;
    let (s0, s1, mid) = (channel.sigma0(), channel.sigma1(), channel.midpoint());
    let (bit_errors, frame_errors) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let mut errors = 0u64;
            for _ in 0..FRAME_BITS {
                let b = rng.random_range(0..2u8);
                let z = standard_normal(&mut rng);
                let y = if b == 0 { channel.level0 + s0 * z } else { channel.level1 + s1 * z };
                errors += ((y > mid) as u8 != b) as u64;
            }
            (errors, (errors > 0) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(TrialReport {
        trials,
        bits_per_frame: FRAME_BITS as u64,
        bit_errors,
        frame_errors,
        crc_failures: frame_errors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitRatioReport {
    pub per_frame: Vec<f64>,
    pub min_pct: f64,
    pub max_pct: f64,
}

impl BitRatioReport {
    pub fn from_ratios(per_frame: Vec<f64>) -> Result<Self> {
        if per_frame.is_empty() {
            return Err(Error::EmptyData);
        }
        let min_pct = per_frame.iter().copied().fold(f64::INFINITY, f64::min);
        let max_pct = per_frame.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { per_frame, min_pct, max_pct })
    }

    pub fn mean_pct(&self) -> f64 {
        self.per_frame.iter().sum::<f64>() / self.per_frame.len() as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadModel {
    /// Every payload bit is independently 0 with the grid probability.
    #[default]
    Bernoulli,
    /// Exactly `round(128 * p)` zeros, shuffled.
    ExactCount,
}

/// Biased 128-bit payload with zero-probability `zero_pct / 100`.
pub fn biased_payload(zero_pct: f64, model: PayloadModel, rng: &mut impl Rng) -> BitVector {
    let p0 = (zero_pct / 100.0).clamp(0.0, 1.0);
    match model {
        PayloadModel::Bernoulli => (0..PAYLOAD_BITS).map(|_| (!rng.random_bool(p0)) as u8).collect(),
        PayloadModel::ExactCount => {
            let zeros = (PAYLOAD_BITS as f64 * p0).round() as usize;
            let mut bits: Vec<u8> = (0..PAYLOAD_BITS).map(|i| (i >= zeros) as u8).collect();
            bits.shuffle(rng);
            BitVector::from(bits)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlickerConfig {
    pub frames_per_point: u64,
    /// Zero-bit percentages to sweep.
    pub zero_pcts: Vec<f64>,
    pub encoding: Encoding,
    /// Whether the ratio columns describe the scrambled chain.
    pub scrambled: bool,
    pub payload_model: PayloadModel,
    pub seed: u64,
}

impl Default for FlickerConfig {
    fn default() -> Self {
        Self {
            frames_per_point: 10_000,
            zero_pcts: (0..=100).map(f64::from).collect(),
            encoding: Encoding::NonSystematic,
            scrambled: true,
            payload_model: PayloadModel::Bernoulli,
            seed: 0x5EED,
        }
    }
}

/// One grid point of a flicker sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlickerRow {
    pub zero_pct: f64,
    /// Extremes of the per-frame one-bit percentage of the reported chain.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Longest run over all frames at this point, with and without the scrambler.
    pub max_run_scrambled: usize,
    pub max_run_plain: usize,
    /// Mean of the per-frame longest run.
    pub mean_max_run_scrambled: f64,
    pub mean_max_run_plain: f64,
}

impl FlickerRow {
    /// `max_run_plain / max_run_scrambled`.
    pub fn gain(&self) -> f64 {
        self.max_run_plain as f64 / self.max_run_scrambled as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlickerSweep {
    pub rows: Vec<FlickerRow>,
}

impl FlickerSweep {
    /// Overall `(min, max)` one-bit percentage across the grid.
    pub fn ratio_range(&self) -> (f64, f64) {
        let lo = self.rows.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min);
        let hi = self.rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn row_at(&self, zero_pct: f64) -> Option<&FlickerRow> {
        self.rows.iter().find(|r| (r.zero_pct - zero_pct).abs() < 1e-9)
    }

    pub fn max_run_scrambled(&self) -> usize {
        self.rows.iter().map(|r| r.max_run_scrambled).max().unwrap_or(0)
    }
}

/// Per-frame statistics of one encoded payload set.
struct PointAccumulator {
    ratios: Vec<f64>,
    max_run_scrambled: usize,
    max_run_plain: usize,
    sum_run_scrambled: u64,
    sum_run_plain: u64,
}

/// Sends `frames_per_point` biased payloads through the transmitter at each
/// grid point, once with and once without the pre-scrambler (same payloads),
/// and collects bit-ratio and run-length statistics of the codewords.
pub fn flicker_sweep(chain: &Chain, cfg: &FlickerConfig) -> Result<FlickerSweep> {
    if cfg.frames_per_point == 0 {
        return Err(Error::InvalidArgument("frames must be at least 1".into()));
    }
    let scrambled_chain = chain
        .with_scrambler(Some(chain.scrambler.unwrap_or_default()))
        .with_encoding(cfg.encoding);
    let plain_chain = chain.with_scrambler(None).with_encoding(cfg.encoding);

    let rows = cfg
        .zero_pcts
        .iter()
        .enumerate()
        .map(|(point, &zero_pct)| {
            let acc = (0..cfg.frames_per_point)
                .into_par_iter()
                .map(|f| -> Result<(f64, usize, usize)> {
                    let mut rng = trial_rng(cfg.seed, ((point as u64) << 40) | f);
                    let payload = biased_payload(zero_pct, cfg.payload_model, &mut rng);
                    let frame = scrambled_chain.encapsulate(&payload)?;
                    let xs = scrambled_chain.encode_frame(&frame)?;
                    let xp = plain_chain.encode_frame(&frame)?;
                    let reported = if cfg.scrambled { &xs } else { &xp };
                    Ok((bit_ratio(reported)?, max_run(xs.as_slice()), max_run(xp.as_slice())))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(
                    PointAccumulator {
                        ratios: Vec::with_capacity(cfg.frames_per_point as usize),
                        max_run_scrambled: 0,
                        max_run_plain: 0,
                        sum_run_scrambled: 0,
                        sum_run_plain: 0,
                    },
                    |mut acc, (ratio, rs, rp)| {
                        acc.ratios.push(ratio);
                        acc.max_run_scrambled = acc.max_run_scrambled.max(rs);
                        acc.max_run_plain = acc.max_run_plain.max(rp);
                        acc.sum_run_scrambled += rs as u64;
                        acc.sum_run_plain += rp as u64;
                        acc
                    },
                );
            let frames = cfg.frames_per_point as f64;
            let report = BitRatioReport::from_ratios(acc.ratios)?;
            Ok(FlickerRow {
                zero_pct,
                min_ratio: report.min_pct,
                max_ratio: report.max_pct,
                mean_ratio: report.mean_pct(),
                max_run_scrambled: acc.max_run_scrambled,
                max_run_plain: acc.max_run_plain,
                mean_max_run_scrambled: acc.sum_run_scrambled as f64 / frames,
                mean_max_run_plain: acc.sum_run_plain as f64 / frames,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlickerSweep { rows })
}

/// Throughput, energy per bit and hardware efficiency, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwMetrics {
    /// b/s
    pub throughput: f64,
    /// J/b
    pub energy_per_bit: f64,
    /// b/s/m^2
    pub hw_efficiency: f64,
}

pub fn hw_metrics(n_bits: f64, latency_s: f64, power_w: f64, area_m2: f64) -> Result<HwMetrics> {
    if [n_bits, latency_s, power_w, area_m2].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("hardware metrics need positive inputs".into()));
    }
    let throughput = n_bits / latency_s;
    Ok(HwMetrics {
        throughput,
        energy_per_bit: power_w / throughput,
        hw_efficiency: throughput / area_m2,
    })
}

/// Same calculators when the throughput is already known.
pub fn hw_metrics_from_throughput(throughput_bps: f64, power_w: f64, area_m2: f64) -> Result<HwMetrics> {
    hw_metrics(throughput_bps, 1.0, power_w, area_m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_ratio_examples() {
        assert_eq!(bit_ratio(&BitVector::ones(12)).unwrap(), 100.0);
        assert_eq!(bit_ratio(&BitVector::from_bits(&[1, 0, 1, 0])).unwrap(), 50.0);
        let half: BitVector = (0..256).map(|i| (i < 128) as u8).collect();
        assert_eq!(bit_ratio(&half).unwrap(), 50.0);
        assert_eq!(bit_ratio(&BitVector::new()), Err(Error::EmptyData));
    }

    #[test]
    fn run_length_examples() {
        let s = run_length_stats(&BitVector::from_bits(&[1, 1, 1, 0])).unwrap();
        assert_eq!((s.max_run, s.max_run_ones, s.max_run_zeros), (3, 3, 1));
        assert_eq!(s.histogram, BTreeMap::from([(1, 1), (3, 1)]));

        let manchester: BitVector = (0..64).flat_map(|i| if i % 3 == 0 { [1, 0] } else { [0, 1] }).collect();
        assert!(run_length_stats(&manchester).unwrap().max_run <= 2);
        assert_eq!(max_run(manchester.as_slice()), 2);

        let flat = run_length_stats(&BitVector::zeros(256)).unwrap();
        assert_eq!(flat.max_run, 256);
        assert_eq!(flat.run_count(), 1);
        assert!(run_length_stats(&BitVector::new()).is_err());
    }

    #[test]
    fn run_count_is_alternations_plus_one() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..50 {
            let v: BitVector = (0..200).map(|_| rng.random_range(0..2u8)).collect();
            let s = run_length_stats(&v).unwrap();
            let alternations = (1..v.len()).filter(|&i| v[i] != v[i - 1]).count();
            assert_eq!(s.run_count(), alternations + 1);
            assert_eq!(s.max_run, max_run(v.as_slice()));
            let covered: usize = s.histogram.iter().map(|(len, c)| len * c).sum();
            assert_eq!(covered, 200);
        }
    }

    #[test]
    fn flicker_frequency() {
        assert_eq!(f_min_flicker(1, 5e-3, FlickerFormula::Corrected).unwrap(), 200.0);
        let f12 = f_min_flicker(12, 5e-3, FlickerFormula::Corrected).unwrap();
        let f13 = f_min_flicker(13, 5e-3, FlickerFormula::Corrected).unwrap();
        assert!(f12 <= 2500.0 && 2500.0 <= f13);
        assert_eq!(f_min_flicker(14, 5e-3, FlickerFormula::Corrected).unwrap(), 2.0 * f_min_flicker(7, 5e-3, FlickerFormula::Corrected).unwrap());
        assert!((f_min_flicker(4, 5e-3, FlickerFormula::Literal).unwrap() - 50.0).abs() < 1e-9);
        assert!(f_min_flicker(0, 5e-3, FlickerFormula::Corrected).is_err());
        assert!(f_min_flicker(3, 0.0, FlickerFormula::Corrected).is_err());
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(30, 1000);
        assert!(lo < 0.03 && 0.03 < hi);
        let (lo, hi) = wilson_interval(0, 10_000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 4e-4);
    }

    #[test]
    fn hardware_calculators() {
        let tx = hw_metrics_from_throughput(15.38e6, 1.3137e-3, 48_761.39e-12).unwrap();
        assert!((tx.energy_per_bit * 1e12 - 85.42).abs() < 0.005);
        assert!((tx.hw_efficiency / 1e12 - 315.41).abs() < 0.005);
        let doubled = hw_metrics_from_throughput(15.38e6, 2.6274e-3, 48_761.39e-12).unwrap();
        assert!((doubled.energy_per_bit - 2.0 * tx.energy_per_bit).abs() < 1e-20);
        let m = hw_metrics(256.0, 386.0 / 25e6, 3.5022e-3, 573_724.56e-12).unwrap();
        assert!((m.throughput / 1e6 - 16.58).abs() < 0.005);
        assert!(hw_metrics(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(hw_metrics(1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn exact_count_payload_has_exact_zeros() {
        let mut rng = trial_rng(2, 0);
        let p = biased_payload(25.0, PayloadModel::ExactCount, &mut rng);
        assert_eq!(p.len(), 128);
        assert_eq!(128 - p.count_ones(), 32);
        assert_eq!(biased_payload(0.0, PayloadModel::Bernoulli, &mut rng), BitVector::ones(128));
        assert_eq!(biased_payload(100.0, PayloadModel::Bernoulli, &mut rng), BitVector::zeros(128));
    }
}
