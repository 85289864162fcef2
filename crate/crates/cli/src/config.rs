//! Run configuration: a flat TOML file with one table per stage. Command-line
//! flags are applied on top of it.

use std::path::{Path, PathBuf};

use beacon_vlc::chain::{Chain, ReceiverMode};
use beacon_vlc::channel::ChannelConfig;
use beacon_vlc::frame::{CrcCoverage, CrcParams, FrameConfig, DEFAULT_FRAME_TYPE, DEFAULT_PREAMBLE};
use beacon_vlc::metrics::{FlickerConfig, PayloadModel};
use beacon_vlc::polar::{self, Encoding, Kernel, PolarCode};
use beacon_vlc::quantizer::LlrMapping;
use beacon_vlc::scrambler::{ScramblerConfig, DEFAULT_POLYNOMIAL, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_MASTER_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub frame: FrameSection,
    pub code: CodeSection,
    pub scrambler: ScramblerSection,
    pub channel: ChannelSection,
    pub receiver: ReceiverSection,
    pub simulate: SimulateSection,
    pub flicker: FlickerSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: DEFAULT_MASTER_SEED,
            frame: FrameSection::default(),
            code: CodeSection::default(),
            scrambler: ScramblerSection::default(),
            channel: ChannelSection::default(),
            receiver: ReceiverSection::default(),
            simulate: SimulateSection::default(),
            flicker: FlickerSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub preamble: u8,
    pub frame_type: u8,
    pub crc_poly: u16,
    pub crc_init: u16,
    pub crc_xorout: u16,
    pub crc_coverage: CrcCoverage,
}

impl Default for FrameSection {
    fn default() -> Self {
        let crc = CrcParams::default();
        Self {
            preamble: DEFAULT_PREAMBLE,
            frame_type: DEFAULT_FRAME_TYPE,
            crc_poly: crc.poly,
            crc_init: crc.init,
            crc_xorout: crc.xorout,
            crc_coverage: CrcCoverage::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeSection {
    pub n: usize,
    pub k: usize,
    pub design_db: f64,
    /// Code-description file; overrides `n`, `k` and `design_db` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description_file: Option<PathBuf>,
    pub encoding: Encoding,
    pub kernel: Kernel,
}

impl Default for CodeSection {
    fn default() -> Self {
        Self {
            n: 256,
            k: 158,
            design_db: polar::DEFAULT_DESIGN_DB,
            description_file: None,
            encoding: Encoding::NonSystematic,
            kernel: Kernel::MinSum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScramblerSection {
    pub enabled: bool,
    /// Coefficient mask of the generating polynomial (bit q = c_q).
    pub polynomial: u32,
    pub seed: u32,
}

impl Default for ScramblerSection {
    fn default() -> Self {
        Self { enabled: true, polynomial: DEFAULT_POLYNOMIAL, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub level0: f64,
    pub level1: f64,
    /// Noise std assumed by the exact-LLR receiver in `decode`.
    pub noise_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sigma1: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelConfig::default();
        Self { level0: c.level0, level1: c.level1, noise_sigma: c.noise_sigma, noise_sigma1: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverSection {
    pub mode: ReceiverMode,
    /// Soft-decision peaks; the nominal OOK levels when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_minus: Option<f64>,
    /// Region-to-LLR override (8 lines of `region llr`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_file: Option<PathBuf>,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self { mode: ReceiverMode::ThreeBit, peak_plus: None, peak_minus: None, mapping_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub eb_n0_db: Vec<f64>,
    pub trials: u64,
    pub output: PathBuf,
    /// Adds an uncoded-OOK reference curve.
    pub uncoded: bool,
    pub gnuplot: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            eb_n0_db: (0..=8).map(f64::from).collect(),
            trials: 10_000,
            output: PathBuf::from("ber_curve.csv"),
            uncoded: false,
            gnuplot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlickerSection {
    pub frames: u64,
    pub zero_pct_step: f64,
    pub payload_model: PayloadModel,
    pub output: PathBuf,
    pub gnuplot: bool,
}

impl Default for FlickerSection {
    fn default() -> Self {
        Self {
            frames: 10_000,
            zero_pct_step: 1.0,
            payload_model: PayloadModel::Bernoulli,
            output: PathBuf::from("flicker.csv"),
            gnuplot: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
    }

    pub fn frame_config(&self) -> FrameConfig {
        FrameConfig {
            preamble: self.frame.preamble,
            crc: CrcParams {
                poly: self.frame.crc_poly,
                init: self.frame.crc_init,
                xorout: self.frame.crc_xorout,
            },
            coverage: self.frame.crc_coverage,
        }
    }

    pub fn scrambler_config(&self) -> Result<ScramblerConfig, CliError> {
        ScramblerConfig::new(self.scrambler.polynomial, self.scrambler.seed).map_err(CliError::usage)
    }

    pub fn polar_code(&self) -> Result<PolarCode, CliError> {
        match &self.code.description_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read code file {}: {e}", path.display()))
                })?;
                PolarCode::from_description(&text).map_err(CliError::usage)
            }
            None => polar::construct_code(self.code.n, self.code.k, self.code.design_db)
                .map_err(CliError::usage),
        }
    }

    pub fn chain(&self) -> Result<Chain, CliError> {
        let scrambler = if self.scrambler.enabled { Some(self.scrambler_config()?) } else { None };
        Chain::new(
            self.frame_config(),
            self.frame.frame_type,
            scrambler,
            self.polar_code()?,
            self.code.encoding,
            self.code.kernel,
        )
        .map_err(CliError::usage)
    }

    pub fn channel_config(&self) -> Result<ChannelConfig, CliError> {
        let cfg = ChannelConfig {
            level0: self.channel.level0,
            level1: self.channel.level1,
            noise_sigma: self.channel.noise_sigma,
            noise_sigma1: self.channel.noise_sigma1,
            seed: self.master_seed,
        };
        cfg.validate().map_err(CliError::usage)?;
        Ok(cfg)
    }

    pub fn peaks(&self) -> Result<Option<(f64, f64)>, CliError> {
        match (self.receiver.peak_plus, self.receiver.peak_minus) {
            (Some(p), Some(m)) => Ok(Some((p, m))),
            (None, None) => Ok(None),
            _ => Err(CliError::Usage("peak_plus and peak_minus must be set together".into())),
        }
    }

    pub fn llr_mapping(&self) -> Result<LlrMapping, CliError> {
        match &self.receiver.mapping_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read mapping file {}: {e}", path.display()))
                })?;
                LlrMapping::from_text(&text).map_err(CliError::usage)
            }
            None => Ok(LlrMapping::default()),
        }
    }

    pub fn flicker_config(&self) -> Result<FlickerConfig, CliError> {
        let step = self.flicker.zero_pct_step;
        if !(step > 0.0 && step <= 100.0) {
            return Err(CliError::Usage(format!("zero_pct_step {step} outside (0, 100]")));
        }
        if self.flicker.frames == 0 {
            return Err(CliError::Usage("flicker frames must be at least 1".into()));
        }
        let points = (100.0 / step).round() as usize;
        if ((points as f64) * step - 100.0).abs() > 1e-9 {
            return Err(CliError::Usage(format!("zero_pct_step {step} does not divide 100")));
        }
        Ok(FlickerConfig {
            frames_per_point: self.flicker.frames,
            zero_pcts: (0..=points).map(|i| i as f64 * step).collect(),
            encoding: self.code.encoding,
            scrambled: self.scrambler.enabled,
            payload_model: self.flicker.payload_model,
            seed: self.master_seed,
        })
    }

    pub fn validate_grid(&self) -> Result<(), CliError> {
        let grid = &self.simulate.eb_n0_db;
        if grid.is_empty() {
            return Err(CliError::Usage("Eb/N0 grid is empty".into()));
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage("Eb/N0 grid has non-finite entries".into()));
        }
        if self.simulate.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid Eb/N0 grid {text:?}"));
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        let grid: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn edited_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.master_seed = 99;
        cfg.scrambler.enabled = false;
        cfg.code.encoding = Encoding::Systematic;
        cfg.channel.noise_sigma1 = Some(0.123456789);
        cfg.receiver.peak_plus = Some(1.1);
        cfg.receiver.peak_minus = Some(-0.9);
        cfg.simulate.eb_n0_db = vec![0.5, 1.25, 7.0];
        cfg.flicker.payload_model = PayloadModel::ExactCount;
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = RunConfig::from_toml("master_seed = 7\n[scrambler]\nseed = 0x9\n").unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.scrambler.seed, 9);
        assert_eq!(cfg.code, CodeSection::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[code]\nbogus = 1\n").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:2:1").unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap().len(), 5);
        assert_eq!(parse_grid("1, 3.5").unwrap(), vec![1.0, 3.5]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn flicker_grid_has_101_points_by_default() {
        let f = RunConfig::default().flicker_config().unwrap();
        assert_eq!(f.zero_pcts.len(), 101);
        assert_eq!(f.zero_pcts[100], 100.0);
        let mut cfg = RunConfig::default();
        cfg.flicker.zero_pct_step = 3.0;
        assert!(cfg.flicker_config().is_err());
    }

    #[test]
    fn chain_validation_errors_are_usage_errors() {
        let mut cfg = RunConfig::default();
        cfg.scrambler.seed = 0;
        assert!(matches!(cfg.chain(), Err(CliError::Usage(_))));
        let mut cfg = RunConfig::default();
        cfg.code.k = 128;
        assert!(matches!(cfg.chain(), Err(CliError::Usage(_))));
    }
}
