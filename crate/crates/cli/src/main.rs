//! `beacon-vlc` command-line front end.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use beacon_vlc::chain::ReceiverMode;
use beacon_vlc::polar::Encoding;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "beacon-vlc", version, about = "Polar-coded OOK beacon link: encode, decode and simulate")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true, env = "BEACON_VLC_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scrambler seed as hex, e.g. `F`.
    #[arg(long, global = true, value_name = "HEX")]
    scrambler_seed: Option<String>,
    /// Skip the scrambler.
    #[arg(long, global = true)]
    no_prescramble: bool,
    #[arg(long, global = true)]
    systematic: bool,
    /// Receiver front end: exact, 3bit or hard.
    #[arg(long, global = true)]
    mode: Option<ReceiverMode>,
    /// Design Eb/N0 (dB) for frozen-set construction.
    #[arg(long, global = true, allow_hyphen_values = true)]
    design_db: Option<f64>,
    /// Code-description file to use instead of constructing the code.
    #[arg(long, global = true)]
    code_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode one 128-bit payload and print the codeword.
    Encode {
        /// Payload as 32 hex digits.
        payload: String,
        /// Also write the noiseless OOK samples, one per line.
        #[arg(long, value_name = "FILE")]
        emit_samples: Option<PathBuf>,
    },
    /// Decode one codeword from LLRs or received samples.
    Decode {
        #[arg(long, conflicts_with = "sample_file", required_unless_present = "sample_file")]
        llr_file: Option<PathBuf>,
        #[arg(long)]
        sample_file: Option<PathBuf>,
    },
    /// BER/FER sweep over Eb/N0.
    Simulate {
        /// `start:stop:step` or a comma list, in dB.
        #[arg(long, allow_hyphen_values = true)]
        ebn0: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write an uncoded OOK reference curve.
        #[arg(long)]
        uncoded: bool,
        /// Also write a gnuplot script next to the CSV.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Bit-ratio and run-length sweep over the payload zero percentage.
    Flicker {
        #[arg(long)]
        frames: Option<u64>,
        /// Grid step in percent; must divide 100.
        #[arg(long)]
        step: Option<f64>,
        /// Exact zero count per payload instead of Bernoulli bits.
        #[arg(long)]
        exact_count: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Write the code-description file.
    CodeConstruct {
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn build_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.master_seed = seed;
    }
    if let Some(hex) = &g.scrambler_seed {
        let digits = hex.trim_start_matches("0x").trim_start_matches("0X");
        cfg.scrambler.seed = u32::from_str_radix(digits, 16)
            .map_err(|_| CliError::Usage(format!("invalid scrambler seed {hex:?}")))?;
    }
    if g.no_prescramble {
        cfg.scrambler.enabled = false;
    }
    if g.systematic {
        cfg.code.encoding = Encoding::Systematic;
    }
    if let Some(mode) = g.mode {
        cfg.receiver.mode = mode;
    }
    if let Some(db) = g.design_db {
        cfg.code.design_db = db;
    }
    if let Some(path) = &g.code_file {
        cfg.code.description_file = Some(path.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = build_config(&cli.global)?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Encode { payload, emit_samples } => {
            commands::encode(&cfg, &payload, emit_samples.as_deref(), &mut stdout)
        }
        Command::Decode { llr_file, sample_file } => {
            let input = match (llr_file, sample_file) {
                (Some(p), _) => commands::DecodeInput::Llrs(p),
                (None, Some(p)) => commands::DecodeInput::Samples(p),
                (None, None) => unreachable!("clap requires one input"),
            };
            commands::decode(&cfg, &input, &mut stdout)
        }
        Command::Simulate { ebn0, trials, out, uncoded, gnuplot } => {
            if let Some(grid) = ebn0 {
                cfg.simulate.eb_n0_db = config::parse_grid(&grid)?;
            }
            if let Some(t) = trials {
                cfg.simulate.trials = t;
            }
            if let Some(o) = out {
                cfg.simulate.output = o;
            }
            cfg.simulate.uncoded |= uncoded;
            cfg.simulate.gnuplot |= gnuplot;
            commands::simulate(&cfg)
        }
        Command::Flicker { frames, step, exact_count, out, gnuplot } => {
            if let Some(f) = frames {
                cfg.flicker.frames = f;
            }
            if let Some(s) = step {
                cfg.flicker.zero_pct_step = s;
            }
            if exact_count {
                cfg.flicker.payload_model = beacon_vlc::metrics::PayloadModel::ExactCount;
            }
            if let Some(o) = out {
                cfg.flicker.output = o;
            }
            cfg.flicker.gnuplot |= gnuplot;
            commands::flicker(&cfg)
        }
        Command::CodeConstruct { out } => commands::code_construct(&cfg, out.as_deref(), &mut stdout),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
