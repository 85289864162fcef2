use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use beacon_vlc::chain::Demapper;
use beacon_vlc::channel::{ook_modulate, ChannelConfig};
use beacon_vlc::frame::PAYLOAD_BITS;
use beacon_vlc::metrics::{self, TrialReport, Variant};
use beacon_vlc::BitVector;

use crate::config::RunConfig;
use crate::error::CliError;

pub enum DecodeInput {
    Llrs(PathBuf),
    Samples(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{}: {e}", path.display()))
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Internal(format!("stdout: {e}"))
}

pub fn parse_payload(hex: &str) -> Result<BitVector, CliError> {
    let hex = hex.trim();
    if hex.len() != PAYLOAD_BITS / 4 {
        return Err(CliError::Usage(format!(
            "payload must be {} hex digits, got {}",
            PAYLOAD_BITS / 4,
            hex.len()
        )));
    }
    BitVector::from_hex(hex, PAYLOAD_BITS).map_err(|e| CliError::Usage(format!("bad payload: {e}")))
}

pub fn encode(
    cfg: &RunConfig,
    payload_hex: &str,
    emit_samples: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let payload = parse_payload(payload_hex)?;
    let chain = cfg.chain()?;
    let codeword = chain.transmit(&payload).map_err(CliError::internal)?;
    let ratio = metrics::bit_ratio(&codeword).map_err(CliError::internal)?;
    let run = metrics::max_run(codeword.as_slice());
    writeln!(out, "codeword {}", codeword.to_hex()).map_err(stdout_err)?;
    writeln!(out, "bit_ratio {ratio:.4}").map_err(stdout_err)?;
    writeln!(out, "max_run {run}").map_err(stdout_err)?;
    if let Some(path) = emit_samples {
        let channel = cfg.channel_config()?;
        let block = ook_modulate(&codeword, &channel);
        let mut text = String::new();
        for s in &block.samples {
            writeln!(text, "{s}").unwrap();
        }
        std::fs::write(path, text).map_err(io_err(path))?;
    }
    Ok(())
}

/// Whitespace-separated reals; `#` starts a comment.
fn read_reals(path: &Path, expected: usize) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(expected);
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split([' ', '\t', ',']).filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .map_err(|_| CliError::Usage(format!("{}: not a number: {tok:?}", path.display())))?;
            if v.is_nan() {
                return Err(CliError::Usage(format!("{}: NaN entry", path.display())));
            }
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(CliError::Usage(format!(
            "{}: expected {expected} entries, found {}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

pub fn decode(cfg: &RunConfig, input: &DecodeInput, out: &mut impl Write) -> Result<(), CliError> {
    let chain = cfg.chain()?;
    let n = chain.n();
    let llrs = match input {
        DecodeInput::Llrs(path) => read_reals(path, n)?,
        DecodeInput::Samples(path) => {
            let samples = read_reals(path, n)?;
            let channel = cfg.channel_config()?;
            let demapper = Demapper::new(cfg.receiver.mode, &channel, cfg.peaks()?, cfg.llr_mapping()?)
                .map_err(CliError::usage)?;
            let mut llrs = Vec::with_capacity(n);
            demapper.llrs_into(&samples, &mut llrs);
            llrs
        }
    };
    let mut decoder = chain.decoder();
    let rx = chain.receive(&mut decoder, &llrs).map_err(CliError::internal)?;
    writeln!(out, "payload {}", rx.payload.to_hex()).map_err(stdout_err)?;
    writeln!(out, "frame_type 0x{:02X}", rx.frame_type).map_err(stdout_err)?;
    writeln!(out, "crc_ok {}", rx.crc_ok).map_err(stdout_err)?;
    writeln!(out, "preamble_ok {}", rx.preamble_ok).map_err(stdout_err)?;
    Ok(())
}

/// `<dir>/<stem><suffix>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn ber_rows(grid: &[f64], reports: &[TrialReport]) -> String {
    let mut csv = String::from("eb_n0_db,ber,fer,trials,ci\n");
    for (db, r) in grid.iter().zip(reports) {
        writeln!(csv, "{db},{:e},{:e},{},{:e}", r.ber(), r.fer(), r.trials, r.fer_half_width()).unwrap();
    }
    csv
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Writes the CSV, plus `<stem>.toml` holding the effective configuration
/// (master seed included) so the run can be replayed with `--config`.
pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_grid()?;
    let chain = cfg.chain()?;
    let base = cfg.channel_config()?;
    let mut variant = Variant::new(chain.clone(), cfg.receiver.mode);
    variant.peaks = cfg.peaks()?;
    variant.mapping = cfg.llr_mapping()?;
    let grid = &cfg.simulate.eb_n0_db;
    let trials = cfg.simulate.trials;
    let mut coded = Vec::with_capacity(grid.len());
    let mut uncoded = Vec::new();
    for (i, &db) in grid.iter().enumerate() {
        let channel = base.at_eb_n0(db, chain.rate()).map_err(CliError::usage)?;
        let seed = point_seed(cfg.master_seed, i);
        let r = metrics::paired_monte_carlo(std::slice::from_ref(&variant), &channel, trials, seed)
            .map_err(CliError::internal)?[0];
        eprintln!(
            "[{}/{}] Eb/N0 {db} dB: ber {:.3e} fer {:.3e} ({} trials)",
            i + 1,
            grid.len(),
            r.ber(),
            r.fer(),
            trials
        );
        coded.push(r);
        if cfg.simulate.uncoded {
            let reference: ChannelConfig = base.at_eb_n0(db, 1.0).map_err(CliError::usage)?;
            uncoded.push(metrics::uncoded_monte_carlo(&reference, trials, seed).map_err(CliError::internal)?);
        }
    }
    let out = &cfg.simulate.output;
    write_file(out, &ber_rows(grid, &coded))?;
    if cfg.simulate.uncoded {
        write_file(&sibling(out, "_uncoded.csv"), &ber_rows(grid, &uncoded))?;
    }
    if cfg.simulate.gnuplot {
        write_file(&sibling(out, ".gp"), &ber_gnuplot(out, cfg.simulate.uncoded))?;
    }
    cfg.save(&sibling(out, ".toml"))
}

/// Distinct master seed per grid point, derived from the run seed.
fn point_seed(master: u64, point: usize) -> u64 {
    master ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn ber_gnuplot(csv: &Path, uncoded: bool) -> String {
    let name = file_name(csv);
    let mut gp = String::new();
    gp.push_str("set datafile separator ','\nset logscale y\nset grid\n");
    gp.push_str("set xlabel 'Eb/N0 (dB)'\nset ylabel 'error rate'\nset key autotitle columnhead\n");
    write!(gp, "plot '{name}' using 1:2 with linespoints title 'BER', \\\n     '{name}' using 1:3 with linespoints title 'FER'").unwrap();
    if uncoded {
        let reference = file_name(&sibling(csv, "_uncoded.csv"));
        write!(gp, ", \\\n     '{reference}' using 1:2 with lines title 'uncoded BER'").unwrap();
    }
    gp.push('\n');
    gp
}

pub fn flicker(cfg: &RunConfig) -> Result<(), CliError> {
    let chain = cfg.chain()?;
    let fcfg = cfg.flicker_config()?;
    let total = fcfg.zero_pcts.len();
    eprintln!("flicker sweep: {total} points x {} frames", fcfg.frames_per_point);
    let sweep = metrics::flicker_sweep(&chain, &fcfg).map_err(CliError::internal)?;
    let mut csv = String::from("zero_pct,min_ratio,max_ratio,max_run_scrambled,max_run_plain,gain\n");
    for r in &sweep.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.zero_pct,
            r.min_ratio,
            r.max_ratio,
            r.max_run_scrambled,
            r.max_run_plain,
            r.gain()
        )
        .unwrap();
    }
    let (lo, hi) = sweep.ratio_range();
    eprintln!("one-bit ratio range over grid: ({lo:.2}%, {hi:.2}%)");
    let out = &cfg.flicker.output;
    write_file(out, &csv)?;
    if cfg.flicker.gnuplot {
        let name = file_name(out);
        let gp = format!(
            "set datafile separator ','\nset grid\nset xlabel 'payload zeros (%)'\nset ylabel 'one bits (%)'\nset key autotitle columnhead\n\
             plot '{name}' using 1:2 with lines title 'min', \\\n     '{name}' using 1:3 with lines title 'max'\n"
        );
        write_file(&sibling(out, ".gp"), &gp)?;
    }
    cfg.save(&sibling(out, ".toml"))
}

pub fn code_construct(cfg: &RunConfig, path: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    let text = cfg.polar_code()?.to_description();
    match path {
        Some(p) => write_file(p, &text),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}
