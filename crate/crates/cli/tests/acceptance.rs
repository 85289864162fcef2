//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any check fails.

use std::process::Command;

use beacon_vlc::chain::{Chain, Demapper, ReceiverMode};
use beacon_vlc::channel::ChannelConfig;
use beacon_vlc::frame::PAYLOAD_BITS;
use beacon_vlc::metrics::{
    self, f_min_flicker, hw_metrics_from_throughput, paired_monte_carlo, trial_rng, FlickerConfig,
    FlickerFormula, FlickerSweep, Variant,
};
use beacon_vlc::polar::{encode_in_place, Encoding};
use beacon_vlc::quantizer::LlrMapping;
use beacon_vlc::scrambler::{descramble, lfsr_next, scramble, LfsrState, ScramblerConfig, DEFAULT_POLYNOMIAL};
use beacon_vlc::BitVector;
use rand::Rng;

const FRAMES: u64 = 10_000;
const TRIALS: u64 = 10_000;
const WORST_CASE_ZERO_PCT: f64 = 10.0;
const MFTP_S: f64 = 5e-3;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    println!("[{}] criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, name, pass, detail }
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn random_bits(rng: &mut impl Rng, len: usize) -> BitVector {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn nspe_sweep(scrambled: bool, zero_pcts: Vec<f64>, encoding: Encoding) -> FlickerSweep {
    let cfg = FlickerConfig {
        frames_per_point: FRAMES,
        zero_pcts,
        encoding,
        scrambled,
        ..FlickerConfig::default()
    };
    metrics::flicker_sweep(&Chain::beacon_default(), &cfg).unwrap()
}

fn full_grid() -> Vec<f64> {
    (0..=100).map(f64::from).collect()
}

fn range_check(id: u32, name: &'static str, sweep: &FlickerSweep, target: (f64, f64)) -> Outcome {
    let row = sweep.row_at(WORST_CASE_ZERO_PCT).unwrap();
    let (glo, ghi) = sweep.ratio_range();
    let pass = within(row.min_ratio, target.0, 3.0) && within(row.max_ratio, target.1, 3.0);
    report(
        id,
        name,
        pass,
        format!(
            "({:.2}%, {:.2}%) at {WORST_CASE_ZERO_PCT}% zeros, target ({}%, {}%) +-3 pp; whole grid ({glo:.2}%, {ghi:.2}%)",
            row.min_ratio, row.max_ratio, target.0, target.1
        ),
    )
}

fn criterion_1(scrambled: &FlickerSweep) -> Outcome {
    range_check(1, "flicker range, prescrambled", scrambled, (41.25, 63.75))
}

fn criterion_2() -> Outcome {
    let plain = nspe_sweep(false, full_grid(), Encoding::NonSystematic);
    range_check(2, "flicker range, unscrambled", &plain, (32.5, 85.0))
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, encoding, target) in [
        ("NSPE", Encoding::NonSystematic, 1.9),
        ("SPE", Encoding::Systematic, 4.08),
    ] {
        let sweep = nspe_sweep(true, vec![90.0], encoding);
        let row = sweep.rows[0];
        let gain = row.gain();
        let ok = (gain - target).abs() <= 0.2 * target;
        pass &= ok;
        parts.push(format!(
            "{label} {}/{} = {gain:.2} (target {target} +-20%{})",
            row.max_run_plain,
            row.max_run_scrambled,
            if ok { "" } else { ", out" }
        ));
    }
    report(3, "run-length gain at 90% zeros", pass, parts.join("; "))
}

fn criterion_4(scrambled: &FlickerSweep) -> Outcome {
    let max_run = scrambled.max_run_scrambled();
    let f = f_min_flicker(max_run, MFTP_S, FlickerFormula::Corrected).unwrap();
    // One run of slack either side of the nominal value.
    let quantum = 1.0 / MFTP_S;
    let pass = within(f, 2500.0, quantum);
    let at_point = scrambled.row_at(WORST_CASE_ZERO_PCT).unwrap().max_run_scrambled;
    report(
        4,
        "minimum flicker-free frequency",
        pass,
        format!(
            "max run {max_run} -> {f:.0} Hz, target 2500 +- {quantum:.0} Hz (max run {at_point} at {WORST_CASE_ZERO_PCT}% zeros)"
        ),
    )
}

/// Generator matrix built as an explicit Kronecker power.
fn kron_power(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                // [[G, 0], [G, G]]
                next[r][c] = g[r][c];
                next[m + r][c] = g[r][c];
                next[m + r][m + c] = g[r][c];
            }
        }
        g = next;
    }
    g
}

fn mat_encode(d: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let n = d.len();
    (0..n).map(|j| (0..n).fold(0, |acc, i| acc ^ (d[i] & g[i][j]))).collect()
}

fn criterion_5() -> Outcome {
    let mut mismatches = 0u64;
    let mut cases = 0u64;
    for n in [1usize, 2, 4, 8] {
        let g = kron_power(n);
        for v in 0u32..(1 << n) {
            let d: Vec<u8> = (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect();
            let mut x = d.clone();
            encode_in_place(&mut x).unwrap();
            mismatches += (x != mat_encode(&d, &g)) as u64;
            cases += 1;
        }
    }
    for n in [16usize, 256] {
        let g = kron_power(n);
        for t in 0..10_000 {
            let mut rng = trial_rng(0xE5C0 + n as u64, t);
            let d = random_bits(&mut rng, n);
            let mut x = d.as_slice().to_vec();
            encode_in_place(&mut x).unwrap();
            mismatches += (x != mat_encode(d.as_slice(), &g)) as u64;
            cases += 1;
        }
    }
    report(5, "encoder vs matrix oracle", mismatches == 0, format!("{mismatches} mismatches in {cases} cases"))
}

fn criterion_6() -> Outcome {
    let mut failures = 0u64;
    let mut periods = Vec::new();
    for seed in 1u32..16 {
        let cfg = ScramblerConfig::new(DEFAULT_POLYNOMIAL, seed).unwrap();
        for t in 0..1_000 {
            let mut rng = trial_rng(0x5C4A + seed as u64, t);
            let frame = random_bits(&mut rng, 158);
            let s = scramble(&frame, &cfg);
            failures += (descramble(&s, &cfg) != frame || scramble(&s, &cfg) != frame) as u64;
        }
        let start = LfsrState::new(seed);
        let mut state = start;
        let mut period = 0;
        loop {
            state = lfsr_next(state, &cfg).unwrap().1;
            period += 1;
            if state == start || period > 100 {
                break;
            }
        }
        periods.push(period);
    }
    let period_ok = periods.iter().all(|&p| p == 15);
    report(
        6,
        "scrambler involution and period",
        failures == 0 && period_ok,
        format!("{failures} involution failures over 15 seeds x 1000 frames; periods {:?}", periods.iter().collect::<std::collections::BTreeSet<_>>()),
    )
}

fn criterion_7() -> Outcome {
    let chain = Chain::beacon_default();
    let ch = ChannelConfig::default();
    let demapper = Demapper::new(ReceiverMode::ThreeBit, &ch, None, LlrMapping::default()).unwrap();
    let mut decoder = chain.decoder();
    let mut failures = 0u64;
    let mut llrs = Vec::new();
    for t in 0..10_000 {
        let mut rng = trial_rng(0x7777, t);
        let payload = random_bits(&mut rng, PAYLOAD_BITS);
        let x = chain.transmit(&payload).unwrap();
        let samples: Vec<f64> = x.iter().map(|b| if b == 1 { ch.level1 } else { ch.level0 }).collect();
        demapper.llrs_into(&samples, &mut llrs);
        let rx = chain.receive(&mut decoder, &llrs).unwrap();
        failures += (rx.payload != payload || !rx.crc_ok) as u64;
    }
    report(7, "noiseless round trip", failures == 0, format!("{failures} failures in 10000 payloads"))
}

fn criterion_8() -> Outcome {
    let nspe = Chain::beacon_default();
    let spe = nspe.with_encoding(Encoding::Systematic);
    let mut pass = true;
    let mut parts = Vec::new();
    for db in [2.0, 3.0, 4.0] {
        let ch = ChannelConfig::default().at_eb_n0(db, nspe.rate()).unwrap();
        let variants = [
            Variant::new(nspe.clone(), ReceiverMode::ThreeBit),
            Variant::new(spe.clone(), ReceiverMode::ThreeBit),
        ];
        let r = paired_monte_carlo(&variants, &ch, TRIALS, 0xC8 + db as u64).unwrap();
        let (lo, hi) = r[0].fer_interval();
        let fer_ok = r[1].fer() >= lo && r[1].fer() <= hi;
        let ber_ok = r[1].ber() <= r[0].ber();
        pass &= fer_ok && ber_ok;
        parts.push(format!(
            "{db} dB FER {:.4}/{:.4} BER {:.2e}/{:.2e}",
            r[1].fer(),
            r[0].fer(),
            r[1].ber(),
            r[0].ber()
        ));
    }
    report(8, "SPE vs NSPE (SPE/NSPE)", pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let chain = Chain::beacon_default();
    let variants = [
        Variant::new(chain.clone(), ReceiverMode::Exact),
        Variant::new(chain.clone(), ReceiverMode::ThreeBit),
        Variant::new(chain.clone(), ReceiverMode::Hard),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for db in 0..=8 {
        let ch = ChannelConfig::default().at_eb_n0(db as f64, chain.rate()).unwrap();
        let r = paired_monte_carlo(&variants, &ch, TRIALS, 0xC9 + db as u64).unwrap();
        let (e, q, h) = (r[0].frame_errors, r[1].frame_errors, r[2].frame_errors);
        let ok = e <= q && q <= h;
        pass &= ok;
        parts.push(format!("{db}:{e}/{q}/{h}{}", if ok { "" } else { "!" }));
    }
    report(9, "FER ordering exact <= 3-bit <= hard", pass, format!("frame errors per 10^4: {}", parts.join(" ")))
}

fn four_sig(v: f64) -> String {
    format!("{v:.3e}")
}

fn criterion_10() -> Outcome {
    // Throughput (b/s), power (W) and area (m^2) as tabulated.
    let tx = hw_metrics_from_throughput(15.38e6, 1.3137e-3, 48_761.39e-12).unwrap();
    let rx = hw_metrics_from_throughput(16.58e6, 3.5022e-3, 573_724.56e-12).unwrap();
    let energy = tx.energy_per_bit * 1e12;
    let efficiency = rx.hw_efficiency / 1e12;
    let pass = four_sig(energy) == four_sig(85.42) && four_sig(efficiency) == four_sig(28.75);
    report(
        10,
        "hardware calculators",
        pass,
        format!(
            "TX energy {energy:.2} pJ/b (85.42), RX efficiency {efficiency:.2} Mb/s/mm^2 (28.75); also TX efficiency {:.2}, RX energy {:.1}",
            tx.hw_efficiency / 1e12,
            rx.energy_per_bit * 1e12
        ),
    )
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_beacon-vlc"))
            .env_remove("BEACON_VLC_CONFIG")
            .current_dir(dir.path())
            .args(args)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    run(&["simulate", "--ebn0", "1:4:1", "--trials", "500", "--seed", "1234", "--out", "sim.csv"]);
    let sim = read("sim.csv");
    run(&["simulate", "--config", "sim.toml"]);
    let sim_ok = read("sim.csv") == sim;
    run(&["flicker", "--frames", "200", "--step", "5", "--seed", "1234", "--out", "fl.csv"]);
    let fl = read("fl.csv");
    run(&["flicker", "--config", "fl.toml"]);
    let fl_ok = read("fl.csv") == fl;
    report(
        11,
        "byte-identical replay",
        sim_ok && fl_ok,
        format!("simulate {}, flicker {}", if sim_ok { "identical" } else { "differs" }, if fl_ok { "identical" } else { "differs" }),
    )
}

#[test]
fn acceptance() {
    println!();
    let scrambled = nspe_sweep(true, full_grid(), Encoding::NonSystematic);
    let outcomes = vec![
        criterion_1(&scrambled),
        criterion_2(),
        criterion_3(),
        criterion_4(&scrambled),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    println!();
    for o in &outcomes {
        println!("{} {:>2} {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name);
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| format!("{}: {}", o.id, o.detail)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
