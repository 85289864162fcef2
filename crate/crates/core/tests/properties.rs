use beacon_vlc::chain::{Chain, Demapper, ReceiverMode};
use beacon_vlc::channel::ChannelConfig;
use beacon_vlc::frame::{decapsulate, encapsulate, FrameConfig, PAYLOAD_BITS};
use beacon_vlc::metrics::{paired_monte_carlo, Variant};
use beacon_vlc::polar::{self, construct_code, encode_nonsystematic, Encoding};
use beacon_vlc::quantizer::{compute_thresholds, quantize_sample, transform, LlrFixed, LlrMapping};
use beacon_vlc::scrambler::{descramble, scramble, ScramblerConfig, DEFAULT_POLYNOMIAL};
use beacon_vlc::BitVector;
use proptest::prelude::*;

fn bits(len: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(0u8..2, len).prop_map(BitVector::from)
}

proptest! {
    #[test]
    fn frame_round_trip(payload in bits(PAYLOAD_BITS), frame_type in any::<u8>()) {
        let cfg = FrameConfig::default();
        let frame = encapsulate(&payload, frame_type, &cfg).unwrap();
        let rx = decapsulate(&frame, &cfg).unwrap();
        prop_assert_eq!(rx.payload, payload);
        prop_assert_eq!(rx.frame_type, frame_type);
        prop_assert!(rx.crc_ok && rx.preamble_ok);
    }

    #[test]
    fn scrambler_is_an_involution(data in bits(158), seed in 1u32..16) {
        let cfg = ScramblerConfig::new(DEFAULT_POLYNOMIAL, seed).unwrap();
        let once = scramble(&data, &cfg);
        prop_assert_eq!(descramble(&once, &cfg), data.clone());
        prop_assert_eq!(scramble(&once, &cfg), data);
    }

    #[test]
    fn encoder_is_linear_and_involutive(a in bits(64), b in bits(64)) {
        let ea = encode_nonsystematic(&a).unwrap();
        let eb = encode_nonsystematic(&b).unwrap();
        prop_assert_eq!(encode_nonsystematic(&(&a ^ &b)).unwrap(), &ea ^ &eb);
        prop_assert_eq!(encode_nonsystematic(&ea).unwrap(), a);
    }

    #[test]
    fn systematic_codeword_carries_message(msg in bits(8)) {
        let code = construct_code(16, 8, 2.0).unwrap();
        let x = polar::encode(&msg, &code, Encoding::Systematic).unwrap();
        let carried: BitVector = code.info_set().iter().map(|&i| x[i]).collect();
        prop_assert_eq!(carried, msg);
    }

    #[test]
    fn quantizer_is_monotone(a in -3.0f64..3.0, b in -3.0f64..3.0, plus in 0.5f64..2.0, minus in -2.0f64..-0.5) {
        let thr = compute_thresholds(plus, minus).unwrap();
        let map = LlrMapping::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(thr.region(lo) <= thr.region(hi));
        prop_assert!(quantize_sample(lo, &thr, &map) >= quantize_sample(hi, &thr, &map));
    }

    #[test]
    fn transform_is_idempotent(llr in -10.0f64..10.0) {
        let once = transform(llr);
        prop_assert_eq!(transform(once.to_f64()), once);
        prop_assert!(once.to_f64() >= LlrFixed::from_raw(-256).unwrap().to_f64());
    }

    #[test]
    fn noiseless_chain_round_trip(payload in bits(PAYLOAD_BITS), systematic in any::<bool>()) {
        let enc = if systematic { Encoding::Systematic } else { Encoding::NonSystematic };
        let chain = Chain::beacon_default().with_encoding(enc);
        let cw = chain.transmit(&payload).unwrap();
        let ch = ChannelConfig::default();
        let samples: Vec<f64> = cw.iter().map(|b| if b == 1 { ch.level1 } else { ch.level0 }).collect();
        for mode in [ReceiverMode::Exact, ReceiverMode::ThreeBit, ReceiverMode::Hard] {
            let demapper = Demapper::new(mode, &ch, None, LlrMapping::default()).unwrap();
            let mut llrs = Vec::new();
            demapper.llrs_into(&samples, &mut llrs);
            let rx = chain.receive(&mut chain.decoder(), &llrs).unwrap();
            prop_assert_eq!(&rx.payload, &payload);
            prop_assert!(rx.crc_ok);
        }
    }
}

#[test]
fn scrambling_is_error_transparent_under_identical_noise() {
    let chain = Chain::beacon_default();
    let plain = chain.with_scrambler(None);
    let ch = ChannelConfig::default().at_eb_n0(2.5, chain.rate()).unwrap();
    let variants = [
        Variant::new(chain.clone(), ReceiverMode::Exact),
        Variant::new(plain, ReceiverMode::Exact),
    ];
    let r = paired_monte_carlo(&variants, &ch, 400, 21).unwrap();
    assert!(r[0].frame_errors > 0);
    assert_eq!(r[0].bit_errors, r[1].bit_errors);
    assert_eq!(r[0].frame_errors, r[1].frame_errors);
}

// Quantized and hard LLRs produce exact ties, which the decoder resolves
// towards 0, so per-trial identity only holds statistically.
#[test]
fn scrambling_keeps_fer_for_quantized_receivers() {
    let chain = Chain::beacon_default();
    let plain = chain.with_scrambler(None);
    let ch = ChannelConfig::default().at_eb_n0(2.5, chain.rate()).unwrap();
    for mode in [ReceiverMode::ThreeBit, ReceiverMode::Hard] {
        let variants = [Variant::new(chain.clone(), mode), Variant::new(plain.clone(), mode)];
        let r = paired_monte_carlo(&variants, &ch, 1000, 21).unwrap();
        let (a, b) = (r[0].fer_interval(), r[1].fer_interval());
        assert!(a.0 <= b.1 && b.0 <= a.1, "{mode:?}: {a:?} vs {b:?}");
    }
}

#[test]
fn fer_bounds_ber() {
    let chain = Chain::beacon_default();
    for db in [1.0, 2.0, 3.0] {
        let ch = ChannelConfig::default().at_eb_n0(db, chain.rate()).unwrap();
        let r = paired_monte_carlo(&[Variant::new(chain.clone(), ReceiverMode::Exact)], &ch, 300, 3).unwrap()[0];
        assert!(r.fer() >= r.ber());
        assert!(r.fer() <= r.bits_per_frame as f64 * r.ber() + 1e-12);
    }
}

#[test]
fn paired_harness_is_deterministic() {
    let chain = Chain::beacon_default();
    let ch = ChannelConfig::default().at_eb_n0(2.0, chain.rate()).unwrap();
    let v = [Variant::new(chain, ReceiverMode::ThreeBit)];
    assert_eq!(paired_monte_carlo(&v, &ch, 200, 9).unwrap(), paired_monte_carlo(&v, &ch, 200, 9).unwrap());
}
