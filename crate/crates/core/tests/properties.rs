mod common;

use proptest::prelude::*;
use spikerec::codec::{decode, encode_events};
use spikerec::metrics::{entropy_bits, joint_histogram, psnr, two_dimensional_entropy};
use spikerec::reconstruct::{segment_fsr, segment_ssr, stream_fsr, SegmentEvent};
use spikerec::simulator::{simulate_constant, IntegratorState};
use spikerec::stability::{is_zero_order_stable, stability_order, stream_intervals};
use spikerec::{IntensityImage, SpikeLikeStream};

use common::*;

fn bits_strategy(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    (any::<u64>(), 0..max_len, 0.0..0.05f64)
        .prop_map(|(seed, len, flip)| random_mixed_stream(&mut rng(seed), len, flip))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dyadic_rates_match_reference_integrator(k in 1u64..=65_536, len in 0usize..3000) {
        let q = k as f64 / 65_536.0;
        let s = simulate_constant(q, 1.0, len).unwrap();
        let bits: Vec<u8> = s.values().iter().map(|&v| v as u8).collect();
        prop_assert_eq!(&bits, &reference_integrator(&vec![q; len]));
        // spike count is the number of whole thresholds accumulated
        let count = bits.iter().filter(|&&b| b == 1).count() as u64;
        prop_assert_eq!(count, len as u64 * k / 65_536);
    }

    #[test]
    fn residual_stays_below_threshold(rates in prop::collection::vec(0.0..=2.0f64, 1..300), r0 in 0.0..2.0f64) {
        let mut state = IntegratorState::new(2.0, r0).unwrap();
        for q in rates {
            state.step(q).unwrap();
            let r = state.residual();
            prop_assert!((0.0..2.0).contains(&r), "residual {}", r);
        }
    }

    #[test]
    fn only_the_ratio_matters(k in 1u64..=1024, len in 0usize..2000, shift in -6i32..6) {
        let q = k as f64 / 1024.0;
        let c = 2f64.powi(shift);
        prop_assert_eq!(simulate_constant(q, 1.0, len).unwrap(), simulate_constant(q * c, c, len).unwrap());
    }

    #[test]
    fn spikes_rebuild_from_first_spike_and_intervals(bits in bits_strategy(2000)) {
        let s = SpikeLikeStream::from_bits(&bits);
        let positions: Vec<usize> = s.firing_positions().collect();
        let intervals = stream_intervals(&s);
        if let (Some(&first), Some(&last)) = (positions.first(), positions.last()) {
            prop_assert_eq!(intervals.sum(), (last - first) as u64);
            let mut rebuilt = vec![0u8; bits.len()];
            let mut at = first;
            rebuilt[at] = 1;
            for &iv in intervals.as_slice() {
                at += iv as usize;
                rebuilt[at] = 1;
            }
            prop_assert_eq!(rebuilt, bits.iter().map(|&b| u8::from(b != 0)).collect::<Vec<_>>());
        } else {
            prop_assert!(intervals.is_empty());
        }
    }

    #[test]
    fn deeper_search_never_verifies_more(bits in bits_strategy(1500), depth in 1usize..6) {
        let s = SpikeLikeStream::from_bits(&bits);
        let shallow = stability_order(&s, depth).unwrap();
        let deep = stability_order(&s, depth + 1).unwrap();
        prop_assert_eq!(shallow.verified_order, deep.verified_order.min(depth));
        prop_assert!(!deep.absolute || shallow.absolute);
    }

    #[test]
    fn depth_one_is_zero_order_stability(bits in bits_strategy(1500)) {
        let s = SpikeLikeStream::from_bits(&bits);
        let naive = naive_stable(&naive_intervals(s.values(), 1));
        prop_assert_eq!(stability_order(&s, 1).unwrap().absolute, naive);
        prop_assert_eq!(is_zero_order_stable(stream_intervals(&s).as_slice()), naive);
    }

    #[test]
    fn segments_partition_and_refine(bits in bits_strategy(3000)) {
        let s = SpikeLikeStream::from_bits(&bits);
        let (fsr, ssr) = (segment_fsr(&s), segment_ssr(&s));
        for segs in [&fsr, &ssr] {
            let mut at = 0;
            for seg in segs.iter() {
                prop_assert_eq!(seg.start_frame, at);
                prop_assert!(seg.end_frame > seg.start_frame);
                if !seg.is_degenerate() {
                    prop_assert_eq!(seg.intervals.sum(), seg.duration() as u64);
                    prop_assert!(is_zero_order_stable(seg.intervals.as_slice()));
                }
                at = seg.end_frame;
            }
            prop_assert_eq!(at, bits.len());
        }
        for seg in &ssr {
            prop_assert!(fsr.iter().any(|f| f.start_frame <= seg.start_frame && seg.end_frame <= f.end_frame));
        }
    }

    #[test]
    fn streaming_matches_batch_for_any_block(bits in bits_strategy(3000), block in 1usize..200) {
        let batch: Vec<SegmentEvent> = segment_fsr(&SpikeLikeStream::from_bits(&bits))
            .iter()
            .map(SegmentEvent::from_segment)
            .collect();
        prop_assert_eq!(&stream_fsr(&bits, block), &batch);
        prop_assert_eq!(stream_fsr(&bits, block), stream_fsr(&bits, 32));
    }

    #[test]
    fn codec_roundtrip_and_word_count(bits in bits_strategy(3000)) {
        let events = stream_fsr(&bits, 32);
        let words = encode_events(&events).unwrap();
        let frames = decode(&words).unwrap();
        prop_assert_eq!(frames.len(), bits.len());
        let expected_words: u64 = events.iter().map(|e| e.duration.div_ceil(255)).sum();
        prop_assert_eq!(words.len() as u64, expected_words);
        let mut at = 0;
        for e in &events {
            for &v in &frames[at..at + e.duration as usize] {
                prop_assert!((f64::from(v) - e.intensity).abs() <= 0.5);
            }
            at += e.duration as usize;
        }
    }

    #[test]
    fn entropy_ignores_bin_labels(counts in prop::collection::vec(0u64..50, 1..300), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = counts.clone();
        shuffled.shuffle(&mut rng(seed));
        prop_assert!((entropy_bits(&counts) - entropy_bits(&shuffled)).abs() < 1e-9);
    }

    #[test]
    fn entropy_survives_inversion(w in 3usize..24, h in 3usize..24, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let img = IntensityImage::from_fn(w, h, |_, _| f64::from(r.random_range(0..=255u8))).unwrap();
        let inv = IntensityImage::from_fn(w, h, |x, y| 255.0 - f64::from(img.get(x, y))).unwrap();
        let (a, b) = (two_dimensional_entropy(&img).unwrap(), two_dimensional_entropy(&inv).unwrap());
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!((0.0..=16.0).contains(&a));
        prop_assert_eq!(joint_histogram(&img).unwrap().iter().sum::<u64>(), ((w - 2) * (h - 2)) as u64);
    }

    #[test]
    fn psnr_falls_as_noise_grows(a in 0.5..60.0f64, step in 0.5..40.0f64, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let u: Vec<f64> = (0..256).map(|_| r.random_range(-1.0..=1.0)).collect();
        let reference = IntensityImage::constant(16, 16, 128.0).unwrap();
        let noisy = |amp: f64| IntensityImage::from_fn(16, 16, |x, y| 128.0 + amp * u[y * 16 + x]).unwrap();
        prop_assume!(u.iter().any(|v| v.abs() > 0.05));
        let (p1, p2) = (psnr(&noisy(a), &reference).unwrap(), psnr(&noisy(a + step), &reference).unwrap());
        prop_assert!(p2 < p1, "{} !< {}", p2, p1);
    }
}
