//! Stream builders and reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bits with a spike at `lead`, then one spike after each interval, then `tail` zeros.
pub fn bits_from_intervals(lead: usize, intervals: &[u32], tail: usize) -> Vec<u8> {
    let mut bits = vec![0u8; lead];
    bits.push(1);
    for &iv in intervals {
        bits.extend(std::iter::repeat_n(0, iv as usize - 1));
        bits.push(1);
    }
    bits.extend(std::iter::repeat_n(0, tail));
    bits
}

/// Textbook accumulate-and-fire with f64 state; for rates that are exact in binary
/// (dyadic) it is exact too, which makes it an independent oracle.
pub fn reference_integrator(rates: &[f64]) -> Vec<u8> {
    let mut acc = 0.0f64;
    rates
        .iter()
        .map(|&q| {
            acc += q;
            if acc >= 1.0 {
                acc -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

/// Piecewise-constant rates with optional random bit flips, driven through the
/// reference integrator with a random start phase.
pub fn random_mixed_stream(rng: &mut ChaCha8Rng, len: usize, flip: f64) -> Vec<u8> {
    let mut rates = Vec::with_capacity(len);
    while rates.len() < len {
        let q = rng.random_range(0.02..=1.0f64);
        let run = rng.random_range(8..200usize);
        rates.extend(std::iter::repeat_n(q, run.min(len - rates.len())));
    }
    let mut acc = rng.random_range(0.0..1.0f64);
    rates
        .iter()
        .map(|&q| {
            acc += q;
            let mut bit = if acc >= 1.0 {
                acc -= 1.0;
                1
            } else {
                0
            };
            if flip > 0.0 && rng.random::<f64>() < flip {
                bit ^= 1;
            }
            bit
        })
        .collect()
}

/// Gaps between consecutive occurrences of `firing`.
pub fn naive_intervals(values: &[u32], firing: u32) -> Vec<u32> {
    let pos: Vec<usize> = (0..values.len()).filter(|&i| values[i] == firing).collect();
    pos.windows(2).map(|w| (w[1] - w[0]) as u32).collect()
}

pub fn naive_stable(values: &[u32]) -> bool {
    let mut d: Vec<u32> = values.to_vec();
    d.sort_unstable();
    d.dedup();
    d.len() <= 1 || (d.len() == 2 && d[1] == d[0] + 1)
}

/// Brute-force tree walk with no pruning: returns (violations, reached max depth on some path).
pub fn brute_force_tree(values: &[u32], firing: u32, depth: usize, max_depth: usize) -> (usize, bool) {
    let s = naive_intervals(values, firing);
    if s.is_empty() {
        return (0, false);
    }
    if !naive_stable(&s) {
        return (1, false);
    }
    if depth == max_depth {
        return (0, true);
    }
    let mut d = s.clone();
    d.sort_unstable();
    d.dedup();
    let mut violations = 0;
    let mut deep = false;
    for v in d {
        let (k, r) = brute_force_tree(&s, v, depth + 1, max_depth);
        violations += k;
        deep |= r;
    }
    (violations, deep)
}
