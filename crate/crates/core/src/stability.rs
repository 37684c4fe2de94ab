//! Stability judgments on spike-like streams.
//!
//! A stream is zero-order stable when it holds one value, or two values that
//! differ by exactly 1. Taking the gaps between occurrences of a chosen firing
//! value gives the next interval stream; a stream is n-order stable when
//! every derived stream down to depth n stays zero-order stable. With two
//! values present, either may be chosen as the firing value, so the derived
//! streams form a binary tree ('-' picks the smaller value, '+' the larger).
//!
//! Constant-rate integrator output is stable at every depth. The lemma
//! helpers below predict the exact interval values at the first two levels
//! from the rate, using the same fixed-point arithmetic as the simulator.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::simulator::{self, to_units, UNITS};
use crate::types::{IntervalStream, SpikeLikeStream};

/// Which of two distinct values is treated as the firing value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiringChoice {
    Smaller,
    Larger,
}

impl FiringChoice {
    pub fn symbol(self) -> char {
        match self {
            FiringChoice::Smaller => '-',
            FiringChoice::Larger => '+',
        }
    }
}

/// Incremental zero-order check: the set of accepted values, formed lazily.
///
/// The first value fixes one member; a second distinct value within +-1 fixes
/// the pair. Anything else is a violation and is not absorbed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StablePair {
    lo: Option<u32>,
    hi: Option<u32>,
}

impl StablePair {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seeded(value: u32) -> Self {
        Self {
            lo: Some(value),
            hi: None,
        }
    }

    pub fn reset(&mut self, value: u32) {
        *self = Self::seeded(value);
    }

    /// Accepts `value` if the pair stays zero-order stable; returns false (and
    /// leaves the pair unchanged) on a violation.
    #[inline]
    pub fn accept(&mut self, value: u32) -> bool {
        match (self.lo, self.hi) {
            (None, _) => {
                self.lo = Some(value);
                true
            }
            (Some(lo), None) => {
                if value == lo {
                    true
                } else if value == lo.wrapping_add(1) {
                    self.hi = Some(value);
                    true
                } else if value.wrapping_add(1) == lo {
                    self.lo = Some(value);
                    self.hi = Some(lo);
                    true
                } else {
                    false
                }
            }
            (Some(lo), Some(hi)) => value == lo || value == hi,
        }
    }

    pub fn smaller(&self) -> Option<u32> {
        self.lo
    }

    pub fn larger(&self) -> Option<u32> {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_none()
    }
}

/// Gaps between consecutive occurrences of `firing` in `values`.
pub fn interval_stream(values: &[u32], firing: u32) -> IntervalStream {
    let mut out = Vec::new();
    let mut last = None;
    for (i, &v) in values.iter().enumerate() {
        if v == firing {
            if let Some(prev) = last {
                out.push((i - prev) as u32);
            }
            last = Some(i);
        }
    }
    IntervalStream::from_vec_unchecked(out)
}

/// Interval stream of a spike-like stream at its own firing value.
pub fn stream_intervals(stream: &SpikeLikeStream) -> IntervalStream {
    interval_stream(stream.values(), stream.firing_value())
}

/// At most two distinct values, and when two, they differ by exactly 1.
pub fn is_zero_order_stable(values: &[u32]) -> bool {
    let distinct: BTreeSet<u32> = values.iter().copied().collect();
    let mut it = distinct.iter();
    match (it.next(), it.next(), it.next()) {
        (_, None, _) => true,
        (Some(&a), Some(&b), None) => b - a == 1,
        _ => false,
    }
}

/// Index of the first element that breaks zero-order stability of the prefix.
pub fn first_violation(values: &[u32]) -> Option<usize> {
    let mut pair = StablePair::new();
    values.iter().position(|&v| !pair.accept(v))
}

/// Where the tree search first found an unstable stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Firing choices taken below the first interval stream; empty at depth 1.
    pub path: Vec<FiringChoice>,
    pub depth: usize,
    /// Index of the offending element in the depth-`depth` interval stream.
    pub index: usize,
}

impl Violation {
    pub fn path_string(&self) -> String {
        self.path.iter().map(|c| c.symbol()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    /// Depth up to which every explored interval stream was zero-order stable.
    pub verified_order: usize,
    /// No violation anywhere in the explored tree.
    pub absolute: bool,
    /// Every path reached an empty interval stream within the depth limit.
    pub exhausted: bool,
    pub first_violation: Option<Violation>,
}

struct TreeSearch {
    max_depth: usize,
    exhausted: bool,
    best: Option<Violation>,
}

impl TreeSearch {
    fn explore(&mut self, values: &[u32], firing: u32, depth: usize, path: &mut Vec<FiringChoice>) {
        // a violation here could not beat one already found at this depth or shallower
        if self.best.as_ref().is_some_and(|b| b.depth <= depth) {
            return;
        }
        let derived = interval_stream(values, firing);
        if derived.is_empty() {
            return;
        }
        let mut pair = StablePair::new();
        if let Some(index) = derived.as_slice().iter().position(|&v| !pair.accept(v)) {
            self.best = Some(Violation {
                path: path.clone(),
                depth,
                index,
            });
            return;
        }
        if depth == self.max_depth {
            self.exhausted = false;
            return;
        }
        let derived = derived.into_vec();
        let lo = pair.smaller().expect("non-empty stream has a value");
        path.push(FiringChoice::Smaller);
        self.explore(&derived, lo, depth + 1, path);
        path.pop();
        if let Some(hi) = pair.larger() {
            path.push(FiringChoice::Larger);
            self.explore(&derived, hi, depth + 1, path);
            path.pop();
        }
    }
}

/// Explores the full '-'/'+' tree of interval streams down to `max_depth`,
/// depth-first with '-' first, and reports the shallowest violation.
pub fn stability_order(stream: &SpikeLikeStream, max_depth: usize) -> Result<StabilityReport> {
    if max_depth == 0 {
        return Err(Error::param("max depth must be at least 1"));
    }
    let mut search = TreeSearch {
        max_depth,
        exhausted: true,
        best: None,
    };
    search.explore(stream.values(), stream.firing_value(), 1, &mut Vec::new());
    Ok(match search.best {
        Some(v) => StabilityReport {
            verified_order: v.depth - 1,
            absolute: false,
            exhausted: false,
            first_violation: Some(v),
        },
        None => StabilityReport {
            verified_order: max_depth,
            absolute: true,
            exhausted: search.exhausted,
            first_violation: None,
        },
    })
}

/// Exact rate ratio `q0 / threshold` as `rate / UNITS`, with `T0* = UNITS / rate`.
#[derive(Clone, Copy, Debug)]
struct RateRatio {
    rate: u64,
}

impl RateRatio {
    fn new(q0: f64, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::param(format!("threshold must be positive, got {threshold}")));
        }
        if !(q0 > 0.0 && q0 <= threshold) {
            return Err(Error::param(format!("rate {q0} is outside (0, {threshold}]")));
        }
        let rate = to_units(q0, threshold);
        if rate == 0 {
            return Err(Error::param(format!("rate {q0} is below the integrator resolution")));
        }
        Ok(Self { rate })
    }

    /// `floor(T0*)`.
    fn whole(&self) -> u64 {
        UNITS / self.rate
    }

    /// Numerator of the fractional part `b = remainder / rate`.
    fn remainder(&self) -> u64 {
        UNITS % self.rate
    }

    fn fraction(&self) -> f64 {
        self.remainder() as f64 / self.rate as f64
    }
}

/// Bounds of `num / den`: `(floor, floor + 1)`, or `(v, v)` when exact.
fn ratio_bounds(num: u64, den: u64) -> (u32, u32) {
    let whole = (num / den) as u32;
    if num.is_multiple_of(den) {
        (whole, whole)
    } else {
        (whole, whole + 1)
    }
}

/// The only interval values a constant rate `q0` can produce: `floor(T0*)` and
/// `floor(T0*) + 1` with `T0* = threshold / q0`, collapsing to one value when
/// `T0*` is an integer.
pub fn lemma1_interval_bounds(q0: f64, threshold: f64) -> Result<(u32, u32)> {
    let r = RateRatio::new(q0, threshold)?;
    Ok(ratio_bounds(UNITS, r.rate))
}

/// Fractional part `b` of `T0* = threshold / q0`.
pub fn interval_fraction(q0: f64, threshold: f64) -> Result<f64> {
    Ok(RateRatio::new(q0, threshold)?.fraction())
}

/// Rate and threshold of the integrator that generates the first interval stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma2Params {
    pub q1: f64,
    pub m1_threshold: f64,
    pub firing_choice: FiringChoice,
    pub derived_firing_value: u32,
}

/// Parameters of the derived integrator for either firing choice. The larger
/// choice yields a negative rate and threshold, and needs two interval values.
pub fn lemma2_params(q0: f64, threshold: f64, firing_choice: FiringChoice) -> Result<Lemma2Params> {
    let r = RateRatio::new(q0, threshold)?;
    let whole = r.whole();
    let b = r.fraction();
    let t0 = whole as f64 + b;
    match firing_choice {
        FiringChoice::Smaller => Ok(Lemma2Params {
            q1: (1.0 - b) * threshold / t0,
            m1_threshold: threshold / t0,
            firing_choice,
            derived_firing_value: whole as u32,
        }),
        FiringChoice::Larger => {
            if r.remainder() == 0 {
                return Err(Error::param(format!(
                    "threshold / rate is exactly {whole}; only one interval value exists"
                )));
            }
            Ok(Lemma2Params {
                q1: -b * threshold / t0,
                m1_threshold: -threshold / t0,
                firing_choice,
                derived_firing_value: whole as u32 + 1,
            })
        }
    }
}

/// Interval values of the second-level stream taken at the given firing choice:
/// the first-level bounds of the derived integrator, `T1* = M1th / Q1`, which is
/// `1 / (1 - b)` for the smaller choice and `1 / b` for the larger.
pub fn second_level_bounds(q0: f64, threshold: f64, firing_choice: FiringChoice) -> Result<(u32, u32)> {
    let r = RateRatio::new(q0, threshold)?;
    let rem = r.remainder();
    match firing_choice {
        FiringChoice::Smaller => Ok(ratio_bounds(r.rate, r.rate - rem)),
        FiringChoice::Larger => {
            if rem == 0 {
                return Err(Error::param("larger firing choice needs a fractional period"));
            }
            Ok(ratio_bounds(r.rate, rem))
        }
    }
}

fn within(values: &[u32], (lo, hi): (u32, u32)) -> bool {
    values.iter().all(|&v| v == lo || v == hi)
}

/// Simulates a constant-rate stream and checks that every interval lies within
/// [`lemma1_interval_bounds`], and that both values show up when the stream is
/// long enough (`length > 2 T0* / min(b, 1 - b)`).
pub fn verify_lemma1(q0: f64, threshold: f64, length: usize) -> Result<bool> {
    let r = RateRatio::new(q0, threshold)?;
    let bounds = ratio_bounds(UNITS, r.rate);
    let s0 = simulator::simulate_constant(q0, threshold, length)?;
    let s1 = stream_intervals(&s0);
    if !within(s1.as_slice(), bounds) {
        return Ok(false);
    }
    let b = r.fraction();
    if b > 0.0 {
        let t0 = UNITS as f64 / r.rate as f64;
        if length as f64 > 2.0 * t0 / b.min(1.0 - b) {
            let seen = s1.distinct();
            return Ok(seen.contains(&bounds.0) && seen.contains(&bounds.1));
        }
    }
    Ok(true)
}

/// Checks that the interval stream of a constant-rate stream behaves like the
/// output of a constant-rate integrator: it is zero-order stable with the
/// first-level values, and its own interval streams (taken at the smaller and,
/// when present, the larger value) only hold the predicted second-level values.
pub fn verify_lemma2(q0: f64, threshold: f64, length: usize) -> Result<bool> {
    let r = RateRatio::new(q0, threshold)?;
    let first = ratio_bounds(UNITS, r.rate);
    let s0 = simulator::simulate_constant(q0, threshold, length)?;
    let s1 = stream_intervals(&s0);
    if !is_zero_order_stable(s1.as_slice()) || !within(s1.as_slice(), first) {
        return Ok(false);
    }
    let smaller = interval_stream(s1.as_slice(), first.0);
    if !within(
        smaller.as_slice(),
        second_level_bounds(q0, threshold, FiringChoice::Smaller)?,
    ) {
        return Ok(false);
    }
    if r.remainder() != 0 {
        let larger = interval_stream(s1.as_slice(), first.1);
        if !within(
            larger.as_slice(),
            second_level_bounds(q0, threshold, FiringChoice::Larger)?,
        ) {
            return Ok(false);
        }
    }
    Ok(true)
}
