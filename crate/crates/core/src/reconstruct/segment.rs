//! Parameter-free stream segmentation.
//!
//! FSR breaks the first interval stream wherever it stops being zero-order
//! stable. SSR additionally watches, inside each FSR run, the gaps between
//! occurrences of each of the run's two interval values, and breaks the run
//! where one of those second-level streams stops being zero-order stable.
//!
//! Runs are ranges of spike indices `(a, c)`: spikes `a..=c`, intervals
//! `a..c`. A run spans frames `[spike[a], spike[c])`, so consecutive runs
//! tile the stream and the run's duration equals the sum of its intervals.
//! Frames before the first spike and from the last spike on form degenerate
//! segments that carry the previous intensity (0 at the start).

use crate::stability::StablePair;
use crate::types::{IntervalStream, Segment, SpikeLikeStream};

/// `255 / mean interval`.
#[inline]
pub(crate) fn mean_interval_intensity(count: u64, sum: u64) -> f64 {
    255.0 * count as f64 / sum as f64
}

/// Intensity of a non-degenerate segment; `None` when it holds no interval.
pub fn segment_intensity(segment: &Segment) -> Option<f64> {
    if segment.is_degenerate() {
        None
    } else {
        Some(mean_interval_intensity(
            segment.intervals.len() as u64,
            segment.intervals.sum(),
        ))
    }
}

pub(crate) fn collect_spikes<T: Copy + PartialEq>(bits: &[T], firing: T, spikes: &mut Vec<u32>) {
    // branch-free: always write, advance only on a spike
    spikes.clear();
    spikes.resize(bits.len() + 1, 0);
    let mut k = 0;
    for (i, &b) in bits.iter().enumerate() {
        spikes[k] = i as u32;
        k += usize::from(b == firing);
    }
    spikes.truncate(k);
}

pub(crate) fn fsr_runs(spikes: &[u32], runs: &mut Vec<(usize, usize)>) {
    runs.clear();
    if spikes.len() < 2 {
        return;
    }
    let mut start = 0;
    let mut pair = StablePair::new();
    for i in 0..spikes.len() - 1 {
        let interval = spikes[i + 1] - spikes[i];
        if !pair.accept(interval) {
            runs.push((start, i));
            start = i;
            pair.reset(interval);
        }
    }
    runs.push((start, spikes.len() - 1));
}

// Second-level tracker for one interval value inside a run.
#[derive(Clone, Copy)]
struct ValueTrack {
    value: u32,
    last: usize,
    gaps: StablePair,
}

pub(crate) fn ssr_runs(spikes: &[u32], fsr: &[(usize, usize)], runs: &mut Vec<(usize, usize)>) {
    runs.clear();
    for &(a, c) in fsr {
        let mut start = a;
        // an FSR run holds at most two distinct interval values
        let mut tracks: [Option<ValueTrack>; 2] = [None, None];
        for i in a..c {
            let value = spikes[i + 1] - spikes[i];
            let slot = tracks.iter().position(|t| t.is_some_and(|t| t.value == value));
            match slot {
                Some(k) => {
                    let track = tracks[k].as_mut().unwrap();
                    let gap = (i - track.last) as u32;
                    if track.gaps.accept(gap) {
                        track.last = i;
                    } else {
                        // break before the interval that closes the violating gap
                        runs.push((start, i));
                        start = i;
                        tracks = [
                            Some(ValueTrack {
                                value,
                                last: i,
                                gaps: StablePair::new(),
                            }),
                            None,
                        ];
                    }
                }
                None => {
                    let free = tracks
                        .iter()
                        .position(Option::is_none)
                        .expect("at most two values per run");
                    tracks[free] = Some(ValueTrack {
                        value,
                        last: i,
                        gaps: StablePair::new(),
                    });
                }
            }
        }
        runs.push((start, c));
    }
}

/// Writes one value per frame for a pixel given its spikes and runs.
pub(crate) fn fill_frames(spikes: &[u32], runs: &[(usize, usize)], out: &mut [f32]) {
    let Some(&first) = spikes.first() else {
        out.fill(0.0);
        return;
    };
    out[..first as usize].fill(0.0);
    let mut carry = 0.0f32;
    for &(a, c) in runs {
        let (s, e) = (spikes[a], spikes[c]);
        let intensity = mean_interval_intensity((c - a) as u64, u64::from(e - s)) as f32;
        out[s as usize..e as usize].fill(intensity);
        carry = intensity;
    }
    let last = *spikes.last().unwrap() as usize;
    out[last..].fill(carry);
}

pub(crate) fn build_segments(frames: usize, spikes: &[u32], runs: &[(usize, usize)]) -> Vec<Segment> {
    let mut segments = Vec::with_capacity(runs.len() + 2);
    let degenerate = |start: usize, end: usize, intensity: f64| Segment {
        start_frame: start,
        end_frame: end,
        intervals: IntervalStream::default(),
        intensity,
    };
    let Some(&first) = spikes.first() else {
        if frames > 0 {
            segments.push(degenerate(0, frames, 0.0));
        }
        return segments;
    };
    if first > 0 {
        segments.push(degenerate(0, first as usize, 0.0));
    }
    let mut carry = 0.0;
    for &(a, c) in runs {
        let intervals: Vec<u32> = spikes[a..=c].windows(2).map(|w| w[1] - w[0]).collect();
        let intensity = mean_interval_intensity((c - a) as u64, u64::from(spikes[c] - spikes[a]));
        segments.push(Segment {
            start_frame: spikes[a] as usize,
            end_frame: spikes[c] as usize,
            intervals: IntervalStream::from_vec_unchecked(intervals),
            intensity,
        });
        carry = intensity;
    }
    let last = *spikes.last().unwrap() as usize;
    segments.push(degenerate(last, frames, carry));
    segments
}

fn spikes_of(stream: &SpikeLikeStream) -> Vec<u32> {
    let mut spikes = Vec::new();
    collect_spikes(stream.values(), stream.firing_value(), &mut spikes);
    spikes
}

/// First-order segmentation of a spike stream into stable runs plus degenerate edges.
pub fn segment_fsr(stream: &SpikeLikeStream) -> Vec<Segment> {
    let spikes = spikes_of(stream);
    let mut runs = Vec::new();
    fsr_runs(&spikes, &mut runs);
    build_segments(stream.len(), &spikes, &runs)
}

/// Second-order segmentation: FSR runs further split at second-level violations.
pub fn segment_ssr(stream: &SpikeLikeStream) -> Vec<Segment> {
    let spikes = spikes_of(stream);
    let mut fsr = Vec::new();
    fsr_runs(&spikes, &mut fsr);
    let mut runs = Vec::new();
    ssr_runs(&spikes, &fsr, &mut runs);
    build_segments(stream.len(), &spikes, &runs)
}
