//! Shared domain types: spike volumes, spike-like streams, interval streams,
//! segments and intensity images.
//!
//! Time indices are 0-based everywhere. A volume stores each pixel's stream
//! contiguously (pixel-major), since every algorithm in this crate walks one
//! pixel through time.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Round half away from zero and clamp into the 8-bit range.
#[inline]
pub fn quantize(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

/// A `width x height x frames` binary tensor of camera output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeVolume {
    width: usize,
    height: usize,
    frames: usize,
    // index = (y * width + x) * frames + n
    bits: Vec<u8>,
}

impl SpikeVolume {
    pub fn zeros(width: usize, height: usize, frames: usize) -> Result<Self> {
        check_geometry(width, height)?;
        Ok(Self {
            width,
            height,
            frames,
            bits: vec![0; width * height * frames],
        })
    }

    /// Builds a volume from a bit function of `(x, y, n)`. Any nonzero value counts as a spike.
    pub fn from_fn(
        width: usize,
        height: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut volume = Self::zeros(width, height, frames)?;
        for y in 0..height {
            for x in 0..width {
                let base = (y * width + x) * frames;
                for n in 0..frames {
                    volume.bits[base + n] = u8::from(f(x, y, n) != 0);
                }
            }
        }
        Ok(volume)
    }

    /// Takes ownership of pixel-major bits. Every element must be 0 or 1.
    pub fn from_pixel_major(width: usize, height: usize, frames: usize, bits: Vec<u8>) -> Result<Self> {
        check_geometry(width, height)?;
        if bits.len() != width * height * frames {
            return Err(Error::DimensionMismatch {
                expected: format!("{} bits", width * height * frames),
                actual: format!("{} bits", bits.len()),
            });
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidStream(format!(
                "element {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self {
            width,
            height,
            frames,
            bits,
        })
    }

    /// Rebuilds a volume from per-pixel spike streams in row-major pixel order.
    pub fn from_pixel_streams(width: usize, height: usize, streams: &[SpikeLikeStream]) -> Result<Self> {
        check_geometry(width, height)?;
        if streams.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} streams", width * height),
                actual: format!("{} streams", streams.len()),
            });
        }
        let frames = streams.first().map_or(0, SpikeLikeStream::len);
        let mut bits = Vec::with_capacity(width * height * frames);
        for s in streams {
            if s.len() != frames {
                return Err(Error::DimensionMismatch {
                    expected: format!("{frames} frames"),
                    actual: format!("{} frames", s.len()),
                });
            }
            bits.extend(s.values().iter().map(|&v| u8::from(v == s.firing_value())));
        }
        Ok(Self {
            width,
            height,
            frames,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn get(&self, x: usize, y: usize, n: usize) -> u8 {
        self.bits[(y * self.width + x) * self.frames + n]
    }

    pub fn set(&mut self, x: usize, y: usize, n: usize, spike: bool) {
        self.bits[(y * self.width + x) * self.frames + n] = u8::from(spike);
    }

    /// Raw bits of pixel `p = y * width + x`, one byte per frame.
    pub fn pixel_bits(&self, p: usize) -> &[u8] {
        &self.bits[p * self.frames..(p + 1) * self.frames]
    }

    pub fn as_pixel_major(&self) -> &[u8] {
        &self.bits
    }

    pub fn spike_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

fn check_geometry(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param(format!(
            "volume geometry must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Time sequence of one pixel's bits, with firing value 1 and resting value 0.
pub fn pixel_stream(volume: &SpikeVolume, x: usize, y: usize) -> Result<SpikeLikeStream> {
    if x >= volume.width || y >= volume.height {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: volume.width,
            height: volume.height,
        });
    }
    Ok(SpikeLikeStream::from_bits(volume.pixel_bits(y * volume.width + x)))
}

/// An integer sequence made only of a firing value and (optionally) a resting value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeLikeStream {
    values: Vec<u32>,
    firing: u32,
    resting: Option<u32>,
}

impl SpikeLikeStream {
    pub fn new(values: Vec<u32>, firing: u32, resting: Option<u32>) -> Result<Self> {
        if resting == Some(firing) {
            return Err(Error::InvalidStream(format!(
                "firing and resting values are both {firing}"
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|&(_, &v)| v != firing && Some(v) != resting)
        {
            return Err(Error::InvalidStream(format!(
                "element {i} is {v}, expected firing value {firing} or resting value {resting:?}"
            )));
        }
        Ok(Self {
            values,
            firing,
            resting,
        })
    }

    /// Infers the two values from the data. The larger value fires, matching
    /// camera streams where 1 fires and 0 rests. Three or more distinct values are rejected.
    pub fn from_values(values: Vec<u32>) -> Result<Self> {
        let distinct: BTreeSet<u32> = values.iter().copied().collect();
        match distinct.len() {
            0 => Ok(Self {
                values,
                firing: 1,
                resting: Some(0),
            }),
            1 => {
                let firing = *distinct.iter().next().unwrap();
                Ok(Self {
                    values,
                    firing,
                    resting: None,
                })
            }
            2 => {
                let mut it = distinct.iter();
                let resting = *it.next().unwrap();
                let firing = *it.next().unwrap();
                Ok(Self {
                    values,
                    firing,
                    resting: Some(resting),
                })
            }
            k => Err(Error::InvalidStream(format!(
                "a spike-like stream holds at most two distinct values, found {k}"
            ))),
        }
    }

    /// Camera stream: nonzero bytes are spikes.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            values: bits.iter().map(|&b| u32::from(b != 0)).collect(),
            firing: 1,
            resting: Some(0),
        }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn firing_value(&self) -> u32 {
        self.firing
    }

    pub fn resting_value(&self) -> Option<u32> {
        self.resting
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 0-based positions of the firing value.
    pub fn firing_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(move |&(_, &v)| v == self.firing)
            .map(|(i, _)| i)
    }
}

/// Gaps between consecutive firing values. Every element is at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalStream(Vec<u32>);

impl IntervalStream {
    pub fn new(intervals: Vec<u32>) -> Result<Self> {
        if let Some(i) = intervals.iter().position(|&v| v == 0) {
            return Err(Error::InvalidStream(format!("interval {i} is zero")));
        }
        Ok(Self(intervals))
    }

    pub(crate) fn from_vec_unchecked(intervals: Vec<u32>) -> Self {
        debug_assert!(intervals.iter().all(|&v| v >= 1));
        Self(intervals)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|&v| u64::from(v)).sum()
    }

    pub fn distinct(&self) -> BTreeSet<u32> {
        self.0.iter().copied().collect()
    }
}

/// A maximal stable run of one pixel's stream over frames `[start_frame, end_frame)`.
///
/// Segments without intervals are degenerate: they hold fewer than two spikes and
/// carry the intensity of the preceding segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start_frame: usize,
    pub end_frame: usize,
    pub intervals: IntervalStream,
    pub intensity: f64,
}

impl Segment {
    pub fn is_degenerate(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn duration(&self) -> usize {
        self.end_frame - self.start_frame
    }
}

/// Reconstructed gray levels of one frame, row-major, in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl IntensityImage {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        check_geometry(width, height)?;
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pixels", width * height),
                actual: format!("{} pixels", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0 || *v > 255.0) {
            return Err(Error::param(format!(
                "pixel {i} has value {}, outside [0, 255]",
                values[i]
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y) as f32);
            }
        }
        Self::new(width, height, values)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value as f32; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// 8-bit export values.
    pub fn quantized(&self) -> Vec<u8> {
        self.values.iter().map(|&v| quantize(f64::from(v))).collect()
    }
}

/// Per-frame reconstruction of a whole volume, stored pixel-major like [`SpikeVolume`].
#[derive(Clone, Debug, PartialEq)]
pub struct Video {
    width: usize,
    height: usize,
    frames: usize,
    values: Vec<f32>,
}

impl Video {
    pub(crate) fn from_pixel_major(width: usize, height: usize, frames: usize, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), width * height * frames);
        Self {
            width,
            height,
            frames,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// The full time series of one pixel.
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let p = y * self.width + x;
        &self.values[p * self.frames..(p + 1) * self.frames]
    }

    pub fn frame(&self, n: usize) -> IntensityImage {
        assert!(n < self.frames, "frame {n} out of range ({} frames)", self.frames);
        let values = (0..self.width * self.height)
            .map(|p| self.values[p * self.frames + n])
            .collect();
        IntensityImage {
            width: self.width,
            height: self.height,
            values,
        }
    }

    pub fn images(&self) -> Vec<IntensityImage> {
        (0..self.frames).map(|n| self.frame(n)).collect()
    }
}
