//! Frame-at-a-time FSR for one pixel, mirroring a hardware stability module:
//! it keeps the accepted interval pair and the running interval sum, and pops
//! out a `(duration, intensity)` record whenever a new interval breaks the pair.

use crate::stability::StablePair;
use crate::types::Segment;

use super::segment::mean_interval_intensity;

/// One closed segment: how many frames it lasts and its gray level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentEvent {
    pub duration: u64,
    pub intensity: f64,
    pub degenerate: bool,
}

impl SegmentEvent {
    pub fn from_segment(segment: &Segment) -> Self {
        Self {
            duration: segment.duration() as u64,
            intensity: segment.intensity,
            degenerate: segment.is_degenerate(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PixelReconState {
    pending_pair: StablePair,
    interval_sum: u64,
    interval_count: u64,
    frames_since_last_spike: Option<u64>,
    last_intensity: f64,
    // frames not yet covered by an emitted event
    open_frames: u64,
}

impl PixelReconState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pending_pair(&self) -> (Option<u32>, Option<u32>) {
        (self.pending_pair.smaller(), self.pending_pair.larger())
    }

    pub fn interval_sum(&self) -> u64 {
        self.interval_sum
    }

    pub fn interval_count(&self) -> u64 {
        self.interval_count
    }

    pub fn last_intensity(&self) -> f64 {
        self.last_intensity
    }

    /// Advances one frame; returns the segment closed by this frame, if any.
    pub fn push_frame(&mut self, spike: bool) -> Option<SegmentEvent> {
        self.open_frames += 1;
        if !spike {
            if let Some(f) = self.frames_since_last_spike.as_mut() {
                *f += 1;
            }
            return None;
        }
        let Some(since) = self.frames_since_last_spike.replace(0) else {
            // first spike closes the leading span
            let leading = self.open_frames - 1;
            self.open_frames = 1;
            return (leading > 0).then(|| self.degenerate(leading));
        };
        let interval = since + 1;
        if self.pending_pair.accept(interval as u32) {
            self.interval_sum += interval;
            self.interval_count += 1;
            return None;
        }
        let event = self.close_run();
        self.pending_pair.reset(interval as u32);
        self.interval_sum = interval;
        self.interval_count = 1;
        // the new run starts at the previous spike; that frame through this one stay open
        self.open_frames = interval + 1;
        Some(event)
    }

    /// Feeds a block of frames (one byte per frame), appending closed segments to `out`.
    pub fn push_block(&mut self, bits: &[u8], out: &mut Vec<SegmentEvent>) {
        out.extend(bits.iter().filter_map(|&b| self.push_frame(b != 0)));
    }

    /// Emits the open segment and the trailing span. A second flush emits nothing.
    pub fn flush(&mut self) -> Vec<SegmentEvent> {
        let mut out = Vec::with_capacity(2);
        if self.interval_count > 0 {
            let event = self.close_run();
            self.open_frames -= event.duration;
            out.push(event);
        }
        if self.open_frames > 0 {
            out.push(self.degenerate(self.open_frames));
        }
        self.open_frames = 0;
        self.pending_pair = StablePair::new();
        self.interval_sum = 0;
        self.interval_count = 0;
        out
    }

    fn close_run(&mut self) -> SegmentEvent {
        let intensity = mean_interval_intensity(self.interval_count, self.interval_sum);
        self.last_intensity = intensity;
        SegmentEvent {
            duration: self.interval_sum,
            intensity,
            degenerate: false,
        }
    }

    fn degenerate(&self, duration: u64) -> SegmentEvent {
        SegmentEvent {
            duration,
            intensity: self.last_intensity,
            degenerate: true,
        }
    }
}

/// Runs the streaming FSR over `bits` in `block`-frame chunks and flushes.
pub fn stream_fsr(bits: &[u8], block: usize) -> Vec<SegmentEvent> {
    let mut state = PixelReconState::new();
    let mut out = Vec::new();
    for chunk in bits.chunks(block.max(1)) {
        state.push_block(chunk, &mut out);
    }
    out.extend(state.flush());
    out
}
