//! Per-frame intensity reconstruction of spike volumes.
//!
//! FSR and SSR segment each pixel's stream at stability violations and assign
//! every frame of a segment `255 / mean interval`. TFI and TFP are the classic
//! interval and window-count baselines.

mod baselines;
mod segment;
mod streaming;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::types::{SpikeVolume, Video};

pub use segment::{segment_fsr, segment_intensity, segment_ssr};
pub use streaming::{stream_fsr, PixelReconState, SegmentEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReconMethod {
    Fsr,
    Ssr,
    Tfi,
    Tfp { window: usize },
}

impl ReconMethod {
    pub fn validate(&self) -> Result<()> {
        match self {
            ReconMethod::Tfp { window: 0 } => Err(Error::param("TFP window must be at least 1 frame")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ReconMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReconMethod::Fsr => f.write_str("fsr"),
            ReconMethod::Ssr => f.write_str("ssr"),
            ReconMethod::Tfi => f.write_str("tfi"),
            ReconMethod::Tfp { window } => write!(f, "tfp-{window}"),
        }
    }
}

/// Parses `fsr`, `ssr`, `tfi`, `tfp` (window 32) or `tfp-<window>`, case-insensitively.
impl FromStr for ReconMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let method = match lower.as_str() {
            "fsr" => ReconMethod::Fsr,
            "ssr" => ReconMethod::Ssr,
            "tfi" => ReconMethod::Tfi,
            "tfp" => ReconMethod::Tfp { window: 32 },
            other => match other.strip_prefix("tfp-").or_else(|| other.strip_prefix("tfp")) {
                Some(w) => ReconMethod::Tfp {
                    window: w
                        .parse()
                        .map_err(|_| Error::param(format!("bad TFP window in {s:?}")))?,
                },
                None => return Err(Error::param(format!("unknown reconstruction method {s:?}"))),
            },
        };
        method.validate()?;
        Ok(method)
    }
}

#[derive(Default)]
struct Scratch {
    spikes: Vec<u32>,
    runs: Vec<(usize, usize)>,
    refined: Vec<(usize, usize)>,
}

fn reconstruct_pixel(method: ReconMethod, bits: &[u8], scratch: &mut Scratch, out: &mut [f32]) {
    match method {
        ReconMethod::Fsr => {
            segment::collect_spikes(bits, 1, &mut scratch.spikes);
            segment::fsr_runs(&scratch.spikes, &mut scratch.runs);
            segment::fill_frames(&scratch.spikes, &scratch.runs, out);
        }
        ReconMethod::Ssr => {
            segment::collect_spikes(bits, 1, &mut scratch.spikes);
            segment::fsr_runs(&scratch.spikes, &mut scratch.runs);
            segment::ssr_runs(&scratch.spikes, &scratch.runs, &mut scratch.refined);
            segment::fill_frames(&scratch.spikes, &scratch.refined, out);
        }
        ReconMethod::Tfi => baselines::tfi_frames(bits, out),
        ReconMethod::Tfp { window } => baselines::tfp_frames(bits, window, out),
    }
}

/// Reconstructs every frame of `volume`, pixel-parallel when the `parallel` feature is on.
pub fn reconstruct(volume: &SpikeVolume, method: ReconMethod) -> Result<Video> {
    reconstruct_with(volume, method, Execution::default())
}

pub fn reconstruct_with(volume: &SpikeVolume, method: ReconMethod, exec: Execution) -> Result<Video> {
    method.validate()?;
    let frames = volume.frames();
    let mut values = vec![0.0f32; volume.pixel_count() * frames];
    exec::for_each_pixel(exec, &mut values, frames, Scratch::default, |scratch, p, out| {
        reconstruct_pixel(method, volume.pixel_bits(p), scratch, out)
    });
    Ok(Video::from_pixel_major(volume.width(), volume.height(), frames, values))
}

/// Streaming FSR records for every pixel, feeding `block` frames at a time.
pub fn stream_volume_fsr(volume: &SpikeVolume, block: usize, exec: Execution) -> Vec<Vec<SegmentEvent>> {
    let mut records = vec![Vec::new(); volume.pixel_count()];
    exec::for_each_pixel(
        exec,
        &mut records,
        1,
        || (),
        |_, p, out| {
            out[0] = stream_fsr(volume.pixel_bits(p), block);
        },
    );
    records
}
