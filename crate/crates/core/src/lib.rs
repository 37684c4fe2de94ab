//! Spike camera simulation, stability analysis and stability-based reconstruction.
//!
//! A spike camera pixel integrates light and emits a binary spike whenever its
//! accumulator crosses a threshold. This crate simulates such pixels exactly,
//! checks the stability structure of their inter-spike intervals, reconstructs
//! per-frame intensities (FSR, SSR and the TFI/TFP baselines), packs segments
//! into 16-bit records, and reads and writes the associated file formats.
//!
//! ```
//! use spikerec::{reconstruct, simulate_scene, ReconMethod, SceneSpec, SimConfig};
//!
//! let scene = SceneSpec::constant(4, 4, 0.3).unwrap();
//! let spikes = simulate_scene(&scene, 1024, &SimConfig::default()).unwrap();
//! let video = reconstruct(&spikes, ReconMethod::Fsr).unwrap();
//! assert!((video.pixel(0, 0)[500] - 76.5).abs() < 0.5);
//! ```

pub mod codec;
pub mod error;
pub mod exec;
pub mod io;
pub mod metrics;
pub mod reconstruct;
pub mod scene;
pub mod simulator;
pub mod stability;
pub mod types;

pub use error::{Error, Result};
pub use exec::Execution;
pub use reconstruct::{reconstruct, reconstruct_with, ReconMethod};
pub use scene::{SceneKind, SceneSpec};
pub use simulator::{simulate_scene, simulate_scene_with, InitialResidual, NoiseSpec, SimConfig};
pub use types::{IntensityImage, IntervalStream, Segment, SpikeLikeStream, SpikeVolume, Video};
