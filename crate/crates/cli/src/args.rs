use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spikerec::ReconMethod;

#[derive(Parser, Debug)]
#[command(
    name = "spikerec",
    version,
    about = "Spike camera simulation, stability checks and reconstruction"
)]
pub struct Cli {
    /// Worker threads for pixel-parallel work (defaults to available parallelism).
    #[arg(long, global = true, env = "SPIKEREC_WORKERS")]
    pub workers: Option<usize>,

    /// Default directory for outputs that are not given explicitly.
    #[arg(long, global = true, env = "SPIKEREC_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a scene and write an SPK1 volume plus ground-truth frames.
    Simulate(SimulateArgs),
    /// Reconstruct frames (or per-segment records) from a spike file.
    Reconstruct(ReconstructArgs),
    /// Check stability of constant-rate streams or of every pixel of a file.
    VerifyStability(VerifyArgs),
    /// Measure reconstruction throughput.
    Bench(BenchArgs),
    /// Report entropy and, given references, PSNR per method.
    Compare(CompareArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SceneName {
    Constant,
    Bar,
    Wedge,
    Step,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Every integrator starts empty.
    Zero,
    /// Independent uniform start per pixel, drawn from the seed.
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageKind {
    Pgm,
    Png,
}

impl From<ImageKind> for spikerec::io::ImageFormat {
    fn from(k: ImageKind) -> Self {
        match k {
            ImageKind::Pgm => spikerec::io::ImageFormat::Pgm,
            ImageKind::Png => spikerec::io::ImageFormat::Png,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scene: SceneName,
    #[arg(long, default_value_t = 400)]
    pub width: usize,
    #[arg(long, default_value_t = 250)]
    pub height: usize,
    #[arg(long, default_value_t = 320)]
    pub frames: usize,
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,

    /// Rate of the constant scene.
    #[arg(long, default_value_t = 0.3)]
    pub q: f64,
    /// Rate outside the bar or wedge.
    #[arg(long, default_value_t = 0.2)]
    pub background: f64,
    /// Rate inside the bar or wedge.
    #[arg(long, default_value_t = 0.6)]
    pub level: f64,
    #[arg(long, default_value_t = 8)]
    pub bar_width: usize,
    #[arg(long, default_value_t = 8)]
    pub frames_per_pixel: usize,
    /// Relative texture amplitude on the bar scene, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub texture: f64,
    #[arg(long, default_value_t = 0.4)]
    pub half_angle: f64,
    #[arg(long, default_value_t = 0.01)]
    pub radians_per_frame: f64,
    /// Step scene: rate before and after the switch.
    #[arg(long, default_value_t = 0.3)]
    pub before: f64,
    #[arg(long, default_value_t = 0.6)]
    pub after: f64,
    #[arg(long, default_value_t = 160)]
    pub switch_frame: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Phase::Zero)]
    pub phase: Phase,
    /// Probability of flipping each output bit.
    #[arg(long, default_value_t = 0.0)]
    pub flip: f64,
    /// Relative Gaussian jitter on each step's rate.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = spikerec::io::DEFAULT_FPS)]
    pub fps: u32,

    /// Output SPK1 file (defaults to `<out-dir>/spikes.spk`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth frame directory (defaults to `<out-dir>/truth`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub no_truth: bool,
    #[arg(long, value_enum, default_value_t = ImageKind::Pgm)]
    pub format: ImageKind,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// SPK1 file, or a headerless dump with `--raw`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub raw: bool,
    #[arg(long, default_value_t = spikerec::io::DEFAULT_RAW_WIDTH, requires = "raw")]
    pub width: usize,
    #[arg(long, default_value_t = spikerec::io::DEFAULT_RAW_HEIGHT, requires = "raw")]
    pub height: usize,
    #[arg(long, requires = "raw")]
    pub msb_first: bool,
}

pub fn parse_method(s: &str) -> Result<ReconMethod, String> {
    s.parse().map_err(|e: spikerec::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// fsr, ssr, tfi, tfp or tfp-<window>.
    #[arg(long, value_parser = parse_method, default_value = "fsr")]
    pub method: ReconMethod,
    /// TFP window; overrides the one in `--method`.
    #[arg(long)]
    pub window: Option<usize>,
    /// Output directory (defaults to `<out-dir>/<method>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-segment records (`records.spkr`) instead of frames.
    #[arg(long)]
    pub emit_records: bool,
    #[arg(long, value_enum, default_value_t = ImageKind::Pgm)]
    pub format: ImageKind,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check every pixel of this file instead of a constant-rate sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub raw: bool,
    #[arg(long, default_value_t = spikerec::io::DEFAULT_RAW_WIDTH)]
    pub width: usize,
    #[arg(long, default_value_t = spikerec::io::DEFAULT_RAW_HEIGHT)]
    pub height: usize,
    #[arg(long)]
    pub msb_first: bool,

    /// Explicit rates; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    pub q: Vec<f64>,
    /// Number of log-spaced rates in [q-min, 1].
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub q_min: f64,
    #[arg(long, default_value_t = 2048)]
    pub length: usize,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Spike file to measure; a synthetic rotating wedge is used otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    pub width: usize,
    #[arg(long, default_value_t = 250)]
    pub height: usize,
    #[arg(long, default_value_t = 320)]
    pub frames: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "fsr,ssr,tfi,tfp")]
    pub methods: Vec<ReconMethod>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Worker counts to sweep (defaults to 1 and the global worker count).
    #[arg(long = "sweep", value_delimiter = ',')]
    pub sweep: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Directory of ground-truth frames named `frame_NNNNN.pgm` or `.png`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Require PSNR; fails when no reference is given.
    #[arg(long)]
    pub psnr: bool,
    /// Frames skipped at the start when scoring against references.
    #[arg(long, default_value_t = 64)]
    pub warmup: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "fsr,ssr,tfi,tfp")]
    pub methods: Vec<ReconMethod>,
}
