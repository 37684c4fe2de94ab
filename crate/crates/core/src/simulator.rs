//! Discrete integrate-and-fire spike generation.
//!
//! Each pixel accumulates `Q(n)` per readout; when the status reaches the
//! threshold a spike is read out and the threshold is subtracted, carrying the
//! residual forward. Rates never exceed the threshold, so at most one spike
//! fires per readout.
//!
//! Arithmetic is exact: rates and residuals are held as fixed-point fractions
//! of the threshold with 32 fractional bits, so periodic rates such as
//! `Q = 0.5` stay exactly periodic and only the ratio `Q / threshold` matters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::scene::SceneSpec;
use crate::types::{IntensityImage, SpikeLikeStream, SpikeVolume};

/// One threshold in fixed-point units.
pub(crate) const UNITS: u64 = 1 << 32;

/// `value / threshold` in fixed-point units, rounded to nearest.
pub(crate) fn to_units(value: f64, threshold: f64) -> u64 {
    ((value / threshold) * UNITS as f64).round() as u64
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::param(format!("threshold must be positive, got {threshold}")));
    }
    Ok(())
}

fn check_rate(q: f64, threshold: f64) -> Result<()> {
    if !(0.0..=threshold).contains(&q) {
        return Err(Error::param(format!(
            "rate {q} is outside [0, {threshold}]; a binary readout fires at most once per step"
        )));
    }
    Ok(())
}

/// Post-reset integrator status with its threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorState {
    threshold: f64,
    residual: u64,
}

impl IntegratorState {
    pub fn new(threshold: f64, initial_residual: f64) -> Result<Self> {
        check_threshold(threshold)?;
        if !(0.0..threshold).contains(&initial_residual) {
            return Err(Error::param(format!(
                "initial residual {initial_residual} is outside [0, {threshold})"
            )));
        }
        Ok(Self {
            threshold,
            residual: to_units(initial_residual, threshold).min(UNITS - 1),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn residual(&self) -> f64 {
        self.residual as f64 / UNITS as f64 * self.threshold
    }

    /// Accumulates one readout step and reports whether a spike fired.
    pub fn step(&mut self, q: f64) -> Result<bool> {
        check_rate(q, self.threshold)?;
        Ok(self.step_units(to_units(q, self.threshold)))
    }

    #[inline]
    pub(crate) fn step_units(&mut self, q: u64) -> bool {
        self.residual += q;
        if self.residual >= UNITS {
            self.residual -= UNITS;
            true
        } else {
            false
        }
    }
}

/// Readout noise and photon-rate fluctuation. Not calibrated against a real sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Probability of inverting each read-out bit.
    pub flip_probability: f64,
    /// Relative standard deviation of multiplicative Gaussian jitter on `Q`.
    pub rate_jitter: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.flip_probability) {
            return Err(Error::param(format!(
                "flip probability {} is outside [0, 0.5)",
                self.flip_probability
            )));
        }
        if !(self.rate_jitter >= 0.0 && self.rate_jitter.is_finite()) {
            return Err(Error::param(format!("rate jitter {} must be >= 0", self.rate_jitter)));
        }
        Ok(())
    }
}

/// Power-on state of every pixel integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum InitialResidual {
    #[default]
    Zero,
    Fixed(f64),
    /// Independent uniform draw in `[0, threshold)` per pixel.
    Uniform {
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub threshold: f64,
    pub initial_residual: InitialResidual,
    pub noise: Option<NoiseSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            initial_residual: InitialResidual::Zero,
            noise: None,
        }
    }
}

/// Runs one integrator over a rate sequence.
pub fn simulate_pixel(rates: &[f64], threshold: f64, initial_residual: f64) -> Result<SpikeLikeStream> {
    let mut state = IntegratorState::new(threshold, initial_residual)?;
    let mut bits = Vec::with_capacity(rates.len());
    for &q in rates {
        bits.push(u8::from(state.step(q)?));
    }
    Ok(SpikeLikeStream::from_bits(&bits))
}

/// Constant-rate stream of `length` readouts starting from a zero residual.
pub fn simulate_constant(q: f64, threshold: f64, length: usize) -> Result<SpikeLikeStream> {
    simulate_pixel(&vec![q; length], threshold, 0.0)
}

pub fn simulate_scene(scene: &SceneSpec, frames: usize, config: &SimConfig) -> Result<SpikeVolume> {
    simulate_scene_with(scene, frames, config, Execution::default())
}

pub fn simulate_scene_with(
    scene: &SceneSpec,
    frames: usize,
    config: &SimConfig,
    exec: Execution,
) -> Result<SpikeVolume> {
    let threshold = config.threshold;
    check_threshold(threshold)?;
    if let Some(noise) = &config.noise {
        noise.validate()?;
    }
    if let InitialResidual::Fixed(r) = config.initial_residual {
        IntegratorState::new(threshold, r)?;
    }

    let width = scene.width;
    let mut bits = vec![0u8; scene.width * scene.height * frames];
    exec::try_for_each_pixel(
        exec,
        &mut bits,
        frames,
        || (),
        |_, p, out| {
            let (x, y) = (p % width, p / width);
            simulate_scene_pixel(scene, config, x, y, out)
        },
    )?;
    SpikeVolume::from_pixel_major(scene.width, scene.height, frames, bits)
}

fn simulate_scene_pixel(scene: &SceneSpec, config: &SimConfig, x: usize, y: usize, out: &mut [u8]) -> Result<()> {
    let threshold = config.threshold;
    let residual = match config.initial_residual {
        InitialResidual::Zero => 0,
        InitialResidual::Fixed(r) => to_units(r, threshold).min(UNITS - 1),
        InitialResidual::Uniform { seed } => {
            ChaCha8Rng::seed_from_u64(pixel_seed(seed, x, y, 1)).random_range(0..UNITS)
        }
    };
    let mut state = IntegratorState { threshold, residual };
    let mut rng = config
        .noise
        .map(|noise| ChaCha8Rng::seed_from_u64(pixel_seed(noise.seed, x, y, 0)));

    for (n, bit) in out.iter_mut().enumerate() {
        let q = scene.rate(x, y, n);
        if !(0.0..=threshold).contains(&q) {
            return Err(Error::RateOutOfRange {
                x,
                y,
                frame: n,
                rate: q,
                threshold,
            });
        }
        let fired = match (&config.noise, rng.as_mut()) {
            (Some(noise), Some(rng)) => {
                let z: f64 = rng.sample(StandardNormal);
                let jittered = (q * (1.0 + noise.rate_jitter * z)).clamp(0.0, threshold);
                let fired = state.step_units(to_units(jittered, threshold));
                fired ^ (rng.random::<f64>() < noise.flip_probability)
            }
            _ => state.step_units(to_units(q, threshold)),
        };
        *bit = u8::from(fired);
    }
    Ok(())
}

// Per-pixel sub-stream seed so results do not depend on scheduling.
fn pixel_seed(seed: u64, x: usize, y: usize, salt: u64) -> u64 {
    let mut z = seed
        ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ salt.wrapping_mul(0x1656_67B1_9E37_79F9);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise-free reference image for frame `n`: `255 * Q / threshold`, since the
/// long-run mean interval of a constant rate is `threshold / Q`.
pub fn ideal_intensity(scene: &SceneSpec, threshold: f64, n: usize) -> IntensityImage {
    let values = (0..scene.height)
        .flat_map(|y| (0..scene.width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let v = 255.0 * scene.rate(x, y, n) / threshold;
            if v.is_finite() {
                v.clamp(0.0, 255.0) as f32
            } else {
                0.0
            }
        })
        .collect();
    IntensityImage::new(scene.width, scene.height, values).expect("clamped values are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneKind;

    fn bits(s: &SpikeLikeStream) -> Vec<u32> {
        s.values().to_vec()
    }

    #[test]
    fn rate_point_three_fires_every_third_or_fourth() {
        let s = simulate_constant(0.3, 1.0, 10).unwrap();
        assert_eq!(bits(&s), vec![0, 0, 0, 1, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn rate_at_threshold_fires_every_step() {
        assert!(simulate_constant(1.0, 1.0, 16)
            .unwrap()
            .values()
            .iter()
            .all(|&b| b == 1));
    }

    #[test]
    fn zero_rate_never_fires() {
        assert!(simulate_constant(0.0, 1.0, 16)
            .unwrap()
            .values()
            .iter()
            .all(|&b| b == 0));
    }

    #[test]
    fn rate_above_threshold_rejected() {
        assert!(simulate_pixel(&[0.5, 1.5], 1.0, 0.0).is_err());
        assert!(simulate_pixel(&[-0.1], 1.0, 0.0).is_err());
        assert!(simulate_pixel(&[0.5], 1.0, 1.0).is_err());
        assert!(simulate_pixel(&[0.5], 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_period_without_drift() {
        // 0.1 is not a dyadic fraction; a float accumulator would drift to an 11-step interval
        let s = simulate_constant(0.1, 1.0, 10_000).unwrap();
        let pos: Vec<usize> = s.firing_positions().collect();
        assert!(pos.windows(2).all(|w| w[1] - w[0] == 10));
    }

    #[test]
    fn residual_carries_forward() {
        let mut st = IntegratorState::new(1.0, 0.0).unwrap();
        assert!(!st.step(0.75).unwrap());
        assert!(st.step(0.75).unwrap());
        assert!((st.residual() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn scene_constant_half_fires_on_even_steps() {
        let scene = SceneSpec::constant(3, 2, 0.5).unwrap();
        let v = simulate_scene(&scene, 8, &SimConfig::default()).unwrap();
        for y in 0..2 {
            for x in 0..3 {
                let got: Vec<u8> = (0..8).map(|n| v.get(x, y, n)).collect();
                assert_eq!(got, vec![0, 1, 0, 1, 0, 1, 0, 1]);
            }
        }
    }

    #[test]
    fn scene_zero_frames() {
        let scene = SceneSpec::constant(4, 4, 0.5).unwrap();
        let v = simulate_scene(&scene, 0, &SimConfig::default()).unwrap();
        assert_eq!(v.frames(), 0);
        assert_eq!(v.width(), 4);
    }

    #[test]
    fn scene_rate_out_of_range_reports_location() {
        let scene = SceneSpec::new(
            4,
            1,
            SceneKind::Step {
                before: 0.5,
                after: 1.5,
                switch_frame: 3,
            },
        )
        .unwrap();
        match simulate_scene(&scene, 8, &SimConfig::default()) {
            Err(Error::RateOutOfRange { x, y, frame, .. }) => assert_eq!((x, y, frame), (0, 0, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let scene = SceneSpec::constant(8, 8, 0.3).unwrap();
        let cfg = SimConfig {
            noise: Some(NoiseSpec {
                flip_probability: 0.01,
                rate_jitter: 0.1,
                seed: 7,
            }),
            initial_residual: InitialResidual::Uniform { seed: 3 },
            ..SimConfig::default()
        };
        let a = simulate_scene_with(&scene, 64, &cfg, Execution::Parallel).unwrap();
        let b = simulate_scene_with(&scene, 64, &cfg, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        let mut other = cfg;
        other.noise.as_mut().unwrap().seed = 8;
        assert_ne!(a, simulate_scene(&scene, 64, &other).unwrap());
    }

    #[test]
    fn invalid_noise_rejected() {
        let scene = SceneSpec::constant(1, 1, 0.3).unwrap();
        let cfg = SimConfig {
            noise: Some(NoiseSpec {
                flip_probability: 0.5,
                rate_jitter: 0.0,
                seed: 0,
            }),
            ..SimConfig::default()
        };
        assert!(simulate_scene(&scene, 4, &cfg).is_err());
    }

    #[test]
    fn ideal_intensity_values() {
        let img = ideal_intensity(&SceneSpec::constant(2, 2, 0.3).unwrap(), 1.0, 0);
        assert!(img.values().iter().all(|&v| (v - 76.5).abs() < 1e-4));
        let img = ideal_intensity(&SceneSpec::constant(1, 1, 1.0).unwrap(), 1.0, 0);
        assert_eq!(img.values(), &[255.0]);
        let img = ideal_intensity(&SceneSpec::constant(1, 1, 0.0).unwrap(), 1.0, 0);
        assert_eq!(img.values(), &[0.0]);
    }
}
