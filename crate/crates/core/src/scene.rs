//! Ground-truth accumulation-rate fields.
//!
//! A scene gives the per-step accumulation `Q(x, y, n)` of each pixel's
//! integrator. Physically `Q = C * A * dT` (conversion coefficient, light
//! intensity, sampling interval), but the simulator only consumes the product,
//! expressed in the same units as the firing threshold.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SceneKind {
    /// Uniform static light.
    Constant { q: f64 },
    /// A vertical bar sweeping right by one pixel every `frames_per_pixel` frames, wrapping at the edge.
    ///
    /// With `texture > 0` each rate is scaled by `1 + texture * h` for a fixed
    /// pseudo-random `h` in `[-1, 1]`; the bar's pattern travels with the bar and
    /// the background's stays put.
    MovingBar {
        background: f64,
        bar: f64,
        bar_width: usize,
        frames_per_pixel: usize,
        texture: f64,
    },
    /// A bright wedge around the image center rotating at `radians_per_frame`.
    RotatingWedge {
        background: f64,
        wedge: f64,
        half_angle: f64,
        radians_per_frame: f64,
    },
    /// Uniform light that switches from `before` to `after` at `switch_frame`.
    Step {
        before: f64,
        after: f64,
        switch_frame: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub kind: SceneKind,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize, kind: SceneKind) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "scene geometry must be at least 1x1, got {width}x{height}"
            )));
        }
        match &kind {
            SceneKind::MovingBar {
                bar_width,
                frames_per_pixel,
                ..
            } if *bar_width == 0 || *frames_per_pixel == 0 => {
                return Err(Error::param("bar width and frames per pixel must be >= 1"));
            }
            SceneKind::MovingBar { texture, .. } if !(0.0..1.0).contains(texture) => {
                return Err(Error::param(format!("bar texture {texture} is outside [0, 1)")));
            }
            SceneKind::RotatingWedge { half_angle, .. } if half_angle.is_nan() || *half_angle <= 0.0 => {
                return Err(Error::param("wedge half angle must be positive"));
            }
            _ => {}
        }
        Ok(Self { width, height, kind })
    }

    pub fn constant(width: usize, height: usize, q: f64) -> Result<Self> {
        Self::new(width, height, SceneKind::Constant { q })
    }

    /// Accumulation rate at pixel `(x, y)` during step `n`, sampled at the left edge of the step.
    pub fn rate(&self, x: usize, y: usize, n: usize) -> f64 {
        match self.kind {
            SceneKind::Constant { q } => q,
            SceneKind::MovingBar {
                background,
                bar,
                bar_width,
                frames_per_pixel,
                texture,
            } => {
                let left = (n / frames_per_pixel) % self.width;
                let offset = (x + self.width - left) % self.width;
                let (level, column, salt) = if offset < bar_width {
                    (bar, offset, 1)
                } else {
                    (background, x, 0)
                };
                if texture == 0.0 {
                    level
                } else {
                    level * (1.0 + texture * texture_value(column, y, salt))
                }
            }
            SceneKind::RotatingWedge {
                background,
                wedge,
                half_angle,
                radians_per_frame,
            } => {
                let cx = (self.width as f64 - 1.0) / 2.0;
                let cy = (self.height as f64 - 1.0) / 2.0;
                let angle = (y as f64 - cy).atan2(x as f64 - cx);
                let heading = radians_per_frame * n as f64;
                let diff = (angle - heading).rem_euclid(TAU);
                let diff = diff.min(TAU - diff);
                if diff <= half_angle {
                    wedge
                } else {
                    background
                }
            }
            SceneKind::Step {
                before,
                after,
                switch_frame,
            } => {
                if n < switch_frame {
                    before
                } else {
                    after
                }
            }
        }
    }
}

// Deterministic value in [-1, 1] per (column, row, layer).
fn texture_value(column: usize, row: usize, salt: u64) -> f64 {
    let mut z = (column as u64) << 32 ^ (row as u64) << 1 ^ salt;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}
