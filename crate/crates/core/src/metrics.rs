//! Image quality and throughput measurement.
//!
//! TE is the Shannon entropy (bits) of the joint distribution of `(g, m)` over
//! interior pixels, where `g` is the 8-bit gray value and `m` the rounded mean
//! of its 3x3 neighborhood. Border pixels are skipped rather than padded.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::reconstruct::{reconstruct_with, ReconMethod};
use crate::types::{IntensityImage, SpikeVolume, Video};

pub const JOINT_BINS: usize = 256 * 256;

/// Counts of `(g, m)` pairs, indexed `g * 256 + m`.
pub fn joint_histogram(image: &IntensityImage) -> Result<Vec<u64>> {
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::param(format!("entropy needs at least 3x3 pixels, got {w}x{h}")));
    }
    let g = image.quantized();
    let mut hist = vec![0u64; JOINT_BINS];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut sum = 0u32;
            for row in y - 1..=y + 1 {
                let r = &g[row * w + x - 1..row * w + x + 2];
                sum += r.iter().map(|&v| u32::from(v)).sum::<u32>();
            }
            // round(sum / 9); sum / 9 never lands on .5 since 9 is odd
            let mean = (2 * sum + 9) / 18;
            hist[usize::from(g[y * w + x]) * 256 + mean as usize] += 1;
        }
    }
    Ok(hist)
}

/// Shannon entropy in bits of a frequency table; empty tables give 0.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // a single occupied bin yields -0.0
    h.max(0.0)
}

pub fn two_dimensional_entropy(image: &IntensityImage) -> Result<f64> {
    Ok(entropy_bits(&joint_histogram(image)?))
}

/// Mean TE over all frames of a video.
pub fn video_entropy(video: &Video) -> Result<f64> {
    if video.frames() == 0 {
        return Err(Error::param("entropy of a video with no frames"));
    }
    let mut total = 0.0;
    for n in 0..video.frames() {
        total += two_dimensional_entropy(&video.frame(n))?;
    }
    Ok(total / video.frames() as f64)
}

fn check_same_shape(a: &IntensityImage, b: &IntensityImage) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", b.width(), b.height()),
            actual: format!("{}x{}", a.width(), a.height()),
        });
    }
    Ok(())
}

fn squared_error(a: &IntensityImage, b: &IntensityImage) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

pub fn mse(image: &IntensityImage, reference: &IntensityImage) -> Result<f64> {
    check_same_shape(image, reference)?;
    Ok(squared_error(image, reference) / image.values().len() as f64)
}

/// `10 log10(255^2 / MSE)`; infinite for identical images.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

pub fn psnr(image: &IntensityImage, reference: &IntensityImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(image, reference)?))
}

/// MSE pooled over frames `skip..`, comparing frame `n` with `references[n]`.
pub fn video_mse(video: &Video, references: &[IntensityImage], skip: usize) -> Result<f64> {
    if references.len() != video.frames() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} reference frames", video.frames()),
            actual: format!("{}", references.len()),
        });
    }
    if skip >= video.frames() {
        return Err(Error::param(format!(
            "warm-up of {skip} frames leaves nothing of a {}-frame video",
            video.frames()
        )));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (n, reference) in references.iter().enumerate().skip(skip) {
        let frame = video.frame(n);
        check_same_shape(&frame, reference)?;
        total += squared_error(&frame, reference);
        count += reference.values().len();
    }
    Ok(total / count as f64)
}

pub fn video_psnr(video: &Video, references: &[IntensityImage], skip: usize) -> Result<f64> {
    Ok(psnr_from_mse(video_mse(video, references, skip)?))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Two-dimensional entropy, bits.
    pub te: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    /// Frames per second.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub method: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub workers: usize,
    pub repeats: usize,
    pub median_seconds: f64,
    pub frames_per_second: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn time_runs(volume: &SpikeVolume, method: ReconMethod, repeats: usize, exec: Execution) -> Result<Vec<f64>> {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let video = reconstruct_with(volume, method, exec)?;
        times.push(start.elapsed().as_secs_f64());
        drop(video);
    }
    Ok(times)
}

/// Median wall-clock reconstruction throughput over `repeats` runs.
///
/// `workers == 1` runs on the calling thread; larger counts use a dedicated
/// pool of that size. Without the `parallel` feature every run is single-worker.
pub fn bench(volume: &SpikeVolume, method: ReconMethod, repeats: usize, workers: usize) -> Result<BenchReport> {
    if repeats < 3 {
        return Err(Error::param(format!("bench needs at least 3 repeats, got {repeats}")));
    }
    if workers == 0 {
        return Err(Error::param("bench needs at least 1 worker"));
    }
    method.validate()?;
    #[cfg(feature = "parallel")]
    let (times, workers) = if workers == 1 {
        (time_runs(volume, method, repeats, Execution::Sequential)?, 1)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::param(format!("cannot start {workers} workers: {e}")))?;
        (
            pool.install(|| time_runs(volume, method, repeats, Execution::Parallel))?,
            workers,
        )
    };
    #[cfg(not(feature = "parallel"))]
    let (times, workers) = (time_runs(volume, method, repeats, Execution::Sequential)?, 1);
    let median_seconds = median(times);
    Ok(BenchReport {
        method: method.to_string(),
        width: volume.width(),
        height: volume.height(),
        frames: volume.frames(),
        workers,
        repeats,
        median_seconds,
        frames_per_second: volume.frames() as f64 / median_seconds.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_entropy() {
        let img = IntensityImage::constant(5, 4, 77.0).unwrap();
        assert_eq!(two_dimensional_entropy(&img).unwrap(), 0.0);
    }

    #[test]
    fn two_equal_pairs_give_one_bit() {
        // interior is 2x1; the two pixels have distinct (g, m) pairs
        let img = IntensityImage::from_fn(4, 3, |x, _| if x < 2 { 0.0 } else { 90.0 }).unwrap();
        assert!((two_dimensional_entropy(&img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_images_rejected() {
        let img = IntensityImage::constant(2, 5, 1.0).unwrap();
        assert!(two_dimensional_entropy(&img).is_err());
    }

    #[test]
    fn psnr_closed_forms() {
        let zero = IntensityImage::constant(4, 4, 0.0).unwrap();
        let full = IntensityImage::constant(4, 4, 255.0).unwrap();
        let one = IntensityImage::constant(4, 4, 1.0).unwrap();
        assert_eq!(psnr(&zero, &zero).unwrap(), f64::INFINITY);
        assert!(psnr(&zero, &full).unwrap().abs() < 1e-12);
        assert!((psnr(&one, &zero).unwrap() - 10.0 * 65025f64.log10()).abs() < 1e-12);
        let small = IntensityImage::constant(3, 4, 0.0).unwrap();
        assert!(psnr(&small, &zero).is_err());
    }

    #[test]
    fn bench_rejects_few_repeats() {
        let v = SpikeVolume::zeros(2, 2, 4).unwrap();
        assert!(bench(&v, ReconMethod::Fsr, 2, 1).is_err());
        let r = bench(&v, ReconMethod::Fsr, 3, 1).unwrap();
        assert!(r.frames_per_second.is_finite() && r.frames_per_second > 0.0);
    }
}
