use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use spikerec::io::{self, BitOrder, ImageFormat, RecordFile, SpkHeader};
use spikerec::metrics::{self, MetricReport};
use spikerec::reconstruct::{segment_ssr, stream_volume_fsr, SegmentEvent};
use spikerec::simulator::{ideal_intensity, simulate_constant};
use spikerec::stability::{self, stability_order, verify_lemma1, verify_lemma2, FiringChoice, Violation};
use spikerec::types::pixel_stream;
use spikerec::{
    codec, reconstruct as reconstruct_volume, simulate_scene, Execution, InitialResidual, IntensityImage, NoiseSpec,
    ReconMethod, SceneKind, SceneSpec, SimConfig, SpikeLikeStream, SpikeVolume,
};

use crate::args::{BenchArgs, CompareArgs, InputArgs, Phase, ReconstructArgs, SceneName, SimulateArgs, VerifyArgs};
use crate::{usage, Status};

fn emit(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn load(input: &InputArgs) -> anyhow::Result<(SpikeVolume, u32)> {
    if input.raw {
        let order = if input.msb_first {
            BitOrder::MsbFirst
        } else {
            BitOrder::LsbFirst
        };
        Ok((
            io::read_raw(&input.input, input.width, input.height, order)?,
            io::DEFAULT_FPS,
        ))
    } else {
        Ok(io::read_spk(&input.input)?)
    }
}

fn scene_of(a: &SimulateArgs) -> anyhow::Result<SceneSpec> {
    let kind = match a.scene {
        SceneName::Constant => SceneKind::Constant { q: a.q },
        SceneName::Bar => SceneKind::MovingBar {
            background: a.background,
            bar: a.level,
            bar_width: a.bar_width,
            frames_per_pixel: a.frames_per_pixel,
            texture: a.texture,
        },
        SceneName::Wedge => SceneKind::RotatingWedge {
            background: a.background,
            wedge: a.level,
            half_angle: a.half_angle,
            radians_per_frame: a.radians_per_frame,
        },
        SceneName::Step => SceneKind::Step {
            before: a.before,
            after: a.after,
            switch_frame: a.switch_frame,
        },
    };
    Ok(SceneSpec::new(a.width, a.height, kind)?)
}

pub fn simulate(a: SimulateArgs, out_dir: &Path) -> anyhow::Result<Status> {
    let scene = scene_of(&a)?;
    let config = SimConfig {
        threshold: a.threshold,
        initial_residual: match a.phase {
            Phase::Zero => InitialResidual::Zero,
            Phase::Random => InitialResidual::Uniform { seed: a.seed },
        },
        noise: (a.flip > 0.0 || a.jitter > 0.0).then_some(NoiseSpec {
            flip_probability: a.flip,
            rate_jitter: a.jitter,
            seed: a.seed,
        }),
    };
    let out = a.out.clone().unwrap_or_else(|| out_dir.join("spikes.spk"));
    let truth = (!a.no_truth).then(|| a.truth.clone().unwrap_or_else(|| out_dir.join("truth")));

    let volume = simulate_scene(&scene, a.frames, &config)?;
    io::write_spk(&volume, a.fps, &out)?;
    if let Some(dir) = &truth {
        let format = ImageFormat::from(a.format);
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for n in 0..a.frames {
            io::write_image(
                &ideal_intensity(&scene, a.threshold, n),
                io::frame_path(dir, n, format),
                format,
            )?;
        }
    }
    let spikes = volume.spike_count();
    eprintln!(
        "simulated {}x{}x{} {:?} scene: {spikes} spikes -> {}",
        a.width,
        a.height,
        a.frames,
        a.scene,
        out.display()
    );
    emit(&json!({
        "command": "simulate",
        "output": out,
        "truth": truth,
        "width": a.width,
        "height": a.height,
        "frames": a.frames,
        "spikes": spikes,
        "seed": a.seed,
    }))?;
    Ok(Status::Ok)
}

fn resolve_method(method: ReconMethod, window: Option<usize>) -> anyhow::Result<ReconMethod> {
    match (method, window) {
        (m, None) => Ok(m),
        (ReconMethod::Tfp { .. }, Some(window)) => {
            let m = ReconMethod::Tfp { window };
            m.validate().map_err(|e| usage(e.to_string()))?;
            Ok(m)
        }
        (m, Some(_)) => Err(usage(format!("--window only applies to tfp, not {m}"))),
    }
}

fn segment_records(volume: &SpikeVolume, method: ReconMethod) -> anyhow::Result<Vec<Vec<SegmentEvent>>> {
    match method {
        ReconMethod::Fsr => Ok(stream_volume_fsr(volume, 32, Execution::default())),
        ReconMethod::Ssr => Ok((0..volume.pixel_count())
            .map(|p| {
                segment_ssr(&SpikeLikeStream::from_bits(volume.pixel_bits(p)))
                    .iter()
                    .map(SegmentEvent::from_segment)
                    .collect()
            })
            .collect()),
        m => Err(usage(format!("{m} has no segments; --emit-records needs fsr or ssr"))),
    }
}

pub fn reconstruct(a: ReconstructArgs, out_dir: &Path) -> anyhow::Result<Status> {
    let method = resolve_method(a.method, a.window)?;
    if a.emit_records && !matches!(method, ReconMethod::Fsr | ReconMethod::Ssr) {
        return Err(usage(format!(
            "{method} has no segments; --emit-records needs fsr or ssr"
        )));
    }
    let (volume, fps) = load(&a.input)?;
    let out = a.out.clone().unwrap_or_else(|| out_dir.join(method.to_string()));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let format = ImageFormat::from(a.format);
    let start = Instant::now();

    let (kind, files, words) = if a.emit_records {
        let records = segment_records(&volume, method)?
            .iter()
            .map(|events| codec::encode_events(events))
            .collect::<Result<Vec<_>, _>>()?;
        let words: usize = records.iter().map(Vec::len).sum();
        let file = RecordFile {
            header: SpkHeader {
                width: volume.width() as u16,
                height: volume.height() as u16,
                fps,
                frame_count: volume.frames() as u32,
            },
            records,
        };
        io::write_spkr(&file, out.join("records.spkr"))?;
        ("records", vec!["records.spkr".to_string()], Some(words))
    } else {
        let video = reconstruct_volume(&volume, method)?;
        let mut files = Vec::with_capacity(video.frames());
        for n in 0..video.frames() {
            let name = io::frame_file_name(n, format);
            io::write_image(&video.frame(n), out.join(&name), format)?;
            files.push(name);
        }
        ("frames", files, None)
    };
    let seconds = start.elapsed().as_secs_f64();

    let manifest = json!({
        "input": a.input.input,
        "method": method.to_string(),
        "width": volume.width(),
        "height": volume.height(),
        "frames": volume.frames(),
        "fps": fps,
        "output": kind,
        "format": if a.emit_records { "spkr" } else { format.extension() },
        "files": files,
        "record_words": words,
    });
    let manifest_path = out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    eprintln!(
        "{method}: {}x{}x{} -> {} ({} {kind}) in {seconds:.2} s",
        volume.width(),
        volume.height(),
        volume.frames(),
        out.display(),
        files.len()
    );
    emit(&json!({
        "command": "reconstruct",
        "method": method.to_string(),
        "output": out,
        "kind": kind,
        "files": files.len(),
        "frames": volume.frames(),
        "record_words": words,
        "seconds": seconds,
    }))?;
    Ok(Status::Ok)
}

fn sweep(a: &VerifyArgs) -> anyhow::Result<Vec<f64>> {
    let qs = if !a.q.is_empty() {
        a.q.clone()
    } else {
        if a.count == 0 {
            return Err(usage("--count must be at least 1"));
        }
        if !(a.q_min > 0.0 && a.q_min <= 1.0) {
            return Err(usage("--q-min must be in (0, 1]"));
        }
        let span = (1.0 / a.q_min).ln();
        (0..a.count)
            .map(|i| {
                if a.count == 1 {
                    1.0
                } else {
                    (a.q_min * (span * i as f64 / (a.count - 1) as f64).exp()).min(1.0)
                }
            })
            .collect()
    };
    if let Some(q) = qs.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
        return Err(usage(format!("rate {q} is outside (0, 1]")));
    }
    Ok(qs)
}

/// Frame at which the violating interval of `v` closes.
fn violation_frame(stream: &SpikeLikeStream, v: &Violation) -> Option<usize> {
    // frames[i]: original frame where element i of the current stream ends
    let mut values: Vec<u32> = stream.values().to_vec();
    let mut frames: Vec<usize> = (0..values.len()).collect();
    let mut firing = stream.firing_value();
    for level in 0..v.depth {
        let positions: Vec<usize> = (0..values.len()).filter(|&i| values[i] == firing).collect();
        let next: Vec<u32> = positions.windows(2).map(|w| (w[1] - w[0]) as u32).collect();
        frames = positions[1..].iter().map(|&i| frames[i]).collect();
        values = next;
        if level + 1 < v.depth {
            let lo = *values.iter().min()?;
            let hi = *values.iter().max()?;
            firing = match v.path[level] {
                FiringChoice::Smaller => lo,
                FiringChoice::Larger => hi,
            };
        }
    }
    frames.get(v.index).copied()
}

pub fn verify_stability(a: VerifyArgs) -> anyhow::Result<Status> {
    if a.depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    if let Some(path) = &a.input {
        let input = InputArgs {
            input: path.clone(),
            raw: a.raw,
            width: a.width,
            height: a.height,
            msb_first: a.msb_first,
        };
        return verify_file(&input, a.depth);
    }
    let qs = sweep(&a)?;
    let mut failed = 0;
    eprintln!(
        "{:>12} {:>6} {:>8} {:>7} {:>7}",
        "q", "order", "absolute", "lemma1", "lemma2"
    );
    for &q in &qs {
        let s = simulate_constant(q, 1.0, a.length)?;
        let report = stability_order(&s, a.depth)?;
        let l1 = verify_lemma1(q, 1.0, a.length)?;
        let l2 = verify_lemma2(q, 1.0, a.length)?;
        let bounds = stability::lemma1_interval_bounds(q, 1.0)?;
        let pass = report.absolute && l1 && l2;
        failed += usize::from(!pass);
        eprintln!(
            "{q:>12.6} {:>6} {:>8} {:>7} {:>7}{}",
            report.verified_order,
            report.absolute,
            l1,
            l2,
            if pass { "" } else { "  FAIL" }
        );
        emit(&json!({
            "q": q,
            "length": a.length,
            "depth": a.depth,
            "verified_order": report.verified_order,
            "absolute": report.absolute,
            "exhausted": report.exhausted,
            "interval_bounds": [bounds.0, bounds.1],
            "lemma1": l1,
            "lemma2": l2,
            "pass": pass,
        }))?;
    }
    emit(&json!({"command": "verify-stability", "checked": qs.len(), "failed": failed, "pass": failed == 0}))?;
    eprintln!("{} of {} rates stable", qs.len() - failed, qs.len());
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

const MAX_REPORTED: usize = 100;

fn verify_file(input: &InputArgs, depth: usize) -> anyhow::Result<Status> {
    let (volume, _) = load(input)?;
    let mut failed = 0;
    for y in 0..volume.height() {
        for x in 0..volume.width() {
            let s = pixel_stream(&volume, x, y)?;
            let report = stability_order(&s, depth)?;
            let Some(v) = &report.first_violation else { continue };
            failed += 1;
            if failed <= MAX_REPORTED {
                let frame = violation_frame(&s, v);
                eprintln!(
                    "pixel ({x}, {y}): unstable at depth {} path '{}' index {} (frame {})",
                    v.depth,
                    v.path_string(),
                    v.index,
                    frame.map_or("?".to_string(), |f| f.to_string())
                );
                emit(&json!({
                    "x": x,
                    "y": y,
                    "verified_order": report.verified_order,
                    "violation_depth": v.depth,
                    "path": v.path_string(),
                    "index": v.index,
                    "breakpoint_frame": frame,
                }))?;
            }
        }
    }
    let pixels = volume.pixel_count();
    emit(&json!({
        "command": "verify-stability",
        "input": input.input,
        "depth": depth,
        "checked": pixels,
        "failed": failed,
        "pass": failed == 0,
    }))?;
    eprintln!("{} of {pixels} pixels stable to depth {depth}", pixels - failed);
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

fn synthetic_volume(a: &BenchArgs) -> anyhow::Result<SpikeVolume> {
    let scene = SceneSpec::new(
        a.width,
        a.height,
        SceneKind::RotatingWedge {
            background: 0.15,
            wedge: 0.7,
            half_angle: 0.4,
            radians_per_frame: 0.01,
        },
    )?;
    let config = SimConfig {
        initial_residual: InitialResidual::Uniform { seed: a.seed },
        noise: Some(NoiseSpec {
            flip_probability: 0.005,
            rate_jitter: 0.05,
            seed: a.seed,
        }),
        ..SimConfig::default()
    };
    Ok(simulate_scene(&scene, a.frames, &config)?)
}

pub fn bench(a: BenchArgs, workers: usize) -> anyhow::Result<Status> {
    if a.repeats < 3 {
        return Err(usage(format!("--repeats must be at least 3, got {}", a.repeats)));
    }
    let mut sweep = if a.sweep.is_empty() {
        vec![1, workers]
    } else {
        a.sweep.clone()
    };
    sweep.dedup();
    if sweep.contains(&0) {
        return Err(usage("worker counts must be at least 1"));
    }
    let volume = match &a.input {
        Some(path) => io::read_spk(path)?.0,
        None => synthetic_volume(&a)?,
    };
    let machine = json!({
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
        "available_parallelism": std::thread::available_parallelism().map_or(1, |n| n.get()),
        "parallel_feature": cfg!(feature = "parallel"),
    });
    eprintln!(
        "{}x{}x{} volume, median of {} runs",
        volume.width(),
        volume.height(),
        volume.frames(),
        a.repeats
    );
    eprintln!("{:>8} {:>8} {:>12} {:>10}", "method", "workers", "frames/s", "seconds");
    for &method in &a.methods {
        for &w in &sweep {
            let r = metrics::bench(&volume, method, a.repeats, w)?;
            eprintln!(
                "{:>8} {:>8} {:>12.1} {:>10.4}",
                r.method, r.workers, r.frames_per_second, r.median_seconds
            );
            emit(&json!({"command": "bench", "report": r, "machine": machine}))?;
        }
    }
    Ok(Status::Ok)
}

fn load_references(dir: &Path, frames: usize) -> anyhow::Result<Vec<IntensityImage>> {
    (0..frames)
        .map(|n| {
            let pgm = io::frame_path(dir, n, ImageFormat::Pgm);
            let path: PathBuf = if pgm.exists() {
                pgm
            } else {
                io::frame_path(dir, n, ImageFormat::Png)
            };
            io::read_image(&path).with_context(|| format!("reference frame {n}"))
        })
        .collect()
}

#[derive(Serialize)]
struct CompareRow {
    command: &'static str,
    method: String,
    #[serde(flatten)]
    metrics: MetricReport,
    /// Mean gray level over scored frames.
    mean: f64,
    /// PSNR of identical videos is infinite and serializes as null.
    identical: bool,
}

pub fn compare(a: CompareArgs) -> anyhow::Result<Status> {
    if a.psnr && a.reference.is_none() {
        return Err(usage("--psnr needs --reference <dir> with ground-truth frames"));
    }
    let (volume, _) = load(&a.input)?;
    if a.warmup >= volume.frames() {
        return Err(usage(format!(
            "--warmup {} leaves no frames of a {}-frame input",
            a.warmup,
            volume.frames()
        )));
    }
    let references = match &a.reference {
        Some(dir) => Some(load_references(dir, volume.frames())?),
        None => None,
    };
    eprintln!(
        "{:>8} {:>9} {:>9} {:>10} {:>12}",
        "method", "TE", "PSNR", "mean", "frames/s"
    );
    for &method in &a.methods {
        let start = Instant::now();
        let video = reconstruct_volume(&volume, method)?;
        let seconds = start.elapsed().as_secs_f64();
        let te = metrics::video_entropy(&video)?;
        let mse = match &references {
            Some(r) => Some(metrics::video_mse(&video, r, a.warmup)?),
            None => None,
        };
        let psnr = mse.map(metrics::psnr_from_mse);
        let scored = (video.frames() - a.warmup) * volume.pixel_count();
        let mean = (0..volume.height())
            .flat_map(|y| (0..volume.width()).map(move |x| (x, y)))
            .map(|(x, y)| video.pixel(x, y)[a.warmup..].iter().map(|&v| f64::from(v)).sum::<f64>())
            .sum::<f64>()
            / scored as f64;
        let row = CompareRow {
            command: "compare",
            method: method.to_string(),
            metrics: MetricReport {
                te,
                psnr,
                mse,
                throughput: Some(volume.frames() as f64 / seconds.max(f64::MIN_POSITIVE)),
            },
            mean,
            identical: psnr.is_some_and(f64::is_infinite),
        };
        eprintln!(
            "{:>8} {:>9.4} {:>9} {:>10.3} {:>12.1}",
            row.method,
            te,
            psnr.map_or("-".to_string(), |p| format!("{p:.2}")),
            mean,
            row.metrics.throughput.unwrap_or(0.0)
        );
        emit(&row)?;
    }
    Ok(Status::Ok)
}
